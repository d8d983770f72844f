"""Command-line front end.

    heislab heis check
    heislab cc dist --x 0,0,0 --y 0,1,0
    heislab cc scan --n 20
    heislab symbols holder|besov|kfun ...
    heislab hardy hankel|calderon|fit ...
    heislab dixmier xi|zeta|bounds ...
    heislab plot --run DIR --what spectrum
    heislab runs --out DIR [--filter-command hardy]
    heislab run --config experiment.json

Every experiment writes CSV/JSON(L)/SVG files into ``OUT/<command>_<hash>``
and finishes with ``manifest.json``.  Exit codes: 0 ok, 1 numeric failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import plotting
from .errors import HeislabError, InputError
from .report import ExperimentConfig, RunWriter, load_manifest, manifest_query

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2
GLOBAL_DESTS = {"seed", "out", "jobs", "cache", "config", "gnuplot", "command", "subcommand"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


# -- argument helpers -----------------------------------------------------------

def _floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    return [int(v) for v in _floats(text)]


def _symbol(spec):
    from .symbols import make_symbol
    if isinstance(spec, dict):
        return make_symbol(spec)
    text = str(spec).strip()
    if text.startswith("{"):
        try:
            return make_symbol(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputError(f"bad symbol JSON: {exc}") from exc
    return make_symbol(text)


def _symbol_list(spec):
    if isinstance(spec, list):
        return [_symbol(s) for s in spec]
    text = str(spec).strip()
    if text.startswith("["):
        try:
            return [_symbol(s) for s in json.loads(text)]
        except json.JSONDecodeError as exc:
            raise InputError(f"bad symbol list JSON: {exc}") from exc
    return [_symbol(s) for s in text.split(";") if s.strip()]


def _point(text, d):
    from .heis import HeisPoint
    vals = _floats(text)
    if len(vals) != d + 1:
        raise InputError(f"a point needs {d + 1} numbers t,z1..z{d}; got {text!r}")
    return HeisPoint(vals[0], vals[1:])


def _cfg(d):
    from .heis import standard_config
    return standard_config(int(d))


# -- handlers --------------------------------------------------------------------

def run_heis_check(p, cfg, w):
    from .heis import (check_frame_commutators, dilate, group_inv, group_mul, identity,
                       koranyi_gauge, HeisPoint, quasi_metric_equivalence_scan,
                       quasi_triangle_constant)
    hc = _cfg(p["d"])
    rng = np.random.default_rng(cfg.seed)
    worst = {"associativity": 0.0, "inverse": 0.0, "homogeneity": 0.0}
    for _ in range(200):
        x, y, z = (HeisPoint(rng.normal(), rng.normal(size=hc.d)) for _ in range(3))
        a = group_mul(group_mul(x, y, hc), z, hc).as_array()
        b = group_mul(x, group_mul(y, z, hc), hc).as_array()
        worst["associativity"] = max(worst["associativity"], float(np.max(np.abs(a - b))))
        e = group_mul(x, group_inv(x), hc).as_array() - identity(hc.d).as_array()
        worst["inverse"] = max(worst["inverse"], float(np.max(np.abs(e))))
        lam = float(rng.uniform(0.1, 10))
        r = abs(koranyi_gauge(dilate(lam, x)) - lam * koranyi_gauge(x)) / (lam * koranyi_gauge(x))
        worst["homogeneity"] = max(worst["homogeneity"], r)
    with w.task("equivalence"):
        eq = quasi_metric_equivalence_scan(hc, p["pairs"], p["radius"], cfg.seed)
        tri = quasi_triangle_constant(hc, p["pairs"], p["radius"], cfg.seed)
    rec = {"d": hc.d, "axioms_max_error": worst, "frame_left": check_frame_commutators(hc, "left"),
           "frame_right": check_frame_commutators(hc, "right"), "equivalence": eq,
           "quasi_triangle_constant": tri}
    w.write_json("check.json", rec)


def _solver_opts(p, cfg):
    from .geodesic import SolverOptions
    return SolverOptions(m0=p["m0"], n_starts=p["n_starts"], seed=cfg.seed)


def run_cc_dist(p, cfg, w):
    from .geodesic import cc_distance
    hc = _cfg(p["d"])
    x, y = _point(p["x"], hc.d), _point(p["y"], hc.d)
    with w.task("cc_distance"):
        r = cc_distance(x, y, hc, _solver_opts(p, cfg))
    w.write_jsonl("dist.jsonl", [r.to_record()])
    w.write_text("path.csv", r.path.to_csv())


def run_cc_scan(p, cfg, w):
    from .geodesic import gauge_comparison_scan
    hc = _cfg(p["d"])
    with w.task("scan"):
        r = gauge_comparison_scan(hc, p["n"], p["radius"], _solver_opts(p, cfg), cfg.seed, cfg.jobs)
    zcols = [f"z{i + 1}" for i in range(hc.d)]
    w.write_csv("scan.csv", ["index", "t", *zcols, "cc", "gauge", "ratio"],
                [[row["index"], row["t"], *row["z"], row["cc"], row["gauge"], row["ratio"]]
                 for row in r["rows"]])
    w.write_json("summary.json", {k: v for k, v in r.items() if k != "rows"})
    _emit_plot(w, "scan", cfg)


def run_symbols_holder(p, cfg, w):
    from .symbols import holder_seminorm
    f = _symbol(p["symbol"])
    r = holder_seminorm(f, p["alpha"], p["grid"])
    w.write_json("holder.json", {"symbol": f.meta, **r.__dict__})


def run_symbols_besov(p, cfg, w):
    from .symbols import besov_holder_equiv_check, default_corpus
    corpus = default_corpus() if p["corpus"] == "default" else _symbol_list(p["corpus"])
    r = besov_holder_equiv_check(corpus, p["s"])
    w.write_csv("besov.csv", ["index", "kind", "besov", "holder", "ratio"],
                [[row["index"], row["meta"].get("kind", ""), row.get("besov"), row.get("holder"),
                  row["ratio"]] for row in r["rows"]])
    w.write_json("summary.json", {k: v for k, v in r.items() if k != "rows"})


def run_symbols_kfun(p, cfg, w):
    from .symbols import k_functional_probe
    f = _symbol(p["symbol"])
    r = k_functional_probe(f, p["theta"], _floats(p["t_grid"]))
    w.write_csv("kfun.csv", ["t", "khat", "khat_blocks", "J"],
                list(zip(r["t"], r["khat"], r["khat_blocks"], r["J"])))
    w.write_json("summary.json", {k: v for k, v in r.items() if k not in ("t", "khat", "khat_blocks", "J")})


def run_hardy_hankel(p, cfg, w):
    from .hardy import hankel_op
    from .spectra import decay_fit, singular_values, weak_schatten_quasinorm
    f = _symbol(p["symbol"])
    op = hankel_op(f, p["N"])
    with w.task("singular_values"):
        s = singular_values(op, min(p["k"], 2 * p["N"] + 1), seed=cfg.seed, cache_dir=cfg.cache)
    w.write_text("spectrum.csv", s.to_csv())
    rec = {"N": p["N"], "method": s.method, "count": s.count}
    win = _ints(p["window"]) if p["window"] else None
    if win:
        with w.task("decay_fit"):
            rec["fit"] = decay_fit(s, tuple(win)).to_record()
    if p["p"]:
        rec["weak_schatten"] = {"p": p["p"], "value": weak_schatten_quasinorm(s, p["p"])}
    w.write_json("fit.json", rec)
    _emit_plot(w, "spectrum", cfg, window=win)


def run_hardy_calderon(p, cfg, w):
    from .hardy import calderon_norm_probe
    f = _symbol(p["symbol"])
    with w.task("calderon"):
        r = calderon_norm_probe(f, _ints(p["N_list"]), seed=cfg.seed)
    w.write_csv("calderon.csv", ["N", "norm", "norm_adjoint", "iterations", "seed"],
                [[row[k] for k in ("N", "norm", "norm_adjoint", "iterations", "seed")] for row in r["rows"]])
    w.write_json("summary.json", {k: v for k, v in r.items() if k != "rows"})


def run_hardy_fit(p, cfg, w):
    from .spectra import decay_fit
    table = plotting.read_table(p["spectrum"])
    mu = np.asarray(table["mu"], dtype=float)
    r = decay_fit(mu, tuple(_ints(p["window"])))
    w.write_json("fit.json", r.to_record())


def run_dixmier_xi(p, cfg, w):
    from .dixmier import lacunary_xi_estimate, xi_diagonal_estimate
    if p["symbols"]:
        est = xi_diagonal_estimate(_symbol_list(p["symbols"]), p["lmax"], p["k"])
    else:
        est = lacunary_xi_estimate(p["beta"], p["lmax"], n_max=p["nmax"])
    w.write_csv("diagonal.csv", ["l", "d"], [[i, float(np.real(v))] for i, v in enumerate(est.diagonal)])
    rec = est.to_record()
    w.write_csv("lambda.csv", ["N", "Lambda"], list(zip(rec["N"], rec.get("Lambda", rec.get("Lambda_re")))))
    w.write_json("summary.json", {k: v for k, v in rec.items() if k not in ("N", "Lambda", "Lambda_re", "Lambda_im")})
    _emit_plot(w, "lambda", cfg)


def run_dixmier_zeta(p, cfg, w):
    from .dixmier import zeta_estimate
    est = zeta_estimate(_symbol_list(p["symbols"]), p["N"], p["k"])
    rec = est.to_record()
    w.write_csv("diagonal.csv", ["l", "re", "im"],
                [[i, float(np.real(v)), float(np.imag(v))] for i, v in enumerate(est.diagonal)])
    lam = rec.get("Lambda", rec.get("Lambda_re"))
    w.write_csv("lambda.csv", ["N", "Lambda"], list(zip(rec["N"], lam)))
    w.write_json("summary.json", {k: v for k, v in rec.items() if k not in ("N", "Lambda", "Lambda_re", "Lambda_im")})
    if cfg.params.get("check", True) and rec["checks"].get("alternating_sum_residual", 0) > 1e-8:
        raise HeislabError("zeta/xi alternating-sum residual above 1e-8")


def run_dixmier_bounds(p, cfg, w):
    from .dixmier import bound_report
    with w.task("bound_report"):
        r = bound_report(p["lmax"], p["nmax"], strict=p["strict"])
    w.write_jsonl("bounds.jsonl", r["rows"])
    w.write_json("summary.json", {k: v for k, v in r.items() if k != "rows"})


def _emit_plot(w, kind, cfg, **kw):
    data_name, fn = plotting.PLOT_KINDS[kind]
    table = plotting.read_table(w.path(data_name))
    fn(table, w.path(f"{kind}.svg"), **kw)
    w.adopt(f"{kind}.svg")
    if cfg.params.get("gnuplot"):
        w.write_text(f"{kind}.gp", plotting.gnuplot_script(kind, data_name, f"{kind}.svg"))


# -- parser ------------------------------------------------------------------------

HANDLERS = {
    ("heis", "check"): run_heis_check,
    ("cc", "dist"): run_cc_dist,
    ("cc", "scan"): run_cc_scan,
    ("symbols", "holder"): run_symbols_holder,
    ("symbols", "besov"): run_symbols_besov,
    ("symbols", "kfun"): run_symbols_kfun,
    ("hardy", "hankel"): run_hardy_hankel,
    ("hardy", "calderon"): run_hardy_calderon,
    ("hardy", "fit"): run_hardy_fit,
    ("dixmier", "xi"): run_dixmier_xi,
    ("dixmier", "zeta"): run_dixmier_zeta,
    ("dixmier", "bounds"): run_dixmier_bounds,
}


def _common():
    c = _Parser(add_help=False)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", default="runs", help="output root directory")
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--cache", default=None, help="directory for cached spectra")
    c.add_argument("--config", default=None, help="JSON experiment config (strict keys)")
    c.add_argument("--gnuplot", action="store_true", help="also write gnuplot scripts for plots")
    return c


def build_parser():
    common = _common()
    ap = _Parser(prog="heislab", description="Heisenberg-group and Hardy-space numerics.")
    cmd = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def leaf(group, name, **kw):
        return group.add_parser(name, parents=[common], **kw)

    g = cmd.add_parser("heis").add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    s = leaf(g, "check")
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--pairs", type=int, default=10_000)
    s.add_argument("--radius", type=float, default=1.0)

    g = cmd.add_parser("cc").add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name in ("dist", "scan"):
        s = leaf(g, name)
        s.add_argument("--d", type=int, default=2)
        s.add_argument("--m0", type=int, default=16)
        s.add_argument("--n-starts", dest="n_starts", type=int, default=8)
        if name == "dist":
            s.add_argument("--x", default="0,0,0")
            s.add_argument("--y", required=False, default="0,1,0")
        else:
            s.add_argument("--n", type=int, default=20)
            s.add_argument("--radius", type=float, default=1.0)

    g = cmd.add_parser("symbols").add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    s = leaf(g, "holder")
    s.add_argument("--symbol", default='{"kind": "lacunary", "beta": 0.5, "n_max": 10}')
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--grid", type=int, default=1 << 14)
    s = leaf(g, "besov")
    s.add_argument("--s", type=float, default=0.5)
    s.add_argument("--corpus", default="default")
    s = leaf(g, "kfun")
    s.add_argument("--symbol", default='{"kind": "lacunary", "beta": 0.5, "n_max": 12}')
    s.add_argument("--theta", type=float, default=0.5)
    s.add_argument("--t-grid", dest="t_grid", default="1e-4,1e-3,1e-2,1e-1,1")

    g = cmd.add_parser("hardy").add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    s = leaf(g, "hankel")
    s.add_argument("--symbol", default='{"kind": "lacunary", "beta": 0.25, "n_max": 9}')
    s.add_argument("--N", type=int, default=512)
    s.add_argument("--k", type=int, default=256)
    s.add_argument("--window", default="16,128")
    s.add_argument("--p", type=float, default=None, help="also report the weak-Schatten quasinorm")
    s = leaf(g, "calderon")
    s.add_argument("--symbol", default='{"kind": "triangle", "N": 1024}')
    s.add_argument("--N-list", dest="N_list", default="256,512,1024")
    s = leaf(g, "fit")
    s.add_argument("--spectrum", required=True, help="CSV with columns k,mu")
    s.add_argument("--window", default="16,128")

    g = cmd.add_parser("dixmier").add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    s = leaf(g, "xi")
    s.add_argument("--beta", type=float, default=0.25)
    s.add_argument("--lmax", type=int, default=4096)
    s.add_argument("--nmax", type=int, default=18)
    s.add_argument("--symbols", default=None, help="2k symbols instead of the lacunary W")
    s.add_argument("--k", type=int, default=2)
    s = leaf(g, "zeta")
    s.add_argument("--symbols", default='["cos", "sin", "cos", "sin"]')
    s.add_argument("--N", type=int, default=256)
    s.add_argument("--k", type=int, default=2)
    s = leaf(g, "bounds")
    s.add_argument("--lmax", type=int, default=64)
    s.add_argument("--nmax", type=int, default=14)
    s.add_argument("--strict", action="store_true", help="refuse when the tail bound is not met")

    cmd.add_parser("run", parents=[common], help="run the experiment described by --config")

    s = cmd.add_parser("plot", parents=[common])
    s.add_argument("--run", required=True, help="run directory holding a manifest")
    s.add_argument("--what", choices=sorted(plotting.PLOT_KINDS), required=True)

    s = cmd.add_parser("runs", parents=[common])
    s.add_argument("--filter-command", dest="filter_command", default=None)
    s.add_argument("--hash", default=None)
    return ap


def allowed_params(parser=None) -> dict:
    """``{(command, subcommand): set of parameter names}`` from the parser."""
    parser = parser or build_parser()
    out = {}
    top = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for cname, cparser in top.choices.items():
        subs = [a for a in cparser._actions if isinstance(a, argparse._SubParsersAction)]
        if not subs:
            continue
        for sname, sparser in subs[0].choices.items():
            out[(cname, sname)] = {a.dest for a in sparser._actions
                                   if a.dest not in GLOBAL_DESTS and a.dest != "help"}
    return out


def _defaults(parser, command, subcommand) -> dict:
    ns = parser.parse_args([command, subcommand, *_required_stub(command, subcommand)])
    return {k: v for k, v in vars(ns).items() if k not in GLOBAL_DESTS}


def _required_stub(command, subcommand):
    return ["--spectrum", ""] if (command, subcommand) == ("hardy", "fit") else []


def _config_from_args(parser, ns) -> ExperimentConfig:
    if ns.config:
        try:
            text = Path(ns.config).read_text()
        except OSError as exc:
            raise InputError(f"cannot read config: {exc}") from exc
        cfg = ExperimentConfig.from_json(text, allowed_params(parser))
        params = _defaults(parser, cfg.command, cfg.subcommand)
        params.update(cfg.params)
        cfg.params = params
        return cfg
    params = {k: v for k, v in vars(ns).items() if k not in GLOBAL_DESTS}
    return ExperimentConfig(ns.command, ns.subcommand, params, ns.seed, ns.jobs, ns.cache)


def run(cfg: ExperimentConfig, out: str, gnuplot: bool = False):
    """Execute one experiment; returns the manifest (written last)."""
    key = (cfg.command, cfg.subcommand)
    if key not in HANDLERS:
        raise InputError(f"unknown experiment {key}")
    if gnuplot:
        cfg.params["gnuplot"] = True
    w = RunWriter(out, cfg)
    w.write_json("config.json", cfg.to_dict())
    error = None
    try:
        with w.task("run"):
            HANDLERS[key](cfg.params, cfg, w)
    except HeislabError as exc:
        error = exc
    manifest = w.finish()
    if error is not None:
        raise error
    return manifest


def _cmd_plot(ns):
    m = load_manifest(ns.run)
    data_name, fn = plotting.PLOT_KINDS[ns.what]
    run_dir = Path(m.directory)
    if data_name not in m.artifacts:
        raise InputError(f"run {ns.run} has no {data_name}")
    table = plotting.read_table(run_dir / data_name)
    fn(table, run_dir / f"{ns.what}.svg")
    if f"{ns.what}.svg" not in m.artifacts:
        m.artifacts.append(f"{ns.what}.svg")
    if ns.gnuplot:
        (run_dir / f"{ns.what}.gp").write_text(plotting.gnuplot_script(ns.what, data_name, f"{ns.what}.svg"))
        if f"{ns.what}.gp" not in m.artifacts:
            m.artifacts.append(f"{ns.what}.gp")
    (run_dir / "manifest.json").write_text(m.to_json())
    print(run_dir / f"{ns.what}.svg")


def _cmd_runs(ns):
    for m in manifest_query(ns.out, ns.filter_command, ns.hash):
        print(json.dumps({"dir": m.directory, "command": m.command, "config_hash": m.config_hash,
                          "ok": m.ok, "artifacts": m.artifacts}, sort_keys=True))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command == "plot":
            _cmd_plot(ns)
            return EXIT_OK
        if ns.command == "runs":
            _cmd_runs(ns)
            return EXIT_OK
        if ns.command == "run" and not ns.config:
            raise _UsageError("heislab run: --config is required")
        cfg = _config_from_args(parser, ns)
        manifest = run(cfg, ns.out, ns.gnuplot)
        print(manifest.directory)
        return EXIT_OK
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"heislab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HeislabError as exc:
        print(f"heislab: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
