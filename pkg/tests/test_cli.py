import json
from pathlib import Path

import pytest

from heislab.cli import allowed_params, main
from heislab.errors import InputError
from heislab.plotting import gnuplot_script, read_table
from heislab.report import ExperimentConfig, load_manifest, manifest_query

HANKEL = ["hardy", "hankel", "--symbol", '{"kind": "lacunary", "beta": 0.5, "n_max": 7}',
          "--N", "150", "--k", "100", "--window", "8,40"]


def only_run(out: Path) -> Path:
    dirs = [d for d in out.iterdir() if d.is_dir()]
    assert len(dirs) == 1
    return dirs[0]


def test_hankel_run_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(HANKEL + ["--out", str(a)]) == 0
    assert main(HANKEL + ["--out", str(b)]) == 0
    ra, rb = only_run(a), only_run(b)
    assert ra.name == rb.name
    for name in ("spectrum.csv", "spectrum.svg", "fit.json", "config.json"):
        assert (ra / name).read_bytes() == (rb / name).read_bytes()
    m = load_manifest(ra)
    assert m.ok and m.command == "hardy hankel"
    assert {"spectrum.csv", "spectrum.svg", "fit.json"} <= set(m.artifacts)
    assert (ra / "spectrum.svg").read_text().lstrip().startswith("<?xml")
    fit = json.loads((ra / "fit.json").read_text())
    assert fit["fit"]["window"] == [8, 40]


def test_config_hash_ignores_jobs_and_cache():
    a = ExperimentConfig("hardy", "hankel", {"N": 4}, seed=1, jobs=1)
    b = ExperimentConfig("hardy", "hankel", {"N": 4}, seed=1, jobs=8, cache="/tmp/x")
    c = ExperimentConfig("hardy", "hankel", {"N": 4}, seed=2)
    assert a.hash() == b.hash() != c.hash()


def test_config_file_run(tmp_path):
    cfg = {"command": "dixmier", "subcommand": "bounds", "params": {"lmax": 8, "nmax": 12}, "seed": 0}
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "runs"
    assert main(["run", "--config", str(path), "--out", str(out)]) == 0
    run = only_run(out)
    rows = [json.loads(line) for line in (run / "bounds.jsonl").read_text().splitlines()]
    assert [r["l"] for r in rows] == list(range(1, 9))
    assert all(r["flags"]["lattice=oracle"] == "HOLDS" for r in rows)


def test_strict_config_rejections(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"command": "dixmier", "subcommand": "bounds", "params": {"bogus": 1}}))
    assert main(["run", "--config", str(bad), "--out", str(tmp_path)]) == 2
    bad.write_text(json.dumps({"command": "hardy", "subcommand": "hankel", "extra": 1}))
    assert main(["run", "--config", str(bad), "--out", str(tmp_path)]) == 2
    with pytest.raises(InputError):
        ExperimentConfig.from_json("[1, 2]")
    assert "lmax" in allowed_params()[("dixmier", "bounds")]


def test_exit_codes(tmp_path):
    out = ["--out", str(tmp_path)]
    assert main(["hardy", "hankel", "--unknown"] + out) == 2
    assert main(["hardy", "hankel", "--N", "-3"] + out) == 2
    assert main(["cc", "dist", "--y", "1,2"] + out) == 2
    assert main(["nope"]) == 2
    # refusing a too-small truncation is a numeric failure
    assert main(["dixmier", "bounds", "--lmax", "16", "--nmax", "10", "--strict"] + out) == 1


def test_numeric_failure_still_writes_manifest(tmp_path):
    assert main(["dixmier", "bounds", "--lmax", "16", "--nmax", "10", "--strict", "--out", str(tmp_path)]) == 1
    m = load_manifest(only_run(tmp_path))
    assert not m.ok
    assert any(t["status"] == "numeric_failure" for t in m.tasks)


def test_runs_listing_and_query(tmp_path, capsys):
    out = tmp_path / "r"
    assert main(["cc", "dist", "--x", "0,0,0", "--y", "0,0.6,0.8", "--out", str(out)]) == 0
    assert main(["dixmier", "bounds", "--lmax", "4", "--nmax", "10", "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["runs", "--out", str(out), "--filter-command", "cc"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 1 and json.loads(lines[0])["command"] == "cc dist"
    ms = manifest_query(out)
    assert len(ms) == 2
    h = ms[0].config_hash
    assert [m.config_hash for m in manifest_query(out, config_hash=h[:8])] == [h]
    assert manifest_query(tmp_path / "missing") == []
    rec = json.loads((Path(ms[0].directory) / "dist.jsonl").read_text())
    assert rec["value"] == pytest.approx(1.0, rel=1e-3)


def test_plot_command(tmp_path):
    assert main(["dixmier", "xi", "--lmax", "64", "--nmax", "12", "--out", str(tmp_path)]) == 0
    run = only_run(tmp_path)
    (run / "lambda.svg").unlink()
    assert main(["plot", "--run", str(run), "--what", "lambda", "--gnuplot"]) == 0
    assert (run / "lambda.svg").exists() and (run / "lambda.gp").exists()
    assert main(["plot", "--run", str(run), "--what", "spectrum"]) == 2


def test_plot_rejects_empty_table(tmp_path):
    p = tmp_path / "spectrum.csv"
    p.write_text("k,mu\n")
    with pytest.raises(InputError):
        read_table(p)
    with pytest.raises(InputError):
        gnuplot_script("other", "x.csv", "x.svg")
