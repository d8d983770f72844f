"""Carnot-Caratheodory distances on the model Heisenberg group.

Horizontal paths are discretised with piecewise-constant controls
``u^(i)`` (i = 0..m-1) on equal steps ``h = 1/m``.  Along a step the
horizontal coordinate moves linearly and the vertical coordinate picks up
``(h/2) z_i^T L u^(i)`` -- the left-invariant frame integrated in closed
form, since ``u^T L u = 0``.  The endpoint map is therefore exact and
quadratic in the controls.

``cc_distance`` minimises the path energy ``h * sum |u^(i)|^2`` subject to
the endpoint constraint.  The horizontal part of the constraint is linear
and eliminated by centring the free variables; the vertical part is handled
by an augmented Lagrangian with BFGS inner solves.  Every problem is first
left-translated to start at the identity and dilated to unit gauge, which
the left invariance of the frame and the homogeneity of the dilations make
exact.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import ConvergenceError, InputError
from .heis import (
    HeisConfig,
    HeisPoint,
    dilate,
    group_inv,
    group_mul,
    koranyi_gauge,
    sample_koranyi_ball,
)

__all__ = [
    "HorizontalPath",
    "SolverOptions",
    "CCDistanceResult",
    "endpoint_map",
    "path_energy",
    "cc_distance",
    "gauge_comparison_scan",
]


@dataclass(frozen=True)
class HorizontalPath:
    controls: np.ndarray
    start: HeisPoint

    def __post_init__(self):
        u = np.array(self.controls, dtype=float)
        if u.ndim != 2:
            raise InputError("controls must be an (m, d) array")
        if u.shape[1] != self.start.d:
            raise InputError("controls and start point disagree on d")
        if not np.all(np.isfinite(u)):
            raise InputError("controls must be finite")
        object.__setattr__(self, "controls", u)

    @property
    def m(self) -> int:
        return self.controls.shape[0]

    def reversed(self, cfg: HeisConfig) -> "HorizontalPath":
        """Time reversal: same trace run backwards from the old endpoint."""
        return HorizontalPath(-self.controls[::-1], endpoint_map(self, cfg))

    def vertices(self, cfg: HeisConfig) -> np.ndarray:
        """Rows ``(t, z_1..z_d)`` at the m+1 mesh nodes."""
        t, z = _trajectory(self.controls, self.start.t, self.start.z, cfg.L)
        return np.column_stack([t, z])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        d = self.controls.shape[1]
        w.writerow(["step"] + [f"u{j + 1}" for j in range(d)])
        for i, row in enumerate(self.controls):
            w.writerow([i] + [repr(float(x)) for x in row])
        return buf.getvalue()


def _trajectory(u, t0, z0, L):
    m = u.shape[0]
    h = 1.0 / m
    z = np.empty((m + 1, u.shape[1]))
    z[0] = z0
    np.cumsum(u * h, axis=0, out=z[1:])
    z[1:] += z0
    dt = 0.5 * h * np.einsum("ij,jk,ik->i", z[:-1], L, u)
    t = np.concatenate([[t0], t0 + np.cumsum(dt)])
    return t, z


def endpoint_map(path: HorizontalPath, cfg: HeisConfig) -> HeisPoint:
    if path.start.d != cfg.d:
        raise InputError("path dimension does not match config")
    if path.m == 0:
        return path.start
    t, z = _trajectory(path.controls, path.start.t, path.start.z, cfg.L)
    return HeisPoint(t[-1], z[-1])


def path_energy(path: HorizontalPath) -> float:
    if path.m == 0:
        return 0.0
    return float(np.sum(path.controls**2) / path.m)


@dataclass
class SolverOptions:
    m0: int = 16
    max_refinements: int = 5
    rel_tol: float = 1e-3
    constraint_tol: float = 1e-8
    n_starts: int = 8
    penalty0: float = 10.0
    penalty_growth: float = 10.0
    max_outer: int = 40
    inner_gtol: float = 1e-10
    seed: int = 0


@dataclass
class CCDistanceResult:
    x: HeisPoint
    y: HeisPoint
    value: float
    path: HorizontalPath
    energy: float
    constraint_residual: float
    m: int
    seed: int
    solver_trace: list = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "x": self.x.to_list(),
            "y": self.y.to_list(),
            "value": self.value,
            "energy": self.energy,
            "residual": self.constraint_residual,
            "m": self.m,
            "seed": self.seed,
        }


# -- normalised problem: start at e, unit-gauge target ------------------------

def _vertical(u, L):
    """Vertical endpoint from the identity and its gradient in ``u``."""
    m = u.shape[0]
    h = 1.0 / m
    csum = np.cumsum(u, axis=0)
    z = np.vstack([np.zeros((1, u.shape[1])), csum[:-1]]) * h
    Lu = u @ L.T
    c = 0.5 * h * np.sum(z * Lu)
    suffix = csum[-1] - csum  # sum_{i > k} u_i
    grad = 0.5 * h * (z @ L + h * suffix @ L.T)
    return c, grad


class _ALProblem:
    def __init__(self, dz, tau, L, m):
        self.dz = np.asarray(dz, dtype=float)
        self.tau = float(tau)
        self.L = L
        self.m = m

    def controls(self, v):
        v = v.reshape(self.m, -1)
        return self.dz + (v - v.mean(axis=0))

    def residual(self, v):
        c, _ = _vertical(self.controls(v), self.L)
        return c - self.tau

    def energy(self, v):
        u = self.controls(v)
        return float(np.sum(u * u) / self.m)

    def merit(self, v, lam, rho):
        u = self.controls(v)
        h = 1.0 / self.m
        c, gc = _vertical(u, self.L)
        c -= self.tau
        f = h * np.sum(u * u) + lam * c + 0.5 * rho * c * c
        gu = 2.0 * h * u + (lam + rho * c) * gc
        gv = gu - gu.mean(axis=0)
        return f, gv.ravel()

    def solve(self, v0, opts: SolverOptions):
        v = np.asarray(v0, dtype=float).ravel()
        lam, rho = 0.0, opts.penalty0
        prev = math.inf
        outer = 0
        for outer in range(1, opts.max_outer + 1):
            res = minimize(
                self.merit, v, args=(lam, rho), jac=True, method="BFGS",
                options={"gtol": opts.inner_gtol, "maxiter": 20 * v.size + 200},
            )
            v = res.x
            c = self.residual(v)
            if abs(c) <= opts.constraint_tol:
                break
            lam += rho * c
            if abs(c) > 0.25 * prev:
                rho *= opts.penalty_growth
            prev = abs(c)
        return v, abs(self.residual(v)), outer


def _solve_normalised(dz, tau, L, opts: SolverOptions, rng):
    d = len(dz)
    trace = []
    m = opts.m0
    prob = _ALProblem(dz, tau, L, m)
    best = None
    for s in range(max(1, opts.n_starts)):
        v0 = np.zeros((m, d)) if s == 0 else rng.normal(scale=rng.uniform(0.3, 3.0), size=(m, d))
        v, res, outer = prob.solve(v0, opts)
        e = prob.energy(v)
        if res <= opts.constraint_tol and (best is None or e < best[1]):
            best = (v, e, res)
        trace.append({"m": m, "start": s, "energy": e, "residual": res, "outer": outer})
    if best is None:
        raise ConvergenceError("no multi-start run reached the endpoint constraint", best=trace)

    v, e, res = best
    u = prob.controls(v)
    value = math.sqrt(e)
    for _ in range(opts.max_refinements):
        m *= 2
        prob = _ALProblem(dz, tau, L, m)
        v0 = np.repeat(u, 2, axis=0) - dz
        v, res, outer = prob.solve(v0, opts)
        e = prob.energy(v)
        new_value = math.sqrt(e)
        trace.append({"m": m, "start": "warm", "energy": e, "residual": res, "outer": outer})
        if res > opts.constraint_tol:
            raise ConvergenceError(f"constraint not met after refinement to m={m}", best=(u, value))
        converged = abs(new_value - value) < opts.rel_tol * new_value
        u, value = prob.controls(v), new_value
        if converged:
            return u, value, res, trace
    raise ConvergenceError(
        f"value still moving after {opts.max_refinements} refinements", best=(u, value)
    )


def cc_distance(x: HeisPoint, y: HeisPoint, cfg: HeisConfig, opts: SolverOptions | None = None,
                index: int = 0) -> CCDistanceResult:
    """Carnot-Caratheodory distance from ``x`` to ``y`` with certificate path.

    The multi-start generator is seeded from ``(opts.seed, index)``.
    Raises :class:`ConvergenceError` (carrying the best path found) when the
    mesh refinement does not settle.
    """
    opts = opts or SolverOptions()
    if x.d != cfg.d or y.d != cfg.d:
        raise InputError("point dimension does not match config")
    if x.allclose(y, rtol=0, atol=0):
        empty = HorizontalPath(np.zeros((0, cfg.d)), x)
        return CCDistanceResult(x, y, 0.0, empty, 0.0, 0.0, 0, opts.seed, [])

    g = group_mul(group_inv(x), y, cfg)
    scale = koranyi_gauge(g)
    gn = dilate(1.0 / scale, g)
    rng = np.random.default_rng([opts.seed, index])
    try:
        u, value, res, trace = _solve_normalised(gn.z, gn.t, cfg.L, opts, rng)
    except ConvergenceError as exc:
        best = exc.best
        if isinstance(best, tuple):
            u, value = best
            path = HorizontalPath(u * scale, x)
            exc.best = CCDistanceResult(x, y, value * scale, path, path_energy(path),
                                        math.nan, path.m, opts.seed, [])
        raise
    path = HorizontalPath(u * scale, x)
    energy = path_energy(path)
    return CCDistanceResult(
        x=x, y=y, value=math.sqrt(energy), path=path, energy=energy,
        constraint_residual=res, m=path.m, seed=opts.seed, solver_trace=trace,
    )


def _scan_one(args):
    cfg, t, z, opts, index = args
    y = HeisPoint(t, z)
    try:
        r = cc_distance(HeisPoint(0.0, np.zeros(cfg.d)), y, cfg, opts, index=index)
    except ConvergenceError:
        return index, None, koranyi_gauge(y)
    return index, r.value, koranyi_gauge(y)


def gauge_comparison_scan(cfg: HeisConfig, n_samples: int, radius: float = 1.0,
                          opts: SolverOptions | None = None, seed: int = 0, jobs: int = 1,
                          points=None) -> dict:
    """Ratios d_CC(e, y) / |y|_H for ``y`` sampled in the gauge ball.

    ``points`` may supply explicit ``(t, z)`` arrays instead of sampling.
    Samples whose solve fails are excluded from the extremes and counted.
    """
    if n_samples < 1:
        raise InputError("n_samples must be >= 1")
    opts = opts or SolverOptions(seed=seed)
    if points is None:
        t, z = sample_koranyi_ball(n_samples, cfg.d, radius, np.random.default_rng(seed))
    else:
        t, z = (np.asarray(a, dtype=float) for a in points)
        n_samples = len(t)
    tasks = [(cfg, float(t[i]), z[i], opts, i) for i in range(n_samples)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, os.cpu_count() or 1)) as pool:
            out = list(pool.map(_scan_one, tasks, chunksize=4))
    else:
        out = [_scan_one(a) for a in tasks]
    out.sort(key=lambda r: r[0])
    rows = []
    failures = 0
    for i, val, gauge in out:
        if val is None:
            failures += 1
            rows.append({"index": i, "t": float(t[i]), "z": z[i].tolist(), "cc": None,
                         "gauge": gauge, "ratio": None})
        else:
            rows.append({"index": i, "t": float(t[i]), "z": z[i].tolist(), "cc": val,
                         "gauge": gauge, "ratio": val / gauge})
    ratios = np.array([r["ratio"] for r in rows if r["ratio"] is not None])
    if ratios.size and not (np.all(np.isfinite(ratios)) and np.all(ratios > 0)):
        raise ConvergenceError("non-finite or non-positive ratio in scan", best=rows)
    return {
        "min": float(ratios.min()) if ratios.size else math.nan,
        "max": float(ratios.max()) if ratios.size else math.nan,
        "samples": int(ratios.size),
        "failures": failures,
        "rows": rows,
    }
