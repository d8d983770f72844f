"""Algebra of the model Heisenberg group R x R^d.

A group is fixed by an antisymmetric form ``L`` on R^d; points are pairs
``(t, z)`` with product

    (t, z) . (t', z') = (t + t' + L(z, z') / 2, z + z'),   L(z, z') = z^T L z'.

The grading is hard-wired: weight 2 on ``t`` and weight 1 on ``z``.  All
functions operate on single :class:`HeisPoint` values; the ``*_arrays``
variants take stacked coordinates ``t`` of shape ``(n,)`` and ``z`` of shape
``(n, d)`` for sampling work.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

__all__ = [
    "HeisConfig",
    "HeisPoint",
    "FrameCoefficients",
    "standard_config",
    "identity",
    "group_mul",
    "group_inv",
    "dilate",
    "koranyi_gauge",
    "quasi_metric",
    "frame_coefficients",
    "check_frame_commutators",
    "mul_arrays",
    "gauge_arrays",
    "quasi_metric_arrays",
    "sample_koranyi_ball",
    "quasi_metric_equivalence_scan",
    "quasi_triangle_constant",
]


@dataclass(frozen=True)
class HeisConfig:
    """Horizontal dimension ``d`` and antisymmetric form ``L`` (d x d)."""

    d: int
    L: np.ndarray = field(repr=False)

    def __post_init__(self):
        L = np.array(self.L, dtype=float)
        if int(self.d) != self.d or self.d < 2:
            raise InputError(f"d must be an integer >= 2, got {self.d!r}")
        if L.shape != (self.d, self.d):
            raise InputError(f"L must have shape ({self.d}, {self.d}), got {L.shape}")
        if not np.all(np.isfinite(L)):
            raise InputError("L has non-finite entries")
        if not np.array_equal(L, -L.T):
            raise InputError("L must be antisymmetric (L + L^T = 0 entrywise)")
        if not np.any(L):
            raise InputError("L = 0 is not bracket generating")
        L.setflags(write=False)
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "L", L)

    def to_json(self) -> str:
        return json.dumps({"d": self.d, "L": self.L.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "HeisConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed HeisConfig JSON: {exc}") from exc
        if not isinstance(obj, dict) or set(obj) != {"d", "L"}:
            raise InputError('HeisConfig JSON must have exactly the keys "d" and "L"')
        return cls(obj["d"], obj["L"])

    def __eq__(self, other):
        return (
            isinstance(other, HeisConfig)
            and self.d == other.d
            and np.array_equal(self.L, other.L)
        )

    def __hash__(self):
        return hash((self.d, self.L.tobytes()))


def standard_config(d: int = 2) -> HeisConfig:
    """Block-diagonal symplectic form; ``d = 2`` is the first Heisenberg group."""
    if d % 2:
        raise InputError("the standard form needs an even d")
    L = np.zeros((d, d))
    for i in range(0, d, 2):
        L[i, i + 1] = 1.0
        L[i + 1, i] = -1.0
    return HeisConfig(d, L)


@dataclass(frozen=True)
class HeisPoint:
    t: float
    z: np.ndarray

    def __post_init__(self):
        z = np.array(self.z, dtype=float).reshape(-1)
        t = float(self.t)
        if not (np.isfinite(t) and np.all(np.isfinite(z))):
            raise InputError("HeisPoint entries must be finite")
        z.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "z", z)

    @property
    def d(self) -> int:
        return self.z.shape[0]

    def as_array(self) -> np.ndarray:
        return np.concatenate([[self.t], self.z])

    def allclose(self, other: "HeisPoint", rtol=1e-12, atol=1e-12) -> bool:
        return np.allclose(self.as_array(), other.as_array(), rtol=rtol, atol=atol)

    def to_list(self) -> list:
        return [self.t, self.z.tolist()]


def identity(d: int) -> HeisPoint:
    return HeisPoint(0.0, np.zeros(d))


def _check_dim(cfg: HeisConfig, *points: HeisPoint):
    for p in points:
        if p.d != cfg.d:
            raise InputError(f"point has d={p.d}, config has d={cfg.d}")


def group_mul(x: HeisPoint, y: HeisPoint, cfg: HeisConfig) -> HeisPoint:
    _check_dim(cfg, x, y)
    return HeisPoint(x.t + y.t + 0.5 * (x.z @ cfg.L @ y.z), x.z + y.z)


def group_inv(x: HeisPoint) -> HeisPoint:
    return HeisPoint(-x.t, -x.z)


def dilate(lam: float, x: HeisPoint) -> HeisPoint:
    if not lam > 0:
        raise InputError(f"dilation factor must be positive, got {lam!r}")
    return HeisPoint(lam * lam * x.t, lam * x.z)


def koranyi_gauge(x: HeisPoint) -> float:
    r2 = float(x.z @ x.z)
    return (x.t * x.t + r2 * r2) ** 0.25


def quasi_metric(kind: str, x: HeisPoint, y: HeisPoint, cfg: HeisConfig | None = None) -> float:
    """``kind='K'``: gauge of ``x^-1 . y``; ``kind='an'``: gauge of ``y - x``."""
    if kind in ("K", "koranyi"):
        if cfg is None:
            raise InputError("the Koranyi quasi-metric needs the group config")
        return koranyi_gauge(group_mul(group_inv(x), y, cfg))
    if kind in ("an", "anisotropic"):
        return koranyi_gauge(HeisPoint(y.t - x.t, y.z - x.z))
    raise InputError(f"unknown quasi-metric kind {kind!r}")


# -- stacked versions --------------------------------------------------------

def mul_arrays(t1, z1, t2, z2, L):
    cross = np.einsum("...i,ij,...j->...", z1, L, z2)
    return t1 + t2 + 0.5 * cross, z1 + z2


def gauge_arrays(t, z):
    r2 = np.sum(np.asarray(z) ** 2, axis=-1)
    return (np.asarray(t) ** 2 + r2 * r2) ** 0.25


def quasi_metric_arrays(kind, t1, z1, t2, z2, L=None):
    if kind in ("K", "koranyi"):
        t, z = mul_arrays(-t1, -z1, t2, z2, L)
        return gauge_arrays(t, z)
    if kind in ("an", "anisotropic"):
        return gauge_arrays(t2 - t1, z2 - z1)
    raise InputError(f"unknown quasi-metric kind {kind!r}")


def sample_koranyi_ball(n, d, radius=1.0, rng=None):
    """Rejection-sample ``n`` points uniformly (Lebesgue) in the gauge ball."""
    rng = np.random.default_rng(rng)
    ts, zs = [], []
    need = n
    while need > 0:
        t = rng.uniform(-radius**2, radius**2, size=2 * need + 8)
        z = rng.uniform(-radius, radius, size=(2 * need + 8, d))
        keep = gauge_arrays(t, z) < radius
        ts.append(t[keep])
        zs.append(z[keep])
        need -= int(keep.sum())
    return np.concatenate(ts)[:n], np.concatenate(zs)[:n]


def quasi_metric_equivalence_scan(cfg: HeisConfig, n_pairs=10_000, radius=1.0, seed=0):
    """Ratio d_K / d_an over random pairs in the gauge ball.

    Returns ``{"min", "max", "C", "samples"}`` with ``C = max(max, 1/min)``.
    """
    rng = np.random.default_rng(seed)
    t1, z1 = sample_koranyi_ball(n_pairs, cfg.d, radius, rng)
    t2, z2 = sample_koranyi_ball(n_pairs, cfg.d, radius, rng)
    dk = quasi_metric_arrays("K", t1, z1, t2, z2, cfg.L)
    da = quasi_metric_arrays("an", t1, z1, t2, z2)
    ok = da > 0
    r = dk[ok] / da[ok]
    lo, hi = float(r.min()), float(r.max())
    return {"min": lo, "max": hi, "C": max(hi, 1.0 / lo), "samples": int(ok.sum())}


def quasi_triangle_constant(cfg: HeisConfig, n_triples=10_000, radius=1.0, seed=0):
    """Largest observed ``d_K(x, z) / (d_K(x, y) + d_K(y, z))``."""
    rng = np.random.default_rng(seed)
    pts = [sample_koranyi_ball(n_triples, cfg.d, radius, rng) for _ in range(3)]
    (tx, zx), (ty, zy), (tz, zz) = pts
    dxz = quasi_metric_arrays("K", tx, zx, tz, zz, cfg.L)
    dxy = quasi_metric_arrays("K", tx, zx, ty, zy, cfg.L)
    dyz = quasi_metric_arrays("K", ty, zy, tz, zz, cfg.L)
    denom = dxy + dyz
    ok = denom > 0
    return float(np.max(dxz[ok] / denom[ok]))


# -- horizontal frame --------------------------------------------------------

@dataclass(frozen=True)
class FrameCoefficients:
    """Coefficients of X_1..X_d at a point, plus the vertical field X_0.

    Row ``j`` of ``dz`` holds the d/dz coefficients of X_{j+1} (the identity
    matrix); ``dt[j]`` is its d/dt coefficient.  ``x0`` is X_0 = d/dt written
    as ``(dt, dz)``.
    """

    dz: np.ndarray
    dt: np.ndarray
    x0: tuple
    invariance: str


def _frame_slope(cfg: HeisConfig, invariance: str) -> np.ndarray:
    # d/dt coefficient of X_j is sum_k A[j, k] z_k
    if invariance == "left":
        return -0.5 * cfg.L
    if invariance == "right":
        return 0.5 * cfg.L
    raise InputError(f"invariance must be 'left' or 'right', got {invariance!r}")


def frame_coefficients(cfg: HeisConfig, x: HeisPoint, invariance: str = "left") -> FrameCoefficients:
    """Horizontal frame at ``x``.

    ``invariance='left'`` gives the fields generated by right translation
    ``x . (0, s e_j)``: X_j = d/dz_j - (1/2) sum_k L_jk z_k d/dt.  These are
    left invariant, satisfy [X_j, X_k] = L_jk X_0, and drive the geodesic
    solver.  ``invariance='right'`` gives X_j = d/dz_j + (1/2) sum_k L_jk z_k
    d/dt, whose brackets carry the opposite sign.
    """
    _check_dim(cfg, x)
    A = _frame_slope(cfg, invariance)
    return FrameCoefficients(
        dz=np.eye(cfg.d),
        dt=A @ x.z,
        x0=(1.0, np.zeros(cfg.d)),
        invariance=invariance,
    )


def check_frame_commutators(cfg: HeisConfig, invariance: str = "left") -> dict:
    """Bracket table of the frame, computed from the affine coefficients.

    With X_j = d/dz_j + (A z)_j d/dt the bracket is
    [X_j, X_k] = (A[k, j] - A[j, k]) X_0, exact since A is constant.
    Reports the table, the expected ``L`` and whether they agree.
    """
    A = _frame_slope(cfg, invariance)
    brackets = A.T - A
    return {
        "invariance": invariance,
        "brackets": brackets.tolist(),
        "expected": cfg.L.tolist(),
        "holds": bool(np.array_equal(brackets, cfg.L)),
        "sign": 1 if np.array_equal(brackets, cfg.L) else (-1 if np.array_equal(brackets, -cfg.L) else 0),
    }
