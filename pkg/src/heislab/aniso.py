"""Anisotropic Littlewood-Paley blocks on a periodic box for d = 2.

Axes are ``(t, z1, z2)`` on ``[0, 2 pi)^3``.  Dual frequencies ``(tau, xi)``
are integers and the windows are functions of the homogeneous radius
``rho = (tau^2 + |xi|^4)^(1/4)``, so ``phi_j(rho) = phi(2^-j . xi)`` with
weight 2 on the vertical dual axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .heis import HeisConfig, gauge_arrays
from .symbols import bump, lp_window

__all__ = [
    "AnisoReport",
    "box_frequencies",
    "aniso_radius",
    "aniso_blocks",
    "aniso_holder_seminorm",
    "aniso_blocks_check",
    "gauge_profile",
    "random_bandlimited",
]


def _check_n(n):
    if int(n) != n or n < 4 or (int(n) & (int(n) - 1)):
        raise InputError(f"grid resolution must be a power of two >= 4, got {n!r}")
    return int(n)


def box_frequencies(n: int):
    k = np.fft.fftfreq(n, 1.0 / n)
    return np.meshgrid(k, k, k, indexing="ij")


def aniso_radius(n: int) -> np.ndarray:
    tau, x1, x2 = box_frequencies(n)
    r2 = x1 * x1 + x2 * x2
    return (tau * tau + r2 * r2) ** 0.25


def _n_blocks(rho_max):
    J = 0
    while 2.0**J <= rho_max:
        J += 1
    return J + 1


def aniso_blocks(f: np.ndarray):
    """Windows and blocks ``Phi_j f`` (real arrays) of a periodic grid function."""
    n = _check_n(f.shape[0])
    if f.shape != (n, n, n):
        raise InputError(f"expected a cubic grid, got shape {f.shape}")
    rho = aniso_radius(n)
    fh = np.fft.fftn(f)
    J = _n_blocks(rho.max())
    windows = np.array([lp_window(j, rho) for j in range(J)])
    blocks = [np.real(np.fft.ifftn(w * fh)) for w in windows]
    return windows, blocks, fh


def _periodic_disp(k, n):
    # minimal periodic displacement of k grid steps, in box units
    k = ((k + n // 2) % n) - n // 2
    return k * (2 * np.pi / n)


def aniso_holder_seminorm(f: np.ndarray, s: float) -> dict:
    """``max |f(x + h) - f(x)| / |h|_an^s`` over dyadic grid shifts ``h``.

    Each component of ``h`` (in grid steps) is ``0`` or ``+-2^p``; the
    displacement is the minimal periodic one and ``|h|_an`` is the Koranyi
    gauge of the componentwise difference.  A sampled lower bound.
    """
    n = _check_n(f.shape[0])
    steps = [0] + [sgn * 2**p for p in range(int(np.log2(n))) for sgn in (1, -1)]
    best, witness = 0.0, None
    for a in steps:
        fa = np.roll(f, -a, axis=0) if a else f
        for b in steps:
            fab = np.roll(fa, -b, axis=1) if b else fa
            for c in steps:
                if a == 0 and b == 0 and c == 0:
                    continue
                g = np.roll(fab, -c, axis=2) if c else fab
                h = gauge_arrays(_periodic_disp(a, n), np.array([_periodic_disp(b, n), _periodic_disp(c, n)]))
                if h == 0:
                    continue
                q = float(np.max(np.abs(g - f))) / float(h) ** s
                if q > best:
                    best, witness = q, (a, b, c)
    return {"estimate": best, "witness": witness}


@dataclass
class AnisoReport:
    n: int
    s: float
    three_term_residual: float
    partition_residual: float
    block_sup: list
    besov_inf: float
    holder_seminorm: float
    ratio: float
    dominant_block: int

    def to_record(self) -> dict:
        return dict(self.__dict__)


def aniso_blocks_check(cfg: HeisConfig | None, f: np.ndarray, s: float = 0.5,
                       with_holder: bool = True) -> AnisoReport:
    """Block identities and the block/Holder comparison for one grid function.

    ``three_term_residual`` is ``max_j sup |(Phi_{j-1} + Phi_j + Phi_{j+1})
    Phi_j f - Phi_j f|`` evaluated by FFT; ``partition_residual`` is the
    relative coefficient error of ``sum_j Phi_j f``.
    """
    if cfg is not None and cfg.d != 2:
        raise InputError("the anisotropic box check is implemented for d = 2")
    f = np.asarray(f, dtype=float)
    windows, blocks, fh = aniso_blocks(f)
    J = len(windows)
    worst = 0.0
    for j in range(J):
        ssum = windows[j].copy()
        if j > 0:
            ssum += windows[j - 1]
        if j + 1 < J:
            ssum += windows[j + 1]
        lhs = np.real(np.fft.ifftn(ssum * windows[j] * fh))
        worst = max(worst, float(np.max(np.abs(lhs - blocks[j]))))
    total = windows.sum(axis=0) * fh
    part = float(np.max(np.abs(total - fh)) / max(np.max(np.abs(fh)), 1e-300))
    sups = [float(np.max(np.abs(b))) for b in blocks]
    scaled = [2.0 ** (j * s) * v for j, v in enumerate(sups)]
    besov = max(scaled)
    hold = aniso_holder_seminorm(f, s)["estimate"] if with_holder else float("nan")
    ratio = besov / hold if with_holder and hold > 0 else float("nan")
    return AnisoReport(len(f), s, worst, part, sups, besov, hold, ratio, int(np.argmax(sups)))


def gauge_profile(n: int, s: float = 0.5, center=None, cutoff: float | None = None) -> np.ndarray:
    """``|x - c|_an^s`` on the box (periodic displacement), mollified by the
    smooth bump at anisotropic radius ``cutoff`` (default ``n / 8``)."""
    n = _check_n(n)
    grid = np.arange(n) * (2 * np.pi / n)
    c = np.full(3, np.pi) if center is None else np.asarray(center, dtype=float)
    T, Z1, Z2 = np.meshgrid(grid, grid, grid, indexing="ij")

    def wrap(x):
        return (x + np.pi) % (2 * np.pi) - np.pi

    dt, d1, d2 = wrap(T - c[0]), wrap(Z1 - c[1]), wrap(Z2 - c[2])
    g = gauge_arrays(dt, np.stack([d1, d2], axis=-1)) ** s
    cutoff = n / 8 if cutoff is None else cutoff
    return np.real(np.fft.ifftn(np.fft.fftn(g) * bump(aniso_radius(n) / cutoff)))


def random_bandlimited(n: int, radius: float, rng=None) -> np.ndarray:
    """Real random trigonometric polynomial with spectrum in ``rho <= radius``."""
    n = _check_n(n)
    rng = np.random.default_rng(rng)
    noise = rng.standard_normal((n, n, n))
    fh = np.fft.fftn(noise) * (aniso_radius(n) <= radius)
    return np.real(np.fft.ifftn(fh))
