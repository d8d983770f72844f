"""Hardy-space operators on the circle in the Fourier basis.

Vectors are coefficient arrays on the symmetric window ``-N..N`` (length
``2N + 1``, index ``k + N``).  Operators are compressions to that window:
``P`` keeps nonnegative frequencies, multiplication by a symbol is a
truncated convolution.  Every construction exposes a matrix-free ``matvec``
and a dense form for cross-checking.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.signal import fftconvolve
from scipy.sparse.linalg import LinearOperator

from .errors import ConvergenceError, InputError
from .symbols import CircleSymbol

__all__ = [
    "TruncatedOperator",
    "basis_vector",
    "szego_project",
    "multiply",
    "multiplication_op",
    "hankel_op",
    "commutator_P",
    "calderon_op",
    "calderon_norm_probe",
    "power_norm",
]


def basis_vector(l: int, N: int) -> np.ndarray:
    if abs(l) > N:
        raise InputError(f"e_{l} is outside the window -{N}..{N}")
    v = np.zeros(2 * N + 1, dtype=complex)
    v[l + N] = 1.0
    return v


def _window(v) -> int:
    n = len(v)
    if n % 2 != 1:
        raise InputError("coefficient vectors have odd length 2N+1")
    return n // 2


def szego_project(v) -> np.ndarray:
    v = np.asarray(v)
    N = _window(v)
    out = np.array(v, dtype=complex)
    out[:N] = 0
    return out


def _sparse_terms(a: CircleSymbol):
    idx = np.nonzero(a.coeffs)[0]
    return [(int(i) - a.N, a.coeffs[i]) for i in idx]


def multiply(a: CircleSymbol, v, method: str = "auto", return_dropped: bool = False):
    """Coefficients of ``a * v`` restricted to the window of ``v``.

    ``method``: ``'sparse'`` shifts and adds one term per nonzero coefficient
    of ``a`` (exact); ``'fft'`` uses a full FFT convolution; ``'auto'`` picks
    sparse when ``a`` has at most 64 nonzeros.  With ``return_dropped`` the
    l2 norm of the discarded out-of-window part is returned too.
    """
    v = np.asarray(v, dtype=complex)
    N = _window(v)
    if method == "auto":
        method = "sparse" if np.count_nonzero(a.coeffs) <= 64 else "fft"
    if method == "sparse":
        M = N + a.N
        full = np.zeros(2 * M + 1, dtype=complex)
        for k, c in _sparse_terms(a):
            lo = M - N + k
            full[lo:lo + 2 * N + 1] += c * v
    elif method == "fft":
        M = N + a.N
        full = fftconvolve(a.coeffs, v) if a.N and N else np.convolve(a.coeffs, v)
    else:
        raise InputError(f"unknown multiplication method {method!r}")
    out = full[M - N:M + N + 1].copy()
    if return_dropped:
        rest = np.concatenate([full[:M - N], full[M + N + 1:]])
        return out, float(np.linalg.norm(rest))
    return out


@dataclass
class TruncatedOperator:
    N: int
    matvec: Callable = field(repr=False)
    rmatvec: Callable = field(repr=False)
    descriptor: dict = field(default_factory=dict)
    dense_fn: Callable | None = field(default=None, repr=False)
    real: bool = False  # maps real coefficient vectors to real ones

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 0:
            raise InputError(f"truncation N must be a nonnegative integer, got {self.N!r}")

    @property
    def shape(self):
        n = 2 * self.N + 1
        return (n, n)

    def dense(self) -> np.ndarray:
        if self.dense_fn is not None:
            return self.dense_fn()
        n = 2 * self.N + 1
        cols = [self.matvec(np.eye(1, n, i, dtype=complex).ravel()) for i in range(n)]
        return np.column_stack(cols)

    def matmat(self, X) -> np.ndarray:
        return np.column_stack([self.matvec(X[:, i]) for i in range(X.shape[1])])

    def rmatmat(self, X) -> np.ndarray:
        return np.column_stack([self.rmatvec(X[:, i]) for i in range(X.shape[1])])

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator(self.shape, matvec=self.matvec, rmatvec=self.rmatvec, dtype=complex)

    def cache_key(self) -> str:
        text = json.dumps({"descriptor": self.descriptor, "N": self.N}, sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()


def _symbol_descriptor(a: CircleSymbol) -> dict:
    # meta for readability, coefficient digest for identity
    meta = json.loads(json.dumps(a.meta, default=str))
    digest = hashlib.sha256(np.ascontiguousarray(a.coeffs).tobytes()).hexdigest()[:16]
    return {"meta": meta, "N": a.N, "sha": digest}


def _real_coeffs(a: CircleSymbol) -> bool:
    return not np.any(np.imag(a.coeffs))


def _toeplitz_dense(a: CircleSymbol, N: int) -> np.ndarray:
    j = np.arange(-N, N + 1)
    diff = j[:, None] - j[None, :]
    out = np.zeros((2 * N + 1, 2 * N + 1), dtype=complex)
    ok = np.abs(diff) <= a.N
    out[ok] = a.coeffs[diff[ok] + a.N]
    return out


def multiplication_op(a: CircleSymbol, N: int) -> TruncatedOperator:
    abar = a.conj()
    return TruncatedOperator(
        N,
        matvec=lambda v: multiply(a, v),
        rmatvec=lambda v: multiply(abar, v),
        descriptor={"op": "multiply", "symbol": _symbol_descriptor(a)},
        dense_fn=lambda: _toeplitz_dense(a, N),
        real=_real_coeffs(a),
    )


def _proj_mask(N):
    return np.arange(-N, N + 1) >= 0


def hankel_op(a: CircleSymbol, N: int) -> TruncatedOperator:
    """``(1 - P) a P`` on the window ``-N..N``."""
    mask = _proj_mask(N)
    abar = a.conj()

    def mv(v):
        out = multiply(a, np.where(mask, v, 0))
        out[mask] = 0
        return out

    def rmv(v):
        out = multiply(abar, np.where(mask, 0, v))
        out[~mask] = 0
        return out

    def dense():
        T = _toeplitz_dense(a, N)
        T[mask, :] = 0
        T[:, ~mask] = 0
        return T

    return TruncatedOperator(N, mv, rmv, {"op": "hankel", "symbol": _symbol_descriptor(a)}, dense,
                            _real_coeffs(a))


def commutator_P(a: CircleSymbol, N: int) -> TruncatedOperator:
    """``[P, a] = P a - a P`` on the window ``-N..N``."""
    abar = a.conj()

    def mv(v):
        return szego_project(multiply(a, v)) - multiply(a, szego_project(v))

    def rmv(v):
        # [P, a]^* = [abar, P] = abar P - P abar
        return multiply(abar, szego_project(v)) - szego_project(multiply(abar, v))

    def dense():
        T = _toeplitz_dense(a, N)
        p = _proj_mask(N).astype(float)
        return p[:, None] * T - T * p[None, :]

    return TruncatedOperator(N, mv, rmv, {"op": "commutator_P", "symbol": _symbol_descriptor(a)}, dense,
                            _real_coeffs(a))


def calderon_op(f: CircleSymbol, N: int) -> TruncatedOperator:
    """Matrix ``M_jk = (|j| - |k|) fhat(j - k)`` on the window: the commutator
    of ``(2P - 1)(-i d/dtheta)`` (which acts as ``|k|`` on ``e_k``) with ``f``."""
    absk = np.abs(np.arange(-N, N + 1)).astype(float)
    fbar = f.conj()

    def mv(v):
        return absk * multiply(f, v) - multiply(f, absk * v)

    def rmv(v):
        return multiply(fbar, absk * v) - absk * multiply(fbar, v)

    def dense():
        T = _toeplitz_dense(f, N)
        return absk[:, None] * T - T * absk[None, :]

    return TruncatedOperator(N, mv, rmv, {"op": "calderon", "symbol": _symbol_descriptor(f)}, dense,
                            _real_coeffs(f))


def power_norm(op: TruncatedOperator, tol: float = 1e-6, max_iter: int = 10_000, seed: int = 0,
               adjoint_first: bool = False) -> dict:
    """Operator norm by power iteration on ``A^* A`` (or ``A A^*``).

    Stops when the Rayleigh quotient changes by less than ``tol`` relative.
    Raises :class:`ConvergenceError` with the last iterate on stagnation.
    """
    rng = np.random.default_rng(seed)
    n = op.shape[1]
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    first, second = (op.rmatvec, op.matvec) if adjoint_first else (op.matvec, op.rmatvec)
    prev = 0.0
    for it in range(1, max_iter + 1):
        y = second(first(x))
        lam = float(np.real(np.vdot(x, y)))
        ny = np.linalg.norm(y)
        if ny == 0:
            return {"norm": 0.0, "iterations": it, "seed": seed}
        x = y / ny
        if it > 1 and abs(lam - prev) <= tol * abs(lam):
            return {"norm": math.sqrt(max(lam, 0.0)), "iterations": it, "seed": seed}
        prev = lam
    raise ConvergenceError(
        f"power iteration did not settle in {max_iter} steps",
        best={"norm": math.sqrt(max(prev, 0.0)), "iterate": x, "seed": seed},
    )


def calderon_norm_probe(f: CircleSymbol, N_list, tol: float = 1e-6, max_iter: int = 10_000,
                        seed: int = 0) -> dict:
    """Norms of the truncated first-order commutator for each ``N``.

    Returns per-``N`` norms from ``M^* M`` and from ``M M^*`` and the
    least-squares growth exponent of ``log norm`` against ``log N``.
    """
    N_list = [int(N) for N in N_list]
    rows = []
    for i, N in enumerate(N_list):
        op = calderon_op(f, N)
        a = power_norm(op, tol, max_iter, seed=seed + i)
        b = power_norm(op, tol, max_iter, seed=seed + i, adjoint_first=True)
        rows.append({"N": N, "norm": a["norm"], "norm_adjoint": b["norm"],
                     "iterations": a["iterations"], "seed": seed + i})
    norms = np.array([r["norm"] for r in rows])
    growth = math.nan
    if len(rows) >= 2 and np.all(norms > 0):
        growth = float(np.polyfit(np.log(N_list), np.log(norms), 1)[0])
    rel_top = math.nan
    if len(rows) >= 2:
        top = sorted(rows, key=lambda r: r["N"])[-2:]
        rel_top = abs(top[1]["norm"] - top[0]["norm"]) / top[1]["norm"]
    return {"symbol": _symbol_descriptor(f), "rows": rows, "growth_exponent": growth,
            "top_two_relative_change": rel_top}
