"""Singular values of truncated operators and weak-Schatten diagnostics."""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, InputError
from .hardy import TruncatedOperator

__all__ = [
    "SingularSpectrum",
    "SchattenFit",
    "singular_values",
    "lanczos_singular_values",
    "weak_schatten_quasinorm",
    "decay_fit",
    "DENSE_LIMIT",
]

DENSE_LIMIT = 1024


@dataclass(frozen=True)
class SingularSpectrum:
    values: np.ndarray
    method: str
    N: int
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or np.any(v < 0) or np.any(np.diff(v) > 0):
            raise InputError("singular values must be a nonincreasing nonnegative sequence")
        object.__setattr__(self, "values", v)

    @property
    def count(self) -> int:
        return len(self.values)

    def to_csv(self) -> str:
        lines = ["k,mu"]
        lines += [f"{k},{repr(float(m))}" for k, m in enumerate(self.values)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_values(cls, values, N=None, method="given"):
        v = np.sort(np.abs(np.asarray(values, dtype=float)))[::-1]
        return cls(v, method, N if N is not None else (len(v) - 1) // 2)


@dataclass(frozen=True)
class SchattenFit:
    p_hat: float
    exponent: float
    window: tuple
    residual: float
    points: int

    def to_record(self) -> dict:
        return {"p_hat": self.p_hat, "exponent": self.exponent, "window": list(self.window),
                "residual": self.residual, "points": self.points}


def _orth_against(w, Q, j):
    # two passes of classical Gram-Schmidt
    if j:
        Qj = Q[:, :j]
        w = w - Qj @ (Qj.conj().T @ w)
        w = w - Qj @ (Qj.conj().T @ w)
    return w


def _random_orth(rng, Q, j, dtype):
    n = Q.shape[0]
    for _ in range(5):
        w = rng.standard_normal(n)
        if np.iscomplexobj(np.empty(0, dtype)):
            w = w + 1j * rng.standard_normal(n)
        w = _orth_against(w, Q, j)
        nw = np.linalg.norm(w)
        if nw > 1e-8:
            return w / nw
    return None


def lanczos_singular_values(op: TruncatedOperator, k: int, tol: float = 1e-12, seed: int = 0,
                            max_restarts: int = 3, chunk: int = 64) -> SingularSpectrum:
    """Top ``k`` singular values by Golub-Kahan bidiagonalization.

    Both Lanczos bases are fully reorthogonalized.  An exact breakdown (the
    Krylov space became invariant) is continued with a fresh random vector
    orthogonal to the current basis, so low-rank operators are handled.
    The factorization grows in chunks until every wanted Ritz value has
    residual at most ``tol * sigma_max``; a non-finite value triggers a
    restart with a new seed, and the third restart gives up.
    """
    n = op.shape[0]
    if not 1 <= k <= n:
        raise InputError(f"k must lie in 1..{n}, got {k}")
    dtype = float if op.real else complex
    cast = (lambda x: np.real(x)) if op.real else (lambda x: x)
    last_exc = None
    for attempt in range(max_restarts + 1):
        rng = np.random.default_rng([seed, attempt])
        try:
            return _gk_run(op, k, tol, rng, dtype, cast, chunk, seed, attempt)
        except FloatingPointError as exc:
            last_exc = exc
    raise ConvergenceError(f"Lanczos failed after {max_restarts} restarts: {last_exc}")


def _gk_run(op, k, tol, rng, dtype, cast, chunk, seed, attempt):
    n = op.shape[0]
    cap = n
    V = np.zeros((n, min(cap, 2 * k + chunk) + 1), dtype=dtype)
    U = np.zeros_like(V)
    alpha, beta = [], []
    V[:, 0] = _random_orth(rng, V, 0, dtype)
    anorm = 0.0
    breakdowns = 0
    j = 0
    target = min(cap, k + max(chunk, k // 2))

    def grow(width):
        nonlocal V, U
        if width + 1 > V.shape[1]:
            pad = width + 1 - V.shape[1]
            V = np.hstack([V, np.zeros((n, pad), dtype)])
            U = np.hstack([U, np.zeros((n, pad), dtype)])

    while True:
        grow(target)
        while j < target:
            u = cast(op.matvec(V[:, j]))
            if j:
                u = u - beta[j - 1] * U[:, j - 1]
            u = _orth_against(u, U, j)
            a = float(np.linalg.norm(u))
            if not math.isfinite(a):
                raise FloatingPointError("non-finite vector in bidiagonalization")
            anorm = max(anorm, a)
            if a <= 1e-13 * max(anorm, 1e-300):
                a = 0.0
                breakdowns += 1
                u = _random_orth(rng, U, j, dtype)
                if u is None:
                    raise FloatingPointError("could not extend left basis")
            else:
                u = u / a
            U[:, j] = u
            alpha.append(a)

            v = cast(op.rmatvec(U[:, j])) - a * V[:, j]
            v = _orth_against(v, V, j + 1)
            b = float(np.linalg.norm(v))
            if not math.isfinite(b):
                raise FloatingPointError("non-finite vector in bidiagonalization")
            anorm = max(anorm, b)
            if j + 1 < n:
                if b <= 1e-13 * max(anorm, 1e-300):
                    b = 0.0
                    breakdowns += 1
                    v = _random_orth(rng, V, j + 1, dtype)
                    if v is None:
                        raise FloatingPointError("could not extend right basis")
                else:
                    v = v / b
                V[:, j + 1] = v
            beta.append(b)
            j += 1

        m = j
        B = np.diag(alpha) + np.diag(beta[:m - 1], 1)
        P, s, _ = np.linalg.svd(B)
        res = abs(beta[m - 1]) * np.abs(P[m - 1, :])
        want = min(k, m)
        scale = s[0] if s[0] > 0 else 1.0
        if m >= n or np.all(res[:want] <= tol * scale):
            vals = np.clip(s[:k], 0.0, None)
            info = {"steps": m, "breakdowns": breakdowns, "seed": seed, "restarts": attempt,
                    "max_residual": float(res[:want].max()) if want else 0.0}
            return SingularSpectrum(np.sort(vals)[::-1], "iterative", op.N, info)
        target = min(cap, m + chunk)


def _cache_path(cache_dir, op, k, method):
    key = hashlib.sha256(json.dumps({"op": op.cache_key(), "k": k, "method": method}).encode())
    return os.path.join(cache_dir, f"spectrum-{key.hexdigest()[:24]}.npy")


def singular_values(op: TruncatedOperator, k: int | None = None, method: str = "auto",
                    seed: int = 0, cache_dir: str | None = None) -> SingularSpectrum:
    """Top ``k`` singular values (all of them when ``k`` is None).

    ``method='auto'`` uses a dense SVD when ``2N + 1 <= 1024`` and Lanczos
    bidiagonalization otherwise.  With ``cache_dir`` results are stored as
    ``.npy`` files keyed by the construction hash of ``op``.
    """
    n = op.shape[0]
    k = n if k is None else int(k)
    if not 1 <= k <= n:
        raise InputError(f"k must lie in 1..{n}, got {k}")
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "iterative"
    if method not in ("dense", "iterative"):
        raise InputError(f"unknown method {method!r}")
    path = None
    if cache_dir is not None:
        path = _cache_path(cache_dir, op, k, method)
        if os.path.exists(path):
            return SingularSpectrum(np.load(path), method, op.N, {"cached": True})
    if method == "dense":
        vals = np.linalg.svd(op.dense(), compute_uv=False)[:k]
        spec = SingularSpectrum(np.sort(vals)[::-1], "dense", op.N)
    else:
        spec = lanczos_singular_values(op, k, seed=seed)
    if path is not None:
        os.makedirs(cache_dir, exist_ok=True)
        np.save(path, spec.values)
    return spec


def weak_schatten_quasinorm(s, p: float) -> float:
    """``sup_k (k + 1)^(1/p) mu_k`` with ``k`` counted from zero."""
    if not p > 0:
        raise InputError("p must be positive")
    mu = s.values if isinstance(s, SingularSpectrum) else np.asarray(s, dtype=float)
    if len(mu) == 0:
        return 0.0
    k = np.arange(len(mu))
    return float(np.max((k + 1.0) ** (1.0 / p) * mu))


def decay_fit(s, window=(16, 512)) -> SchattenFit:
    """Least-squares fit ``log mu_k = c - e log(k + 1)`` for ``k`` in the window.

    ``exponent`` is ``e`` and ``p_hat = 1 / e``.  Zero singular values in
    the window are rejected since their logarithm is undefined.
    """
    mu = s.values if isinstance(s, SingularSpectrum) else np.asarray(s, dtype=float)
    k0, k1 = int(window[0]), int(window[1])
    if k0 < 0 or k1 >= len(mu) or k1 < k0:
        raise InputError(f"window {window} outside the computed range 0..{len(mu) - 1}")
    if k1 - k0 + 1 < 8:
        raise InputError("decay fit needs at least 8 points in the window")
    k = np.arange(k0, k1 + 1)
    y = mu[k0:k1 + 1]
    if np.any(y <= 0):
        raise InputError("window contains zero singular values")
    x = np.log(k + 1.0)
    slope, icpt = np.polyfit(x, np.log(y), 1)
    resid = np.log(y) - (slope * x + icpt)
    p_hat = -1.0 / slope if slope != 0 else math.inf
    return SchattenFit(float(p_hat), float(-slope), (k0, k1), float(np.sqrt(np.mean(resid ** 2))),
                       len(k))
