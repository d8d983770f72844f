"""Log-Cesaro functionals on the circle and the lattice sums for ``|P g_l|^2``.

Here ``W = sum_{n=0}^{n_max} 2^(-n beta) (e_{2^n} + e_{-2^n})`` and
``g_l = [P, W] W e_l``.  For ``l >= 0``

    P g_l = sum over pairs (n, m) of 2^(-(n+m) beta) e_{l + 2^n - 2^m},

where a pair is admissible when ``2^m >= l + 1`` (the inner ``1 - P`` keeps
``e_{l - 2^m}``) and ``2^n + l >= 2^m`` (the outer ``P`` keeps the result).
The squared norm groups admissible pairs by the difference ``2^n - 2^m``.
``rule='printed'`` replaces the second condition by ``2^n - l >= 2^m``,
a strictly smaller index set that is exposed for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import AliasingError, InputError, TailBoundError
from .hardy import multiply, szego_project, basis_vector
from .symbols import CircleSymbol, make_lacunary

__all__ = [
    "LogCesaroSeries",
    "log_cesaro",
    "log_cesaro_signed",
    "GammaLatticeSum",
    "gamma_lattice_sum",
    "gamma_lattice_values",
    "lattice_tail_bound",
    "required_n_max",
    "pgl_matrix_oracle",
    "XiEstimate",
    "xi_diagonal",
    "xi_diagonal_estimate",
    "lacunary_xi_estimate",
    "xi_commutator_diagonal",
    "zeta_from_xi",
    "zeta_diagonal",
    "zeta_estimate",
    "bound_integral",
    "bound_integral_closed",
    "bound_subsum",
    "bound_report",
]

RULES = ("operator", "printed")


# -- log-Cesaro means ---------------------------------------------------------

@dataclass(frozen=True)
class LogCesaroSeries:
    """``Lambda_N = (x_0 + ... + x_N) / log(N + 2)`` for each ``N`` in ``N_list``."""

    N_list: np.ndarray
    partial: np.ndarray
    source: dict = field(default_factory=dict)

    def dyadic_stats(self) -> dict:
        """Min and max of ``Lambda_N`` over the powers of two in ``N_list``."""
        N = self.N_list
        dy = (N > 0) & ((N & (N - 1)) == 0)
        vals = self.partial[dy] if np.any(dy) else self.partial
        return {"min": float(vals.min()), "max": float(vals.max()), "count": int(len(vals))}

    def to_csv(self) -> str:
        lines = ["N,Lambda"]
        lines += [f"{int(n)},{repr(float(v))}" for n, v in zip(self.N_list, self.partial)]
        return "\n".join(lines) + "\n"

    def value_at(self, N: int) -> float:
        idx = np.nonzero(self.N_list == N)[0]
        if len(idx) == 0:
            raise InputError(f"N = {N} was not computed")
        return float(self.partial[idx[0]])


def _partials(x, N_list):
    x = np.asarray(x, dtype=float)
    N_list = np.asarray(sorted(int(n) for n in N_list), dtype=np.int64)
    if len(N_list) == 0 or N_list[0] < 0:
        raise InputError("N_list must hold nonnegative integers")
    if N_list[-1] >= len(x):
        raise InputError(f"sequence has {len(x)} terms, N up to {int(N_list[-1])} requested")
    # fixed-order accumulation
    csum = np.cumsum(x[: N_list[-1] + 1])
    return N_list, csum[N_list] / np.log(N_list + 2.0)


def log_cesaro(x, N_list, source=None) -> LogCesaroSeries:
    """Log-Cesaro partials of a nonnegative sequence."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise InputError("log_cesaro needs a nonnegative sequence; split signed data first")
    N_list, vals = _partials(xa, N_list)
    return LogCesaroSeries(N_list, vals, dict(source or {}))


def log_cesaro_signed(x, N_list, source=None) -> dict:
    """Split ``x`` into positive and negative real and imaginary parts and
    return the log-Cesaro partials of each, plus their signed combination."""
    x = np.asarray(x, dtype=complex)
    parts = {
        "re_pos": np.clip(x.real, 0, None), "re_neg": np.clip(-x.real, 0, None),
        "im_pos": np.clip(x.imag, 0, None), "im_neg": np.clip(-x.imag, 0, None),
    }
    out = {k: log_cesaro(v, N_list, source) for k, v in parts.items()}
    combined = (out["re_pos"].partial - out["re_neg"].partial
                + 1j * (out["im_pos"].partial - out["im_neg"].partial))
    out["combined"] = combined
    return out


# -- lattice sums ---------------------------------------------------------------

@dataclass(frozen=True)
class GammaLatticeSum:
    l: int
    beta: float
    n_max: int
    value: float
    tail_bound: float
    term_count: int
    rule: str = "operator"

    def interval(self) -> tuple:
        """Rigorous enclosure of the untruncated value."""
        return (self.value, self.value + self.tail_bound)

    def to_record(self) -> dict:
        return {"l": self.l, "beta": self.beta, "n_max": self.n_max, "value": self.value,
                "tail_bound": self.tail_bound, "term_count": self.term_count, "rule": self.rule}


def _admissible(n: int, m: int, l: int, rule: str) -> bool:
    if (1 << m) < l + 1:
        return False
    if rule == "operator":
        return (1 << n) + l >= (1 << m)
    return (1 << n) - l >= (1 << m)


def _check_args(l, beta, n_max, rule):
    if int(l) != l or l < 0:
        raise InputError(f"l must be a nonnegative integer, got {l!r}")
    if not 0 < beta:
        raise InputError("beta must be positive")
    if int(n_max) != n_max or n_max < 1:
        raise InputError("n_max must be an integer >= 1")
    if rule not in RULES:
        raise InputError(f"rule must be one of {RULES}, got {rule!r}")


def gamma_lattice_sum(l: int, beta: float = 0.25, n_max: int = 18, rule: str = "operator") -> GammaLatticeSum:
    """Exact finite lattice sum with all four indices at most ``n_max``.

    Admissible pairs ``(n, m)`` are grouped by ``2^n - 2^m`` (Python
    integers, no overflow); the value is the sum over groups of the squared
    group weight, i.e. the sum over quadruples with equal differences.
    """
    _check_args(l, beta, n_max, rule)
    l, n_max = int(l), int(n_max)
    groups: dict[int, list] = {}
    for n in range(n_max + 1):
        for m in range(n_max + 1):
            if _admissible(n, m, l, rule):
                groups.setdefault((1 << n) - (1 << m), []).append(n + m)
    value = 0.0
    terms = 0
    for d in sorted(groups):
        exps = groups[d]
        w = math.fsum(2.0 ** (-beta * e) for e in sorted(exps))
        value += w * w
        terms += len(exps) ** 2
    tail = lattice_tail_bound(l, beta, n_max, value)
    return GammaLatticeSum(l, float(beta), n_max, value, tail, terms, rule)


def lattice_tail_bound(l: int, beta: float, n_max: int, value: float) -> float:
    """Bound on (untruncated value) - (value at ``n_max``).

    Writing the full vector as ``v + r`` with ``v`` the truncated part,
    ``|v + r|^2 - |v|^2 <= 2 |v| |r| + |r|^2`` and ``|r|`` is at most the
    sum of ``q^(n+m)``, ``q = 2^-beta``, over admissible pairs with an index
    above ``n_max``.  Admissibility forces ``m >= m0 = ceil(log2(l + 1))``
    and, once ``2^(m-1) > l``, ``n >= m - 1``.
    """
    q = 2.0 ** (-beta)
    m0 = (l).bit_length() if l > 0 else 0  # smallest m with 2^m >= l + 1
    m1 = (l.bit_length() + 1) if l > 0 else 0  # 2^(m-1) > l for m >= m1
    if n_max + 1 >= m1:
        A = q ** (2 * n_max + 1) / ((1 - q) * (1 - q * q))
    else:
        A = q ** (n_max + 1) / (1 - q) ** 2
    B = q ** (max(m0, 0) + n_max + 1) / (1 - q) ** 2 if m0 <= n_max else 0.0
    S = A + B
    return 2.0 * math.sqrt(max(value, 0.0)) * S + S * S


def required_n_max(l: int, beta: float = 0.25, rel_tol: float = 1e-8, start: int = 8,
                   rule: str = "operator") -> int:
    """Smallest ``n_max >= start`` whose tail bound is at most ``rel_tol * value``."""
    n = max(int(start), 1)
    while True:
        v = gamma_lattice_values([l], beta, n, rule)[0]
        if v > 0 and lattice_tail_bound(l, beta, n, v) <= rel_tol * v:
            return n
        if v == 0 and lattice_tail_bound(l, beta, n, 0.0) == 0:
            return n
        n += max(1, n // 8)


def _pair_tables(n_max):
    n, m = np.meshgrid(np.arange(n_max + 1), np.arange(n_max + 1), indexing="ij")
    return n.ravel(), m.ravel()


def gamma_lattice_values(ls, beta: float = 0.25, n_max: int = 18, rule: str = "operator",
                         chunk: int = 256) -> np.ndarray:
    """Batch evaluation of the lattice sum for many ``l``.

    Uses that a nonzero difference ``2^n - 2^m`` has a single
    representation, so nonzero groups are singletons and only the ``n = m``
    group needs squaring.  Agrees with :func:`gamma_lattice_sum`.
    """
    ls = np.asarray(ls, dtype=np.int64)
    for l in ls[:1]:
        _check_args(int(l), beta, n_max, rule)
    if np.any(ls < 0):
        raise InputError("l must be nonnegative")
    n, m = _pair_tables(int(n_max))
    off = n != m
    n_off, m_off = n[off], m[off]
    w2_off = 2.0 ** (-2.0 * beta * (n_off + m_off))
    diag_m = np.arange(n_max + 1)
    w_diag = 2.0 ** (-2.0 * beta * diag_m)
    big = 62
    pm_off = np.where(m_off < big, np.left_shift(np.int64(1), np.minimum(m_off, big - 1)), np.iinfo(np.int64).max)
    pn_off = np.where(n_off < big, np.left_shift(np.int64(1), np.minimum(n_off, big - 1)), np.iinfo(np.int64).max)
    pm_diag = np.where(diag_m < big, np.left_shift(np.int64(1), np.minimum(diag_m, big - 1)), np.iinfo(np.int64).max)
    out = np.empty(len(ls))
    for s in range(0, len(ls), chunk):
        L = ls[s:s + chunk, None]
        ok_m = pm_off[None, :] >= L + 1
        if rule == "operator":
            # n >= m always passes; n < m needs 2^m - 2^n <= l (only small m)
            gap = (pm_off - np.minimum(pn_off, pm_off))[None, :]
            second = (n_off >= m_off)[None, :] | ((m_off < big)[None, :] & (gap <= L))
        else:
            second = (n_off > m_off)[None, :] & (
                (n_off >= big)[None, :] | ((pn_off - np.minimum(pm_off, pn_off))[None, :] >= L))
        mask = ok_m & second
        nonzero = (mask * w2_off[None, :]).sum(axis=1)
        dmask = pm_diag[None, :] >= L + 1
        if rule == "printed":
            dmask = dmask & (L == 0)
        z = (dmask * w_diag[None, :]).sum(axis=1)
        out[s:s + chunk] = z * z + nonzero
    return out


def _truncated_W(beta, n_max):
    return make_lacunary(beta, n_max)


def pgl_matrix_oracle(l: int, beta: float = 0.25, n_max: int = 14) -> float:
    """``|P g_l|^2`` from explicit sparse products with truncated ``W``.

    Builds ``W`` with frequencies up to ``2^n_max``, applies ``W``, then
    ``[P, W]``, then ``P``, on a window large enough that nothing is cut.
    """
    if n_max > 20:
        raise InputError("the matrix oracle is limited to n_max <= 20")
    if l < 0:
        raise InputError("l must be nonnegative")
    W = _truncated_W(beta, n_max)
    N = int(l) + 2 * (1 << n_max) + 1
    e = basis_vector(int(l), N)
    We = multiply(W, e, method="sparse")
    g = szego_project(multiply(W, We, method="sparse")) - multiply(W, szego_project(We), method="sparse")
    Pg = szego_project(g)
    return float(np.vdot(Pg, Pg).real)


# -- diagonal estimators for xi and zeta ----------------------------------------

class _Rows:
    """Images of ``e_l`` for ``l = 0..N`` simultaneously.

    Column ``c`` of row ``l`` holds the coefficient at frequency
    ``l + c - R``; nothing is truncated as long as no operation pushes mass
    beyond offset ``R``.
    """

    def __init__(self, N, R, data=None):
        self.N, self.R = N, R
        self.freq = np.arange(N + 1)[:, None] + np.arange(-R, R + 1)[None, :]
        if data is None:
            data = np.zeros((N + 1, 2 * R + 1), dtype=complex)
            data[:, R] = 1.0
        self.data = data

    def like(self, data):
        out = _Rows.__new__(_Rows)
        out.N, out.R, out.freq, out.data = self.N, self.R, self.freq, data
        return out

    def P(self):
        return self.like(np.where(self.freq >= 0, self.data, 0))

    def Q(self):
        return self.like(np.where(self.freq < 0, self.data, 0))

    def mul(self, a: CircleSymbol):
        out = np.zeros_like(self.data)
        width = 2 * self.R + 1
        for idx in np.nonzero(a.coeffs)[0]:
            k = int(idx) - a.N
            c = a.coeffs[idx]
            if k >= 0:
                out[:, k:] += c * self.data[:, :width - k]
            else:
                out[:, :width + k] += c * self.data[:, -k:]
        return self.like(out)

    def comm(self, a):
        # [P, a] v = P(a v) - a(P v)
        return self.like(self.mul(a).P().data - self.P().mul(a).data)

    def sub(self, other):
        return self.like(self.data - other.data)

    def diag(self):
        return self.data[:, self.R].copy()


def _reach(symbols):
    return int(sum(a.degree for a in symbols))


def _check_tuple(symbols, k):
    if int(k) != k or k < 1:
        raise InputError("k must be an integer >= 1")
    if len(symbols) != 2 * k:
        raise InputError(f"need 2k = {2 * k} symbols, got {len(symbols)}")


def _rows_for(symbols, N, window):
    R = _reach(symbols)
    if window is not None and window < N + R:
        raise AliasingError(
            f"window {window} is too small for N = {N} and total symbol degree {R}; "
            f"use a window of at least {N + R}")
    if (N + 1) * (2 * R + 1) > 60_000_000:
        raise InputError("row representation too large; use the lattice path or a smaller N")
    return _Rows(N, R)


def xi_diagonal(symbols, N: int, k: int, window: int | None = None) -> np.ndarray:
    """``d_l = <P a1 (1-P) a2 P ... P a_{2k-1} (1-P) a_{2k} P e_l, e_l>``, ``0 <= l <= N``.

    Operators are applied right to left.  The commutator product
    ``P [P,a1] ... [P,a_{2k}] P`` equals ``(-1)^k`` times this operator.
    """
    _check_tuple(symbols, k)
    v = _rows_for(symbols, N, window).P()
    for i in range(k - 1, -1, -1):
        a_odd, a_even = symbols[2 * i], symbols[2 * i + 1]
        v = v.mul(a_even).Q().mul(a_odd).P()
    return v.diag()


def xi_commutator_diagonal(symbols, N: int, k: int, window: int | None = None) -> np.ndarray:
    """Diagonal of ``P [P,a1][P,a2] ... [P,a_{2k}] P`` computed with commutators."""
    _check_tuple(symbols, k)
    v = _rows_for(symbols, N, window).P()
    for a in reversed(symbols):
        v = v.comm(a)
    return v.P().diag()


def zeta_diagonal(symbols, N: int, k: int, window: int | None = None) -> np.ndarray:
    """Diagonal of ``P [[P,a1],[P,a2]] ... [[P,a_{2k-1}],[P,a_{2k}]] P``."""
    _check_tuple(symbols, k)
    v = _rows_for(symbols, N, window).P()
    for i in range(k - 1, -1, -1):
        a, b = symbols[2 * i], symbols[2 * i + 1]
        v = v.comm(b).comm(a).sub(v.comm(a).comm(b))
    return v.P().diag()


def _swapped_tuples(symbols, k):
    for bits in np.ndindex(*(2,) * k):
        tup = []
        for j, b in enumerate(bits):
            x, y = symbols[2 * j], symbols[2 * j + 1]
            tup += [y, x] if b else [x, y]
        yield (-1) ** sum(bits), tup


def zeta_from_xi(symbols, N: int, k: int, window: int | None = None) -> np.ndarray:
    """Alternating sum of ``xi`` diagonals over pair swaps, times ``(-1)^k``.

    Per factor ``[P a P, P b P] = P b (1-P) a P - P a (1-P) b P``.
    """
    total = 0
    for sign, tup in _swapped_tuples(symbols, k):
        total = total + sign * xi_diagonal(tup, N, k, window)
    return (-1) ** k * total


@dataclass(frozen=True)
class XiEstimate:
    k: int
    N: int
    diagonal: np.ndarray = field(repr=False)
    partials: LogCesaroSeries | dict
    descriptors: list
    path: str
    checks: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        p = self.partials
        if isinstance(p, LogCesaroSeries):
            tab = {"N": p.N_list.tolist(), "Lambda": p.partial.tolist()}
        else:
            tab = {"N": p["re_pos"].N_list.tolist(),
                   "Lambda_re": np.real(p["combined"]).tolist(),
                   "Lambda_im": np.imag(p["combined"]).tolist()}
        return {"k": self.k, "N": self.N, "path": self.path, "symbols": self.descriptors,
                "checks": self.checks, **tab}


def _descriptor(a: CircleSymbol):
    return {k: (v if isinstance(v, (int, float, str, bool)) else str(v)) for k, v in a.meta.items()}


def _is_lacunary_tuple(symbols, k):
    if k != 2:
        return False
    m0 = symbols[0].meta
    return m0.get("kind") == "lacunary" and all(
        s.meta == m0 and np.array_equal(s.coeffs, symbols[0].coeffs) for s in symbols)


def _default_N_list(N):
    out = [1 << j for j in range(0, int(math.log2(N)) + 1)]
    if out[-1] != N:
        out.append(N)
    return out


def _cesaro(d, N_list, src):
    d = np.asarray(d)
    if np.all(np.abs(d.imag) <= 1e-14) and np.all(d.real >= -1e-12):
        return log_cesaro(np.clip(d.real, 0, None), N_list, src)
    return log_cesaro_signed(d, N_list, src)


def lacunary_xi_estimate(beta: float, N: int, n_max: int | None = None, N_list=None,
                         rel_tol: float = 1e-8) -> XiEstimate:
    """``xi_2(W, W, W, W)`` diagonal estimate for the untruncated lacunary ``W``.

    ``d_l = |P g_l|^2`` is evaluated by lattice sums at a truncation that
    certifies ``rel_tol`` relative accuracy for ``l <= N`` (or at the given
    ``n_max``); the largest tail bound is reported in ``checks``.
    """
    N = int(N)
    if n_max is None:
        ends = [int(l) for l in {1, N} if l <= N]
        n_max = max(required_n_max(l, beta, rel_tol) for l in ends)
        n_max = _certify(np.unique(np.geomspace(1, max(N, 1), 64).astype(np.int64)), beta, rel_tol, n_max)
    ls = np.arange(N + 1)
    d = gamma_lattice_values(ls, beta, n_max, "operator")
    tails = np.array([lattice_tail_bound(int(l), beta, n_max, v) for l, v in zip(ls[:: max(1, N // 256)],
                                                                                    d[:: max(1, N // 256)])])
    N_list = _default_N_list(N) if N_list is None else N_list
    desc = [{"kind": "lacunary", "beta": beta, "n_max": "inf"}] * 4
    src = {"functional": "xi", "k": 2, "N": N, "path": "lattice", "n_max": n_max}
    checks = {"n_max": n_max, "max_sampled_tail_bound": float(tails.max())}
    return XiEstimate(2, N, d, _cesaro(d, N_list, src), desc, "lattice", checks)


def xi_diagonal_estimate(symbols, N: int, k: int = 2, N_list=None, window: int | None = None,
                         path: str = "auto") -> XiEstimate:
    """Diagonal log-Cesaro estimate of ``xi_k`` on ``a_1, ..., a_{2k}``.

    ``path='lattice'`` (chosen automatically for four copies of the same
    lacunary symbol) uses the lattice sums, since then ``d_l = |P g_l|^2``.
    Otherwise rows ``P a1 (1-P) a2 ... P e_l`` are propagated exactly.
    The diagonal estimate is a lower bound for the eigenvalue log-Cesaro
    mean of a positive operator; it is not claimed to equal it.
    """
    symbols = list(symbols)
    _check_tuple(symbols, k)
    N = int(N)
    N_list = _default_N_list(N) if N_list is None else N_list
    desc = [_descriptor(a) for a in symbols]
    if path == "auto":
        path = "lattice" if _is_lacunary_tuple(symbols, k) else "rows"
    if path == "lattice":
        if not _is_lacunary_tuple(symbols, k):
            raise InputError("the lattice path needs k = 2 and four equal lacunary symbols")
        meta = symbols[0].meta
        d = gamma_lattice_values(np.arange(N + 1), meta["beta"], meta["n_max"], "operator")
    elif path == "rows":
        d = xi_diagonal(symbols, N, k, window)
    else:
        raise InputError(f"unknown path {path!r}")
    src = {"functional": "xi", "k": k, "N": N, "path": path}
    return XiEstimate(k, N, d, _cesaro(d, N_list, src), desc, path)


def zeta_estimate(symbols, N: int, k: int = 2, N_list=None, window: int | None = None,
                  check: bool = True) -> XiEstimate:
    """Diagonal log-Cesaro estimate of ``zeta_k``.

    With ``check`` the diagonal is recomputed from the alternating sum of
    ``xi`` diagonals and the maximal discrepancy is stored in ``checks``.
    """
    symbols = list(symbols)
    _check_tuple(symbols, k)
    N_list = _default_N_list(N) if N_list is None else N_list
    d = zeta_diagonal(symbols, N, k, window)
    checks = {}
    if check:
        alt = zeta_from_xi(symbols, N, k, window)
        scale = max(1.0, float(np.max(np.abs(d))))
        checks["alternating_sum_residual"] = float(np.max(np.abs(d - alt)) / scale)
    src = {"functional": "zeta", "k": k, "N": N, "path": "rows"}
    return XiEstimate(k, N, d, _cesaro(d, N_list, src), [_descriptor(a) for a in symbols], "rows", checks)


# -- bound chain ------------------------------------------------------------------

def bound_subsum(l: int) -> float:
    """``sum over 2^n >= 2l + 1 of 2^(-n/2) (2^n - l)^(-1/2)``."""
    n = _first_index(l)
    terms = []
    while True:
        t = 2.0 ** (-n) / math.sqrt(1.0 - l * 2.0 ** (-n))
        terms.append(t)
        if t < 1e-18 * terms[0]:
            break
        n += 1
    return math.fsum(terms)


def bound_subsum_terms(l: int, count: int = 64) -> list:
    n0 = _first_index(l)
    return [(n, 2.0 ** (-n) / math.sqrt(1.0 - l * 2.0 ** (-n))) for n in range(n0, n0 + count)]


def _first_index(l: int) -> int:
    return (2 * l).bit_length()  # first n with 2^n >= 2l + 1


def bound_integral(l: int, start: float | None = None) -> float:
    """Adaptive quadrature of ``2^(-x/2) (2^x - l)^(-1/2)`` from ``start``
    (default ``log2(2l + 2)``)."""
    a = math.log2(2 * l + 2) if start is None else float(start)

    def f(x):
        y = 2.0 ** (-x)
        return y / math.sqrt(1.0 - l * y)

    val, _ = integrate.quad(f, a, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return float(val)


def bound_integral_closed(l: int, start: float | None = None) -> float:
    """Antiderivative after ``y = 2^-x``: ``(2 / (l ln 2)) (1 - sqrt(1 - l y0))``."""
    y0 = 1.0 / (2 * l + 2) if start is None else 2.0 ** (-float(start))
    inner = l * y0
    # 1 - sqrt(1 - u) written without cancellation
    return (2.0 / (l * math.log(2))) * inner / (1.0 + math.sqrt(1.0 - inner))


def bound_report(l_max: int, n_max: int = 18, beta: float = 0.25, rel_tol: float = 1e-8,
                 strict: bool = False, with_oracle: bool | None = None, l_list=None) -> dict:
    """Per-``l`` comparison of the exact lattice value with the bound chain.

    ``lattice`` and ``oracle`` are evaluated at the given ``n_max`` (same
    finite object).  ``exact`` is evaluated at ``n_exact``, the smallest
    truncation whose tail bound is within ``rel_tol`` relative for every
    row; with ``strict`` an insufficient ``n_max`` raises
    :class:`TailBoundError` instead.  The quantities ``claimed``
    (``2 / (l log 2)``) and ``sqrt6`` (``sqrt(6) / (l log 2)``) are only
    compared, never assumed.
    """
    ls = np.arange(1, int(l_max) + 1) if l_list is None else np.asarray(sorted(l_list), dtype=np.int64)
    if len(ls) == 0 or ls[0] < 1:
        raise InputError("l values must be >= 1")
    need = max(required_n_max(int(l), beta, rel_tol, start=n_max) for l in {int(ls[0]), int(ls[-1])})
    need = _certify(ls, beta, rel_tol, need)
    if strict and need > n_max:
        raise TailBoundError(f"n_max = {n_max} does not meet the {rel_tol:g} relative tail bound",
                             required_n_max=need)
    n_exact = max(n_max, need)
    if with_oracle is None:
        with_oracle = n_max <= 20 and len(ls) <= 256
    lat = gamma_lattice_values(ls, beta, n_max, "operator")
    exact = gamma_lattice_values(ls, beta, n_exact, "operator")
    printed = gamma_lattice_values(ls, beta, n_exact, "printed")
    ln2 = math.log(2)
    rows = []
    counts = {}
    for i, l in enumerate(ls.tolist()):
        sub = bound_subsum(l)
        quad = bound_integral(l)
        closed = bound_integral_closed(l)
        # the sum dominates the integral of its decreasing summand from the
        # first summation index; log2(2l + 2) can lie below that index
        quad_first = bound_integral(l, start=_first_index(l))
        claimed = 2.0 / (l * ln2)
        sqrt6 = math.sqrt(6.0) / (l * ln2)
        printed_formula = claimed * math.sqrt(1.0 + l / (2.0 * l + 2.0))
        tail = lattice_tail_bound(l, beta, n_exact, exact[i])
        row = {
            "l": l, "lattice": float(lat[i]), "exact": float(exact[i]), "tail_bound": tail,
            "printed_rule": float(printed[i]), "subsum": sub, "integral": quad,
            "integral_closed": closed, "integral_from_first_index": quad_first, "printed_integral_formula": printed_formula,
            "claimed_bound": claimed, "sqrt6_bound": sqrt6,
        }
        flags = {
            "exact>=subsum": _flag(exact[i] >= sub),
            "subsum>=integral": _flag(sub >= quad),
            "subsum>=integral_from_first_index": _flag(sub >= quad_first),
            "exact>=claimed": _flag(exact[i] >= claimed),
            "exact>=sqrt6": _flag(exact[i] >= sqrt6),
            "quadrature=closed": _flag(abs(quad - closed) <= 1e-10 * closed),
            "printed_integral_formula=integral": _flag(abs(printed_formula - quad) <= 1e-10 * quad),
        }
        if with_oracle:
            orc = pgl_matrix_oracle(l, beta, n_max)
            row["oracle"] = orc
            denom = max(abs(orc), 1e-300)
            flags["lattice=oracle"] = _flag(abs(orc - lat[i]) <= 1e-12 * denom or orc == lat[i])
        row["flags"] = flags
        for key, f in flags.items():
            counts.setdefault(key, {"HOLDS": 0, "FAILS": 0})[f] += 1
        rows.append(row)
    return {"beta": beta, "n_max": n_max, "n_exact": n_exact, "rel_tol": rel_tol,
            "rows": rows, "summary": counts}


def _certify(ls, beta, rel_tol, n):
    # raise n until every l in the list satisfies the relative tail bound
    while True:
        vals = gamma_lattice_values(ls, beta, n, "operator")
        tails = np.array([lattice_tail_bound(int(l), beta, n, v) for l, v in zip(ls, vals)])
        if np.all(tails <= rel_tol * vals):
            return n
        n += max(1, n // 16)


def _flag(ok) -> str:
    return "HOLDS" if bool(ok) else "FAILS"
