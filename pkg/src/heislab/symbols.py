"""Functions on the circle given by finite Fourier series, and the
Littlewood-Paley / Besov / Hoelder machinery acting on them.

A :class:`CircleSymbol` stores coefficients for frequencies ``-N..N`` in an
array of length ``2N + 1`` (index ``k + N``).  Grid evaluation uses the FFT.

Hoelder exponents here are *classical* exponents on the circle.  The
Carnot-Caratheodory exponent on S^1 is twice the classical one; reports
carry both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

__all__ = [
    "default_corpus",
    "CircleSymbol",
    "HolderReport",
    "BlockDecomposition",
    "make_lacunary",
    "make_symbol",
    "bump",
    "lp_window",
    "holder_seminorm",
    "lp_blocks",
    "besov_norm",
    "besov_holder_equiv_check",
    "k_functional_probe",
    "sup_norm",
    "lipschitz_seminorm",
    "block_sup_norms",
    "holder_norm",
    "n_blocks",
]


@dataclass(frozen=True)
class CircleSymbol:
    N: int
    coeffs: np.ndarray = field(repr=False)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (2 * self.N + 1,):
            raise InputError(f"expected {2 * self.N + 1} coefficients, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def coeff(self, k: int) -> complex:
        if abs(k) > self.N:
            return 0j
        return complex(self.coeffs[k + self.N])

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    @property
    def support(self) -> np.ndarray:
        return self.frequencies[self.coeffs != 0]

    @property
    def degree(self) -> int:
        s = self.support
        return int(np.max(np.abs(s))) if s.size else 0

    @property
    def is_real(self) -> bool:
        return bool(np.array_equal(self.coeffs, np.conj(self.coeffs[::-1])))

    def conj(self) -> "CircleSymbol":
        """Coefficients of the complex conjugate function."""
        return CircleSymbol(self.N, np.conj(self.coeffs[::-1]), {**self.meta, "conj": True})

    def plus_constant(self, c: complex) -> "CircleSymbol":
        coeffs = self.coeffs.copy()
        coeffs[self.N] += c
        return CircleSymbol(self.N, coeffs, {**self.meta, "plus_constant": c})

    def with_coeffs(self, coeffs, **meta) -> "CircleSymbol":
        return CircleSymbol(self.N, coeffs, {**self.meta, **meta})

    def evaluate(self, grid: int) -> np.ndarray:
        """Values at ``theta_j = 2 pi j / grid``; needs ``grid > 2 N``."""
        if grid <= 2 * self.N:
            raise InputError(f"grid {grid} aliases frequencies up to {self.N}")
        buf = np.zeros(grid, dtype=complex)
        k = self.frequencies
        buf[k % grid] = self.coeffs
        return np.fft.ifft(buf) * grid

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.exp(1j * np.multiply.outer(theta, self.frequencies)) @ self.coeffs


def make_lacunary(beta: float, n_max: int) -> CircleSymbol:
    """``sum_{n <= n_max} 2^{-n beta} (z^{2^n} + z^{-2^n})``."""
    if not (0 < beta <= 1):
        raise InputError(f"beta must lie in (0, 1], got {beta!r}")
    if int(n_max) != n_max or n_max < 0:
        raise InputError("n_max must be a nonnegative integer")
    N = 2**n_max
    c = np.zeros(2 * N + 1, dtype=complex)
    for n in range(n_max + 1):
        w = 2.0 ** (-n * beta)
        c[N + 2**n] = w
        c[N - 2**n] = w
    return CircleSymbol(N, c, {"kind": "lacunary", "beta": beta, "n_max": n_max})


def _from_dict_coeffs(items, N=None):
    pairs = {int(k): complex(v) if not isinstance(v, (list, tuple)) else complex(*v)
             for k, v in items.items()}
    top = max((abs(k) for k in pairs), default=0)
    N = top if N is None else max(N, top)
    c = np.zeros(2 * N + 1, dtype=complex)
    for k, v in pairs.items():
        c[k + N] += v
    return N, c


_NAMED = {
    "e1": {1: 1.0},
    "e-1": {-1: 1.0},
    "cos": {1: 0.5, -1: 0.5},
    "sin": {1: -0.5j, -1: 0.5j},
    "one": {0: 1.0},
}


def make_symbol(spec) -> CircleSymbol:
    """Build a symbol from a spec.

    Accepted forms::

        "e1" | "e-1" | "cos" | "sin" | "one" | "e<k>"
        {"kind": "lacunary", "beta": 0.25, "n_max": 12}
        {"kind": "trig", "coeffs": {"1": 0.5, "-1": 0.5}}
        {"kind": "random", "beta": 0.5, "N": 256, "seed": 3}
        {"kind": "triangle", "N": 1024}
        {"kind": "const", "value": 2.0}
    """
    if isinstance(spec, str):
        name = spec.strip()
        if name in _NAMED:
            N, c = _from_dict_coeffs(_NAMED[name])
            return CircleSymbol(N, c, {"kind": "trig", "name": name})
        if name.startswith("e"):
            try:
                k = int(name[1:])
            except ValueError:
                raise InputError(f"unknown symbol name {spec!r}") from None
            N, c = _from_dict_coeffs({k: 1.0})
            return CircleSymbol(N, c, {"kind": "trig", "name": name})
        raise InputError(f"unknown symbol name {spec!r}")
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InputError(f"malformed symbol spec {spec!r}")

    kind = spec["kind"]
    allowed = {
        "lacunary": {"beta", "n_max"},
        "trig": {"coeffs", "N"},
        "random": {"beta", "N", "seed"},
        "triangle": {"N"},
        "const": {"value"},
    }
    if kind not in allowed:
        raise InputError(f"unknown symbol kind {kind!r}")
    extra = set(spec) - allowed[kind] - {"kind"}
    if extra:
        raise InputError(f"unknown keys for {kind!r}: {sorted(extra)}")

    if kind == "lacunary":
        return make_lacunary(float(spec["beta"]), int(spec["n_max"]))
    if kind == "trig":
        N, c = _from_dict_coeffs(spec["coeffs"], spec.get("N"))
        return CircleSymbol(N, c, {"kind": "trig"})
    if kind == "const":
        return CircleSymbol(0, [complex(spec["value"])], {"kind": "const"})
    if kind == "triangle":
        N = int(spec["N"])
        k = np.arange(-N, N + 1)
        c = np.zeros(2 * N + 1, dtype=complex)
        odd = k % 2 == 1
        c[odd] = 1.0 / k[odd].astype(float) ** 2
        return CircleSymbol(N, c, {"kind": "triangle", "N": N})
    # random
    beta = float(spec["beta"])
    N = int(spec["N"])
    seed = int(spec["seed"])
    if N < 1:
        raise InputError("random symbols need N >= 1")
    rng = np.random.default_rng(seed)
    k = np.arange(1, N + 1)
    xi = (rng.standard_normal(N) + 1j * rng.standard_normal(N)) / math.sqrt(2.0)
    pos = xi * k ** (-beta - 0.5)
    c = np.zeros(2 * N + 1, dtype=complex)
    c[N + 1:] = pos
    c[:N] = np.conj(pos[::-1])
    return CircleSymbol(N, c, {"kind": "random", "beta": beta, "N": N, "seed": seed})


# -- norms on grids ---------------------------------------------------------

def _eval_grid(f: CircleSymbol, oversample=4, minimum=8):
    g = max(minimum, oversample * max(f.N, 1))
    g = 1 << int(math.ceil(math.log2(g)))
    if g <= 2 * f.N:
        g *= 2
    return f.evaluate(g)


def sup_norm(f: CircleSymbol, oversample=4) -> float:
    return float(np.max(np.abs(_eval_grid(f, oversample))))


def lipschitz_seminorm(f: CircleSymbol, oversample=4) -> float:
    """Sup of ``|f'|`` sampled on an oversampled grid."""
    deriv = f.with_coeffs(1j * f.frequencies * f.coeffs)
    return sup_norm(deriv, oversample)


@dataclass
class HolderReport:
    alpha: float
    cc_alpha: float
    estimate: float
    witness: tuple
    grid: int


def holder_seminorm(f: CircleSymbol, alpha: float, grid: int) -> HolderReport:
    """Sampled ``sup |f(x) - f(y)| / |x - y|^alpha`` in arc length.

    Pairs are all grid points at dyadic separations ``2^p`` grid steps, up to
    half the circle.  The estimate is a lower bound for the true seminorm and
    is nondecreasing when ``grid`` doubles.
    """
    if grid < 8:
        raise InputError("grid must be >= 8")
    if grid <= 2 * f.N:
        raise InputError(f"grid {grid} aliases frequencies up to {f.N}")
    vals = f.evaluate(grid)
    step = 2 * math.pi / grid
    best, witness = 0.0, (0.0, 0.0)
    shift = 1
    while shift <= grid // 2:
        diff = np.abs(np.roll(vals, -shift) - vals)
        i = int(np.argmax(diff))
        q = diff[i] / (shift * step) ** alpha
        if q > best:
            best, witness = float(q), (i * step, ((i + shift) % grid) * step)
        shift *= 2
    return HolderReport(alpha=alpha, cc_alpha=2 * alpha, estimate=best, witness=witness, grid=grid)


# -- Littlewood-Paley -------------------------------------------------------

def _smooth_step(x):
    out = np.zeros_like(x, dtype=float)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def bump(xi):
    """C^infinity radial cutoff: 1 for |xi| <= 1, 0 for |xi| >= 2."""
    r = np.abs(np.asarray(xi, dtype=float))
    a = _smooth_step(2.0 - r)
    b = _smooth_step(r - 1.0)
    out = a / (a + b)
    out[r <= 1.0] = 1.0
    out[r >= 2.0] = 0.0
    return out


def lp_window(j: int, radius) -> np.ndarray:
    """Window of block ``j`` evaluated at the (possibly anisotropic) radius."""
    radius = np.asarray(radius, dtype=float)
    if j < 0:
        return np.zeros_like(radius)
    if j == 0:
        return bump(radius)
    return bump(radius / 2.0**j) - bump(radius / 2.0 ** (j - 1))


def n_blocks(N: int) -> int:
    """Number of blocks needed so that block windows cover ``|k| <= N``."""
    J = 0
    while 2**J <= N:
        J += 1
    return J + 1


@dataclass
class BlockDecomposition:
    source: CircleSymbol
    windows: np.ndarray
    blocks: list

    def reconstruct(self) -> np.ndarray:
        return np.sum([b.coeffs for b in self.blocks], axis=0)

    def three_term_residual(self) -> float:
        """``max_j |(Phi_{j-1} + Phi_j + Phi_{j+1}) Phi_j f - Phi_j f|`` on coefficients."""
        W = self.windows
        J = W.shape[0]
        worst = 0.0
        for j in range(J):
            s = W[j].copy()
            if j > 0:
                s += W[j - 1]
            if j + 1 < J:
                s += W[j + 1]
            lhs = s * W[j] * self.source.coeffs
            worst = max(worst, float(np.max(np.abs(lhs - self.blocks[j].coeffs))))
        return worst


def lp_blocks(f: CircleSymbol) -> BlockDecomposition:
    J = n_blocks(f.N)
    k = np.abs(f.frequencies)
    windows = np.array([lp_window(j, k) for j in range(J)])
    blocks = [f.with_coeffs(w * f.coeffs, block=j) for j, w in enumerate(windows)]
    return BlockDecomposition(f, windows, blocks)


def block_sup_norms(f: CircleSymbol, decomp: BlockDecomposition | None = None) -> np.ndarray:
    decomp = decomp or lp_blocks(f)
    return np.array([sup_norm(b) if np.any(b.coeffs) else 0.0 for b in decomp.blocks])


def besov_norm(f: CircleSymbol, s: float, q) -> float:
    """``l^q`` over ``j`` of ``2^{js} ||Phi_j f||_inf``; ``q`` is 1 or inf."""
    if s < 0:
        raise InputError("s must be >= 0")
    norms = block_sup_norms(f)
    terms = 2.0 ** (s * np.arange(len(norms))) * norms
    if q in (1, "1"):
        return float(np.sum(terms))
    if q in (math.inf, "inf", "∞"):
        return float(np.max(terms)) if terms.size else 0.0
    raise InputError(f"q must be 1 or inf, got {q!r}")


def holder_norm(f: CircleSymbol, s: float, grid: int | None = None) -> float:
    """``||f||_inf + |f|_{C^s}`` with the sampled seminorm."""
    if grid is None:
        grid = 1 << max(10, int(math.ceil(math.log2(8 * max(f.N, 1)))))
    return sup_norm(f) + holder_seminorm(f, s, grid).estimate


def _is_constant(f: CircleSymbol) -> bool:
    c = f.coeffs.copy()
    c[f.N] = 0
    return not np.any(c)


def besov_holder_equiv_check(corpus, s: float, grid: int | None = None) -> dict:
    """Ratios ``||f||_{B^s_{inf,inf}} / (||f||_inf + |f|_{C^s})`` over a corpus.

    Constant symbols are skipped.  Reports the extremes and each ratio.
    """
    if not (0 < s < 1):
        raise InputError("s must lie in (0, 1)")
    corpus = list(corpus)
    if not corpus:
        raise InputError("corpus is empty")
    rows = []
    for i, f in enumerate(corpus):
        if _is_constant(f):
            rows.append({"index": i, "meta": f.meta, "ratio": None})
            continue
        b = besov_norm(f, s, math.inf)
        h = holder_norm(f, s, grid)
        rows.append({"index": i, "meta": f.meta, "besov": b, "holder": h, "ratio": b / h})
    r = np.array([row["ratio"] for row in rows if row["ratio"] is not None])
    if not (r.size and np.all(np.isfinite(r)) and np.all(r > 0)):
        raise InputError("equivalence ratios must be finite and positive")
    return {"s": s, "min": float(r.min()), "max": float(r.max()),
            "band": float(r.max() / r.min()), "rows": rows}


def k_functional_probe(f: CircleSymbol, theta: float, t_grid, block_constant: float = 2.0) -> dict:
    """Upper bounds for the K-functional of the couple (C, Lip) at ``f``.

    For each truncation level ``J`` (``-1`` meaning ``g = 0``) the partial sum
    ``g = sum_{j <= J} Phi_j f`` is admissible, giving

        K(t, f) <= ||f - g||_inf + t (||g||_inf + |g|_Lip).

    ``khat`` minimises this over ``J`` with every norm computed directly.
    ``khat_blocks`` uses the block estimates instead:
    ``sum_{j > J} ||Phi_j f||_inf + t (||g||_inf + C sum_{j <= J} 2^j ||Phi_j f||_inf)``
    with ``C = block_constant`` (2 is Bernstein's constant for frequencies
    below ``2^{j+1}``).  Reports ``sup_t t^-theta khat`` next to the
    ``C^theta`` norm.
    """
    if not (0 < theta < 1):
        raise InputError("theta must lie in (0, 1)")
    t_grid = np.asarray(list(t_grid), dtype=float)
    decomp = lp_blocks(f)
    J = len(decomp.blocks)
    bnorm = block_sup_norms(f, decomp)
    partial = np.zeros_like(f.coeffs)
    fit_err, lip, gsup = [sup_norm(f)], [0.0], [0.0]
    for j in range(J):
        partial = partial + decomp.blocks[j].coeffs
        g = f.with_coeffs(partial)
        fit_err.append(sup_norm(f.with_coeffs(f.coeffs - partial)))
        lip.append(lipschitz_seminorm(g))
        gsup.append(sup_norm(g))
    fit_err, lip, gsup = map(np.array, (fit_err, lip, gsup))
    tail = np.array([bnorm[j:].sum() for j in range(J + 1)])
    head = np.concatenate([[0.0], np.cumsum(2.0 ** np.arange(J) * bnorm)])

    khat = np.array([np.min(fit_err + t * (gsup + lip)) for t in t_grid])
    jstar = np.array([int(np.argmin(fit_err + t * (gsup + lip))) - 1 for t in t_grid])
    khat_blocks = np.array([np.min(tail + t * (gsup + block_constant * head)) for t in t_grid])
    scaled = t_grid ** (-theta) * khat
    return {
        "theta": theta,
        "t": t_grid.tolist(),
        "khat": khat.tolist(),
        "khat_blocks": khat_blocks.tolist(),
        "J": jstar.tolist(),
        "sup_scaled": float(np.max(scaled)),
        "sup_scaled_blocks": float(np.max(t_grid ** (-theta) * khat_blocks)),
        "holder_norm": holder_norm(f, theta),
        "lip_norm": float(gsup[-1] + lip[-1]),
        "sup_norm": float(fit_err[0]),
    }


def default_corpus() -> list:
    """Twenty test symbols: lacunary, random Holder-type, and smooth ones."""
    out = [make_lacunary(b, 10) for b in (0.25, 0.5, 0.75, 1.0)]
    out += [make_symbol({"kind": "random", "beta": b, "N": 512, "seed": s})
            for b in (0.25, 0.5, 0.75) for s in range(4)]
    out += [make_symbol("cos"), make_symbol("sin"), make_symbol({"kind": "triangle", "N": 256}),
            make_symbol({"kind": "trig", "coeffs": {"2": 0.5, "-2": 0.5, "5": 0.3j, "-5": -0.3j}})]
    return out
