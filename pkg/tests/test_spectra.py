import numpy as np
import pytest

from heislab.errors import InputError
from heislab.hardy import TruncatedOperator, commutator_P, hankel_op
from heislab.spectra import (
    SingularSpectrum,
    decay_fit,
    lanczos_singular_values,
    singular_values,
    weak_schatten_quasinorm,
)
from heislab.symbols import CircleSymbol, make_lacunary, make_symbol


def smooth_symbol(N=1200, power=4.0):
    k = np.arange(-N, N + 1)
    return CircleSymbol(N, ((1.0 + np.abs(k)) ** -power).astype(complex), {"kind": "smooth"})


def test_spectrum_validation_and_csv():
    s = SingularSpectrum.from_values([3.0, 1.0, 0.5], N=1)
    assert s.count == 3
    assert s.to_csv().splitlines()[0] == "k,mu"
    assert s.to_csv().splitlines()[1] == "0,3.0"
    with pytest.raises(InputError):
        SingularSpectrum(np.array([1.0, 2.0]), "dense", 1)
    with pytest.raises(InputError):
        SingularSpectrum(np.array([1.0, -1.0]), "dense", 1)


def test_zero_operator():
    op = hankel_op(make_symbol("one"), 10)
    assert not np.any(singular_values(op).values)
    assert not np.any(singular_values(op, 4, method="iterative").values)


@pytest.mark.parametrize("method", ["dense", "iterative"])
def test_rank_one(method):
    s = singular_values(hankel_op(make_symbol("e-1"), 40), 6, method=method)
    assert s.values[0] == pytest.approx(1.0, rel=1e-12)
    assert np.all(s.values[1:] <= 1e-12)


def test_lanczos_matches_dense():
    for a in (make_lacunary(0.25, 8), make_symbol({"kind": "random", "beta": 0.5, "N": 200, "seed": 3})):
        op = hankel_op(a, 300)
        d = singular_values(op, 60, method="dense").values
        lz = lanczos_singular_values(op, 60)
        assert np.max(np.abs(lz.values - d)) <= 1e-8 * d[0]
        assert lz.info["max_residual"] <= 1e-8 * d[0]


def test_lanczos_complex_operator():
    a = make_symbol({"kind": "trig", "coeffs": {"3": 1j, "-5": 0.5, "-2": 0.2 - 0.1j}})
    op = commutator_P(a, 100)
    d = singular_values(op, 8, method="dense").values
    assert np.allclose(lanczos_singular_values(op, 8).values, d, atol=1e-10)


def test_lanczos_on_generic_operator_is_seed_independent():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((41, 41))
    op = TruncatedOperator(20, lambda v: A @ v, lambda v: A.T @ v, {"kind": "test"})
    d = np.linalg.svd(A, compute_uv=False)
    for seed in (0, 1):
        assert np.allclose(lanczos_singular_values(op, 10, seed=seed).values, d[:10], atol=1e-10)


@pytest.mark.slow
def test_head_stability_W():
    # W truncated at 2^9 fits inside both windows, so the head must agree
    W = make_lacunary(0.25, 9)
    big = singular_values(hankel_op(W, 2**12), 512).values
    small = singular_values(hankel_op(W, 2**9), method="dense").values
    assert np.max(np.abs(big[:64] - small[:64]) / small[:64]) <= 1e-6


def test_monotone_in_truncation():
    a = make_symbol({"kind": "random", "beta": 0.5, "N": 150, "seed": 5})
    prev = None
    for N in (40, 80, 160, 320):
        s = singular_values(hankel_op(a, N)).values
        if prev is not None:
            m = len(prev)
            assert np.all(s[:m] >= prev - 1e-10)
        prev = s


def test_quasinorm_examples():
    k = np.arange(100)
    assert weak_schatten_quasinorm(1.0 / (k + 1), 1) == pytest.approx(1.0)
    e = np.zeros(10)
    e[0] = 1
    for p in (0.3, 1, 4):
        assert weak_schatten_quasinorm(e, p) == 1.0
    with pytest.raises(InputError):
        weak_schatten_quasinorm(e, 0)


@pytest.mark.parametrize("beta", [0.25, 0.5])
def test_quasinorm_stable_for_W(beta):
    W = make_lacunary(beta, 12)
    q = [weak_schatten_quasinorm(singular_values(hankel_op(W, N)), 1 / beta) for N in (128, 256, 511)]
    assert np.all(np.isfinite(q))
    for a, b in zip(q, q[1:]):
        assert abs(b - a) <= 0.1 * a


def test_decay_fit_examples():
    k = np.arange(1000)
    fit = decay_fit((k + 1.0) ** -0.5, (16, 512))
    assert fit.p_hat == pytest.approx(2.0, rel=1e-12)
    assert fit.residual < 1e-12 and fit.points == 497
    with pytest.raises(InputError):
        decay_fit((k + 1.0) ** -0.5, (16, 20))
    with pytest.raises(InputError):
        decay_fit((k + 1.0) ** -0.5, (16, 5000))


def test_decay_fit_smooth_symbol():
    s = singular_values(hankel_op(smooth_symbol(), 600), method="dense")
    assert decay_fit(s, (16, 512)).exponent >= 2


def test_hankel_contraction_random():
    for seed in range(5):
        a = make_symbol({"kind": "random", "beta": 0.25, "N": 64, "seed": seed})
        top = singular_values(hankel_op(a, 64), 1).values[0]
        assert top <= np.max(np.abs(a.evaluate(4096))) + 1e-8


def test_commutator_spectrum_constant_invariant():
    a = make_lacunary(0.5, 6)
    s1 = singular_values(commutator_P(a, 100)).values
    s2 = singular_values(commutator_P(a.plus_constant(7.0), 100)).values
    assert np.max(np.abs(s1 - s2)) <= 1e-12


def test_cache_roundtrip(tmp_path):
    op = hankel_op(make_lacunary(0.5, 7), 200)
    a = singular_values(op, 30, cache_dir=str(tmp_path))
    b = singular_values(op, 30, cache_dir=str(tmp_path))
    assert b.info.get("cached")
    assert np.max(np.abs(a.values - b.values)) <= 1e-12
    c = singular_values(hankel_op(make_lacunary(0.5, 7), 201), 30, cache_dir=str(tmp_path))
    assert not c.info.get("cached")


def test_bad_k():
    op = hankel_op(make_symbol("e1"), 3)
    with pytest.raises(InputError):
        singular_values(op, 0)
    with pytest.raises(InputError):
        singular_values(op, 8)
