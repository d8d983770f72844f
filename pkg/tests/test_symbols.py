import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heislab.errors import InputError
from heislab.symbols import (
    CircleSymbol,
    besov_holder_equiv_check,
    besov_norm,
    block_sup_norms,
    bump,
    default_corpus,
    holder_seminorm,
    k_functional_probe,
    lp_blocks,
    make_lacunary,
    make_symbol,
    sup_norm,
)


def test_lacunary_coefficients():
    W = make_lacunary(0.25, 12)
    for n in range(13):
        assert W.coeff(2**n) == pytest.approx(2 ** (-n / 4), rel=1e-15)
        assert W.coeff(-(2**n)) == W.coeff(2**n)
    assert W.coeff(3) == 0
    assert set(np.abs(W.support)) == {2**n for n in range(13)}
    assert W(0.0).real == pytest.approx(sum(2 * 2 ** (-n / 4) for n in range(13)), rel=1e-13)
    assert W.is_real


@pytest.mark.parametrize("beta", [0.0, -0.5, 1.5])
def test_lacunary_rejects_beta(beta):
    with pytest.raises(InputError):
        make_lacunary(beta, 4)


def test_make_symbol_examples():
    e1 = make_symbol("e1")
    assert e1.coeff(1) == 1 and e1.coeff(0) == 0 and e1.coeff(-1) == 0
    c = make_symbol("cos")
    assert c.coeff(1) == 0.5 and c.coeff(-1) == 0.5
    spec = {"kind": "random", "beta": 0.5, "N": 64, "seed": 7}
    a, b = make_symbol(spec), make_symbol(spec)
    assert np.array_equal(a.coeffs, b.coeffs)
    assert not np.array_equal(a.coeffs, make_symbol(dict(spec, seed=8)).coeffs)
    assert a.is_real
    for bad in ("nope", {"kind": "weird"}, {"kind": "lacunary", "beta": 0.5}, 3,
                {"kind": "const", "value": 1, "extra": 2}):
        with pytest.raises((InputError, KeyError)):
            make_symbol(bad)


def test_holder_examples():
    assert holder_seminorm(make_symbol("one"), 0.5, 64).estimate == 0
    r = holder_seminorm(make_symbol("e1"), 1.0, 4096)
    assert r.estimate == pytest.approx(1.0, rel=1e-5)
    assert r.cc_alpha == 2.0
    with pytest.raises(InputError):
        holder_seminorm(make_symbol("e1"), 0.5, 4)


def test_holder_lacunary_grid_stability():
    W = make_lacunary(0.25, 12)
    a = holder_seminorm(W, 0.25, 2**14).estimate
    b = holder_seminorm(W, 0.25, 2**15).estimate
    assert 0 < a <= b * (1 + 1e-12)
    assert abs(b - a) <= 0.05 * a


def test_holder_monotone_under_refinement():
    f = make_symbol({"kind": "random", "beta": 0.5, "N": 128, "seed": 1})
    vals = [holder_seminorm(f, 0.5, 2**p).estimate for p in range(9, 14)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_bump_properties():
    x = np.linspace(0, 3, 3001)
    b = bump(x)
    assert np.all(b[x <= 1] == 1) and np.all(b[x >= 2] == 0)
    assert np.all(np.diff(b) <= 0)


@pytest.mark.parametrize("j", [1, 3, 6])
def test_single_mode_block(j):
    f = make_symbol(f"e{2**j}")
    d = lp_blocks(f)
    w = [blk.coeff(2**j) for blk in d.blocks]
    assert sum(w) == pytest.approx(1.0, abs=1e-15)
    active = [i for i, v in enumerate(w) if v != 0]
    assert set(active) <= {j - 1, j, j + 1}


def test_partition_support_three_term_on_corpus():
    for f in default_corpus():
        d = lp_blocks(f)
        err = np.max(np.abs(d.reconstruct() - f.coeffs)) / np.max(np.abs(f.coeffs))
        assert err <= 1e-12
        assert d.three_term_residual() <= 1e-12
        k = np.abs(f.frequencies)
        for j, blk in enumerate(d.blocks):
            outside = (k <= 2 ** (j - 1)) | (k >= 2 ** (j + 1)) if j > 0 else k >= 2
            assert np.all(blk.coeffs[outside] == 0)


def test_besov_examples():
    assert besov_norm(CircleSymbol(0, [0.0], {}), 0.5, math.inf) == 0
    f = make_symbol("e12")
    d = lp_blocks(f)
    expect = max(2 ** (0.5 * j) * abs(b.coeff(12)) for j, b in enumerate(d.blocks))
    assert besov_norm(f, 0.5, math.inf) == pytest.approx(expect, rel=1e-12)
    with pytest.raises(InputError):
        besov_norm(f, -1, 1)
    with pytest.raises(InputError):
        besov_norm(f, 0.5, 2)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 1))
def test_besov_linf_below_l1(seed, s):
    f = make_symbol({"kind": "random", "beta": 0.5, "N": 64, "seed": seed})
    assert besov_norm(f, s, math.inf) <= besov_norm(f, s, 1) * (1 + 1e-12)


@pytest.mark.parametrize("beta", [0.25, 0.5])
def test_besov_lacunary(beta):
    vals = []
    for n_max in range(8, 13):
        f = make_lacunary(beta, n_max)
        b = besov_norm(f, beta, math.inf)
        assert b <= 2 * max(2 ** (beta * j) * v for j, v in enumerate(block_sup_norms(f)))
        vals.append(b)
    assert max(vals) / min(vals) <= 4


def test_equivalence_examples():
    rep = besov_holder_equiv_check([make_symbol("e1")], 0.5)
    assert 0 < rep["min"] < np.inf
    lac = [make_lacunary(0.5, n) for n in range(6, 12)]
    assert besov_holder_equiv_check(lac, 0.5)["band"] <= 4
    rep = besov_holder_equiv_check([make_symbol("one"), make_symbol("e1")], 0.5)
    assert rep["rows"][0]["ratio"] is None
    with pytest.raises(InputError):
        besov_holder_equiv_check([], 0.5)


def test_corpus_band():
    corpus = default_corpus()
    assert len(corpus) == 20
    for s in (0.25, 0.5):
        rep = besov_holder_equiv_check(corpus, s)
        assert rep["band"] < 50


def test_k_functional():
    t = np.logspace(-4, 4, 17)
    f = make_symbol({"kind": "trig", "coeffs": {"3": 0.5, "-3": 0.5, "1": 0.25j, "-1": -0.25j}})
    rep = k_functional_probe(f, 0.5, t)
    khat = np.array(rep["khat"])
    assert np.all(khat <= t * rep["lip_norm"] * (1 + 1e-12))
    # large t: the best choice is g = 0 and K saturates at ||f||_inf
    assert rep["J"][-1] == -1
    assert khat[-1] == pytest.approx(sup_norm(f), rel=1e-12)
    W = make_lacunary(0.5, 12)
    rep = k_functional_probe(W, 0.5, np.logspace(-5, 1, 25))
    ratio = rep["sup_scaled"] / rep["holder_norm"]
    assert 0.1 <= ratio <= 10
    assert np.all(np.array(rep["khat"]) <= np.array(rep["khat_blocks"]) * (1 + 1e-12))
