import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heislab.errors import AliasingError, InputError, TailBoundError
from heislab.dixmier import (
    bound_integral,
    bound_integral_closed,
    bound_report,
    bound_subsum,
    bound_subsum_terms,
    gamma_lattice_sum,
    gamma_lattice_values,
    lacunary_xi_estimate,
    lattice_tail_bound,
    log_cesaro,
    log_cesaro_signed,
    pgl_matrix_oracle,
    required_n_max,
    xi_commutator_diagonal,
    xi_diagonal,
    xi_diagonal_estimate,
    zeta_diagonal,
    zeta_estimate,
)
from heislab.symbols import make_lacunary, make_symbol

SQ2 = math.sqrt(2.0)
# independent geometric summations (see the ledger for the derivations)
L0_LIMIT = (2 + SQ2) ** 2 + SQ2 * (2 + SQ2)
L1_LIMIT = 4 + 3.5 * SQ2  # admissible pairs of the operator
L1_PRINTED_LIMIT = 1 + SQ2  # pairs 2^n - l >= 2^m >= l + 1


def test_log_cesaro_examples():
    x = np.zeros(1000)
    x[0] = 1
    s = log_cesaro(x, [1, 10, 999])
    assert np.allclose(s.partial, 1 / np.log(np.array([3, 12, 1001])), rtol=1e-15)
    h = 1.0 / np.arange(1, 2**16 + 2)
    s = log_cesaro(h, [2**j for j in range(4, 17)])
    # harmonic sums over log(N + 2) tend to 1 slowly
    assert np.all(np.diff(s.partial) < 0) and 1 < s.partial[-1] < 1.06
    assert s.to_csv().startswith("N,Lambda\n16,")
    assert s.dyadic_stats()["count"] == 13
    with pytest.raises(InputError):
        log_cesaro([1.0, -0.5], [1])
    with pytest.raises(InputError):
        log_cesaro([1.0, 0.5], [5])
    sg = log_cesaro_signed([1.0, -2.0, 1j], [2])
    assert sg["combined"][0] == pytest.approx((-1 + 1j) / math.log(4))


def test_closed_form_l0():
    g = gamma_lattice_sum(0, 0.25, 18)
    lo, hi = g.interval()
    assert lo <= L0_LIMIT <= hi
    g = gamma_lattice_sum(0, 0.25, 160)
    assert g.value == pytest.approx(L0_LIMIT, rel=1e-12)


def test_closed_form_l1_operator_pairs():
    lo, hi = gamma_lattice_sum(1, 0.25, 18).interval()
    assert lo <= L1_LIMIT <= hi
    assert gamma_lattice_sum(1, 0.25, 200).value == pytest.approx(L1_LIMIT, rel=1e-12)
    # the matrix oracle sees the same finite object
    assert pgl_matrix_oracle(1, 0.25, 14) == pytest.approx(gamma_lattice_sum(1, 0.25, 14).value, rel=1e-12)


def test_closed_form_l1_printed_pairs():
    g = gamma_lattice_sum(1, 0.25, 18, rule="printed")
    lo, hi = g.interval()
    assert lo <= L1_PRINTED_LIMIT <= hi
    assert gamma_lattice_sum(1, 0.25, 200, rule="printed").value == pytest.approx(L1_PRINTED_LIMIT, rel=1e-12)


@pytest.mark.parametrize("l", [0, 1, 3, 7, 20, 64])
def test_lattice_matches_oracle(l):
    a = gamma_lattice_sum(l, 0.25, 12).value
    b = pgl_matrix_oracle(l, 0.25, 12)
    assert abs(a - b) <= 1e-12 * max(a, 1e-300)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 40), st.sampled_from([0.25, 0.5, 0.8]), st.integers(2, 9))
def test_lattice_matches_oracle_property(l, beta, n_max):
    a = gamma_lattice_sum(l, beta, n_max).value
    b = pgl_matrix_oracle(l, beta, n_max)
    assert abs(a - b) <= 1e-12 * max(a, 1.0)


def test_empty_constraint_set():
    assert pgl_matrix_oracle(40, 0.25, 5) == 0.0
    assert gamma_lattice_sum(40, 0.25, 5).value == 0.0


def test_batch_matches_scalar():
    ls = np.arange(0, 300)
    for rule in ("operator", "printed"):
        batch = gamma_lattice_values(ls, 0.25, 16, rule)
        single = np.array([gamma_lattice_sum(int(l), 0.25, 16, rule).value for l in ls])
        assert np.max(np.abs(batch - single) / np.maximum(single, 1e-300)) <= 1e-13


def test_doubling_index_shift():
    ls = np.arange(1, 513)
    a = gamma_lattice_values(ls, 0.25, 20)
    b = gamma_lattice_values(2 * ls, 0.25, 21)
    assert np.max(np.abs(b - a / 2) / a) <= 1e-12


def test_doubling_untruncated():
    ls = np.arange(1, 513)
    n = required_n_max(512, 0.25, 1e-14)
    a = gamma_lattice_values(ls, 0.25, n)
    b = gamma_lattice_values(2 * ls, 0.25, n)
    assert np.max(np.abs(b - a / 2) / a) <= 1e-12


@pytest.mark.parametrize("l", [0, 1, 5, 100])
def test_tail_bound_is_rigorous_and_geometric(l):
    ref = gamma_lattice_sum(l, 0.25, 300).value
    tails = []
    for n in (12, 18, 24, 30):
        g = gamma_lattice_sum(l, 0.25, n)
        assert g.value <= ref <= g.value + g.tail_bound
        tails.append(g.tail_bound)
    assert all(b < a for a, b in zip(tails, tails[1:]))
    assert g.tail_bound == lattice_tail_bound(l, 0.25, 30, g.value)


def test_required_n_max():
    n = required_n_max(1000, 0.25, 1e-8)
    g = gamma_lattice_sum(1000, 0.25, n)
    assert g.tail_bound <= 1e-8 * g.value


def test_lattice_input_validation():
    with pytest.raises(InputError):
        gamma_lattice_sum(-1)
    with pytest.raises(InputError):
        gamma_lattice_sum(1, 0.25, 0)
    with pytest.raises(InputError):
        gamma_lattice_sum(1, rule="other")


def test_subsum_below_exact_termwise():
    for l in (1, 2, 3, 5, 17, 100, 1000):
        n = required_n_max(l, 0.25, 1e-10)
        exact = gamma_lattice_sum(l, 0.25, n).value
        assert bound_subsum(l) <= exact
        # each sub-sum term is dominated by the diagonal term of the pair (n, n - 1)
        for n_i, t in bound_subsum_terms(l, 20):
            assert 2.0 ** (n_i - 1) >= l + 1 and 2.0 ** (n_i - 1) <= 2.0**n_i - l
            assert t <= 2.0 ** (-(2 * n_i - 1) / 2) * (1 + 1e-15)


def test_quadrature_matches_antiderivative():
    for l in (1, 2, 3, 10, 4095, 4096):
        assert bound_integral(l) == pytest.approx(bound_integral_closed(l), rel=1e-10)
        a = (2 * l).bit_length()
        assert bound_integral(l, a) == pytest.approx(bound_integral_closed(l, a), rel=1e-10)
    assert bound_integral_closed(1) == pytest.approx((2 / math.log(2)) * (1 - math.sqrt(0.75)), rel=1e-14)


def test_bound_report_small():
    rep = bound_report(64, 14)
    assert rep["summary"]["lattice=oracle"]["FAILS"] == 0
    assert rep["summary"]["exact>=subsum"]["FAILS"] == 0
    assert rep["summary"]["subsum>=integral_from_first_index"]["FAILS"] == 0
    assert rep["summary"]["quadrature=closed"]["FAILS"] == 0
    row = rep["rows"][0]
    assert row["l"] == 1 and row["claimed_bound"] == pytest.approx(2 / math.log(2))
    assert {"lattice", "oracle", "claimed_bound", "subsum", "integral", "flags"} <= set(row)
    with pytest.raises(TailBoundError) as info:
        bound_report(16, 10, strict=True)
    assert info.value.required_n_max > 10


def test_xi_constant_symbol_vanishes():
    W = make_lacunary(0.25, 5)
    one = make_symbol({"kind": "const", "value": 2.0})
    for pos in range(4):
        tup = [W] * 4
        tup[pos] = one
        assert not np.any(xi_diagonal(tup, 40, 2))


def test_xi_rows_match_lattice():
    W = make_lacunary(0.25, 8)
    rows = xi_diagonal_estimate([W] * 4, 300, path="rows")
    lat = xi_diagonal_estimate([W] * 4, 300, path="lattice")
    assert np.max(np.abs(rows.diagonal - lat.diagonal)) <= 1e-12 * np.max(lat.diagonal)


def test_xi_positivity_for_equal_real_symbols():
    for seed in range(3):
        a = make_symbol({"kind": "random", "beta": 0.5, "N": 30, "seed": seed})
        d = xi_diagonal([a] * 4, 200, 2)
        assert np.all(d.real >= -1e-12) and np.max(np.abs(d.imag)) <= 1e-12
        c = xi_commutator_diagonal([a] * 4, 200, 2)
        assert np.allclose(c, d, atol=1e-14)


def test_xi_constant_invariance():
    rng = np.random.default_rng(0)
    syms = [make_symbol({"kind": "random", "beta": 0.5, "N": 20, "seed": s}) for s in range(4)]
    base = xi_diagonal(syms, 100, 2)
    shifted = [a.plus_constant(complex(*rng.normal(size=2))) for a in syms]
    assert np.max(np.abs(xi_diagonal(shifted, 100, 2) - base)) <= 1e-13 * max(1.0, np.max(np.abs(base)))


def test_zeta_alternating_sum_identity():
    for seed in range(3):
        syms = [make_symbol({"kind": "random", "beta": 0.5, "N": 12, "seed": 10 * seed + i}) for i in range(4)]
        est = zeta_estimate(syms, 256, 2)
        assert est.checks["alternating_sum_residual"] <= 1e-8


def test_holomorphic_pair_xi_equals_zeta():
    e1, em1 = make_symbol("e1"), make_symbol("e-1")
    tup = [e1, em1, e1, em1]
    assert np.allclose(xi_diagonal(tup, 64, 2), zeta_diagonal(tup, 64, 2), atol=1e-15)


def test_xi_commutator_sign():
    e1, em1 = make_symbol("e1"), make_symbol("e-1")
    a = xi_diagonal([e1, em1], 32, 1)
    b = xi_commutator_diagonal([e1, em1], 32, 1)
    assert np.any(a) and np.allclose(b, -a)


def test_xi_trig_small():
    est = xi_diagonal_estimate([make_symbol("cos")] * 4, 2**10)
    # trig polynomials give a finitely supported diagonal
    assert np.count_nonzero(np.abs(est.diagonal) > 1e-15) <= 4
    assert est.partials.value_at(2**10) == pytest.approx(
        np.sum(est.diagonal.real) / math.log(2**10 + 2), rel=1e-12)


def test_aliasing_and_size_guards():
    W = make_lacunary(0.25, 6)
    with pytest.raises(AliasingError):
        xi_diagonal([W] * 4, 100, 2, window=50)
    with pytest.raises(InputError):
        xi_diagonal_estimate([W] * 3, 100)
    with pytest.raises(InputError):
        xi_diagonal_estimate([make_symbol("cos")] * 4, 100, path="lattice")


def test_lacunary_estimate_matches_explicit_truncation():
    est = lacunary_xi_estimate(0.25, 2**10)
    assert est.checks["max_sampled_tail_bound"] <= 1e-8 * est.diagonal.max()
    W = make_lacunary(0.25, 14)
    trunc = xi_diagonal_estimate([W] * 4, 2**10)
    assert trunc.path == "lattice"
    # truncation lowers every diagonal entry
    assert np.all(trunc.diagonal <= est.diagonal * (1 + 1e-12))
    rec = est.to_record()
    assert rec["path"] == "lattice" and rec["N"][-1] == 2**10
