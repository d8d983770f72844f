import numpy as np
import pytest

from heislab.aniso import (
    aniso_blocks,
    aniso_blocks_check,
    aniso_holder_seminorm,
    aniso_radius,
    gauge_profile,
    random_bandlimited,
)
from heislab.errors import InputError
from heislab.heis import standard_config

H1 = standard_config(2)


def grid(n):
    x = np.arange(n) * (2 * np.pi / n)
    return np.meshgrid(x, x, x, indexing="ij")


def test_radius_weights():
    rho = aniso_radius(16)
    assert rho[4, 0, 0] == pytest.approx(2.0)  # tau = 4 has weight 2
    assert rho[0, 2, 0] == pytest.approx(2.0)
    assert rho[0, 0, 0] == 0


def test_single_mode_dominant_block():
    T, Z1, Z2 = grid(32)
    rep = aniso_blocks_check(H1, np.cos(4 * Z1), with_holder=False)
    assert rep.dominant_block == 2
    assert rep.three_term_residual <= 1e-8 and rep.partition_residual <= 1e-12
    rep = aniso_blocks_check(H1, np.sin(T), with_holder=False)
    assert rep.dominant_block == 0


def test_random_bandlimited_identities():
    rng = np.random.default_rng(0)
    for _ in range(10):
        f = random_bandlimited(32, 12, rng)
        rep = aniso_blocks_check(H1, f, with_holder=False)
        assert rep.three_term_residual <= 1e-8
        assert rep.partition_residual <= 1e-12


def test_blocks_sum_to_function():
    f = random_bandlimited(16, 6, 1)
    _, blocks, _ = aniso_blocks(f)
    assert np.max(np.abs(np.sum(blocks, axis=0) - f)) <= 1e-12 * np.max(np.abs(f))


def test_gauge_profile_finite_ratio():
    f = gauge_profile(32, 0.5)
    rep = aniso_blocks_check(H1, f, 0.5)
    assert np.isfinite(rep.ratio) and 0 < rep.ratio < np.inf
    assert rep.holder_seminorm > 0


def test_holder_seminorm_of_horizontal_mode():
    T, Z1, Z2 = grid(32)
    h = aniso_holder_seminorm(np.sin(Z1), 1.0)
    # Lipschitz constant 1 in z1 sampled at dyadic displacements
    assert 0.9 < h["estimate"] <= 1.0 + 1e-12


def test_input_errors():
    with pytest.raises(InputError):
        aniso_blocks_check(standard_config(4), np.zeros((8, 8, 8)))
    with pytest.raises(InputError):
        aniso_blocks_check(H1, np.zeros((12, 12, 12)))
    with pytest.raises(InputError):
        aniso_blocks_check(H1, np.zeros((8, 8, 4)))
