import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stokes_resolvent.besov import (
    BesovParams,
    DyadicPartition,
    NonEquivalentNormWarning,
    besov_norm,
    besov_norm_halfspace,
    bessel_lift,
    build_partition,
    chi,
    lp_blocks,
    lq_norm,
    sequence_norm,
)
from stokes_resolvent.grid_fourier import Field, TangentialGrid, WholeField, WholeGrid

# xi1 = k / 4 on this box, so every power of two up to 16 is a lattice frequency
BOX = WholeGrid(TangentialGrid(4 * math.pi, 128), 4 * math.pi, 128)


def test_chi_is_a_smooth_step():
    r = np.linspace(0, 3, 301)
    c = chi(r)
    assert np.all(c[r <= 1] == 1.0) and np.all(c[r >= 2] == 0.0)
    assert np.all(np.diff(c) <= 0)


# the rings sum to one up to 2^J_max; above it the top ring has no partner
@given(st.floats(0.0, 2.0 ** 8))
def test_partition_of_unity(xi):
    P = DyadicPartition(8)
    total = P.psi_hat(xi) + sum(P.phi(xi, k) for k in range(1, P.J_max + 1))
    assert abs(total - 1.0) < 1e-13


def test_partition_supports():
    P = DyadicPartition(6)
    for k in range(1, 7):
        lo, hi = P.support(k)
        assert P.phi(0.99 * lo, k) == 0 and P.phi(1.01 * hi, k) == 0
    assert build_partition(BOX).J_max == 3
    with pytest.raises(ValueError):
        build_partition(3.0)


def test_params_validation():
    with pytest.raises(ValueError):
        BesovParams(q=1.0)
    with pytest.raises(ValueError):
        BesovParams(r=0.5)
    assert BesovParams(0.2, 3.0).halfspace_equivalent
    assert not BesovParams(0.6, 2.0).halfspace_equivalent
    assert BesovParams(0.1).shifted(1.0).s == pytest.approx(1.1)


@pytest.mark.parametrize("j", [1, 2, 3])
@pytest.mark.parametrize("s,q", [(0.0, 2.0), (0.3, 3.0), (-0.4, 1.5)])
def test_single_dyadic_mode(j, s, q):
    # cos(2^j x1) sits where phi_j = 1 and every other block vanishes
    f = WholeField.from_function(BOX, lambda x, z: np.cos(2.0 ** j * x) + 0 * z)
    expect = 2.0 ** (s * j) * lq_norm(f, q)
    assert np.isclose(besov_norm(f, BesovParams(s, q)), expect, rtol=1e-12)


def test_blocks_recompose(rng):
    f = WholeField(rng.standard_normal((1,) + BOX.shape), BOX)
    P = DyadicPartition(30)
    total = sum(b.data for b in lp_blocks(f, P))
    assert np.max(np.abs(total - f.data)) < 1e-12


# tiny c would underflow |f|^q before the sum
@given(st.floats(-1e3, 1e3).filter(lambda c: c == 0 or abs(c) > 1e-100))
def test_norm_homogeneity(c):
    f = WholeField.from_function(BOX, lambda x, z: np.exp(-x ** 2 - z ** 2))
    bp = BesovParams(0.2, 2.5)
    assert np.isclose(besov_norm(f * c, bp), abs(c) * besov_norm(f, bp), rtol=1e-12, atol=1e-300)


def test_lq_norm_of_gaussian():
    f = WholeField.from_function(BOX, lambda x, z: np.exp(-x ** 2 - z ** 2))
    assert np.isclose(lq_norm(f, 2.0), math.sqrt(math.pi / 2), rtol=1e-12)


def test_bessel_lift_on_a_mode():
    f = WholeField.from_function(BOX, lambda x, z: np.cos(2.0 * x) + 0 * z)
    lifted = bessel_lift(f, 0.5)
    assert np.allclose(lifted.data, 5.0 ** 0.25 * f.data, atol=1e-12)
    assert np.allclose(bessel_lift(lifted, -0.5).data, f.data, atol=1e-12)


def test_sequence_norm():
    a = 2.0 ** (-0.5 * np.arange(4))
    assert np.isclose(sequence_norm(a, 0.5, 2.0), 2.0)
    assert np.isclose(sequence_norm(a, 0.5, math.inf), 1.0)
    assert np.isclose(sequence_norm([1.0], 1.0, 2.0, start=3), 8.0)


def test_halfspace_norm_flags_range(grid):
    f = Field.from_function(grid, lambda x, y: np.exp(-x ** 2 - y))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        inside = besov_norm_halfspace(f, BesovParams(0.2, 2.0))
    assert inside.equivalent and inside > 0
    with pytest.warns(NonEquivalentNormWarning):
        outside = besov_norm_halfspace(f, BesovParams(0.7, 2.0))
    assert not outside.equivalent
    quiet = besov_norm_halfspace(f, BesovParams(0.7, 2.0), check_range=False)
    assert float(quiet) == float(outside)
