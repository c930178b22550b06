import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stokes_resolvent.grid_fourier import TangentialGrid, WholeField, WholeGrid
from stokes_resolvent.resolvent_wholespace import (
    SeriesRegionError,
    apply_dS0,
    apply_S0,
    apply_S0_parts,
    lame_operator,
    s0_parts_coefficients,
    s0_symbol_apply,
)
from stokes_resolvent.spectral_core import FluidParams, SectorSpec, eta_lambda, sector_violation

P = FluidParams()
BOX = WholeGrid(TangentialGrid(8.0, 64), 8.0, 64)
EPS = math.pi / 4


def gauss_data(shift=0.0):
    return WholeField.from_function(BOX, lambda x, z: np.stack([
        np.exp(-x ** 2 - (z - shift) ** 2), x * z * np.exp(-x ** 2 - z ** 2)]))


lams = st.builds(lambda r, t: r * cmath.exp(1j * t), st.floats(6.0, 1e4),
                 st.floats(-(math.pi - EPS), math.pi - EPS)).filter(
    lambda z: sector_violation(z, SectorSpec(EPS, 6.0), P) is None)


def test_symbol_matches_per_mode_linear_solve(rng):
    # the Lame symbol is (lam + alpha|xi|^2) I + eta xi xi^T; invert it densely
    lam = 12.0 - 7.0j
    eta = eta_lambda(lam, P)
    freqs = tuple(rng.uniform(-20, 20, (2, 50)))
    hat = rng.standard_normal((2, 50)) + 1j * rng.standard_normal((2, 50))
    got = s0_symbol_apply(lam, hat, freqs, P)
    for k in range(50):
        xi = np.array([freqs[0][k], freqs[1][k]])
        mat = (lam + P.alpha * xi @ xi) * np.eye(2) + eta * np.outer(xi, xi)
        assert np.allclose(got[:, k], np.linalg.solve(mat, hat[:, k]), rtol=1e-12, atol=0)


@given(lams)
@settings(max_examples=25, deadline=None)
def test_lame_operator_inverts_solution(lam):
    g = gauss_data()
    u = apply_S0(lam, g, P)
    back = lame_operator(lam, u, P)
    assert np.max(np.abs(back.data - g.data)) < 1e-10


@given(lams)
@settings(max_examples=25, deadline=None)
def test_parts_sum_to_solution(lam):
    g = gauss_data(0.5)
    t1, t2 = apply_S0_parts(lam, g, P)
    assert np.max(np.abs(t1.data + t2.data - apply_S0(lam, g, P).data)) < 1e-12


def test_parts_coefficient_closed_form():
    for lam in (3.0, 10 + 5j, -2 + 9j):
        eta = eta_lambda(lam, P)
        a1, b1, b2 = s0_parts_coefficients(lam, P)
        full = eta / (P.alpha * (P.alpha + eta))
        assert np.isclose(b1 + b2, full, rtol=1e-13)
        assert a1 == 1 / P.alpha


def test_series_region_guard():
    with pytest.raises(SeriesRegionError):
        apply_S0_parts(P.disk_radius * 0.9, gauss_data(), P)


def test_lambda_derivative_by_central_difference():
    g = gauss_data()
    lam, h = 9.0 + 4.0j, 1e-4
    fd = (apply_S0(lam + h, g, P).data - apply_S0(lam - h, g, P).data) / (2 * h)
    fd_i = (apply_S0(lam + 1j * h, g, P).data - apply_S0(lam - 1j * h, g, P).data) / (2j * h)
    d = apply_dS0(lam, g, P).data
    scale = np.max(np.abs(d))
    assert np.max(np.abs(d - fd)) < 1e-7 * scale
    # holomorphy: the same derivative along the imaginary direction
    assert np.max(np.abs(d - fd_i)) < 1e-7 * scale


def test_real_lambda_keeps_real_data_real():
    u = apply_S0(7.0, gauss_data(), P)
    assert np.isrealobj(u.data)
    assert np.iscomplexobj(apply_S0(7.0 + 1j, gauss_data(), P).data)


def test_scalar_data_rejected():
    g = WholeField(np.zeros((1,) + BOX.shape), BOX)
    with pytest.raises(ValueError):
        apply_S0(5.0, g, P)
