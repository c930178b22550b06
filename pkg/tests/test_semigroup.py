import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stokes_resolvent.grid_fourier import Field
from stokes_resolvent.semigroup import (
    Contour,
    ContourError,
    ContourSpec,
    EvolutionState,
    _l1_quadrature,
    apply_T,
    apply_T_parts,
    build_contour,
    evolve_many,
    generator,
    time_grid,
)
from stokes_resolvent.spectral_core import FluidParams, SectorSpec, in_sector

P = FluidParams()


@pytest.fixture(scope="module")
def contour(request):
    from stokes_resolvent.grid_fourier import HalfGrid
    return build_contour(ContourSpec(t_min=0.02), P, HalfGrid())


def test_contour_nodes_are_admissible(contour):
    assert isinstance(contour, Contour)
    assert np.all(in_sector(contour.lam, SectorSpec(contour.epsilon, contour.lam0), P))
    assert contour.lam[0] == contour.gamma_shift
    n = (contour.size - 1) // 2
    assert np.allclose(contour.lam[1 + n:], np.conj(contour.lam[1:1 + n]))
    assert np.allclose(contour.weights[1 + n:], np.conj(contour.weights[1:1 + n]))
    assert contour.refined(2).size > 1.9 * contour.size


@pytest.mark.parametrize("a", [0.0, 3.0, 40.0])
@pytest.mark.parametrize("t", [0.02, 0.3, 2.0])
def test_contour_inverts_a_scalar_resolvent(contour, a, t):
    # (1/2 pi i) int e^{lam t} / (lam + a) dlam = e^{-a t}
    approx = np.sum(contour.weights * np.exp(contour.lam * t) / (contour.lam + a))
    assert abs(approx - math.exp(-a * t)) < 1e-8 * math.exp(contour.gamma_shift * t)


def test_contour_errors(grid):
    with pytest.raises(ContourError):
        ContourSpec(epsilon=2.0)
    with pytest.raises(ContourError):
        ContourSpec(t_min=0.0)
    with pytest.raises(ContourError):
        build_contour(ContourSpec(gamma_shift=0.5), P, grid)


def test_times_below_reach_rejected(grid, contour):
    s = EvolutionState.zeros(grid)
    with pytest.raises(ContourError):
        evolve_many([contour.t_min / 10], s, contour, P)
    with pytest.raises(ValueError):
        apply_T(0.0, s, contour, P)


def test_state_validation(grid):
    with pytest.raises(ValueError):
        EvolutionState(Field.zeros(grid, 2), Field.zeros(grid, 2))
    with pytest.raises(ValueError):
        EvolutionState(Field.zeros(grid, 1), Field.zeros(grid, 1))
    with pytest.raises(ValueError):
        EvolutionState(Field.zeros(grid, 1), Field.zeros(grid, 2), t=-1.0)


def test_shear_layer_follows_heat_equation_with_images(grid, contour):
    # rho = 0, u = (phi(x_N), 0) keeps div u = 0, so u1 solves u_t = alpha u''
    # with u(0) = 0; the odd image of a Gaussian gives the exact solution
    y0, w2 = 4.0, 0.36

    def exact(y, t):
        s2 = w2 + 4 * P.alpha * t
        return math.sqrt(w2 / s2) * (np.exp(-(y - y0) ** 2 / s2) - np.exp(-(y + y0) ** 2 / s2))

    u0 = Field.from_function(grid, lambda x, y: np.stack([exact(y, 0.0) + 0 * x, 0 * x]))
    state0 = EvolutionState(Field.zeros(grid, 1), u0)
    ts = [0.02, 0.1, 0.5]
    y = grid.normal.nodes
    for s in evolve_many(ts, state0, contour, P):
        assert np.max(np.abs(s.u.data[0] - exact(y, s.t)[None, :])) < 1e-6
        assert np.max(np.abs(s.u.data[1])) < 1e-9
        assert np.max(np.abs(s.rho.data)) < 1e-9


def test_parts_recompose_and_zero_state(grid, contour):
    from stokes_resolvent.verify import state_corpus
    state0 = state_corpus(grid, 1, seed=3)[0]
    t = 0.1
    full = apply_T(t, state0, contour, P)
    t1, t2, t3 = apply_T_parts(t, state0, contour, P)
    assert np.max(np.abs(t1.data + t2.data - full.u.data)) < 1e-10 * np.max(np.abs(full.u.data))
    assert np.max(np.abs(t3.data - full.rho.data)) < 1e-10 * np.max(np.abs(full.rho.data))
    zero = apply_T(t, EvolutionState.zeros(grid), contour, P)
    assert np.max(np.abs(zero.u.data)) == 0 and np.max(np.abs(zero.rho.data)) == 0


def test_generator_of_shear_layer(grid):
    u0 = Field.from_function(grid, lambda x, y: np.stack([np.exp(-(y - 4) ** 2) + 0 * x, 0 * x]))
    a = generator(EvolutionState(Field.zeros(grid, 1), u0), P)
    y = grid.normal.nodes
    second = (4 * (y - 4) ** 2 - 2) * np.exp(-(y - 4) ** 2)
    assert np.max(np.abs(a.u.data[0] + P.alpha * second[None, :])) < 1e-8
    assert np.max(np.abs(a.rho.data)) < 1e-12


def test_time_grid():
    ts = time_grid(1e-3, 10.0, 12)
    assert ts[0] == pytest.approx(1e-3) and ts[-1] == pytest.approx(10.0)
    assert ts.size == 49
    with pytest.raises(ValueError):
        time_grid(1.0, 0.5)


@given(st.floats(0.1, 5.0))
def test_l1_quadrature_of_exponential(k):
    ts = time_grid(1e-5, 10.0, 40)
    approx = _l1_quadrature(ts, np.exp(-k * ts))
    assert abs(approx - (1 - math.exp(-10 * k)) / k) < 2e-3 / k


def test_l1_quadrature_of_integrable_singularity():
    # int_0^1 t^(-1/2) dt = 2; the head term t0 * f(t0) misses sqrt(t0)
    ts = time_grid(1e-6, 1.0, 40)
    assert abs(_l1_quadrature(ts, ts ** -0.5) - 2.0) < 2e-3
