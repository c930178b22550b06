import math

import numpy as np
import pytest
from scipy.special import erfc

from stokes_resolvent.grid_fourier import Field, differentiate
from stokes_resolvent.resolvent_halfspace import (
    HalfspaceSolver,
    apply_corrector_W,
    boundary_coefficients,
    corrector_expanded,
    solve_lame,
    solve_resolvent,
    split_operators,
    trace_kernels,
)
from stokes_resolvent.spectral_core import FluidParams, eta_lambda, m_kernel
from stokes_resolvent.verify import corpus

P = FluidParams()
LAMS = [10.0, 15.0 + 20.0j, -6.0 + 14.0j, 300.0 - 50.0j]


def data(grid, shift=4.0):
    """Bumps negligible at the wall and at Y_max, as the reflection method needs."""
    bump = lambda x, y, x0, y0: np.exp(-((x - x0) ** 2 + (y - y0) ** 2) / 0.36)
    f = Field.from_function(grid, lambda x, y: bump(x, y, 0.0, shift))
    g = Field.from_function(grid, lambda x, y: np.stack([
        bump(x, y, 0.5, shift - 0.5), -0.7 * bump(x, y, -1.0, shift + 0.5)]))
    return f, g


def residuals(lam, f, g, rho, u, params):
    """Interior residuals of the two equations and the boundary trace."""
    div = differentiate(u, "divergence").data
    grad_rho = differentiate(rho, "gradient").data
    lap = differentiate(u, "laplacian").data
    grad_div = differentiate(differentiate(u, "divergence"), "gradient").data
    r1 = lam * rho.data + params.gamma_c * div - f.data
    r2 = lam * u.data - params.alpha * lap - params.beta * grad_div + params.gamma_c * grad_rho - g.data
    scale = max(np.max(np.abs(g.data)), np.max(np.abs(f.data)))
    inner = slice(1, -1)
    return (np.max(np.abs(r1[..., inner])) / scale, np.max(np.abs(r2[..., inner])) / scale,
            np.max(np.abs(u.data[..., 0])) / scale)


@pytest.mark.parametrize("lam", LAMS)
def test_residual_contract(grid, lam):
    f, g = data(grid)
    sol = solve_resolvent(lam, f, g, P)
    e1, e2, eb = residuals(lam, f, g, sol.rho, sol.u, P)
    assert e1 < 1e-10
    assert e2 < 1e-6
    assert eb < 1e-7
    assert sol.diagnostics["boundary_l2"] < 1e-7


def test_tangentially_constant_data_against_closed_form(grid):
    # lam u - alpha u'' = exp(-y^2), u(0) = 0: the whole-line convolution with
    # exp(-b|y|)/(2 alpha b) minus its trace times exp(-b y)
    lam = 10.0
    b = math.sqrt(lam / P.alpha)

    def whole_line(y):
        pref = math.sqrt(math.pi) / (4 * P.alpha * b)
        return pref * (np.exp(b * b / 4 - b * y) * erfc(b / 2 - y) + np.exp(b * b / 4 + b * y) * erfc(b / 2 + y))

    f = Field.zeros(grid, 1)
    g = Field.from_function(grid, lambda x, y: np.stack([np.exp(-y ** 2) + 0 * x, 0 * x]))
    u = solve_resolvent(lam, f, g, P).u.data
    y = grid.normal.nodes
    exact = whole_line(y) - whole_line(0.0) * np.exp(-b * y)
    assert np.max(np.abs(u[0] - exact[None, :])) < 1e-8
    assert np.max(np.abs(u[1])) < 1e-12


def test_real_data_and_real_lambda_give_real_solution(grid):
    f, g = data(grid)
    sol = solve_resolvent(20.0, f, g, P)
    for fld in (sol.u, sol.rho):
        assert np.max(np.abs(np.imag(fld.data))) < 1e-14 * np.max(np.abs(fld.data))


def test_conjugate_lambda_gives_conjugate_solution(grid):
    # the contour pairs lam with conj(lam); real states need this to rounding.
    # Narrow bumps put visible weight on the unpaired Fourier modes.
    f, g = corpus(grid, 1, seed=0, widths=(0.3, 0.3))[0]
    lam = 12.0 + 30.0j
    a, b = solve_resolvent(lam, f, g, P), solve_resolvent(np.conj(lam), f, g, P)
    for x, y in ((a.u, b.u), (a.rho, b.rho)):
        assert np.max(np.abs(x.data - np.conj(y.data))) < 1e-14 * np.max(np.abs(x.data))


def test_zero_data_gives_zero(grid):
    sol = solve_resolvent(20.0, Field.zeros(grid, 1), Field.zeros(grid, 2), P)
    assert np.max(np.abs(sol.u.data)) == 0 and np.max(np.abs(sol.rho.data)) == 0


def test_linearity(grid, rng):
    f1, g1 = data(grid, 3.7)
    f2, g2 = data(grid, 4.3)
    a = complex(rng.standard_normal(), rng.standard_normal())
    lam = 25.0 + 10.0j
    combo = solve_resolvent(lam, f1 * a + f2, g1 * a + g2, P)
    s1, s2 = solve_resolvent(lam, f1, g1, P), solve_resolvent(lam, f2, g2, P)
    assert np.allclose(combo.u.data, a * s1.u.data + s2.u.data, atol=1e-12)
    assert np.allclose(combo.rho.data, a * s1.rho.data + s2.rho.data, atol=1e-12)


@pytest.mark.parametrize("lam", [12.0, 40.0 + 30.0j])
def test_split_recomposes_solution(grid, lam):
    f, g = data(grid)
    s1, s2, rho = split_operators(lam, f, g, P)
    sol = solve_resolvent(lam, f, g, P)
    assert np.max(np.abs(s1.data + s2.data - sol.u.data)) < 1e-10
    assert np.max(np.abs(rho.data - sol.rho.data)) < 1e-10


def test_first_split_part_ignores_density_data(grid):
    f, g = data(grid)
    a, _, _ = split_operators(30.0, f, g, P)
    b, _, _ = split_operators(30.0, f * 7.0, g, P)
    assert np.array_equal(a.data, b.data)


def test_solver_reuse_matches_fresh_solve(grid):
    f, g = data(grid)
    solver = HalfspaceSolver(f, g, P)
    for lam in (11.0, 50.0 - 20.0j):
        assert np.allclose(solver.solve(lam).u.data, solve_resolvent(lam, f, g, P).u.data, atol=1e-14)


def test_lame_only_matches_resolvent_without_density(grid):
    _, g = data(grid)
    lam = 18.0 + 3.0j
    u = solve_lame(lam, g, P)
    sol = solve_resolvent(lam, Field.zeros(grid, 1), g, P)
    assert np.allclose(u.data, sol.u.data, atol=1e-13)
    eta = eta_lambda(lam, P)
    lap = differentiate(u, "laplacian").data
    gd = differentiate(differentiate(u, "divergence"), "gradient").data
    res = lam * u.data - P.alpha * lap - eta * gd - g.data
    assert np.max(np.abs(res[..., 1:-1])) < 1e-6


def test_corrector_forms_agree(grid):
    _, g = data(grid)
    lam = 30.0 + 5.0j
    h = boundary_coefficients(lam, g, P)
    assert np.all(h.h[-1] == 0)
    compact = apply_corrector_W(lam, h, P, grid).data
    expanded = corrector_expanded(lam, g, P).data
    assert np.max(np.abs(compact - expanded)) < 1e-8 * max(1.0, np.max(np.abs(compact)))


def test_trace_kernels_at_wall():
    A, B = 2.0 + 0.5j, 3.0 - 0.1j
    y = np.array([0.0, 0.4, 2.0])
    k1, k2, k3 = trace_kernels(A, B, y)
    assert np.allclose(k1, np.exp(-B * y) / B)
    assert np.allclose(k3, m_kernel(A, B, y) / (A + B))
    expect = -m_kernel(A, B, y) / (A * (A + B)) + np.exp(-B * y) / (A * B * (A + B))
    assert np.allclose(k2, expect)


def test_pair_validation(grid):
    f, g = data(grid)
    with pytest.raises(ValueError):
        HalfspaceSolver(g, f, P)
