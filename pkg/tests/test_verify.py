import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stokes_resolvent.besov import BesovParams
from stokes_resolvent.grid_fourier import HalfGrid, NormalGrid, TangentialGrid
from stokes_resolvent.resolvent_halfspace import solve_resolvent
from stokes_resolvent.spectral_core import FluidParams, SectorSpec, in_sector
from stokes_resolvent.verify import (
    AUDITS,
    TARGETS,
    RaySpec,
    SampleSpec,
    corpus,
    decay_sweep,
    fit_exponent,
    h_norm,
    kernel_m_checks,
    littlewood_paley_checks,
    random_pair,
    recipe,
    residual_resolvent,
    residue_oracle,
    residue_suite,
    sample_sector,
    state_corpus,
    symbol_bound_audit,
    target_budget,
)

P = FluidParams()
SMALL = HalfGrid(TangentialGrid(8.0, 64), NormalGrid(8.0, 48))


@given(st.floats(-3.0, 1.0), st.floats(0.01, 100.0))
def test_fit_exponent_recovers_power_law(slope, const):
    lam = np.geomspace(10.0, 1e4, 12)
    got, c = fit_exponent(lam, const * lam ** slope)
    assert abs(got - slope) < 1e-9
    assert np.isclose(c, const, rtol=1e-8)


def test_fit_exponent_needs_two_decades():
    with pytest.raises(ValueError):
        fit_exponent(np.geomspace(1, 50, 10), np.ones(10))
    with pytest.raises(ValueError):
        fit_exponent(np.geomspace(1, 1e3, 5), np.ones(5))


def test_target_budgets():
    assert set(TARGETS) == {"lam_S", "d2_S1", "dlam_S1", "S2", "dlam_S2", "R", "dlam_R"}
    assert target_budget("lam_S", 0.2) == (0.0, 0.05, True)
    assert target_budget("d2_S1", 0.2)[0] == pytest.approx(-0.1)
    assert target_budget("dlam_S1", 0.2)[0] == pytest.approx(-0.9)
    with pytest.raises((KeyError, ValueError)):
        target_budget("nonsense", 0.1)


def test_sample_sector_is_admissible(rng):
    lam = sample_sector(200, 6.0, 6e3, math.pi / 4, P, rng)
    assert lam.size == 200
    assert np.all(in_sector(lam, SectorSpec(math.pi / 4, 6.0), P))
    assert np.all((np.abs(lam) >= 6.0 * (1 - 1e-12)) & (np.abs(lam) <= 6e3 * (1 + 1e-12)))


def test_residue_oracle_agrees_at_a_point():
    rows = residue_oracle(20.0 + 10.0j, (1.3,), 0.7, P)
    assert rows and all(r["converged"] for r in rows)
    assert max(r["error"] for r in rows) < 1e-8


def test_residue_suite_is_deterministic():
    a = residue_suite(P, n=4, seed=5).to_dict()
    b = residue_suite(P, n=4, seed=5).to_dict()
    assert a == b and a["passed"]


def test_kernel_and_partition_checks():
    band, limit = kernel_m_checks(200, seed=1)
    assert band < 1e-10 and limit < 1e-10
    errs = littlewood_paley_checks(SMALL.whole_grid(), 100, seed=2)
    assert max(errs) < 1e-12


@pytest.mark.parametrize("name", AUDITS)
def test_small_audits_run_and_are_reproducible(name):
    spec = SampleSpec(n=300, seed=4)
    a = symbol_bound_audit(name, spec, P)
    b = symbol_bound_audit(name, spec, P)
    assert a.to_dict() == b.to_dict()
    assert all(np.isfinite(v) for v in a.constants.values())


def test_unknown_audit_rejected():
    with pytest.raises(ValueError):
        symbol_bound_audit("nonsense", SampleSpec(n=10), P)


def test_random_data_vanishes_at_the_ends(rng):
    f, g = random_pair(SMALL, rng)
    for fld in (f, g):
        top = np.max(np.abs(fld.data))
        assert np.max(np.abs(fld.data[..., 0])) < 1e-10 * top
        assert np.max(np.abs(fld.data[..., -1])) < 1e-10 * top


def test_residual_oracle_zero_and_sensitivity(grid):
    f, g = recipe("zero", grid)
    sol = solve_resolvent(20.0, f, g, P)
    r = residual_resolvent(20.0, f, g, sol, P)
    assert (r.eq1, r.eq2, r.boundary) == (0.0, 0.0, 0.0)
    f, g = recipe("gauss-1", grid)
    lam = 20.0 + 5.0j
    sol = solve_resolvent(lam, f, g, P)
    good = residual_resolvent(lam, f, g, sol, P)
    assert good.within()
    sol.u.data[...] *= 1.01
    bad = residual_resolvent(lam, f, g, sol, P)
    assert 3e-3 < bad.eq2 < 3e-2


def test_corpus_is_unit_norm_and_seeded():
    a = corpus(SMALL, 2, seed=9)
    b = corpus(SMALL, 2, seed=9)
    for (f1, g1), (f2, g2) in zip(a, b):
        assert np.array_equal(f1.data, f2.data) and np.array_equal(g1.data, g2.data)
        assert h_norm(f1, g1, BesovParams()) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        recipe("unknown", SMALL)


def test_state_corpus_leaves_room_to_diffuse(grid):
    # each bump, widened by diffusion up to the horizon, is still tiny at Y_max
    horizon = 0.2
    spread = 4 * (P.alpha + P.beta) * horizon
    top = grid.normal.Y_max
    for s in state_corpus(grid, 4, seed=3, params=P, horizon=horizon):
        for fld in (s.rho, s.u):
            for comp in fld.data:
                peak = np.unravel_index(np.argmax(np.abs(comp)), comp.shape)
                yc = grid.normal.nodes[peak[-1]]
                assert yc >= 5.5 * 0.3 - 0.2
                assert (top - yc) ** 2 / (0.6 ** 2 + spread) > 3.5 ** 2


def test_sweep_is_reproducible():
    data = corpus(SMALL, 1, seed=1)
    ray = RaySpec(0.0, 20.0, 2e3, 8)
    bp = BesovParams()
    r1 = decay_sweep("R", ray, data, bp, P)
    r2 = decay_sweep("R", ray, data, bp, P)
    assert r1.exponent == r2.exponent and r1.ratios == r2.ratios
    assert r1.exponent < -0.5
