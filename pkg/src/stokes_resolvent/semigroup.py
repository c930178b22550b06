"""The evolution semigroup by quadrature of the resolvent contour integral.

T(t) s0 = (1/2 pi i) int_C e^{lam t} (lam + A)^{-1} s0 dlam, where C is the
boundary of the shifted sector gamma_shift + {|arg lam| <= pi - eps}: the
ray lam = gamma_shift + r e^{-i(pi - eps)} traversed inwards followed by
lam = gamma_shift + r e^{+i(pi - eps)} traversed outwards.

Each ray is discretised by the trapezoid rule in log r on [r_min, r_max].
The piece 0 < r < r_min near the vertex is replaced by one node at
lam = gamma_shift whose weight is the exact integral of the constant
integrand over the two short segments.  Weights on the lower ray are the
complex conjugates of those on the upper ray, so real data give real states
up to rounding.

All times share one set of resolvent solves: every node is solved once and
its contribution is added to every requested time.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .besov import BesovParams, besov_norm_halfspace
from .grid_fourier import PHYSICAL, Field, HalfGrid, differentiate, field_l2, inverse_fourier_tangential
from .resolvent_halfspace import DEFAULT_PAD, HalfspaceSolver
from .spectral_core import FluidParams, SectorSpec, admissibility_thresholds, in_sector

__all__ = [
    "ContourError",
    "ContourSpec",
    "Contour",
    "EvolutionState",
    "L1Integral",
    "build_contour",
    "generator",
    "apply_T",
    "evolve_many",
    "apply_T_parts",
    "l1_maximal_integral",
    "state_l2",
    "data_norm",
    "state_norm",
    "time_grid",
]


class ContourError(ValueError):
    """The contour cannot be built, or is too short for the requested time."""


@dataclass(frozen=True)
class EvolutionState:
    rho: Field
    u: Field
    t: float = 0.0

    def __post_init__(self):
        if self.rho.ncomp != 1:
            raise ValueError("rho must be a scalar field")
        if self.u.ncomp != self.u.grid.dim:
            raise ValueError("u must be a vector field")
        if self.rho.grid != self.u.grid:
            raise ValueError("rho and u live on different grids")
        if self.t < 0:
            raise ValueError("t must be nonnegative")

    @property
    def grid(self) -> HalfGrid:
        return self.u.grid

    @classmethod
    def zeros(cls, grid: HalfGrid, t: float = 0.0) -> "EvolutionState":
        return cls(Field.zeros(grid, 1), Field.zeros(grid, grid.dim), t)

    def __sub__(self, other: "EvolutionState") -> "EvolutionState":
        return EvolutionState(_phys(self.rho) - _phys(other.rho), _phys(self.u) - _phys(other.u), self.t)

    def scaled(self, c) -> "EvolutionState":
        return EvolutionState(self.rho * c, self.u * c, self.t)

    @property
    def real(self) -> "EvolutionState":
        return EvolutionState(self.rho.real, self.u.real, self.t)

    def imag_residue(self) -> float:
        """max |Im| / max |value| over both fields."""
        data = np.concatenate([_phys(self.rho).data.ravel(), _phys(self.u).data.ravel()])
        top = np.max(np.abs(data))
        return 0.0 if top == 0 else float(np.max(np.abs(np.imag(data))) / top)


def _phys(f: Field) -> Field:
    return f if f.representation == PHYSICAL else inverse_fourier_tangential(f)


def state_l2(s: EvolutionState) -> float:
    return math.hypot(field_l2(s.rho), field_l2(s.u))


def state_norm(s: EvolutionState, bp: BesovParams) -> float:
    """||rho||_{B^{s+1}} + ||u||_{B^{s+2}}: the norm of the solution space."""
    rho = besov_norm_halfspace(_phys(s.rho).real, bp.shifted(1.0), parity=("even",), check_range=False)
    u = besov_norm_halfspace(_phys(s.u).real, bp.shifted(2.0), parity=("odd",) * s.grid.dim, check_range=False)
    return float(rho) + float(u)


def data_norm(s: EvolutionState, bp: BesovParams) -> float:
    """||rho||_{B^{s+1}} + ||u||_{B^s}: the norm of the initial-data space."""
    rho = besov_norm_halfspace(_phys(s.rho).real, bp.shifted(1.0), parity=("even",), check_range=False)
    u = besov_norm_halfspace(_phys(s.u).real, bp)
    return float(rho) + float(u)


def generator(s: EvolutionState, params: FluidParams) -> EvolutionState:
    """A(rho, v) = (gamma_c div v, -alpha Lap v - beta grad div v + gamma_c grad rho)."""
    div = differentiate(s.u, "divergence", spectral=False)
    lap = differentiate(s.u, "laplacian", spectral=False)
    graddiv = differentiate(div, "gradient", spectral=False)
    gradrho = differentiate(s.rho, "gradient", spectral=False)
    a_rho = params.gamma_c * div.data
    a_u = -params.alpha * lap.data - params.beta * graddiv.data + params.gamma_c * gradrho.data
    return EvolutionState(s.rho.with_data(a_rho, PHYSICAL), s.u.with_data(a_u, PHYSICAL), s.t)


# --------------------------------------------------------------------------
# contour


@dataclass(frozen=True)
class ContourSpec:
    """Inputs of ``build_contour``; None entries are derived from the parameters.

    ``lam0`` defaults to the admissibility threshold lambda_2 and
    ``gamma_shift`` to 2 lam0.  ``t_min`` is the smallest time the contour must
    serve; it fixes r_max = max(50/t_min, 10 lam0).
    """

    epsilon: float = math.pi / 4
    gamma_shift: float | None = None
    lam0: float | None = None
    t_min: float = 1e-4
    r_min_factor: float = 1e-10
    r_max: float | None = None
    nodes_per_decade: int = 13
    vertex_node: bool = True

    def __post_init__(self):
        if not (0 < self.epsilon < math.pi / 2):
            raise ContourError("epsilon must lie in (0, pi/2)")
        if not self.t_min > 0:
            raise ContourError("t_min must be positive")
        if self.nodes_per_decade < 2:
            raise ContourError("need at least two nodes per decade")


@dataclass(frozen=True, eq=False)
class Contour:
    gamma_shift: float
    epsilon: float
    lam0: float
    r_min: float
    r_max: float
    lam: np.ndarray = dc_field(repr=False)
    weights: np.ndarray = dc_field(repr=False)

    @property
    def nodes(self) -> list:
        return list(zip(self.lam.tolist(), self.weights.tolist()))

    @property
    def size(self) -> int:
        return self.lam.size

    @property
    def t_min(self) -> float:
        """Smallest time for which the truncation at r_max is negligible."""
        return 50.0 / self.r_max

    def refined(self, factor: int = 2) -> "Contour":
        """The same contour with ``factor`` times as many nodes per decade."""
        return _assemble(self.gamma_shift, self.epsilon, self.lam0, self.r_min, self.r_max,
                         self._per_decade * factor, self.vertex_node)

    _per_decade: int = 13
    vertex_node: bool = True


def _assemble(gamma, eps, lam0, r_min, r_max, per_decade, vertex) -> Contour:
    decades = math.log10(r_max / r_min)
    n = max(2, int(math.ceil(decades * per_decade)) + 1)
    s = np.linspace(math.log(r_min), math.log(r_max), n)
    h = s[1] - s[0]
    r = np.exp(s)
    tw = np.full(n, h)
    tw[0] *= 0.5
    tw[-1] *= 0.5
    phase = np.exp(1j * (math.pi - eps))
    w_up = phase * r * tw / (2j * math.pi)
    lam = np.concatenate([gamma + r * phase, gamma + r * np.conj(phase)])
    w = np.concatenate([w_up, np.conj(w_up)])
    if vertex:
        # int over the two segments |lam - gamma| < r_min of a constant integrand
        lam = np.concatenate([[complex(gamma)], lam])
        w = np.concatenate([[r_min * math.sin(math.pi - eps) / math.pi + 0j], w])
    return Contour(float(gamma), float(eps), float(lam0), float(r_min), float(r_max),
                   lam, w, per_decade, vertex)


def default_lam0(params: FluidParams, grid: HalfGrid, epsilon: float = math.pi / 4) -> float:
    _, lam2 = admissibility_thresholds(params, SectorSpec(epsilon), grid.tangential.nyquist)
    return lam2


def build_contour(spec: ContourSpec, params: FluidParams, grid: HalfGrid | None = None) -> Contour:
    """Nodes and weights on the two shifted rays; every node passes ``in_sector``.

    With ``gamma_shift`` unset the shift starts at 2 lam0 and grows by 10%
    until all nodes are admissible.  An explicit shift that fails raises
    ContourError.
    """
    grid = grid or HalfGrid()
    lam0 = spec.lam0 if spec.lam0 is not None else default_lam0(params, grid, spec.epsilon)
    sector = SectorSpec(spec.epsilon, nu0=lam0)
    r_min = spec.r_min_factor * lam0
    r_max = spec.r_max if spec.r_max is not None else max(50.0 / spec.t_min, 10.0 * lam0)
    if not r_max > r_min:
        raise ContourError("r_max must exceed r_min")
    gamma = spec.gamma_shift if spec.gamma_shift is not None else 2.0 * lam0
    for _ in range(200):
        c = _assemble(gamma, spec.epsilon, lam0, r_min, r_max, spec.nodes_per_decade, spec.vertex_node)
        if np.all(in_sector(c.lam, sector, params)):
            return c
        if spec.gamma_shift is not None:
            raise ContourError(f"gamma_shift = {gamma:.6g} leaves contour nodes outside the sector")
        gamma *= 1.1
    raise ContourError("no admissible shift found")


# --------------------------------------------------------------------------
# quadrature


def _times(ts) -> np.ndarray:
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(ts <= 0):
        raise ValueError("evaluation times must be positive")
    return ts


def _check_reach(ts, contour: Contour):
    if ts.min() < contour.t_min * (1 - 1e-12):
        raise ContourError(f"t = {ts.min():.3g} is below the contour's t_min = {contour.t_min:.3g}")


def _node_map(fn, lam, workers: int):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            yield from ex.map(fn, lam)
    else:
        for z in lam:
            yield fn(z)


def _integrate(ts, contour: Contour, solve, nfields: int, weighted: bool, workers: int):
    """sum_j w_j e^{lam_j t} solve(lam_j) for every t; ``solve`` returns a tuple of arrays.

    With ``weighted`` the exponential is e^{(lam_j - gamma) t}, which returns
    e^{-gamma t} T(t) without overflow.
    """
    shift = contour.gamma_shift if weighted else 0.0
    coef = contour.weights[:, None] * np.exp(np.outer(contour.lam - shift, ts))
    acc = None
    for j, out in enumerate(_node_map(solve, contour.lam, workers)):
        if acc is None:
            acc = [np.zeros((ts.size,) + a.shape, dtype=complex) for a in out]
        for k in range(nfields):
            acc[k] += np.multiply.outer(coef[j], out[k])
    return acc


def _as_state_list(ts, rho_acc, u_acc, grid: HalfGrid, real: bool):
    out = []
    for i, t in enumerate(ts):
        r, u = rho_acc[i], u_acc[i]
        if real:
            r, u = r.real, u.real
        out.append(EvolutionState(Field(r, grid), Field(u, grid), float(t)))
    return out


def _is_real(state0: EvolutionState) -> bool:
    return np.isrealobj(_phys(state0.rho).data) and np.isrealobj(_phys(state0.u).data)


def evolve_many(ts, state0: EvolutionState, contour: Contour, params: FluidParams, *,
                weighted: bool = False, keep_complex: bool = False, pad: int = DEFAULT_PAD,
                workers: int = 1) -> list:
    """T(t) state0 for every t in ``ts`` from one pass over the contour nodes.

    Real initial data give real states; the imaginary rounding residue is
    dropped unless ``keep_complex`` is set (the realness check uses it).
    """
    ts = _times(ts)
    _check_reach(ts, contour)
    solver = HalfspaceSolver(_phys(state0.rho), _phys(state0.u), params, pad)

    def solve(lam):
        sol = solver.solve(lam)
        return sol.rho.data, sol.u.data

    rho_acc, u_acc = _integrate(ts, contour, solve, 2, weighted, workers)
    real = _is_real(state0) and not keep_complex
    return _as_state_list(ts, rho_acc, u_acc, state0.grid, real)


def apply_T(t: float, state0: EvolutionState, contour: Contour, params: FluidParams, **kw) -> EvolutionState:
    if not t > 0:
        raise ValueError("t must be positive")
    return evolve_many([t], state0, contour, params, **kw)[0]


def apply_T_parts(t, state0: EvolutionState, contour: Contour, params: FluidParams, *,
                  pad: int = DEFAULT_PAD, weighted: bool = False, workers: int = 1,
                  keep_complex: bool = False):
    """(T1 u0, T2 (rho0, u0), T3 (rho0, u0)) at one time or a list of times.

    T1 integrates S1 (velocity data only), T2 the remainder S2 of the
    velocity, T3 the density; T(t) state0 = (T3, T1 + T2).
    """
    scalar = np.ndim(t) == 0
    ts = _times(t)
    _check_reach(ts, contour)
    solver = HalfspaceSolver(_phys(state0.rho), _phys(state0.u), params, pad)

    def solve(lam):
        s1, s2, rho = solver.split(lam)
        return s1.data, s2.data, rho.data

    a1, a2, a3 = _integrate(ts, contour, solve, 3, weighted, workers)
    grid = state0.grid
    if _is_real(state0) and not keep_complex:
        a1, a2, a3 = a1.real, a2.real, a3.real
    out = [(Field(a1[i], grid), Field(a2[i], grid), Field(a3[i], grid)) for i in range(ts.size)]
    return out[0] if scalar else out


# --------------------------------------------------------------------------
# L1-in-time maximal regularity integral


@dataclass(frozen=True, eq=False)
class L1Integral:
    """int_0^T_end e^{-gamma t} ||T(t) s0|| dt and its ratio to the data norm."""

    value: float
    data_norm: float
    t: np.ndarray = dc_field(repr=False)
    integrand: np.ndarray = dc_field(repr=False)
    gamma_shift: float = 0.0

    @property
    def ratio(self) -> float:
        return self.value / self.data_norm if self.data_norm > 0 else 0.0

    def __float__(self) -> float:
        return self.value


def time_grid(t_min: float, T_end: float, per_decade: int = 12) -> np.ndarray:
    if not t_min > 0 or not T_end > t_min:
        raise ValueError("need 0 < t_min < T_end")
    n = int(math.ceil(per_decade * math.log10(T_end / t_min))) + 1
    return np.geomspace(t_min, T_end, n)


def l1_maximal_integral(state0: EvolutionState, t_min: float, T_end: float, contour: Contour,
                        params: FluidParams, bp: BesovParams, *, per_decade: int = 12,
                        pad: int = DEFAULT_PAD, workers: int = 1) -> L1Integral:
    """Trapezoid rule in log t for int e^{-gamma t}(||rho||_{B^{s+1}} + ||u||_{B^{s+2}}) dt.

    The geometric time grid resolves the integrable singularity at t = 0
    scale by scale; the interval (0, t_min) is added as t_min times the
    integrand at t_min.  Norms are taken with r = 1.
    """
    ts = time_grid(t_min, T_end, per_decade)
    bp1 = BesovParams(bp.s, bp.q, 1.0)
    d0 = data_norm(state0, bp1)
    if d0 == 0:
        return L1Integral(0.0, 0.0, ts, np.zeros_like(ts), contour.gamma_shift)
    states = evolve_many(ts, state0, contour, params, weighted=True, pad=pad, workers=workers)
    vals = np.array([state_norm(s, bp1) for s in states])
    return L1Integral(_l1_quadrature(ts, vals), d0, ts, vals, contour.gamma_shift)


def _l1_quadrature(ts, vals) -> float:
    """Trapezoid in log t on a geometric grid plus the head term ts[0] * vals[0]."""
    ts, vals = np.asarray(ts, float), np.asarray(vals, float)
    g = vals * ts
    return float(np.sum(0.5 * (g[1:] + g[:-1]) * np.diff(np.log(ts))) + ts[0] * vals[0])

