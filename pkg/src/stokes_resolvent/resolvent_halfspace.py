"""Half-space resolvent solver.

The velocity solves the complex Lame system with right-hand side
g - gamma lam^-1 grad f and a homogeneous Dirichlet condition.  It is built as

    u = (whole-space solution for the reflected data) restricted to x_N > 0
        + w,

where w solves the homogeneous system and cancels the trace of the first
term.  Per tangential frequency the trace is a y-integral of the data
against exp(-B y)/B and the divided-difference kernel M(y); w is written
with exp(-B x_N) and M(x_N).  The density follows from the first equation,
rho = (f - gamma div u)/lam.

The whole-space part is computed on a box padded in the normal direction
(``pad`` times taller than the half-space grid) so that periodic images of
the data sit far from the wall.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .grid_fourier import (
    PHYSICAL,
    SPECTRAL,
    Field,
    HalfGrid,
    WholeGrid,
    differentiate,
    extend_reflect,
    field_l2,
    fourier_tangential,
    inverse_fourier_tangential,
)
from .resolvent_wholespace import s0_parts_coefficients, s0_split_apply, s0_symbol_apply
from .spectral_core import (
    FluidParams,
    c_lambda,
    k_symbols,
    m_kernel,
    p_kernel,
    q_lambda,
    roots,
)

__all__ = [
    "BoundaryCoefficients",
    "ResolventSolution",
    "DEFAULT_PAD",
    "boundary_coefficients",
    "apply_corrector_W",
    "corrector_expanded",
    "solve_lame",
    "solve_resolvent",
    "split_operators",
    "HalfspaceSolver",
    "trace_kernels",
]

DEFAULT_PAD = 2


@dataclass(frozen=True, eq=False)
class BoundaryCoefficients:
    """h per tangential frequency, shape (N, *tangential_shape); h[N-1] == 0.

    ``h_I`` and ``h_II`` are the pieces with h = h_I + c_lam h_II; they are
    kept because the operator split recombines them with other coefficients.
    """

    h: np.ndarray
    h_I: np.ndarray
    h_II: np.ndarray
    lam: complex


@dataclass(frozen=True, eq=False)
class ResolventSolution:
    rho: Field
    u: Field
    diagnostics: dict = dc_field(default_factory=dict)


# --------------------------------------------------------------------------
# per-grid precomputation


@lru_cache(maxsize=16)
def _normal_series_matrix(box: WholeGrid, grid: HalfGrid) -> np.ndarray:
    """E with u(x_i) = sum_k E[i, k] u^(zeta_k) for continuum-scaled box spectra."""
    x = grid.normal.nodes
    E = np.exp(1j * np.outer(x, box.zeta1)) / (2.0 * box.Y)
    nyq = box.Mn // 2
    E[:, nyq] = np.cos(box.zeta1[nyq] * x) / (2.0 * box.Y)
    return E


def _box_for(grid: HalfGrid, pad: int) -> WholeGrid:
    return grid.whole_grid(pad)


@dataclass(frozen=True, eq=False)
class _Rhs:
    """A Lame right-hand side in the two representations the solver consumes."""

    box_hat: np.ndarray   # (N, *tshape, Mn) spectrum of the reflected, padded data
    t_hat: np.ndarray     # (N, *tshape, n) tangential spectrum on the normal nodes

    def __add__(self, other):
        return _Rhs(self.box_hat + other.box_hat, self.t_hat + other.t_hat)

    def scale(self, c):
        return _Rhs(c * self.box_hat, c * self.t_hat)


def _prepare(g: Field, pad: int) -> _Rhs:
    if g.ncomp != g.grid.dim:
        raise ValueError("Lame data must be a vector field")
    box = _box_for(g.grid, pad)
    G = extend_reflect(g, box=box)
    gs = g if g.representation == SPECTRAL else fourier_tangential(g)
    # Tangential modes at -M/2 have no conjugate partner, so odd derivative
    # factors there would leave an imaginary part in the solution of real
    # data.  The solver works on the symmetric tangential modes only; the
    # box mode -Mn/2 in the normal direction is handled by _symmetric_apply.
    mask = g.grid.tangential.unpaired
    box_hat, t_hat = G.spectrum.copy(), gs.data.copy()
    box_hat[:, mask] = 0
    t_hat[:, mask] = 0
    return _Rhs(box_hat, t_hat)


# --------------------------------------------------------------------------
# symbols on the tangential lattice


class _Symbols:
    def __init__(self, lam, grid: HalfGrid, params: FluidParams, check_k2: bool = False):
        self.lam = complex(lam)
        t = grid.tangential
        self.xi = t.xi
        xi2 = t.xi2
        d = k_symbols(self.lam, xi2, params, check=check_k2)
        self.A, self.B, self.K, self.K1 = d["A"], d["B"], d["K"], d["K1"]
        self.K2, self.K3, self.eta = d["K2"], d["K3"], d["eta"]
        self.c = c_lambda(self.lam, params)
        self.q = q_lambda(self.lam, params)
        y = grid.normal.nodes
        A, B = self.A[..., None], self.B[..., None]
        self.eBy = np.exp(-B * y)
        self.My = m_kernel(A, B, y)


# --------------------------------------------------------------------------
# boundary coefficients


def trace_kernels(A, B, y, eBy=None, My=None):
    """The y-kernels of the trace of the whole-space solution at x_N = 0.

    For the reflected data the xi_N-integrals close by residues to

        k1 = e^{-By}/B                                   (tangential, even part)
        k2 = -M(y)/(A(A+B)) + e^{-By}/(AB(A+B))           (xi_j xi_k coupling)
        k3 = M(y)/(A+B)                                   (i xi_j coupling to g_N)

    ``eBy`` and ``My`` may be passed in when already computed.
    """
    eBy = np.exp(-B * y) if eBy is None else eBy
    My = m_kernel(A, B, y) if My is None else My
    k1 = eBy / B
    k2 = -My / (A * (A + B)) + eBy / (A * B * (A + B))
    k3 = My / (A + B)
    return k1, k2, k3


def _h_pieces(sym: _Symbols, t_hat: np.ndarray, grid: HalfGrid, params: FluidParams):
    """Return (h_I, h_II) with h = h_I + c_lam h_II, shape (N, *tshape)."""
    w = grid.normal.weights
    A, B = sym.A[..., None], sym.B[..., None]
    k1, k2, k3 = trace_kernels(A, B, None, sym.eBy, sym.My)
    N = grid.dim
    al = params.alpha
    H1 = np.stack([(k1 * t_hat[j]) @ w for j in range(N - 1)])
    H2 = np.stack([(k2 * t_hat[k]) @ w for k in range(N - 1)])
    H3 = (k3 * t_hat[N - 1]) @ w
    xiH2 = sum(sym.xi[k] * H2[k] for k in range(N - 1))
    h_I = np.zeros((N,) + sym.A.shape, dtype=complex)
    h_II = np.zeros_like(h_I)
    for j in range(N - 1):
        h_I[j] = -H1[j] / al
        h_II[j] = (sym.xi[j] * xiH2 + 1j * sym.xi[j] * H3) / al
    return h_I, h_II


def boundary_coefficients(lam, g: Field, params: FluidParams) -> BoundaryCoefficients:
    """h = minus the trace at x_N = 0 of the whole-space solution for the reflected data."""
    gs = g if g.representation == SPECTRAL else fourier_tangential(g)
    sym = _Symbols(lam, g.grid, params)
    h_I, h_II = _h_pieces(sym, gs.data, g.grid, params)
    return BoundaryCoefficients(h_I + sym.c * h_II, h_I, h_II, complex(lam))


# --------------------------------------------------------------------------
# corrector


def _corrector(sym: _Symbols, h: np.ndarray, coef: np.ndarray, grid: HalfGrid) -> np.ndarray:
    """w_j = h_j e^{-Bx} - i xi_j coef M(x) (i xi'.h'),  w_N = A coef M(x) (i xi'.h').

    ``coef`` is eta/K for the full corrector; the split uses beta/K1 etc.
    Returns the tangential spectrum on the normal nodes, shape (N, *tshape, n).
    """
    N = grid.dim
    div_h = sum(1j * sym.xi[k] * h[k] for k in range(N - 1))
    amp = (coef * div_h)[..., None] * sym.My
    w = np.empty((N,) + sym.My.shape, dtype=complex)
    for j in range(N - 1):
        w[j] = h[j][..., None] * sym.eBy - 1j * sym.xi[j][..., None] * amp
    w[N - 1] = sym.A[..., None] * amp
    return w


def apply_corrector_W(lam, h: BoundaryCoefficients, params: FluidParams, grid: HalfGrid) -> Field:
    sym = _Symbols(lam, grid, params)
    w = _corrector(sym, h.h, sym.eta / sym.K, grid)
    return inverse_fourier_tangential(Field(w, grid, SPECTRAL))


def corrector_expanded(lam, g: Field, params: FluidParams) -> Field:
    """The corrector assembled directly as y-integrals of the product kernels P1..P4.

    Independent regrouping of the same object used only as a consistency check
    against ``apply_corrector_W(boundary_coefficients(...))``.
    """
    grid = g.grid
    gs = g if g.representation == SPECTRAL else fourier_tangential(g)
    N = grid.dim
    t = grid.tangential
    A, B = roots(lam, t.xi2, params)
    A4, B4 = A[..., None, None], B[..., None, None]
    x = grid.normal.nodes[:, None]
    y = grid.normal.nodes[None, :]
    P = {j: p_kernel(j, A4, B4, x, y) for j in (1, 2, 3, 4)}
    w = grid.normal.weights
    al = params.alpha
    c = c_lambda(lam, params)
    eta = params.beta + params.gamma2 / complex(lam)
    K = (params.alpha + eta) * A + params.alpha * B
    s = A4 + B4
    # e^{-Bx} times the three y-kernels, then M(x) times the same
    ex_k1 = P[1] / B4 ** 2
    ex_k2 = -P[2] / (B4 ** 2 * A4 * s) + P[1] / (A4 * B4 ** 2 * s)
    ex_k3 = P[2] / (B4 ** 2 * s)
    mx_k1 = P[3] / B4 ** 3
    mx_k2 = -P[4] / (B4 ** 3 * A4 * s) + P[3] / (A4 * B4 ** 3 * s)
    mx_k3 = P[4] / (B4 ** 3 * s)

    def integ(kern, data):
        return np.einsum("...xy,...y,y->...x", kern, data, w)

    xi = t.xi
    xig2 = sum(xi[k][..., None] * integ(ex_k2, gs.data[k]) for k in range(N - 1))
    xim2 = sum(xi[k][..., None] * integ(mx_k2, gs.data[k]) for k in range(N - 1))
    e3 = integ(ex_k3, gs.data[N - 1])
    m3 = integ(mx_k3, gs.data[N - 1])
    # h_j e^{-Bx} and (i xi'.h) M(x), with h_j = -k1 g_j/al + c (xi_j xi.k2 g + i xi_j k3 g_N)/al
    hx = []
    divh_m = 0.0
    for j in range(N - 1):
        xj = xi[j][..., None]
        hx.append(-integ(ex_k1, gs.data[j]) / al + c * (xj * xig2 + 1j * xj * e3) / al)
        hm = -integ(mx_k1, gs.data[j]) / al + c * (xj * xim2 + 1j * xj * m3) / al
        divh_m = divh_m + 1j * xj * hm
    coef = (eta / K)[..., None]
    out = np.empty((N,) + t.shape + (grid.normal.n,), dtype=complex)
    for j in range(N - 1):
        out[j] = hx[j] - 1j * xi[j][..., None] * coef * divh_m
    out[N - 1] = A[..., None] * coef * divh_m
    return inverse_fourier_tangential(Field(out, grid, SPECTRAL))


# --------------------------------------------------------------------------
# solvers


def _symmetric_apply(apply, lam, hat, box: WholeGrid, params: FluidParams):
    """Apply a box symbol, reading the normal mode -Mn/2 as a cosine.

    That mode is half at +zeta and half at -zeta, as in the normal series
    matrix, so odd powers of zeta cancel there and real data stay real.
    """
    out = apply(lam, hat, box.freqs, params)
    nyq = slice(box.Mn // 2, box.Mn // 2 + 1)
    col = hat[..., nyq]
    fr = tuple(f[..., nyq] for f in box.freqs)
    plus = apply(lam, col, fr, params)
    minus = apply(lam, col, fr[:-1] + (-fr[-1],), params)
    pieces = out if isinstance(out, tuple) else (out,)
    if not isinstance(out, tuple):
        plus, minus = (plus,), (minus,)
    for o, a, b in zip(pieces, plus, minus):
        o[..., nyq] = 0.5 * (a + b)
    return out


def _whole_part(lam, rhs: _Rhs, grid: HalfGrid, params: FluidParams, pad: int, split=False):
    box = _box_for(grid, pad)
    E = _normal_series_matrix(box, grid)
    if not split:
        uhat = _symmetric_apply(s0_symbol_apply, lam, rhs.box_hat, box, params)
        return uhat @ E.T
    s1, s2 = _symmetric_apply(s0_split_apply, lam, rhs.box_hat, box, params)
    a1, b1, b2 = s0_parts_coefficients(lam, params)
    return (a1 * s1 + b1 * s2) @ E.T, (b2 * s2) @ E.T


def _lame_spectral(lam, rhs: _Rhs, grid: HalfGrid, params: FluidParams, pad: int):
    sym = _Symbols(lam, grid, params)
    u0 = _whole_part(lam, rhs, grid, params, pad)
    h_I, h_II = _h_pieces(sym, rhs.t_hat, grid, params)
    w = _corrector(sym, h_I + sym.c * h_II, sym.eta / sym.K, grid)
    return u0 + w


def solve_lame(lam, g: Field, params: FluidParams, pad: int = DEFAULT_PAD) -> Field:
    """Velocity solving lam u - alpha Lap u - eta grad div u = g, u = 0 at x_N = 0."""
    rhs = _prepare(g, pad)
    return inverse_fourier_tangential(Field(_lame_spectral(lam, rhs, g.grid, params, pad), g.grid, SPECTRAL))


def _check_pair(f: Field, g: Field):
    if f.grid != g.grid:
        raise ValueError("f and g live on different grids")
    if f.ncomp != 1 or g.ncomp != g.grid.dim:
        raise ValueError("f must be scalar and g a vector field")


class HalfspaceSolver:
    """Resolvent solver bound to one data pair, reusable across many lam.

    The reflected box spectra of g and grad f do not depend on lam, so they
    are computed once; each solve then costs a symbol application, one small
    matrix product in the normal direction and the corrector.
    """

    def __init__(self, f: Field, g: Field, params: FluidParams, pad: int = DEFAULT_PAD):
        _check_pair(f, g)
        self.grid = g.grid
        self.params = params
        self.pad = pad
        self.f = f if f.representation == PHYSICAL else inverse_fourier_tangential(f)
        self.fs = fourier_tangential(self.f)
        self.g_rhs = _prepare(g, pad)
        self.gradf_rhs = _prepare(differentiate(self.f, "gradient"), pad)

    def _finish(self, lam, u_hat: np.ndarray) -> tuple[Field, Field]:
        us = Field(u_hat, self.grid, SPECTRAL)
        div = differentiate(us, "divergence")
        rho_hat = (self.fs.data - self.params.gamma_c * div.data) / complex(lam)
        u = inverse_fourier_tangential(us)
        rho = inverse_fourier_tangential(Field(rho_hat, self.grid, SPECTRAL))
        return rho, u

    def solve(self, lam) -> ResolventSolution:
        lam = complex(lam)
        rhs = self.g_rhs + self.gradf_rhs.scale(-self.params.gamma_c / lam)
        u_hat = _lame_spectral(lam, rhs, self.grid, self.params, self.pad)
        rho, u = self._finish(lam, u_hat)
        return ResolventSolution(rho, u, {"lambda": lam})

    def split(self, lam):
        """(S1 g, S2 (f, g), R (f, g)) as half-space fields."""
        lam = complex(lam)
        grid, params = self.grid, self.params
        sym = _Symbols(lam, grid, params, check_k2=True)
        t01, t02 = _whole_part(lam, self.g_rhs, grid, params, self.pad, split=True)
        h_I, h_II = _h_pieces(sym, self.g_rhs.t_hat, grid, params)
        beta, mu = params.beta, params.mu
        # T^b_1: c_lam -> beta/mu in h, eta/K -> beta/K1 in the corrector
        w1 = _corrector(sym, h_I + (beta / mu) * h_II, beta / sym.K1, grid)
        # T^b_2: the lam^-1 weighted remainder, written with q, K2, K3
        w2 = _split_remainder(sym, h_I, h_II, grid)
        gf = _lame_spectral(lam, self.gradf_rhs.scale(-params.gamma_c / lam), grid, params, self.pad)
        s1_hat = t01 + w1
        s2_hat = t02 + w2 + gf
        s1 = inverse_fourier_tangential(Field(s1_hat, grid, SPECTRAL))
        s2 = inverse_fourier_tangential(Field(s2_hat, grid, SPECTRAL))
        rho, _ = self._finish(lam, s1_hat + s2_hat)
        return s1, s2, rho


def _split_remainder(sym: _Symbols, h_I, h_II, grid: HalfGrid) -> np.ndarray:
    N = grid.dim
    lam = sym.lam
    div_I = sum(1j * sym.xi[k] * h_I[k] for k in range(N - 1))
    div_II = sum(1j * sym.xi[k] * h_II[k] for k in range(N - 1))
    amp = ((sym.K2 * div_I + sym.K3 * div_II) / lam)[..., None] * sym.My
    w = np.empty((N,) + sym.My.shape, dtype=complex)
    for j in range(N - 1):
        w[j] = (sym.q / lam) * h_II[j][..., None] * sym.eBy - 1j * sym.xi[j][..., None] * amp
    w[N - 1] = sym.A[..., None] * amp
    return w


def solve_resolvent(lam, f: Field, g: Field, params: FluidParams, pad: int = DEFAULT_PAD) -> ResolventSolution:
    sol = HalfspaceSolver(f, g, params, pad).solve(lam)
    trace = sol.u.data[..., 0]
    t = sol.u.grid.tangential
    sol.diagnostics["boundary_l2"] = float(np.sqrt(np.sum(np.abs(trace) ** 2) * t.dx ** t.dim_t))
    sol.diagnostics["u_l2"] = field_l2(sol.u)
    return sol


def split_operators(lam, f: Field, g: Field, params: FluidParams, pad: int = DEFAULT_PAD):
    """(S1 g, S2 (f, g), R (f, g)); S1 + S2 is the velocity and R the density."""
    return HalfspaceSolver(f, g, params, pad).split(lam)
