"""Whole-space solution operator of the complex Lame system.

For g on the periodic box the solution of

    lam u - alpha Lap u - eta_lam grad div u = g

is, mode by mode,

    u^ = g^/(lam + alpha|xi|^2) - c_lam xi (xi . g^) / ((lam + alpha|xi|^2)(p + |xi|^2))

with c_lam = eta/(alpha + eta).  Writing S1 = F^-1[g^/(lam/alpha + |xi|^2)] and
S2 = F^-1[(i xi)(i xi . g^)/((lam/alpha + |xi|^2)(p + |xi|^2))], the operator is
S1/alpha + (eta/(alpha(alpha + eta))) S2.  The split keeps the lam-independent
part of that coefficient in T01 and moves the O(1/lam) remainder to T02.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid_fourier import WholeField
from .spectral_core import (
    DomainError,
    FluidParams,
    c_lambda,
    eta_lambda,
    p_lambda,
)

__all__ = [
    "WholeResolventOutput",
    "s0_symbol_apply",
    "ds0_symbol_apply",
    "s0_parts_coefficients",
    "apply_S0",
    "apply_S0_parts",
    "apply_dS0",
    "lame_operator",
    "SeriesRegionError",
]


class SeriesRegionError(DomainError):
    """|lam| <= gamma^2/(alpha+beta): the T02 coefficient is no longer a convergent series in 1/lam."""


@dataclass(frozen=True, eq=False)
class WholeResolventOutput:
    u: WholeField
    parts: tuple | None = None


def _freq_pieces(freqs):
    k2 = sum(f * f for f in freqs)
    return k2


def _xi_dot(freqs, hat):
    return sum(f * hat[a] for a, f in enumerate(freqs))


def s0_symbol_apply(lam, hat, freqs, params: FluidParams):
    """Apply the whole-space symbol to spectral data ``hat`` of shape (N, ...)."""
    lam = complex(lam)
    k2 = _freq_pieces(freqs)
    d1 = lam + params.alpha * k2
    d2 = p_lambda(lam, params) + k2
    proj = c_lambda(lam, params) * _xi_dot(freqs, hat) / (d1 * d2)
    return np.stack([hat[a] / d1 - f * proj for a, f in enumerate(freqs)])


def s0_split_apply(lam, hat, freqs, params: FluidParams):
    """Return (S1 hat, S2 hat) of the decomposition described in the module docstring."""
    lam = complex(lam)
    k2 = _freq_pieces(freqs)
    b2 = lam / params.alpha + k2
    d2 = p_lambda(lam, params) + k2
    s1 = hat / b2
    proj = -_xi_dot(freqs, hat) / (b2 * d2)
    s2 = np.stack([f * proj for f in freqs])
    return s1, s2


def s0_parts_coefficients(lam, params: FluidParams):
    """Coefficients (a1, b1, b2) with T01 = a1 S1 + b1 S2 and T02 = b2 S2.

    b2 = eta/(alpha(alpha+eta)) - beta/(alpha(alpha+beta)) is written in closed
    form; it equals lam^-1 zeta(1/lam) for the series zeta.
    """
    lam = complex(lam)
    al, mu, g2 = params.alpha, params.mu, params.gamma2
    a1 = 1.0 / al
    b1 = params.beta / (al * mu)
    # eta/(alpha(alpha+eta)) - beta/(alpha mu) = gamma^2 / (mu (mu lam + gamma^2))
    b2 = g2 / (mu * (mu * lam + g2))
    return a1, b1, b2


def ds0_symbol_apply(lam, hat, freqs, params: FluidParams):
    """lam-derivative of the whole-space symbol applied to ``hat``."""
    lam = complex(lam)
    al, mu, g2 = params.alpha, params.mu, params.gamma2
    k2 = _freq_pieces(freqs)
    d1 = lam + al * k2
    p = p_lambda(lam, params)
    d2 = p + k2
    c = c_lambda(lam, params)
    den = mu * lam + g2
    dc = -al * g2 / den ** 2
    dp = lam * (mu * lam + 2.0 * g2) / den ** 2
    dproj_coef = dc / (d1 * d2) - c / (d1 ** 2 * d2) - c * dp / (d1 * d2 ** 2)
    xg = _xi_dot(freqs, hat)
    return np.stack([-hat[a] / d1 ** 2 - f * dproj_coef * xg for a, f in enumerate(freqs)])


def _check_vector(g: WholeField):
    if g.ncomp != g.grid.dim:
        raise ValueError(f"expected a vector field with {g.grid.dim} components")


def _out(hat, g: WholeField, lam) -> WholeField:
    real = np.isrealobj(g.data) and complex(lam).imag == 0
    return WholeField.from_spectrum(hat, g.grid, real=real)


def apply_S0(lam, g: WholeField, params: FluidParams) -> WholeField:
    _check_vector(g)
    return _out(s0_symbol_apply(lam, g.spectrum, g.grid.freqs, params), g, lam)


def apply_S0_parts(lam, g: WholeField, params: FluidParams):
    """(T01 g, T02 g) with T01 + T02 = S0."""
    _check_vector(g)
    if abs(lam) <= params.disk_radius:
        raise SeriesRegionError(
            f"|lambda| = {abs(lam):.4g} must exceed gamma^2/(alpha+beta) = {params.disk_radius:.4g}"
        )
    s1, s2 = s0_split_apply(lam, g.spectrum, g.grid.freqs, params)
    a1, b1, b2 = s0_parts_coefficients(lam, params)
    return _out(a1 * s1 + b1 * s2, g, lam), _out(b2 * s2, g, lam)


def apply_dS0(lam, g: WholeField, params: FluidParams) -> WholeField:
    _check_vector(g)
    return _out(ds0_symbol_apply(lam, g.spectrum, g.grid.freqs, params), g, lam)


def lame_operator(lam, u: WholeField, params: FluidParams) -> WholeField:
    """lam u - alpha Lap u - eta grad div u, applied spectrally."""
    _check_vector(u)
    eta = eta_lambda(lam, params)
    hat = u.spectrum
    freqs = u.grid.freqs
    k2 = _freq_pieces(freqs)
    xu = _xi_dot(freqs, hat)
    out = np.stack([(lam + params.alpha * k2) * hat[a] + eta * f * xu for a, f in enumerate(freqs)])
    return _out(out, u, lam)
