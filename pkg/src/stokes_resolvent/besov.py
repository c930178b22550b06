"""Littlewood-Paley blocks and Besov / Bessel-potential norms on the periodic box.

The dyadic profile is phi(xi) = chi(|xi|) - chi(2|xi|), where chi is a C-infinity
step equal to 1 on [0, 1] and 0 on [2, inf), glued from exp(-1/t).  Then
sum_k phi(2^-k xi) telescopes to 1, and the low-frequency symbol is
psi^(xi) = 1 - sum_{k>=1} phi(2^-k xi) = chi(|xi|).

All norms are grid-relative: only blocks whose shells fit below the Nyquist
frequency are summed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .grid_fourier import Field, TangentialGrid, WholeField, WholeGrid, extend_reflect

__all__ = [
    "DyadicPartition",
    "BesovParams",
    "HalfNorm",
    "NonEquivalentNormWarning",
    "chi",
    "build_partition",
    "lp_blocks",
    "besov_norm",
    "besov_norm_halfspace",
    "bessel_lift",
    "sequence_norm",
    "lq_norm",
]


def _h(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def chi(r):
    """Smooth step: 1 for r <= 1, 0 for r >= 2."""
    r = np.asarray(r, dtype=float)
    a = _h(2.0 - r)
    b = _h(r - 1.0)
    return a / (a + b)


@dataclass(frozen=True)
class DyadicPartition:
    J_max: int

    def phi(self, xi_abs, k: int = 0):
        """phi(2^-k xi) evaluated at |xi|."""
        r = np.asarray(xi_abs, dtype=float) * 2.0 ** (-k)
        return chi(r) - chi(2.0 * r)

    def psi_hat(self, xi_abs):
        return chi(xi_abs)

    def support(self, k: int) -> tuple:
        return 2.0 ** (k - 1), 2.0 ** (k + 1)


@dataclass(frozen=True)
class BesovParams:
    s: float = 0.0
    q: float = 2.0
    r: float = 1.0

    def __post_init__(self):
        if not (1.0 < self.q < math.inf):
            raise ValueError(f"q must lie in (1, inf), got {self.q}")
        if not self.r >= 1.0:
            raise ValueError(f"r must lie in [1, inf], got {self.r}")

    @property
    def halfspace_equivalent(self) -> bool:
        return -1.0 + 1.0 / self.q < self.s < 1.0 / self.q

    def shifted(self, ds: float) -> "BesovParams":
        return BesovParams(self.s + ds, self.q, self.r)


class NonEquivalentNormWarning(UserWarning):
    """The reflection surrogate is used outside the smoothness range where it is an equivalent norm."""


class HalfNorm(float):
    """A norm value that remembers whether it is an equivalent half-space norm."""

    equivalent: bool = True

    def __new__(cls, value, equivalent=True):
        obj = super().__new__(cls, value)
        obj.equivalent = bool(equivalent)
        return obj


def build_partition(grid) -> DyadicPartition:
    """Partition sized to a grid's Nyquist frequency: J_max = floor(log2 nyquist) - 1."""
    if isinstance(grid, (TangentialGrid, WholeGrid)):
        nyq = grid.nyquist
    else:
        nyq = float(grid)
    J = int(math.floor(math.log2(nyq))) - 1
    if J < 2:
        raise ValueError(f"grid too coarse for a dyadic partition (J_max = {J})")
    return DyadicPartition(J)


def _abs_freq(grid: WholeGrid):
    return np.sqrt(grid.freq2)


def lp_blocks(f: WholeField, P: DyadicPartition) -> list:
    """[psi * f, phi_1 * f, ..., phi_Jmax * f] as WholeFields."""
    r = _abs_freq(f.grid)
    hat = f.spectrum
    real = np.isrealobj(f.data)
    blocks = [WholeField.from_spectrum(P.psi_hat(r) * hat, f.grid, real=real)]
    for k in range(1, P.J_max + 1):
        blocks.append(WholeField.from_spectrum(P.phi(r, k) * hat, f.grid, real=real))
    return blocks


def lq_norm(f: WholeField, q: float) -> float:
    """Discrete L_q norm of the pointwise Euclidean magnitude over the box."""
    mag = np.sqrt(np.sum(np.abs(f.data) ** 2, axis=0))
    return float((f.grid.cell * np.sum(mag ** q)) ** (1.0 / q))


def _lr_sum(vals, r):
    vals = np.asarray(vals, dtype=float)
    if vals.size == 0:
        return 0.0
    if math.isinf(r):
        return float(np.max(vals))
    return float(np.sum(vals ** r) ** (1.0 / r))


def besov_norm(f: WholeField, bp: BesovParams, P: DyadicPartition | None = None) -> float:
    P = P or build_partition(f.grid)
    blocks = lp_blocks(f, P)
    low = lq_norm(blocks[0], bp.q)
    high = [2.0 ** (bp.s * k) * lq_norm(b, bp.q) for k, b in enumerate(blocks[1:], start=1)]
    return low + _lr_sum(high, bp.r)


def besov_norm_halfspace(f: Field, bp: BesovParams, parity=None, P: DyadicPartition | None = None,
                         check_range: bool = True) -> HalfNorm:
    """Besov norm of the reflection extension of ``f``.

    The extension is one admissible extension, so the value bounds the
    restriction norm from above.  Outside -1 + 1/q < s < 1/q it is no longer
    an equivalent norm; the value is still returned and flagged, and a warning
    is issued unless ``check_range`` is False (used where the out-of-range
    index is intended, e.g. the density norm one order above the velocity).
    """
    ext = extend_reflect(f, parity)
    value = besov_norm(ext, bp, P)
    if check_range and not bp.halfspace_equivalent:
        warnings.warn(
            f"s = {bp.s} lies outside (-1 + 1/q, 1/q); reflection norm is not equivalent",
            NonEquivalentNormWarning,
            stacklevel=2,
        )
    return HalfNorm(value, bp.halfspace_equivalent)


def bessel_lift(f: WholeField, sigma: float) -> WholeField:
    """<D>^sigma f, the multiplier (1 + |xi|^2)^(sigma/2)."""
    mult = (1.0 + f.grid.freq2) ** (0.5 * sigma)
    return WholeField.from_spectrum(mult * f.spectrum, f.grid, real=np.isrealobj(f.data))


def sequence_norm(a, s: float, q: float, start: int = 0) -> float:
    """(sum_nu (2^(nu s) |a_nu|)^q)^(1/q) with a[i] indexed by nu = start + i; sup for q = inf."""
    a = np.abs(np.asarray(a, dtype=float))
    nu = start + np.arange(a.size)
    return _lr_sum(2.0 ** (nu * s) * a, q)
