"""Scalar symbols and one-dimensional kernels of the half-space resolvent.

Everything here is a pure function of the resolvent parameter ``lam`` and the
tangential frequency.  Most helpers are vectorised: ``lam`` may be a complex
scalar or array, ``xi2`` is the squared tangential modulus ``|xi'|**2`` and
broadcasts against it.  The ``SymbolPoint`` wrappers exist for call sites that
work one point at a time (audits, oracles, the CLI).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DomainError",
    "PreconditionError",
    "FluidParams",
    "SectorSpec",
    "SymbolPoint",
    "in_sector",
    "sector_violation",
    "eta_lambda",
    "p_lambda",
    "q_lambda",
    "c_lambda",
    "roots",
    "symbol_A",
    "symbol_B",
    "symbol_K",
    "symbol_K1",
    "symbol_K2",
    "symbol_K3",
    "k_symbols",
    "m_kernel",
    "m_kernel_naive",
    "m_kernel_integral",
    "m_kernel_dx",
    "kernel_M",
    "kernel_P",
    "p_kernel",
    "coupling_ratio",
    "admissibility_thresholds",
    "TAU_M",
]

# Switch to the integral representation of the divided difference when
# |A - B| < TAU_M * (|A| + |B|).
TAU_M = 1e-3

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_THETA = 0.5 * (_GL_NODES + 1.0)
_THETA_W = 0.5 * _GL_WEIGHTS


class DomainError(ValueError):
    """A symbol was evaluated where it is undefined (zero denominator, branch cut)."""


class PreconditionError(ValueError):
    """A point lies outside the region where a decomposition is valid."""


@dataclass(frozen=True)
class FluidParams:
    """Coefficients of the linearised compressible system.

    ``alpha`` and ``beta`` are the two viscosity coefficients (already divided
    by the reference density), ``gamma_c`` the sound-speed coefficient and
    ``dim`` the space dimension.
    """

    alpha: float = 0.5
    beta: float = 0.5
    gamma_c: float = 2.0
    dim: int = 2

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma_c"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.alpha + self.beta <= 0:
            raise ValueError(f"alpha + beta must be positive, got {self.alpha + self.beta}")
        if self.gamma_c <= 0:
            raise ValueError(f"gamma_c must be positive, got {self.gamma_c}")
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")

    @property
    def mu(self) -> float:
        """alpha + beta, the longitudinal viscosity."""
        return self.alpha + self.beta

    @property
    def gamma2(self) -> float:
        return self.gamma_c ** 2

    @property
    def disk_radius(self) -> float:
        """gamma**2 / (alpha + beta): radius of the acoustic circle in the lambda plane."""
        return self.gamma2 / self.mu


@dataclass(frozen=True)
class SectorSpec:
    """The admissible region: sector of half-angle pi - epsilon, minus a disk, minus |lam| < nu0."""

    epsilon: float = math.pi / 4
    nu0: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.epsilon < math.pi / 2):
            raise ValueError(f"epsilon must lie strictly inside (0, pi/2), got {self.epsilon}")
        if not self.nu0 > 0:
            raise ValueError(f"nu0 must be positive, got {self.nu0}")


@dataclass(frozen=True)
class SymbolPoint:
    lam: complex
    xi_t: tuple = field(default=(0.0,))

    def __post_init__(self):
        if self.lam == 0:
            raise DomainError("lambda must be nonzero")
        object.__setattr__(self, "lam", complex(self.lam))
        object.__setattr__(self, "xi_t", tuple(float(x) for x in np.atleast_1d(self.xi_t)))

    @property
    def xi2(self) -> float:
        return float(sum(x * x for x in self.xi_t))


# --------------------------------------------------------------------------
# sector membership


def sector_violation(lam: complex, spec: SectorSpec, params: FluidParams) -> str | None:
    """Name the first membership condition ``lam`` violates, or None."""
    lam = complex(lam)
    if lam == 0:
        raise DomainError("lambda must be nonzero")
    if abs(np.angle(lam)) > math.pi - spec.epsilon:
        return f"|arg lambda| = {abs(np.angle(lam)):.6g} exceeds pi - epsilon = {math.pi - spec.epsilon:.6g}"
    c = params.disk_radius + spec.epsilon
    if (lam.real + c) ** 2 + lam.imag ** 2 < c * c:
        return f"lambda lies inside the excluded disk centred at {-c:.6g} with radius {c:.6g}"
    if abs(lam) < spec.nu0:
        return f"|lambda| = {abs(lam):.6g} is below the floor nu0 = {spec.nu0:.6g}"
    return None


def in_sector(lam, spec: SectorSpec, params: FluidParams):
    """Membership in the admissible region; vectorised over ``lam``."""
    lam = np.asarray(lam, dtype=complex)
    if np.any(lam == 0):
        raise DomainError("lambda must be nonzero")
    c = params.disk_radius + spec.epsilon
    ok = np.abs(np.angle(lam)) <= math.pi - spec.epsilon
    ok &= (lam.real + c) ** 2 + lam.imag ** 2 >= c * c
    ok &= np.abs(lam) >= spec.nu0
    return bool(ok) if ok.ndim == 0 else ok


# --------------------------------------------------------------------------
# lambda-only symbols


def _nonzero(lam):
    lam = np.asarray(lam, dtype=complex)
    if np.any(lam == 0):
        raise DomainError("lambda must be nonzero")
    return lam


def _scalar_out(x):
    return complex(x) if np.ndim(x) == 0 else x


def eta_lambda(lam, params: FluidParams):
    """beta + gamma**2 / lambda."""
    lam = _nonzero(lam)
    return _scalar_out(params.beta + params.gamma2 / lam)


def p_lambda(lam, params: FluidParams):
    """lambda / (alpha + eta_lambda) = lambda**2 / ((alpha + beta) lambda + gamma**2)."""
    lam = _nonzero(lam)
    den = params.mu * lam + params.gamma2
    if np.any(den == 0):
        raise DomainError("(alpha + beta) lambda + gamma**2 vanishes")
    return _scalar_out(lam * lam / den)


def c_lambda(lam, params: FluidParams):
    """Coupling coefficient (beta lambda + gamma**2) / ((alpha + beta) lambda + gamma**2).

    Equal to eta / (alpha + eta); it multiplies the gradient-divergence part of
    the whole-space symbol.
    """
    lam = _nonzero(lam)
    den = params.mu * lam + params.gamma2
    if np.any(den == 0):
        raise DomainError("(alpha + beta) lambda + gamma**2 vanishes")
    return _scalar_out((params.beta * lam + params.gamma2) / den)


def q_lambda(lam, params: FluidParams):
    """alpha gamma**2 lambda / ((alpha + beta)((alpha + beta) lambda + gamma**2))."""
    lam = _nonzero(lam)
    den = params.mu * (params.mu * lam + params.gamma2)
    if np.any(den == 0):
        raise DomainError("(alpha + beta) lambda + gamma**2 vanishes")
    return _scalar_out(params.alpha * params.gamma2 * lam / den)


# --------------------------------------------------------------------------
# characteristic roots and denominators


def _principal_sqrt(z):
    z = np.asarray(z, dtype=complex)
    bad = (z.imag == 0) & (z.real <= 0)
    if np.any(bad):
        raise DomainError("square-root radicand is a nonpositive real (branch cut)")
    return np.sqrt(z)


def roots(lam, xi2, params: FluidParams):
    """Return (A, B) with A = sqrt(p + xi2), B = sqrt(lam/alpha + xi2), Re > 0."""
    lam = _nonzero(lam)
    xi2 = np.asarray(xi2, dtype=float)
    A = _principal_sqrt(p_lambda(lam, params) + xi2)
    B = _principal_sqrt(lam / params.alpha + xi2)
    return A, B


def k_symbols(lam, xi2, params: FluidParams, check: bool = True):
    """Return a dict with A, B, K, K1, K2, K3 at (lam, xi2).

    K2 and K3 are only meaningful where |gamma**2 A / (K1 lam)| <= 1/2; with
    ``check`` the bound is enforced and PreconditionError raised otherwise.
    """
    lam = _nonzero(lam)
    A, B = roots(lam, xi2, params)
    al, be, g2 = params.alpha, params.beta, params.gamma2
    eta = be + g2 / lam
    K = (al + eta) * A + al * B
    K1 = params.mu * A + al * B
    z = g2 * A / K1
    if check and np.any(np.abs(z / lam) > 0.5):
        worst = float(np.max(np.abs(z / lam)))
        raise PreconditionError(
            f"|gamma^2 A / (K1 lambda)| = {worst:.4g} > 1/2; lambda is below the K2/K3 threshold"
        )
    # eta/K = beta/K1 + K2/lam fixes the last term as gamma**2/K.
    K2 = -(be / K1) * z / (1.0 + z / lam) + g2 / K
    clam = (be * lam + g2) / (params.mu * lam + g2)
    K3 = (al * be * g2 / (params.mu * K1)) * lam / (params.mu * lam + g2) + K2 * clam
    return {"A": A, "B": B, "K": K, "K1": K1, "K2": K2, "K3": K3, "eta": eta}


def symbol_A(pt: SymbolPoint, params: FluidParams) -> complex:
    return complex(roots(pt.lam, pt.xi2, params)[0])


def symbol_B(pt: SymbolPoint, params: FluidParams) -> complex:
    return complex(roots(pt.lam, pt.xi2, params)[1])


def symbol_K(pt: SymbolPoint, params: FluidParams) -> complex:
    return complex(k_symbols(pt.lam, pt.xi2, params, check=False)["K"])


def symbol_K1(pt: SymbolPoint, params: FluidParams) -> complex:
    return complex(k_symbols(pt.lam, pt.xi2, params, check=False)["K1"])


def symbol_K2(pt: SymbolPoint, params: FluidParams) -> complex:
    return complex(k_symbols(pt.lam, pt.xi2, params)["K2"])


def symbol_K3(pt: SymbolPoint, params: FluidParams) -> complex:
    return complex(k_symbols(pt.lam, pt.xi2, params)["K3"])


def coupling_ratio(lam, xi2, params: FluidParams):
    """|gamma**2 A / (K1 lam)|, the quantity bounded by 1/2 above lambda_1."""
    d = k_symbols(lam, xi2, params, check=False)
    return np.abs(params.gamma2 * d["A"] / (d["K1"] * np.asarray(lam)))


# --------------------------------------------------------------------------
# the divided-difference kernel


def m_kernel_naive(A, B, x):
    """(exp(-A x) - exp(-B x)) / (A - B), no safeguards."""
    return (np.exp(-A * x) - np.exp(-B * x)) / (A - B)


def m_kernel_integral(A, B, x):
    """-x * int_0^1 exp(-((1-t) A + t B) x) dt by 16-point Gauss-Legendre."""
    A, B, x = np.broadcast_arrays(np.asarray(A, complex), np.asarray(B, complex), np.asarray(x, float))
    mix = (1.0 - _THETA) * A[..., None] + _THETA * B[..., None]
    return -x * np.sum(_THETA_W * np.exp(-mix * x[..., None]), axis=-1)


def m_kernel(A, B, x):
    """Stable evaluation of (exp(-A x) - exp(-B x)) / (A - B), broadcasting."""
    A, B, x = np.broadcast_arrays(np.asarray(A, complex), np.asarray(B, complex), np.asarray(x, float))
    close = np.abs(A - B) < TAU_M * (np.abs(A) + np.abs(B))
    out = np.empty(A.shape, dtype=complex)
    far = ~close
    if np.any(far):
        # exp(-S x) (1 - exp((S - F) x)) / (S - F), with S the root of smaller
        # real part, keeps full precision when |A - B| x is small (where the
        # plain difference cancels) and cannot overflow
        a, b, xf = A[far], B[far], x[far]
        slow = np.where(a.real < b.real, a, b)
        fast = a + b - slow
        out[far] = -np.exp(-slow * xf) * np.expm1((slow - fast) * xf) / (slow - fast)
    if np.any(close):
        out[close] = m_kernel_integral(A[close], B[close], x[close])
    return out if out.ndim else complex(out)


def m_kernel_dx(A, B, x, order: int = 1):
    """order-th x-derivative of the divided-difference kernel.

    Uses d^l M = (-1)^l (A^l M + (A^l - B^l)/(A - B) exp(-B x)); the divided
    power difference is written as a finite sum so it stays stable as A -> B.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    A, B, x = np.broadcast_arrays(np.asarray(A, complex), np.asarray(B, complex), np.asarray(x, float))
    M = np.asarray(m_kernel(A, B, x))
    if order == 0:
        return M
    dpow = sum(A ** (order - 1 - k) * B ** k for k in range(order))
    return (-1) ** order * (A ** order * M + dpow * np.exp(-B * x))


def kernel_M(pt: SymbolPoint, params: FluidParams, xN) -> complex:
    if np.any(np.asarray(xN) < 0):
        raise ValueError("xN must be nonnegative")
    A, B = roots(pt.lam, pt.xi2, params)
    return m_kernel(A, B, xN)


def p_kernel(j: int, A, B, x, y):
    """The four boundary-layer product kernels, evaluated from (A, B)."""
    if j == 1:
        return B * np.exp(-B * (x + y))
    if j == 2:
        return B ** 2 * np.exp(-B * x) * m_kernel(A, B, y)
    if j == 3:
        return B ** 2 * m_kernel(A, B, x) * np.exp(-B * y)
    if j == 4:
        return B ** 3 * m_kernel(A, B, x) * m_kernel(A, B, y)
    raise ValueError(f"kernel index must be in 1..4, got {j}")


def kernel_P(j: int, pt: SymbolPoint, params: FluidParams, xN, yN):
    if np.any(np.asarray(xN) < 0) or np.any(np.asarray(yN) < 0):
        raise ValueError("xN and yN must be nonnegative")
    A, B = roots(pt.lam, pt.xi2, params)
    return p_kernel(j, A, B, xN, yN)


# --------------------------------------------------------------------------
# concrete admissibility thresholds


def _admissible_angles(nu, spec: SectorSpec, params: FluidParams, n_theta: int):
    theta = np.linspace(-(math.pi - spec.epsilon), math.pi - spec.epsilon, n_theta)
    lam = nu * np.exp(1j * theta)
    c = params.disk_radius + spec.epsilon
    keep = (lam.real + c) ** 2 + lam.imag ** 2 >= c * c
    return lam[keep]


def admissibility_thresholds(params: FluidParams, spec: SectorSpec, xi_max: float,
                             n_theta: int = 181, n_xi: int = 129):
    """Concrete (lambda_1, lambda_2) for tangential frequencies |xi'| <= xi_max.

    lambda_1 is the smallest modulus above which the sampled coupling ratio
    |gamma**2 A / (K1 lambda)| stays <= 1/2 on every admissible direction;
    lambda_2 = max(lambda_1, 2 gamma**2 / (alpha + beta)).  The scan is over a
    geometric modulus grid followed by bisection on the last crossing.
    """
    xi = np.concatenate([[0.0], np.geomspace(1e-3, max(xi_max, 1e-3), n_xi - 1)])

    def worst(nu):
        lam = _admissible_angles(nu, spec, params, n_theta)
        if lam.size == 0:
            return 0.0
        return float(np.max(coupling_ratio(lam[:, None], xi[None, :] ** 2, params)))

    scale = params.disk_radius + params.gamma2 / params.alpha + 1.0
    grid = np.geomspace(1e-4 * scale, 1e4 * scale, 161)
    vals = np.array([worst(nu) for nu in grid])
    bad = np.nonzero(vals > 0.5)[0]
    if bad.size == 0:
        lam1 = float(grid[0])
    else:
        i = bad[-1]
        if i == grid.size - 1:
            raise PreconditionError("coupling ratio exceeds 1/2 across the whole scan range")
        lo, hi = grid[i], grid[i + 1]
        for _ in range(60):
            mid = math.sqrt(lo * hi)
            if worst(mid) > 0.5:
                lo = mid
            else:
                hi = mid
        lam1 = float(hi)
    lam2 = max(lam1, 2.0 * params.disk_radius)
    return lam1, lam2
