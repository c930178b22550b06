"""Discretisation of the half-space and of the periodic whole-space box.

Tangential directions are periodic on [-L, L)^(N-1) with M points per axis and
the continuum-scaled transform

    F'[f](xi'_k) ~= dx^(N-1) * sum_m f(x'_m) exp(-i xi'_k . x'_m).

The normal direction of the half-space uses Chebyshev-Lobatto points on
[0, Y_max].  They cluster quadratically at the wall, which is where the
boundary layers exp(-B x_N) live, and they give spectrally accurate
quadrature (Clenshaw-Curtis), interpolation and differentiation from one set
of samples.  The whole-space box [-L, L)^(N-1) x [-Y, Y) is uniform in every
direction so that the N-dimensional FFT applies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "TangentialGrid",
    "NormalGrid",
    "WholeGrid",
    "HalfGrid",
    "Field",
    "WholeField",
    "fourier_tangential",
    "inverse_fourier_tangential",
    "extend_reflect",
    "default_parity",
    "restrict_to_half",
    "differentiate",
    "quadrature_normal",
    "field_l2",
    "save_field",
    "load_field",
    "FieldFormatError",
]


class FieldFormatError(ValueError):
    pass


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


# --------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class TangentialGrid:
    L: float = 8.0
    M: int = 128
    dim_t: int = 1

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.M < 2 or self.M % 2 or not _is_pow2(self.M):
            raise ValueError(f"M must be an even power of two, got {self.M}")
        if self.dim_t not in (1, 2):
            raise ValueError("dim_t must be 1 or 2")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.M

    @property
    def shape(self) -> tuple:
        return (self.M,) * self.dim_t

    @cached_property
    def x1(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.M)

    @cached_property
    def k1(self) -> np.ndarray:
        """Integer wavenumbers in FFT order, covering [-M/2, M/2)."""
        return np.fft.fftfreq(self.M, d=1.0 / self.M)

    @cached_property
    def xi1(self) -> np.ndarray:
        return (math.pi / self.L) * self.k1

    @cached_property
    def xi(self) -> tuple:
        """Broadcastable frequency arrays, one per tangential axis."""
        return tuple(np.meshgrid(*([self.xi1] * self.dim_t), indexing="ij"))

    @cached_property
    def xi2(self) -> np.ndarray:
        return sum(x * x for x in self.xi)

    @cached_property
    def coords(self) -> tuple:
        return tuple(np.meshgrid(*([self.x1] * self.dim_t), indexing="ij"))

    @cached_property
    def unpaired(self) -> np.ndarray:
        """Mask of modes with an axis at wavenumber -M/2, which have no conjugate partner."""
        edge = self.k1 == -(self.M // 2)
        return np.logical_or.reduce(np.meshgrid(*([edge] * self.dim_t), indexing="ij"))

    @cached_property
    def _phase(self) -> np.ndarray:
        # exp(-i xi_k x_0) with x_0 = -L equals (-1)^k on every axis
        sign = np.where(self.k1.astype(int) % 2 == 0, 1.0, -1.0)
        out = sign
        for _ in range(self.dim_t - 1):
            out = np.multiply.outer(out, sign)
        return out

    @property
    def nyquist(self) -> float:
        return math.pi / self.L * (self.M // 2)

    def to_dict(self) -> dict:
        return {"L": self.L, "M": self.M, "dim_t": self.dim_t}


@dataclass(frozen=True)
class NormalGrid:
    """Chebyshev-Lobatto nodes on [0, Y_max] with Clenshaw-Curtis weights.

    ``tol`` is the accuracy promised for sum(w * exp(-c y)) against the
    integral over (0, inf), valid for c_min <= c <= c_max; the lower limit is
    set by truncation at Y_max, the upper by polynomial resolution of the
    layer exp(-c y).
    """

    Y_max: float = 8.0
    n: int = 96
    tol: float = 5e-3

    def __post_init__(self):
        if not self.Y_max > 0:
            raise ValueError("Y_max must be positive")
        if self.n < 8:
            raise ValueError("need at least 8 normal nodes")

    @cached_property
    def nodes(self) -> np.ndarray:
        j = np.arange(self.n)
        x = 0.5 * self.Y_max * (1.0 - np.cos(math.pi * j / (self.n - 1)))
        x[0] = 0.0
        x[-1] = self.Y_max
        return x

    @cached_property
    def weights(self) -> np.ndarray:
        N = self.n - 1
        theta = math.pi * np.arange(self.n) / N
        w = np.zeros(self.n)
        v = np.ones(self.n - 2)
        inner = slice(1, N)
        if N % 2 == 0:
            w[0] = w[N] = 1.0 / (N * N - 1)
            for k in range(1, N // 2):
                v -= 2.0 * np.cos(2 * k * theta[inner]) / (4 * k * k - 1)
            v -= np.cos(N * theta[inner]) / (N * N - 1)
        else:
            w[0] = w[N] = 1.0 / (N * N)
            for k in range(1, (N - 1) // 2 + 1):
                v -= 2.0 * np.cos(2 * k * theta[inner]) / (4 * k * k - 1)
        w[inner] = 2.0 * v / N
        return 0.5 * self.Y_max * w

    @cached_property
    def bary(self) -> np.ndarray:
        w = np.where(np.arange(self.n) % 2 == 0, 1.0, -1.0)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    @cached_property
    def D1(self) -> np.ndarray:
        x, w = self.nodes, self.bary
        dx = x[:, None] - x[None, :]
        np.fill_diagonal(dx, 1.0)
        D = (w[None, :] / w[:, None]) / dx
        np.fill_diagonal(D, 0.0)
        np.fill_diagonal(D, -D.sum(axis=1))
        return D

    @cached_property
    def D2(self) -> np.ndarray:
        return self.D1 @ self.D1

    def diff_matrix(self, order: int) -> np.ndarray:
        if order == 0:
            return np.eye(self.n)
        if order == 1:
            return self.D1
        if order == 2:
            return self.D2
        if order > 2:
            return np.linalg.matrix_power(self.D1, order)
        raise ValueError(f"unsupported derivative order {order}")

    def interp_matrix(self, points) -> np.ndarray:
        """Barycentric interpolation matrix from the nodes to ``points`` in [0, Y_max]."""
        pts = np.asarray(points, dtype=float)
        if np.any(pts < -1e-12) or np.any(pts > self.Y_max * (1 + 1e-12)):
            raise ValueError("interpolation points must lie in [0, Y_max]")
        d = pts[:, None] - self.nodes[None, :]
        exact = np.abs(d) < 1e-14 * max(1.0, self.Y_max)
        d = np.where(exact, 1.0, d)
        P = self.bary[None, :] / d
        P /= P.sum(axis=1, keepdims=True)
        rows = np.nonzero(exact.any(axis=1))[0]
        for r in rows:
            P[r] = exact[r].astype(float)
        return P

    @cached_property
    def c_min(self) -> float:
        # truncation of int_Y^inf exp(-c y) dy = exp(-c Y)/c below tol
        c = 1.0 / self.Y_max
        while math.exp(-c * self.Y_max) / c > self.tol:
            c *= 1.05
        return c

    @cached_property
    def c_max(self) -> float:
        c = self.c_min
        while c < 1e6:
            nxt = c * 1.25
            if abs(np.dot(self.weights, np.exp(-nxt * self.nodes)) - 1.0 / nxt) * nxt > self.tol:
                break
            c = nxt
        return c

    def to_dict(self) -> dict:
        return {"Y_max": self.Y_max, "n": self.n, "tol": self.tol}


@dataclass(frozen=True)
class HalfGrid:
    tangential: TangentialGrid = dc_field(default_factory=TangentialGrid)
    normal: NormalGrid = dc_field(default_factory=NormalGrid)

    @property
    def dim(self) -> int:
        return self.tangential.dim_t + 1

    @property
    def shape(self) -> tuple:
        return self.tangential.shape + (self.normal.n,)

    def whole_grid(self, pad: int = 1) -> "WholeGrid":
        """Uniform box matching the tangential spacing; ``pad`` widens it normally."""
        t = self.tangential
        Y = self.normal.Y_max
        mn = max(8, int(round(t.M * Y / t.L)))
        mn = 1 << (mn - 1).bit_length()
        return WholeGrid(t, pad * Y, pad * mn)

    def to_dict(self) -> dict:
        return {"tangential": self.tangential.to_dict(), "normal": self.normal.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "HalfGrid":
        return cls(TangentialGrid(**d["tangential"]), NormalGrid(**d["normal"]))


@dataclass(frozen=True)
class WholeGrid:
    tangential: TangentialGrid
    Y: float
    Mn: int

    def __post_init__(self):
        if self.Mn % 2:
            raise ValueError("Mn must be even")

    @property
    def dim(self) -> int:
        return self.tangential.dim_t + 1

    @property
    def dz(self) -> float:
        return 2.0 * self.Y / self.Mn

    @cached_property
    def z(self) -> np.ndarray:
        return -self.Y + self.dz * np.arange(self.Mn)

    @cached_property
    def zeta1(self) -> np.ndarray:
        return (math.pi / self.Y) * np.fft.fftfreq(self.Mn, d=1.0 / self.Mn)

    @property
    def shape(self) -> tuple:
        return self.tangential.shape + (self.Mn,)

    @cached_property
    def freqs(self) -> tuple:
        """Broadcastable full-lattice frequency arrays (tangential axes, then normal)."""
        t = self.tangential
        axes = [t.xi1] * t.dim_t + [self.zeta1]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    @cached_property
    def freq2(self) -> np.ndarray:
        return sum(f * f for f in self.freqs)

    @property
    def cell(self) -> float:
        return self.tangential.dx ** self.tangential.dim_t * self.dz

    @property
    def nyquist(self) -> float:
        return min(self.tangential.nyquist, math.pi / self.Y * (self.Mn // 2))

    @cached_property
    def _phase(self) -> np.ndarray:
        kz = np.fft.fftfreq(self.Mn, d=1.0 / self.Mn).astype(int)
        sz = np.where(kz % 2 == 0, 1.0, -1.0)
        return np.multiply.outer(self.tangential._phase, sz)

    def to_dict(self) -> dict:
        return {"tangential": self.tangential.to_dict(), "Y": self.Y, "Mn": self.Mn}


# --------------------------------------------------------------------------
# fields


PHYSICAL = "physical"
SPECTRAL = "spectral"


@dataclass(frozen=True, eq=False)
class Field:
    """Samples on the half-space grid.

    ``data`` has shape (ncomp, *tangential_shape, n_normal); scalar fields use
    ncomp = 1 and vector fields ncomp = N.  In the spectral representation the
    tangential axes hold continuum-scaled Fourier coefficients in FFT order.
    """

    data: np.ndarray
    grid: HalfGrid
    representation: str = PHYSICAL

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.shape[1:] != self.grid.shape:
            raise ValueError(f"data shape {d.shape[1:]} does not match grid {self.grid.shape}")
        if d.shape[0] not in (1, self.grid.dim):
            raise ValueError(f"fields carry 1 or {self.grid.dim} components, got {d.shape[0]}")
        if self.representation not in (PHYSICAL, SPECTRAL):
            raise ValueError(f"unknown representation {self.representation!r}")
        object.__setattr__(self, "data", d)

    @property
    def ncomp(self) -> int:
        return self.data.shape[0]

    @property
    def kind(self) -> str:
        return "scalar" if self.ncomp == 1 else "vector"

    @classmethod
    def zeros(cls, grid: HalfGrid, ncomp: int, dtype=float) -> "Field":
        return cls(np.zeros((ncomp,) + grid.shape, dtype=dtype), grid)

    @classmethod
    def from_function(cls, grid: HalfGrid, fn) -> "Field":
        """Sample ``fn(*coords)`` returning an array of shape (ncomp, ...) or (...)."""
        t = grid.tangential
        axes = [t.x1] * t.dim_t + [grid.normal.nodes]
        coords = np.meshgrid(*axes, indexing="ij")
        vals = np.asarray(fn(*coords))
        if vals.shape == grid.shape:
            vals = vals[None]
        return cls(vals, grid)

    def with_data(self, data, representation=None) -> "Field":
        return Field(data, self.grid, representation or self.representation)

    def component(self, i: int) -> "Field":
        return Field(self.data[i:i + 1], self.grid, self.representation)

    def __add__(self, other):
        _check_same(self, other)
        return self.with_data(self.data + other.data)

    def __sub__(self, other):
        _check_same(self, other)
        return self.with_data(self.data - other.data)

    def __mul__(self, c):
        return self.with_data(self.data * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_data(-self.data)

    @property
    def real(self) -> "Field":
        return self.with_data(self.data.real)

    @property
    def imag(self) -> "Field":
        return self.with_data(self.data.imag)


def _check_same(a: Field, b: Field):
    if a.grid != b.grid or a.representation != b.representation or a.ncomp != b.ncomp:
        raise ValueError("fields live on different grids or representations")


@dataclass(frozen=True, eq=False)
class WholeField:
    """Physical samples on the periodic whole-space box, shape (ncomp, *box_shape)."""

    data: np.ndarray
    grid: WholeGrid

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.ndim != self.grid.dim + 1 or d.shape[1:] != self.grid.shape:
            raise ValueError(f"data shape {d.shape} does not match box {self.grid.shape}")
        object.__setattr__(self, "data", d)

    @property
    def ncomp(self) -> int:
        return self.data.shape[0]

    @cached_property
    def spectrum(self) -> np.ndarray:
        """Continuum-scaled N-dimensional Fourier coefficients in FFT order."""
        axes = tuple(range(1, self.data.ndim))
        return self.grid.cell * self.grid._phase * np.fft.fftn(self.data, axes=axes)

    @classmethod
    def from_spectrum(cls, hat: np.ndarray, grid: WholeGrid, real: bool = False) -> "WholeField":
        axes = tuple(range(1, hat.ndim))
        data = np.fft.ifftn(hat * grid._phase, axes=axes) / grid.cell
        if real:
            data = data.real
        return cls(data, grid)

    @classmethod
    def from_function(cls, grid: WholeGrid, fn) -> "WholeField":
        t = grid.tangential
        axes = [t.x1] * t.dim_t + [grid.z]
        coords = np.meshgrid(*axes, indexing="ij")
        vals = np.asarray(fn(*coords))
        if vals.shape == grid.shape:
            vals = vals[None]
        return cls(vals, grid)

    def __add__(self, other):
        return WholeField(self.data + other.data, self.grid)

    def __sub__(self, other):
        return WholeField(self.data - other.data, self.grid)

    def __mul__(self, c):
        return WholeField(self.data * c, self.grid)

    __rmul__ = __mul__

    def l2(self) -> float:
        return float(np.sqrt(self.grid.cell * np.sum(np.abs(self.data) ** 2)))


# --------------------------------------------------------------------------
# tangential transforms


def _taxes(field: Field) -> tuple:
    return tuple(range(1, 1 + field.grid.tangential.dim_t))


def _tphase(grid: HalfGrid) -> np.ndarray:
    return grid.tangential._phase[(...,) + (None,)]


def fourier_tangential(f: Field) -> Field:
    if f.representation != PHYSICAL:
        raise ValueError("fourier_tangential expects a physical field")
    t = f.grid.tangential
    hat = (t.dx ** t.dim_t) * _tphase(f.grid) * np.fft.fftn(f.data, axes=_taxes(f))
    return Field(hat, f.grid, SPECTRAL)


def inverse_fourier_tangential(f: Field, real: bool = False) -> Field:
    if f.representation != SPECTRAL:
        raise ValueError("inverse_fourier_tangential expects a spectral field")
    t = f.grid.tangential
    data = np.fft.ifftn(f.data * _tphase(f.grid), axes=_taxes(f)) / (t.dx ** t.dim_t)
    if real:
        data = data.real
    return Field(data, f.grid, PHYSICAL)


def _physical(f: Field) -> Field:
    return f if f.representation == PHYSICAL else inverse_fourier_tangential(f)


def _spectral(f: Field) -> Field:
    return f if f.representation == SPECTRAL else fourier_tangential(f)


# --------------------------------------------------------------------------
# extension to the whole space and restriction back


def default_parity(ncomp: int, dim: int) -> tuple:
    """Even for scalars and tangential components, odd for the normal component."""
    if ncomp == 1:
        return ("even",)
    return ("even",) * (dim - 1) + ("odd",)


def _parity_signs(parity, ncomp):
    if isinstance(parity, str):
        parity = (parity,) * ncomp
    if len(parity) != ncomp:
        raise ValueError("one parity per component required")
    out = []
    for p in parity:
        if p not in ("even", "odd"):
            raise ValueError(f"parity must be 'even' or 'odd', got {p!r}")
        out.append(p)
    return out


def extend_reflect(g: Field, parity=None, box: WholeGrid | None = None) -> WholeField:
    """Reflect half-space data into the periodic box.

    The box defaults to ``g.grid.whole_grid()``.  A box taller than Y_max is
    zero-filled beyond |x_N| = Y_max.  Odd components are set to zero on the
    reflection planes x_N = 0 and |x_N| = Y_max, the midpoint of their jump.
    """
    g = _physical(g)
    box = box or g.grid.whole_grid()
    if box.tangential != g.grid.tangential:
        raise ValueError("box and field use different tangential grids")
    Y = g.grid.normal.Y_max
    if box.Y < Y - 1e-12:
        raise ValueError("box must cover [-Y_max, Y_max]")
    parity = _parity_signs(parity or default_parity(g.ncomp, g.grid.dim), g.ncomp)
    z = box.z
    az = np.abs(z)
    inside = az <= Y * (1 + 1e-12)
    P = np.zeros((z.size, g.grid.normal.n))
    P[inside] = g.grid.normal.interp_matrix(np.minimum(az[inside], Y))
    vals = g.data @ P.T
    on_plane = (np.abs(z) < 1e-12 * Y) | (np.abs(az - Y) < 1e-12 * Y)
    for c, p in enumerate(parity):
        if p == "odd":
            vals[c] *= np.sign(z)
            vals[c][..., on_plane] = 0.0
    return WholeField(vals, box)


def restrict_to_half(w: WholeField, grid: HalfGrid) -> Field:
    """Evaluate the trigonometric interpolant of ``w`` at the half-space nodes."""
    box = w.grid
    if box.tangential != grid.tangential:
        raise ValueError("box and grid use different tangential grids")
    if grid.normal.Y_max > box.Y + 1e-12:
        raise ValueError("half-space grid extends beyond the box")
    axes = tuple(range(1, w.data.ndim - 1))
    # transform tangential axes only, then sum the normal Fourier series at the nodes
    t = grid.tangential
    hat_t = (t.dx ** t.dim_t) * t._phase[..., None] * np.fft.fftn(w.data, axes=axes)
    return Field(_normal_series(hat_t, box, grid.normal.nodes), grid, SPECTRAL)


def _normal_series(hat_t: np.ndarray, box: WholeGrid, points: np.ndarray) -> np.ndarray:
    """Evaluate the normal trigonometric interpolant of box samples at ``points``."""
    coef = np.fft.fft(hat_t, axis=-1) / box.Mn
    k = np.fft.fftfreq(box.Mn, d=1.0 / box.Mn)
    # symmetric treatment of the Nyquist mode keeps real data real
    E = np.exp(1j * (math.pi / box.Y) * np.outer(points + box.Y, k))
    nyq = box.Mn // 2
    E[:, nyq] = np.cos(math.pi * nyq * (points + box.Y) / box.Y)
    return coef @ E.T


# --------------------------------------------------------------------------
# differential operators


def _ddn(f: Field, order: int) -> np.ndarray:
    return f.data @ f.grid.normal.diff_matrix(order).T


def _dt(fs: Field, axis: int) -> np.ndarray:
    return 1j * fs.grid.tangential.xi[axis][None, ..., None] * fs.data


def _half_diff(f: Field, which, want_spectral: bool) -> Field:
    fs = _spectral(f)
    grid = f.grid
    dim = grid.dim
    xi2 = grid.tangential.xi2[None, ..., None]
    if which == "gradient":
        if fs.ncomp != 1:
            raise ValueError("gradient expects a scalar field")
        comps = [_dt(fs, a)[0] for a in range(dim - 1)] + [_ddn(fs, 1)[0]]
        out = np.stack(comps)
    elif which == "divergence":
        if fs.ncomp != dim:
            raise ValueError("divergence expects a vector field")
        out = sum(1j * grid.tangential.xi[a][..., None] * fs.data[a] for a in range(dim - 1))
        out = (out + _ddn(fs.component(dim - 1), 1)[0])[None]
    elif which == "laplacian":
        out = -xi2 * fs.data + _ddn(fs, 2)
    elif isinstance(which, tuple) and which[0] == "normal":
        out = _ddn(fs, int(which[1]))
    elif isinstance(which, tuple) and which[0] == "tangential":
        out = _dt(fs, int(which[1]))
    else:
        raise ValueError(f"unsupported derivative {which!r}")
    res = Field(out, grid, SPECTRAL)
    return res if want_spectral else inverse_fourier_tangential(res)


def _whole_diff(f: WholeField, which) -> WholeField:
    hat = f.spectrum
    freqs = f.grid.freqs
    dim = f.grid.dim
    if which == "gradient":
        if f.ncomp != 1:
            raise ValueError("gradient expects a scalar field")
        out = np.stack([1j * k * hat[0] for k in freqs])
    elif which == "divergence":
        if f.ncomp != dim:
            raise ValueError("divergence expects a vector field")
        out = sum(1j * freqs[a] * hat[a] for a in range(dim))[None]
    elif which == "laplacian":
        out = -f.grid.freq2 * hat
    elif isinstance(which, tuple) and which[0] == "normal":
        out = (1j * freqs[-1]) ** int(which[1]) * hat
    elif isinstance(which, tuple) and which[0] == "tangential":
        out = 1j * freqs[int(which[1])] * hat
    else:
        raise ValueError(f"unsupported derivative {which!r}")
    real = np.isrealobj(f.data)
    return WholeField.from_spectrum(out, f.grid, real=real)


def differentiate(f, which, spectral: bool | None = None):
    """Gradient, divergence, Laplacian, or ('normal', l) / ('tangential', a) derivative.

    Half-space fields are differentiated spectrally in x' and with the
    Chebyshev differentiation matrix in x_N.  The result keeps the input
    representation unless ``spectral`` says otherwise.
    """
    if isinstance(f, WholeField):
        return _whole_diff(f, which)
    want = (f.representation == SPECTRAL) if spectral is None else spectral
    return _half_diff(f, which, want)


# --------------------------------------------------------------------------
# quadrature and norms


def quadrature_normal(values, grid: NormalGrid):
    """sum_i w_i values[..., i]."""
    values = np.asarray(values)
    if values.shape[-1] != grid.n:
        raise ValueError(f"expected {grid.n} normal samples, got {values.shape[-1]}")
    return values @ grid.weights


def field_l2(f: Field, interior: bool = False) -> float:
    """Discrete L2 norm over the half-space (tangential uniform, normal Clenshaw-Curtis)."""
    f = _physical(f)
    w = f.grid.normal.weights.copy()
    if interior:
        w[0] = w[-1] = 0.0
    t = f.grid.tangential
    s = np.sum(np.abs(f.data) ** 2 * w) * t.dx ** t.dim_t
    return float(np.sqrt(s))


# --------------------------------------------------------------------------
# serialisation

_FORMAT = "stokes-resolvent-field"


def _field_meta(f) -> dict:
    if isinstance(f, WholeField):
        return {"format": _FORMAT, "version": 1, "container": "whole",
                "grid": f.grid.to_dict(), "shape": list(f.data.shape)}
    return {"format": _FORMAT, "version": 1, "container": "half",
            "representation": f.representation, "kind": f.kind,
            "grid": f.grid.to_dict(), "shape": list(f.data.shape)}


def save_field(path, f) -> Path:
    """Write a Field or WholeField as ``.npz`` or ``.json`` (chosen by suffix)."""
    path = Path(path)
    meta = _field_meta(f)
    data = np.ascontiguousarray(np.asarray(f.data, dtype=complex))
    if path.suffix == ".json":
        meta["real"] = data.real.ravel().tolist()
        meta["imag"] = data.imag.ravel().tolist()
        path.write_text(json.dumps(meta))
    elif path.suffix == ".npz":
        with open(path, "wb") as fh:
            np.savez(fh, meta=np.array(json.dumps(meta)), data=data)
    else:
        raise FieldFormatError(f"unsupported field container suffix {path.suffix!r}")
    return path


def _whole_grid_from(d: dict) -> WholeGrid:
    return WholeGrid(TangentialGrid(**d["tangential"]), d["Y"], d["Mn"])


def load_field(path):
    path = Path(path)
    try:
        if path.suffix == ".json":
            meta = json.loads(path.read_text())
            shape = tuple(meta["shape"])
            data = np.array(meta["real"]) + 1j * np.array(meta["imag"])
            data = data.reshape(shape)
        elif path.suffix == ".npz":
            with np.load(path) as z:
                meta = json.loads(str(z["meta"]))
                data = z["data"]
        else:
            raise FieldFormatError(f"unsupported field container suffix {path.suffix!r}")
    except (KeyError, ValueError) as exc:
        raise FieldFormatError(f"malformed field container {path}: {exc}") from exc
    if meta.get("format") != _FORMAT:
        raise FieldFormatError(f"{path} is not a {_FORMAT} container")
    if np.all(data.imag == 0):
        data = data.real
    if meta["container"] == "whole":
        return WholeField(data, _whole_grid_from(meta["grid"]))
    return Field(data, HalfGrid.from_dict(meta["grid"]), meta["representation"])
