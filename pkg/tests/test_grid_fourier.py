import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from stokes_resolvent.grid_fourier import (
    PHYSICAL,
    SPECTRAL,
    Field,
    FieldFormatError,
    HalfGrid,
    NormalGrid,
    TangentialGrid,
    WholeField,
    differentiate,
    extend_reflect,
    field_l2,
    fourier_tangential,
    inverse_fourier_tangential,
    load_field,
    quadrature_normal,
    restrict_to_half,
    save_field,
)

SMALL = HalfGrid(TangentialGrid(8.0, 32), NormalGrid(8.0, 24))


def test_grid_validation():
    with pytest.raises(ValueError):
        TangentialGrid(M=96)
    with pytest.raises(ValueError):
        TangentialGrid(L=-1.0)
    with pytest.raises(ValueError):
        NormalGrid(n=4)
    with pytest.raises(ValueError):
        Field(np.zeros((1, 3, 3)), SMALL)


def test_tangential_grid_layout():
    t = TangentialGrid(8.0, 128)
    assert t.x1[0] == -8.0 and np.isclose(t.x1[1] - t.x1[0], 0.125)
    assert np.isclose(t.xi1[1], math.pi / 8)
    assert np.isclose(t.nyquist, 8 * math.pi)


def test_gaussian_transform(grid):
    f = Field.from_function(grid, lambda x, y: np.exp(-x ** 2) * np.exp(-y))
    fh = fourier_tangential(f)
    xi = grid.tangential.xi1
    expect = math.sqrt(math.pi) * np.exp(-xi ** 2 / 4)
    assert np.max(np.abs(fh.data[0, :, 0] - expect)) < 1e-13
    assert fh.representation == SPECTRAL


@given(arrays(np.float64, (2,) + SMALL.shape, elements=st.floats(-1e3, 1e3)))
@settings(max_examples=30, deadline=None)
def test_tangential_round_trip(data):
    f = Field(data, SMALL)
    back = inverse_fourier_tangential(fourier_tangential(f), real=True)
    assert back.representation == PHYSICAL
    assert np.allclose(back.data, data, rtol=0, atol=1e-12 * (1 + np.max(np.abs(data))))


def test_plancherel(grid, rng):
    f = Field(rng.standard_normal((1,) + grid.shape), grid)
    fh = fourier_tangential(f)
    t = grid.tangential
    lhs = np.sum(np.abs(f.data) ** 2) * t.dx
    rhs = np.sum(np.abs(fh.data) ** 2) / (2 * t.L)
    assert np.isclose(lhs, rhs, rtol=1e-12)


def test_clenshaw_curtis_exponentials():
    ng = NormalGrid()
    for c in np.geomspace(ng.c_min, ng.c_max, 12):
        approx = quadrature_normal(np.exp(-c * ng.nodes), ng)
        assert abs(approx - 1 / c) * c <= ng.tol
    assert np.isclose(ng.weights.sum(), ng.Y_max, rtol=1e-13)


def test_clenshaw_curtis_polynomials():
    ng = NormalGrid(2.0, 17)
    for k in range(0, 16):
        exact = 2.0 ** (k + 1) / (k + 1)
        assert np.isclose(quadrature_normal(ng.nodes ** k, ng), exact, rtol=1e-12)
    with pytest.raises(ValueError):
        quadrature_normal(np.ones(5), ng)


def test_chebyshev_derivatives_and_interpolation():
    ng = NormalGrid(3.0, 20)
    y = ng.nodes
    p = y ** 5 - 2 * y ** 2
    assert np.allclose(ng.D1 @ p, 5 * y ** 4 - 4 * y, atol=1e-9)
    assert np.allclose(ng.diff_matrix(2) @ p, 20 * y ** 3 - 4, atol=1e-8)
    assert np.allclose(ng.diff_matrix(3) @ p, 60 * y ** 2, atol=1e-6)
    pts = np.array([0.0, 0.37, 1.5, 2.99, 3.0])
    assert np.allclose(ng.interp_matrix(pts) @ p, pts ** 5 - 2 * pts ** 2, atol=1e-10)
    with pytest.raises(ValueError):
        ng.interp_matrix([3.5])


def test_half_space_laplacian_and_divergence(grid):
    g = lambda x, y: np.exp(-x ** 2) * y ** 2 * np.exp(-y)
    f = Field.from_function(grid, g)
    lap = differentiate(f, "laplacian").data[0].real

    def expect(x, y):
        gx = (4 * x ** 2 - 2) * np.exp(-x ** 2) * y ** 2 * np.exp(-y)
        gy = np.exp(-x ** 2) * (2 - 4 * y + y ** 2) * np.exp(-y)
        return gx + gy

    ref = Field.from_function(grid, expect).data[0]
    assert np.max(np.abs(lap - ref)) < 1e-8
    grad = differentiate(f, "gradient")
    div = differentiate(grad, "divergence")
    assert np.max(np.abs(div.data - differentiate(f, "laplacian").data)) < 1e-8
    with pytest.raises(ValueError):
        differentiate(f, "curl")
    with pytest.raises(ValueError):
        differentiate(f, "divergence")


def test_spectral_representation_is_kept(grid):
    f = fourier_tangential(Field.from_function(grid, lambda x, y: np.exp(-x ** 2 - y)))
    d = differentiate(f, ("normal", 1))
    assert d.representation == SPECTRAL
    assert np.allclose(d.data, -f.data, atol=1e-6)


@pytest.mark.parametrize("pad", [1, 2])
def test_reflect_restrict_round_trip(grid, pad):
    box = grid.whole_grid(pad)
    f = Field.from_function(grid, lambda x, y: np.stack([
        np.exp(-x ** 2 - y ** 2), y * np.exp(-x ** 2 - y ** 2)]))
    w = extend_reflect(f, box=box)
    back = inverse_fourier_tangential(restrict_to_half(w, grid), real=True)
    assert np.max(np.abs(back.data - f.data)) < 1e-10


def test_reflection_parity(grid):
    box = grid.whole_grid(1)
    f = Field.from_function(grid, lambda x, y: np.exp(-x ** 2 - (y - 1) ** 2))
    even = extend_reflect(f, "even", box).data[0]
    odd = extend_reflect(f, "odd", box).data[0]
    z = box.z
    for j in np.nonzero((z > 0) & (z < box.Y))[0]:
        mirror = np.argmin(np.abs(z + z[j]))
        assert np.allclose(even[:, mirror], even[:, j])
        assert np.allclose(odd[:, mirror], -odd[:, j])
    with pytest.raises(ValueError):
        extend_reflect(f, "sideways", box)


def test_field_l2_of_separable_function(grid):
    f = Field.from_function(grid, lambda x, y: np.exp(-x ** 2) * np.exp(-y))
    exact = math.sqrt(math.sqrt(math.pi / 2) * 0.5)
    assert abs(field_l2(f) - exact) < 1e-3 * exact


@pytest.mark.parametrize("suffix", [".npz", ".json"])
def test_save_load_round_trip(tmp_path, suffix, rng):
    f = Field(rng.standard_normal((2,) + SMALL.shape), SMALL)
    back = load_field(save_field(tmp_path / f"f{suffix}", f))
    assert back.grid == f.grid and back.representation == PHYSICAL
    assert np.array_equal(back.data, f.data)
    box = SMALL.whole_grid(1)
    w = WholeField(rng.standard_normal((1,) + box.shape) + 0j, box)
    wb = load_field(save_field(tmp_path / f"w{suffix}", w))
    assert wb.grid == box and np.array_equal(wb.data, w.data.real)


def test_load_rejects_foreign_files(tmp_path):
    with pytest.raises(FieldFormatError):
        save_field(tmp_path / "f.txt", Field.zeros(SMALL, 1))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"format": "other", "shape": [1], "real": [0], "imag": [0]}))
    with pytest.raises(FieldFormatError):
        load_field(bad)
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(FieldFormatError):
        load_field(broken)
