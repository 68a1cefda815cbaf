import numpy as np
import pytest

from pkg.spectral.field import (
    Multiplier,
    SpectralField,
    apply_multiplier,
    dealias,
    directional,
    inner,
    quadratic_form,
    resample,
    sobolev_norm,
)
from pkg.spectral.grid import Grid
from pkg.spectral.io import read_binary, to_frame, write_binary, write_csv
from pkg.utils.errors import SingularSymbolError

TWO_PI = 2.0 * np.pi

bad_grids = [
    (3, 16, TWO_PI),
    (1, 12, TWO_PI),
    (1, 4, TWO_PI),
    (2, 16, 0.0),
]

sobolev_cases = [
    (1, 0.0),
    (1, 1.0),
    (3, 2.5),
    (5, 3.0),
]


def cosine(grid, k, axis=0):
    return SpectralField.from_values(grid, np.cos(k * grid.points[axis]), real=True)


@pytest.mark.parametrize("d,n,L", bad_grids)
def test_grid_rejects_bad_shapes(d, n, L):
    with pytest.raises(ValueError):
        Grid(d, n, L)


@pytest.mark.parametrize("d", [1, 2])
def test_values_and_coefficients_agree(d):
    grid = Grid(d, 16, TWO_PI)
    u = SpectralField.plane_wave(grid, (2,) * d, 3.0 - 1.0j)
    phase = sum(2.0 * grid.points[a] for a in range(d))
    assert np.allclose(u.values, (3.0 - 1.0j) * np.exp(1j * phase), atol=1e-13), "plane wave values are off"
    back = SpectralField.from_values(grid, u.values)
    assert np.allclose(back.coeffs, u.coeffs, atol=1e-14)


def test_arrays_are_read_only():
    grid = Grid(1, 16, TWO_PI)
    u = cosine(grid, 1)
    with pytest.raises(ValueError):
        u.values[0] = 2.0
    with pytest.raises(ValueError):
        u.coeffs[0] = 2.0


@pytest.mark.parametrize("k", [1, 3, 7])
def test_derivative_is_exact_below_nyquist(k):
    grid = Grid(1, 16, TWO_PI)
    u = SpectralField.from_values(grid, np.sin(k * grid.points[0]), real=True)
    du = u.derivative(0)
    assert du.real
    assert np.allclose(du.values, k * np.cos(k * grid.points[0]), atol=1e-12)
    assert np.allclose(u.laplacian().values, -k * k * u.values, atol=1e-11)


def test_derivative_drops_nyquist_mode():
    grid = Grid(1, 8, TWO_PI)
    u = SpectralField.from_values(grid, np.cos(4.0 * grid.points[0]), real=True)
    assert u.derivative(0).max_abs() < 1e-14


def test_two_dimensional_operators():
    grid = Grid(2, 16, TWO_PI)
    x, y = grid.points
    u = SpectralField.from_values(grid, np.sin(x) * np.cos(2.0 * y), real=True)
    du = directional([1.0, 0.5], u)
    expected = np.cos(x) * np.cos(2.0 * y) - np.sin(x) * np.sin(2.0 * y)
    assert np.allclose(du.values, expected, atol=1e-12)
    q = quadratic_form(np.eye(2), u)
    assert np.allclose(q.values, u.laplacian().values, atol=1e-12)


def test_real_products_stay_real():
    grid = Grid(2, 16, TWO_PI)
    u = cosine(grid, 1, 0)
    v = cosine(grid, 2, 1)
    w = u * v + 1.0
    assert w.real and w.is_hermitian()
    assert not (u * 1j).real


def test_arithmetic_ignores_the_cached_representation():
    grid = Grid(1, 32, TWO_PI)
    rng = np.random.default_rng(7)
    c = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    fresh = SpectralField(grid, coeffs=c)
    touched = SpectralField(grid, coeffs=c)
    touched.values
    other = SpectralField.from_values(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
    for op in (lambda u: u + other, lambda u: other - u, lambda u: -u, lambda u: 0.3 * u, lambda u: u + 2.0):
        assert np.array_equal(op(fresh).values, op(touched).values)


@pytest.mark.parametrize("k,s", sobolev_cases)
def test_sobolev_norm_of_cosine(k, s):
    grid = Grid(1, 32, TWO_PI)
    expected = np.sqrt(np.pi * (1.0 + k * k) ** s)
    assert sobolev_norm(cosine(grid, k), s) == pytest.approx(expected, rel=1e-12)


def test_inner_product_matches_norm():
    grid = Grid(2, 16, 3.0)
    rng = np.random.default_rng(1)
    u = SpectralField.from_values(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
    assert inner(u, u).real == pytest.approx(u.norm() ** 2, rel=1e-12)
    assert inner(u, u).real == pytest.approx(grid.cell_volume * np.sum(np.abs(u.values) ** 2), rel=1e-12)


def test_dealias_keeps_low_modes_only():
    grid = Grid(1, 32, TWO_PI)
    u = cosine(grid, 3) + cosine(grid, 12)
    kept = dealias(u, 2.0 / 3.0)
    assert np.allclose(kept.values, np.cos(3.0 * grid.points[0]), atol=1e-13)
    with pytest.raises(ValueError):
        dealias(u, 0.0)


@pytest.mark.parametrize("n", [32, 64, 8])
def test_resample_interpolates_band_limited_fields(n):
    grid = Grid(1, 16, TWO_PI)
    u = cosine(grid, 2) + SpectralField.from_values(grid, 0.5 * np.sin(3.0 * grid.points[0]), real=True)
    if n < 16:
        u = cosine(grid, 2)
    fine = resample(u, n)
    x = fine.grid.points[0]
    expected = np.cos(2.0 * x) + (0.5 * np.sin(3.0 * x) if n >= 16 else 0.0)
    assert fine.real
    assert np.allclose(fine.values, expected, atol=1e-13)


def test_singular_symbol_is_reported():
    grid = Grid(1, 16, TWO_PI)
    inverse = Multiplier(lambda k: 1.0 / np.abs(k[0]), "even", "inverse")
    with np.errstate(divide="ignore"):
        with pytest.raises(SingularSymbolError) as info:
            apply_multiplier(inverse, cosine(grid, 1))
    assert "inverse" in str(info.value)


def test_binary_files_restore_the_field(tmp_path):
    grid = Grid(2, 8, 5.0)
    rng = np.random.default_rng(3)
    u = SpectralField.from_values(grid, rng.standard_normal(grid.shape), real=True)
    path = tmp_path / "field.bin"
    write_binary(u, path)
    v = read_binary(path)
    assert v.grid == grid and v.real
    assert np.array_equal(v.coeffs, u.coeffs)

    path.write_bytes(path.read_bytes()[:-16])
    with pytest.raises(ValueError):
        read_binary(path)


def test_csv_lists_every_coefficient(tmp_path):
    grid = Grid(1, 8, TWO_PI)
    u = cosine(grid, 1)
    frame = to_frame(u)
    assert list(frame.columns) == ["k0", "real", "imag"]
    assert len(frame) == 8
    assert frame.loc[frame["k0"] == 1, "real"].iloc[0] == pytest.approx(0.5)
    path = tmp_path / "u.csv"
    write_csv(u, path)
    assert b"\r\n" not in path.read_bytes()


if __name__ == "__main__":
    pytest.main(["-v", __file__])
