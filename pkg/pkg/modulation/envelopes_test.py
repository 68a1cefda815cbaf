import numpy as np
import pytest

from pkg.modulation.envelopes import band_limit, gaussian, make_envelope, mode, zero
from pkg.spectral.grid import Grid

TWO_PI = 2.0 * np.pi

families = [
    ("gaussian", {"amplitude": 0.5, "center": 1.0, "width": 0.4}),
    ("mode", {"amplitude": 0.3, "index": 2, "phase": 0.5}),
    ("zero", {}),
]


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("family,kwargs", families)
def test_envelopes_are_band_limited(d, family, kwargs):
    grid = Grid(d, 32, TWO_PI)
    u = make_envelope(grid, family, **kwargs)
    assert not u.real
    assert u.grid == grid
    high = np.any(np.abs(grid.indices) > 0.5 * grid.nyquist, axis=0)
    assert np.all(u.coeffs[high] == 0.0), f"{family} envelope leaks above half Nyquist"


def test_gaussian_peak_and_phase():
    grid = Grid(1, 64, TWO_PI)
    u = gaussian(grid, amplitude=2.0, center=0.0, width=0.8, phase=np.pi / 2.0)
    assert u.values[0] == pytest.approx(2.0j, abs=1e-6)
    assert abs(u.values[32]) == pytest.approx(2.0 * np.exp(-2.0 / 0.64), rel=1e-4)


def test_mode_is_a_plane_wave():
    grid = Grid(2, 16, TWO_PI)
    u = mode(grid, amplitude=0.5, index=(1, -2))
    x, y = grid.points
    assert np.allclose(u.values, 0.5 * np.exp(1j * (x - 2.0 * y)), atol=1e-14)


def test_invalid_envelopes():
    grid = Grid(1, 16, TWO_PI)
    with pytest.raises(ValueError):
        gaussian(grid, width=0.0)
    with pytest.raises(ValueError):
        mode(grid, index=5)
    with pytest.raises(ValueError):
        make_envelope(grid, "sech")
    assert zero(grid).max_abs() == 0.0


def test_band_limit_keeps_low_modes():
    grid = Grid(1, 16, TWO_PI)
    u = mode(grid, index=3) + mode(grid, index=-4)
    assert np.array_equal(band_limit(u).coeffs, u.coeffs)
    assert band_limit(u, 0.25).max_abs() == 0.0


if __name__ == "__main__":
    pytest.main(["-v", __file__])
