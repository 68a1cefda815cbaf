import numpy as np
import pytest

from pkg.dispersion.dispersion import PhysicalParams
from pkg.spectral.field import SpectralField
from pkg.spectral.grid import Grid
from pkg.waterwaves.dno import DnoConfig
from pkg.waterwaves.evolution import SurfaceState
from pkg.waterwaves.residual import RESIDUAL_COLUMNS, STENCIL, difference_step, residual_evaluator, time_derivative

TWO_PI = 2.0 * np.pi
GRID = Grid(1, 32, TWO_PI)
X = GRID.points[0]

step_cases = [
    (0.1, 1.0, 1e-3),
    (0.05, 2.0, 1e-3),
    (0.2, 0.5, 1e-2),
]


def linear_provider(params, shift=0.0):
    w = np.sqrt(np.tanh(params.sqrt_mu))

    def provider(t):
        zeta = np.cos(X - w * t) + shift * t * np.cos(X)
        psi = (w / np.tanh(params.sqrt_mu)) * np.sin(X - w * t)
        return SurfaceState(t, SpectralField.from_values(GRID, zeta, real=True), SpectralField.from_values(GRID, psi, real=True))

    return provider, w


def test_stencil_weights():
    assert STENCIL.sum() == pytest.approx(0.0, abs=1e-15)
    assert np.dot(STENCIL, np.arange(-3, 4)) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("eps,freq,safety", step_cases)
def test_difference_step_balances_truncation(eps, freq, safety):
    h = difference_step(eps, freq, safety)
    assert h ** 6 * freq ** 7 / 140.0 == pytest.approx(safety * eps ** 3, rel=1e-12)


def test_sixth_order_stencil_is_exact_on_polynomials():
    def provider(t):
        return SurfaceState(
            t,
            SpectralField.from_values(GRID, t ** 5 * np.cos(X), real=True),
            SpectralField.from_values(GRID, t ** 6 * np.sin(X), real=True),
        )

    t, h = 0.3, 0.01
    U, dz, dp = time_derivative(provider, t, h)
    assert U.t == pytest.approx(t)
    assert np.allclose(dz.values, 5.0 * t ** 4 * np.cos(X), atol=1e-10)
    assert np.allclose(dp.values, 6.0 * t ** 5 * np.sin(X), atol=1e-10)


def test_linear_wave_has_no_residual():
    params = PhysicalParams(mu=1.0, epsilon=1e-8)
    provider, w = linear_provider(params)
    frame = residual_evaluator(provider, [0.0, 0.7], params, DnoConfig(), w)
    assert list(frame.columns) == RESIDUAL_COLUMNS
    assert len(frame) == 2
    assert frame["residual"].max() < 1e-6


def test_residual_measures_a_known_defect():
    params = PhysicalParams(mu=1.0, epsilon=1e-8)
    delta = 1e-3
    provider, w = linear_provider(params, shift=delta)
    frame = residual_evaluator(provider, [0.0], params, DnoConfig(), w, s=2.0, order="first")
    row = frame.iloc[0]
    assert row["order"] == "first"
    assert row["r1_l2"] == pytest.approx(delta / np.sqrt(2.0), rel=1e-4)
    assert row["r1_hs"] == pytest.approx(delta / np.sqrt(2.0) * 2.0, rel=1e-4)
    assert row["r2_l2"] < 1e-6


if __name__ == "__main__":
    pytest.main(["-v", __file__])
