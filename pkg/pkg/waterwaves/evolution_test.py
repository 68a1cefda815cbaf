import numpy as np
import pytest

from pkg.dispersion.dispersion import PhysicalParams
from pkg.spectral.field import SpectralField
from pkg.spectral.grid import Grid
from pkg.utils.errors import DepthViolationError, NumericalAbortError
from pkg.waterwaves import evolution
from pkg.waterwaves.dno import DnoConfig
from pkg.waterwaves.evolution import (
    SurfaceState,
    hamiltonian,
    integrate_ww,
    resolving_step,
    rhs,
    rk4_step,
    surface_mass,
)

TWO_PI = 2.0 * np.pi

linear_cases = [
    (1.0, 0.0, 1),
    (4.0, 0.0, 2),
    (1.0, 0.2, 3),
]


def real(grid, values):
    return SpectralField.from_values(grid, values, real=True)


def travelling_wave(grid, k, params, t=0.0):
    """Linear wave zeta = cos(k x - w t) with its psi."""
    r = abs(k)
    g = r * np.tanh(params.sqrt_mu * r)
    b = 1.0 + params.inv_bond * r * r
    w = np.sqrt(b * g)
    x = grid.points[0]
    arg = k * x - w * t
    return SurfaceState(t, real(grid, np.cos(arg)), real(grid, (w / g) * np.sin(arg)))


def bumpy_state(grid):
    x = grid.points[0]
    return SurfaceState(0.0, real(grid, 0.6 * np.cos(x) + 0.2 * np.sin(2.0 * x)), real(grid, 0.5 * np.sin(x) - 0.3 * np.cos(3.0 * x)))


def test_state_requires_real_fields_on_one_grid():
    grid = Grid(1, 16, TWO_PI)
    u = real(grid, np.cos(grid.points[0]))
    with pytest.raises(ValueError):
        SurfaceState(0.0, u, u.as_complex())
    with pytest.raises(ValueError):
        SurfaceState(0.0, u, real(Grid(1, 32, TWO_PI), np.zeros(32)))


@pytest.mark.parametrize("mu,sigma,k", linear_cases)
def test_linear_wave_is_reproduced(mu, sigma, k):
    params = PhysicalParams(mu=mu, inv_bond=sigma, epsilon=1e-9)
    grid = Grid(1, 32, TWO_PI)
    U0 = travelling_wave(grid, k, params)
    run = integrate_ww(U0, 1.0, 0.01, params, DnoConfig(order=2))
    exact = travelling_wave(grid, k, params, t=1.0)
    U = run.final()
    assert U.t == pytest.approx(1.0)
    assert (U.zeta - exact.zeta).max_abs() < 1e-7
    assert (U.psi - exact.psi).max_abs() < 1e-7


def test_rhs_ignores_constant_potential():
    params = PhysicalParams(epsilon=0.1)
    grid = Grid(1, 32, TWO_PI)
    U = bumpy_state(grid)
    shifted = SurfaceState(0.0, U.zeta, U.psi + 3.0)
    a, b = rhs(U, params, DnoConfig()), rhs(shifted, params, DnoConfig())
    assert (a[0] - b[0]).max_abs() < 1e-13
    assert (a[1] - b[1]).max_abs() < 1e-13


@pytest.mark.parametrize("sigma", [0.0, 0.1])
def test_mass_and_energy_over_a_short_run(sigma):
    params = PhysicalParams(mu=1.0, inv_bond=sigma, epsilon=0.05)
    grid = Grid(1, 32, TWO_PI)
    U0 = bumpy_state(grid)
    run = integrate_ww(U0, 2.0, 0.01, params, DnoConfig(order=4), snapshots=[0.5, 1.0])
    assert run.times == pytest.approx([0.0, 0.5, 1.0, 2.0])
    masses = [surface_mass(U) for U in run.samples]
    assert np.allclose(masses, masses[0], atol=1e-10)
    energy = np.array(run.energy)
    assert np.max(np.abs(energy - energy[0])) < 1e-4 * energy[0]


def test_hamiltonian_of_a_resting_bump():
    params = PhysicalParams(epsilon=0.2)
    grid = Grid(1, 32, TWO_PI)
    x = grid.points[0]
    U = SurfaceState(0.0, real(grid, np.cos(x)), SpectralField.zeros(grid))
    assert hamiltonian(U, params, DnoConfig()) == pytest.approx(np.pi / 2.0, rel=1e-13)


def test_steps_resolve_the_fastest_mode():
    params = PhysicalParams(mu=1.0)
    grid = Grid(1, 32, TWO_PI)
    dt = resolving_step(grid, params)
    w = np.sqrt(16.0 * np.tanh(16.0))
    assert dt == pytest.approx(TWO_PI / w / 20.0)


def test_rk4_order():
    params = PhysicalParams(mu=1.0, epsilon=1e-9)
    grid = Grid(1, 16, TWO_PI)
    U0 = travelling_wave(grid, 1, params)
    exact = travelling_wave(grid, 1, params, t=2.0)
    errors = []
    for steps in (10, 20, 40):
        U = U0
        for _ in range(steps):
            U = rk4_step(U, 2.0 / steps, params, DnoConfig(order=1))
        errors.append((U.zeta - exact.zeta).max_abs())
    rates = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(np.abs(rates - 4.0) < 0.3), f"observed rates {rates}"


def test_too_deep_a_trough_is_rejected():
    params = PhysicalParams(epsilon=0.5)
    grid = Grid(1, 16, TWO_PI)
    U = SurfaceState(0.0, real(grid, 2.0 * np.cos(grid.points[0])), SpectralField.zeros(grid))
    with pytest.raises(DepthViolationError):
        integrate_ww(U, 1.0, 0.1, params, DnoConfig(h_min=0.5))


def test_trough_reached_mid_run_reports_the_time():
    params = PhysicalParams(epsilon=0.1)
    grid = Grid(1, 32, TWO_PI)
    U = SurfaceState(0.0, SpectralField.zeros(grid), real(grid, 3.0 * np.sin(grid.points[0])))
    with pytest.raises(DepthViolationError) as info:
        integrate_ww(U, 2.0, 0.01, params, DnoConfig(h_min=0.9))
    assert info.value.t is not None and 0.0 < info.value.t < 1.0
    assert "at t = " in str(info.value)


def test_blow_up_reports_the_abort_time(monkeypatch):
    params = PhysicalParams(epsilon=0.1)
    grid = Grid(1, 16, TWO_PI)
    step = evolution.rk4_step

    def failing_step(U, h, p, config):
        V = step(U, h, p, config)
        if V.t > 0.25:
            return SurfaceState(V.t, V.zeta.map(lambda v: v * np.nan), V.psi)
        return V

    monkeypatch.setattr(evolution, "rk4_step", failing_step)
    with pytest.raises(NumericalAbortError) as info:
        integrate_ww(travelling_wave(grid, 1, params), 1.0, 0.1, params, DnoConfig())
    assert info.value.t == pytest.approx(0.3)


if __name__ == "__main__":
    pytest.main(["-v", __file__])
