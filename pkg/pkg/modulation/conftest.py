from types import SimpleNamespace

import numpy as np
import pytest

from pkg.dispersion.dispersion import PhysicalParams
from pkg.dispersion.resonance import WaveTriple, check_nonresonance
from pkg.modulation.solver import MacroState
from pkg.spectral.field import SpectralField
from pkg.spectral.grid import Grid

# envelopes hold Fourier modes up to 2 per axis, so every cubic product stays
# well inside the macro grid and the pointwise products carry no aliasing
SETUPS = {
    "gravity-1d": (PhysicalParams(mu=1.0, inv_bond=0.0, epsilon=0.1, d=1), [[1.0], [-1.0], [2.0]], 32),
    "capillary-1d": (PhysicalParams(mu=2.0, inv_bond=0.05, epsilon=0.1, d=1), [[1.0], [-1.0], [2.0]], 32),
    "gravity-2d": (PhysicalParams(mu=1.0, inv_bond=0.0, epsilon=0.1, d=2), [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], 16),
}


def envelope(grid, *modes):
    """Sum of amplitude * exp(i K.X') over (K, amplitude) pairs; K given for the first axis, then the second."""
    out = SpectralField.zeros(grid, real=False)
    for index, amplitude in modes:
        out = out + SpectralField.plane_wave(grid, tuple(index)[: grid.d], amplitude)
    return out


def sample_state(grid, t=0.0):
    psi0 = {
        1: envelope(grid, ((1, 0), 0.3), ((-2, 1), 0.1j)),
        2: envelope(grid, ((0, 0), 0.25), ((-1, 1), 0.05)),
        3: envelope(grid, ((2, -1), 0.2 - 0.1j), ((1, 0), 0.05)),
    }
    psi1 = {
        1: envelope(grid, ((-1, 0), 0.1)),
        2: envelope(grid, ((1, 1), 0.05j)),
        3: SpectralField.zeros(grid, real=False),
    }
    psi00 = envelope(grid, ((1, 0), 0.2)).real_part()
    psi00_t = envelope(grid, ((2, 0), -0.1j)).real_part()
    return MacroState(t, psi0, psi00, psi00_t, psi1)


@pytest.fixture(params=sorted(SETUPS))
def setup(request):
    params, carriers, n = SETUPS[request.param]
    triple = WaveTriple.from_wavevectors(carriers, params)
    grid = Grid(params.d, n, 2.0 * np.pi)
    return SimpleNamespace(
        name=request.param,
        params=params,
        triple=triple,
        report=check_nonresonance(triple),
        grid=grid,
        state=sample_state(grid),
    )
