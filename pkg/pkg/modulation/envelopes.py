"""Initial envelope families on the macroscopic torus."""
import logging

import numpy as np

from pkg.spectral.field import SpectralField

logger = logging.getLogger(__name__)

BAND_FRACTION = 0.5


def band_limit(u: SpectralField, fraction=BAND_FRACTION):
    """Zero every Fourier mode above fraction * Nyquist."""
    mask = np.any(np.abs(u.grid.indices) > fraction * u.grid.nyquist, axis=0)
    c = u.coeffs.copy()
    c[mask] = 0.0
    return SpectralField(u.grid, c, u.real)


def gaussian(grid, amplitude=1.0, center=0.0, width=0.5, phase=0.0):
    """Periodic bump amplitude * exp(i phase) * exp(sum_a (cos(X'_a - c_a) - 1) / width^2)."""
    if width <= 0.0:
        raise ValueError(f"envelope width must be positive, got {width}")
    c = np.broadcast_to(np.asarray(center, dtype=float), (grid.d,))
    x = grid.points
    exponent = sum((np.cos(x[a] - c[a]) - 1.0) for a in range(grid.d)) / width ** 2
    values = amplitude * np.exp(1j * phase) * np.exp(exponent)
    return band_limit(SpectralField.from_values(grid, values, real=False))


def mode(grid, amplitude=1.0, index=1, phase=0.0):
    """amplitude * exp(i phase) * exp(i K.X') for the lattice mode K = index."""
    index = np.broadcast_to(np.asarray(index, dtype=int), (grid.d,))
    if np.any(np.abs(index) > BAND_FRACTION * grid.nyquist):
        raise ValueError(f"mode {tuple(index)} lies above half the Nyquist index {grid.nyquist}")
    return SpectralField.plane_wave(grid, index, amplitude * np.exp(1j * phase))


def zero(grid):
    return SpectralField.zeros(grid, real=False)


FAMILIES = {"gaussian": gaussian, "mode": mode, "zero": zero}


def make_envelope(grid, family, **kwargs):
    if family not in FAMILIES:
        raise ValueError(f"unknown envelope family '{family}', expected one of {sorted(FAMILIES)}")
    return FAMILIES[family](grid, **kwargs)
