"""Two-scale reconstruction of the approximate surface state on the micro grid."""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from pkg.dispersion.resonance import CARRIERS, I_INDICES, K_INDICES, NEAR_RESONANCE, WaveTriple, harmonic_key
from pkg.modulation.assembly import CoefficientSet, build_coefficients
from pkg.modulation.solver import MacroState, Trajectory
from pkg.spectral.field import SpectralField, resample
from pkg.spectral.grid import Grid
from pkg.utils.errors import DependencyError, IncommensurabilityError
from pkg.waterwaves.evolution import SurfaceState

logger = logging.getLogger(__name__)

ORDERS = ("leading", "first", "full")
LATTICE_TOL = 1.0e-9


@dataclass
class ReconstructionSet:
    state: MacroState
    coefficients: CoefficientSet
    triple: WaveTriple
    order: str = "full"

    def __post_init__(self):
        if self.order not in ORDERS:
            raise ValueError(f"unknown reconstruction order '{self.order}', expected one of {ORDERS}")
        if self.order == "full" and not self.coefficients.complete:
            raise DependencyError("the full approximation needs the eps^2 harmonic amplitudes")

    @property
    def params(self):
        return self.triple.params


def check_lattice(triple: WaveTriple, micro: Grid):
    """Carrier wave vectors must be integer multiples of 2 pi / L_micro."""
    for j in CARRIERS:
        n = triple.wave(j).xi * micro.L / (2.0 * np.pi)
        if np.any(np.abs(n - np.round(n)) > LATTICE_TOL):
            raise IncommensurabilityError(f"carrier {j} with xi = {triple.wave(j).xi} is off the micro lattice of period {micro.L:g}")


class _Sampler:
    """Envelopes sampled at X' = eps X and multiplied by the harmonic phase at micro time t."""

    def __init__(self, triple, micro, t):
        self.triple = triple
        self.micro = micro
        self.t = t
        self.x = micro.points

    def phase(self, key):
        xi = self.triple.xi_of(key)
        arg = np.tensordot(np.asarray(xi, dtype=float), self.x, axes=(0, 0)) - self.triple.omega_of(key) * self.t
        return np.exp(1j * arg)

    def envelope(self, u: SpectralField):
        return resample(u, self.micro.n).values

    def real_wave(self, key, u):
        """u e^{i key.theta} + c.c."""
        return 2.0 * np.real(self.envelope(u) * self.phase(key))

    def mean(self, u):
        return np.array(np.real(self.envelope(u)))


def reconstruct(rset: ReconstructionSet, micro: Grid, eps: Optional[float] = None):
    """U at micro time t = t'/eps summed over the rows of the requested order.

    Returns the surface state and the physical state eps * U.
    """
    triple = rset.triple
    eps = triple.params.epsilon if eps is None else eps
    check_lattice(triple, micro)
    if abs(rset.state.grid.L * 1.0 - micro.L * eps) > 1e-9 * micro.L:
        raise IncommensurabilityError(f"macro period {rset.state.grid.L:g} is not eps * micro period {micro.L * eps:g}")
    t = rset.state.t / eps
    s = _Sampler(triple, micro, t)
    state, h = rset.state, rset.coefficients.harmonics
    zeta = np.zeros(micro.shape)
    psi = s.mean(state.psi00)
    for j in CARRIERS:
        key = harmonic_key((j,))
        zeta += s.real_wave(key, h.zeta0[j])
        psi += s.real_wave(key, state.psi0[j])

    if rset.order in ("first", "full"):
        first_z = s.mean(h.zeta10)
        first_p = np.zeros(micro.shape)
        for j in CARRIERS:
            key = harmonic_key((j,))
            first_z += s.real_wave(key, h.zeta1[j])
            first_p += s.real_wave(key, state.psi1[j])
        for index in I_INDICES:
            z1, p1 = h.first[index]
            first_z += s.real_wave(harmonic_key(index), z1)
            first_p += s.real_wave(harmonic_key(index), p1)
        zeta += eps * first_z
        psi += eps * first_p

    if rset.order == "full":
        second_z = s.mean(h.zeta20)
        second_p = np.zeros(micro.shape)
        for j in CARRIERS:
            second_z += s.real_wave(harmonic_key((j,)), h.zeta2[j])
        for table, family in ((h.second, I_INDICES), (h.third, K_INDICES)):
            for index in family:
                z2, p2 = table[index]
                second_z += s.real_wave(harmonic_key(index), z2)
                second_p += s.real_wave(harmonic_key(index), p2)
        zeta += eps ** 2 * second_z
        psi += eps ** 2 * second_p

    U = SurfaceState(t, SpectralField.from_values(micro, zeta, real=True), SpectralField.from_values(micro, psi, real=True))
    return U, U.scaled(eps)


def micro_grid(macro: Grid, eps, n):
    """Micro grid with n points per axis over the period L_macro / eps."""
    return Grid(macro.d, n, macro.L / eps)


def reconstruction_provider(
    trajectory: Trajectory,
    micro: Grid,
    order: str = "full",
    source: str = "appendix",
    gate: float = NEAR_RESONANCE,
):
    """t (micro) -> U_a(t) from the macro trajectory at t' = eps t."""
    triple = trajectory.triple
    eps = triple.params.epsilon
    level = "full" if order == "full" else "forcing"

    def provider(t):
        state = trajectory.state_at(eps * t)
        coeffs = build_coefficients(state, triple, source, trajectory.report, gate, level=level)
        U, _ = reconstruct(ReconstructionSet(state, coeffs, triple, order), micro, eps)
        return U

    return provider
