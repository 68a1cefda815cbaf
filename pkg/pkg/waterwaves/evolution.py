"""Pseudospectral evolution of the finite-depth water-wave system."""
import logging
from dataclasses import dataclass, field
from math import ceil
from typing import List, Optional, Sequence

import numpy as np

from pkg.dispersion.dispersion import PhysicalParams, omega
from pkg.spectral.field import SpectralField, dealias, div, dot
from pkg.utils.errors import DepthViolationError, NumericalAbortError
from pkg.waterwaves.dno import DnoConfig, check_guard, dno_apply

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SurfaceState:
    t: float
    zeta: SpectralField
    psi: SpectralField

    def __post_init__(self):
        if self.zeta.grid != self.psi.grid:
            raise ValueError(f"zeta on {self.zeta.grid} but psi on {self.psi.grid}")
        if not (self.zeta.real and self.psi.real):
            raise ValueError("surface fields must be real")

    @property
    def grid(self):
        return self.zeta.grid

    def is_finite(self):
        return bool(np.all(np.isfinite(self.zeta.values)) and np.all(np.isfinite(self.psi.values)))

    def scaled(self, factor):
        return SurfaceState(self.t, self.zeta * factor, self.psi * factor)


def rhs(U: SurfaceState, params: PhysicalParams, config: DnoConfig):
    """(d/dt zeta, d/dt psi) = (G[eps zeta] psi, -N^2(U))."""
    eps = params.epsilon
    f = config.dealias
    zeta, psi = U.zeta, U.psi
    g_psi = dno_apply(zeta, psi, eps, config, params)
    gz = zeta.grad()
    gp = psi.grad()
    slope = dealias(dot(gz, gz), f) * eps ** 2 + 1.0
    dpsi = -zeta
    if params.inv_bond != 0.0:
        root = slope.map(np.sqrt)
        dpsi = dpsi + div(tuple(dealias(g / root, f) for g in gz)) * params.inv_bond
    w = g_psi + dealias(dot(gz, gp), f) * eps
    dpsi = dpsi - dealias(dot(gp, gp), f) * (0.5 * eps) + dealias(dealias(w * w, f) / slope, f) * (0.5 * eps)
    return g_psi, dpsi.real_part()


def _combine(U, k, h):
    return SurfaceState(U.t + h, U.zeta + k[0] * h, U.psi + k[1] * h)


def rk4_step(U: SurfaceState, dt, params, config):
    k1 = rhs(U, params, config)
    k2 = rhs(_combine(U, k1, 0.5 * dt), params, config)
    k3 = rhs(_combine(U, k2, 0.5 * dt), params, config)
    k4 = rhs(_combine(U, k3, dt), params, config)
    zeta = U.zeta + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * (dt / 6.0)
    psi = U.psi + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * (dt / 6.0)
    return SurfaceState(U.t + dt, zeta.real_part(), psi.real_part())


def hamiltonian(U: SurfaceState, params: PhysicalParams, config: DnoConfig):
    """1/2 int (psi G[eps zeta] psi + zeta^2) + (sigma/eps^2) int (sqrt(1 + eps^2 |grad zeta|^2) - 1)."""
    eps = params.epsilon
    grid = U.grid
    g_psi = dno_apply(U.zeta, U.psi, eps, config, params)
    energy = 0.5 * grid.measure * float(np.real((U.psi * g_psi + U.zeta * U.zeta).mean()))
    if params.inv_bond != 0.0:
        gz = U.zeta.grad()
        surface = (dot(gz, gz) * eps ** 2 + 1.0).map(np.sqrt) - 1.0
        energy += params.inv_bond / eps ** 2 * grid.measure * float(np.real(surface.mean()))
    return energy


def surface_mass(U: SurfaceState):
    return U.grid.measure * float(np.real(U.zeta.mean()))


def resolving_step(grid, params: PhysicalParams, steps_per_period=20):
    """Largest dt with steps_per_period steps over the period of the fastest resolved mode."""
    k_max = float(np.max(grid.wavenumber_norm))
    w_max = float(omega(np.full(params.d, k_max / np.sqrt(params.d)), params))
    return 2.0 * np.pi / w_max / steps_per_period


@dataclass
class WaveTrajectory:
    samples: List[SurfaceState] = field(default_factory=list)
    energy: List[float] = field(default_factory=list)

    @property
    def times(self):
        return [U.t for U in self.samples]

    def final(self):
        return self.samples[-1]


def integrate_ww(
    U0: SurfaceState,
    T_end: float,
    dt: float,
    params: PhysicalParams,
    config: DnoConfig,
    snapshots: Optional[Sequence[float]] = None,
):
    """RK4 integration to T_end with steps of at most dt, storing U at the snapshot times."""
    if T_end < 0.0 or dt <= 0.0:
        raise ValueError(f"need T_end >= 0 and dt > 0, got T_end={T_end}, dt={dt}")
    limit = resolving_step(U0.grid, params)
    if dt > limit:
        logger.warning(f"dt = {dt:.3g} exceeds {limit:.3g} (20 steps per period of the fastest mode)")
    targets = sorted(set([U0.t + T_end] + [U0.t + s for s in (snapshots or []) if 0.0 <= s <= T_end]))
    check_guard(U0.zeta, params.epsilon, config.h_min)
    out = WaveTrajectory([U0], [hamiltonian(U0, params, config)])
    U = U0
    for target in targets:
        span = target - U.t
        if span <= 1e-14:
            continue
        steps = ceil(span / dt - 1e-9)
        h = span / steps
        for _ in range(steps):
            try:
                U = rk4_step(U, h, params, config)
            except DepthViolationError as e:
                raise DepthViolationError(e.guard, e.h_min, U.t) from e
            if not U.is_finite():
                raise NumericalAbortError(U.t)
        out.samples.append(U)
        out.energy.append(hamiltonian(U, params, config))
    drift = abs(out.energy[-1] - out.energy[0]) / max(abs(out.energy[0]), 1e-300)
    logger.info(f"water waves integrated to t = {U.t:.6g}, relative Hamiltonian drift {drift:.3e}")
    return out
