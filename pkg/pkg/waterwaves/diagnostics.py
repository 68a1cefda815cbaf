"""Hyperbolicity, Sobolev error norms and the energy norm of a surface state."""
import logging
from itertools import product

import numpy as np

from pkg.dispersion.dispersion import PhysicalParams
from pkg.spectral.field import SpectralField, dealias, div, dot, sobolev_norm
from pkg.utils.errors import GateError
from pkg.waterwaves.dno import DnoConfig, P_multiplier, check_guard, depth_guard, dno_apply, w_velocity
from pkg.waterwaves.evolution import SurfaceState

logger = logging.getLogger(__name__)

T0_INDEX = 1.5


class _Surface:
    """Operators G[zeta], w[zeta] at a fixed surface, unit steepness."""

    def __init__(self, zeta, config, params):
        self.zeta = zeta
        self.config = config
        self.params = params
        self.gz = zeta.grad()
        self.slope = dealias(dot(self.gz, self.gz), config.dealias) + 1.0

    def G(self, u):
        return dno_apply(self.zeta, u, 1.0, self.config, self.params)

    def w(self, u):
        return w_velocity(self.zeta, u, 1.0, self.config, self.params)

    def product(self, u, v):
        return dealias(u * v, self.config.dealias)


def b1_blocks(V: SurfaceState, params: PhysicalParams, config: DnoConfig):
    """The three blocks of b_1(V) at unit steepness.

    b_1 = w[zeta](N) - (grad psi - (w psi) grad zeta) . grad(w psi)
          + [G((w psi) G psi) + (G psi) div(grad psi - (w psi) grad zeta) + (grad zeta . grad G psi) w psi] / (1 + |grad zeta|^2)

    with N = zeta + |grad psi|^2/2 - (G psi + grad zeta . grad psi)^2 / (2 (1 + |grad zeta|^2)).
    """
    s = _Surface(V.zeta, config, params)
    zeta, psi = V.zeta, V.psi
    f = config.dealias
    gp = psi.grad()
    g_psi = s.G(psi)
    w_psi = s.w(psi)
    vel = (dealias(dot(s.gz, gp), f) + g_psi)
    n2 = zeta + dealias(dot(gp, gp), f) * 0.5 - dealias(s.product(vel, vel) / s.slope, f) * 0.5
    horizontal = tuple(gp[a] - s.product(w_psi, s.gz[a]) for a in range(len(gp)))
    first = s.w(n2)
    second = dealias(dot(horizontal, w_psi.grad()), f)
    third = (
        s.G(s.product(w_psi, g_psi))
        + s.product(g_psi, div(horizontal))
        + s.product(dealias(dot(s.gz, g_psi.grad()), f), w_psi)
    )
    return first, second, dealias(third / s.slope, f)


def hyperbolicity(U: SurfaceState, params: PhysicalParams, config: DnoConfig):
    """a_eps(U) = 1 - b_1(eps U); returns the field and its minimum."""
    eps = params.epsilon
    check_guard(U.zeta, eps, config.h_min)
    first, second, third = b1_blocks(U.scaled(eps), params, config)
    a = (1.0 - (first - second + third)).real_part()
    return a, float(np.min(a.values))


def check_depth(U: SurfaceState, params: PhysicalParams, h_min: float):
    guard = depth_guard(U.zeta, params.epsilon)
    if guard < h_min:
        raise GateError("depth", guard, h_min)
    return guard


def check_hyperbolicity(U: SurfaceState, params: PhysicalParams, config: DnoConfig, a0: float):
    _, a_min = hyperbolicity(U, params, config)
    if a_min < a0:
        raise GateError("hyperbolicity", a_min, a0)
    logger.info(f"hyperbolicity gate passed: min a = {a_min:.6f} >= {a0}")
    return a_min


def _grad_norm_sq(u: SpectralField, s):
    return sum(sobolev_norm(g, s) ** 2 for g in u.grad())


def error_norm(U: SurfaceState, V: SurfaceState, N: int, params: PhysicalParams = None):
    """sqrt(|zeta_U - zeta_V|^2_{H^(N-1)} + |grad(psi_U - psi_V)|^2_{H^(N-2)})."""
    if U.grid != V.grid:
        raise ValueError(f"error norm of states on different grids: {U.grid} vs {V.grid}")
    dz = U.zeta - V.zeta
    dp = U.psi - V.psi
    return float(np.sqrt(sobolev_norm(dz, N - 1) ** 2 + _grad_norm_sq(dp, N - 2)))


def multi_indices(d, N):
    return [alpha for alpha in product(range(N + 1), repeat=d) if sum(alpha) <= N]


def partial(u: SpectralField, alpha):
    for axis, order in enumerate(alpha):
        for _ in range(order):
            u = u.derivative(axis)
    return u


def energy_norm(U: SurfaceState, N: int, params: PhysicalParams, config: DnoConfig):
    """|P psi|^2_{H^(t0+3/2)} + sum_{|alpha| <= N} |d^alpha zeta|_2^2 + |P psi_(alpha)|_2^2, t0 = 3/2.

    psi_(0) = psi and psi_(alpha) = d^alpha psi - (w[eps zeta] eps psi) d^alpha zeta otherwise.
    """
    eps = params.epsilon
    total = sobolev_norm(P_multiplier(U.psi, params), T0_INDEX + 1.5) ** 2
    w = w_velocity(U.zeta, U.psi, eps, config, params) * eps
    for alpha in multi_indices(U.grid.d, N):
        dz = partial(U.zeta, alpha)
        total += sobolev_norm(dz, 0.0) ** 2
        if any(alpha):
            good = partial(U.psi, alpha) - dealias(w * dz, config.dealias)
        else:
            good = U.psi
        total += sobolev_norm(P_multiplier(good, params), 0.0) ** 2
    return float(total)
