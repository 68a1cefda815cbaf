"""Residual of an approximate solution in the water-wave system."""
import logging
from typing import Callable, Sequence

import numpy as np
import pandas as pd

from pkg.dispersion.dispersion import PhysicalParams
from pkg.spectral.field import sobolev_norm
from pkg.waterwaves.dno import DnoConfig, P_multiplier
from pkg.waterwaves.evolution import SurfaceState, rhs

logger = logging.getLogger(__name__)

# sixth order centered first derivative on offsets -3..3
STENCIL = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0
STENCIL_ERROR = 1.0 / 140.0

RESIDUAL_COLUMNS = ["order", "eps", "t", "r1_l2", "r2_l2", "r1_hs", "r2_phs", "residual"]


def difference_step(eps, frequency, fd_safety=1.0e-3):
    """Time step whose truncation error h^6 w^7/140 stays below fd_safety * eps^3."""
    return float((fd_safety * eps ** 3 / (STENCIL_ERROR * frequency ** 7)) ** (1.0 / 6.0))


def time_derivative(provider: Callable[[float], SurfaceState], t, h):
    states = [provider(t + k * h) for k in range(-3, 4)]
    dz = states[0].zeta * STENCIL[0]
    dp = states[0].psi * STENCIL[0]
    for c, U in zip(STENCIL[1:], states[1:]):
        if c != 0.0:
            dz = dz + U.zeta * c
            dp = dp + U.psi * c
    return states[3], dz * (1.0 / h), dp * (1.0 / h)


def residual_evaluator(
    provider: Callable[[float], SurfaceState],
    t_samples: Sequence[float],
    params: PhysicalParams,
    config: DnoConfig,
    frequency: float,
    s: float = 1.0,
    fd_safety: float = 1.0e-3,
    order: str = "full",
):
    """Residual (d/dt zeta - G psi, d/dt psi + N^2) of the provided states at each sample time.

    frequency bounds the fastest time scale of the provider (it sets the difference step).
    Returns L2 norms of both components, the H^s norm of the first and the
    P-weighted H^s norm of the second, all divided by the square root of the
    torus measure so a pointwise O(eps^3) residual reads as eps^3.
    """
    h = difference_step(params.epsilon, frequency, fd_safety)
    rows = []
    for t in t_samples:
        U, dz, dp = time_derivative(provider, t, h)
        fz, fp = rhs(U, params, config)
        r1 = (dz - fz).real_part()
        r2 = (dp - fp).real_part()
        scale = 1.0 / np.sqrt(U.grid.measure)
        row = {
            "order": order,
            "eps": params.epsilon,
            "t": float(t),
            "r1_l2": sobolev_norm(r1, 0.0) * scale,
            "r2_l2": sobolev_norm(r2, 0.0) * scale,
            "r1_hs": sobolev_norm(r1, s) * scale,
            "r2_phs": sobolev_norm(P_multiplier(r2, params), s) * scale,
        }
        row["residual"] = float(np.hypot(row["r1_l2"], row["r2_l2"]))
        rows.append(row)
        logger.info(f"eps = {params.epsilon:.4g}, t = {t:.4g}: {order} residual {row['residual']:.3e}")
    return pd.DataFrame(rows, columns=RESIDUAL_COLUMNS)
