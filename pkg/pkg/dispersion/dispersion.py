"""Finite-depth capillary-gravity dispersion relation.

    omega(xi)^2 = b(xi) g0(xi),   b = 1 + |xi|^2 / Bo,   g0 = |xi| tanh(sqrt(mu) |xi|)

Wave vectors carry their components along axis 0, so a single vector has shape
(d,) and a lattice of vectors has shape (d, *grid_shape).
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from pkg.spectral.field import SpectralField
from pkg.utils.errors import DomainError, SingularPointError

logger = logging.getLogger(__name__)

MU_MAX = 1.0e8
TANH_CLAMP = 40.0
SMALL_XI = 1.0e-8


@dataclass(frozen=True)
class PhysicalParams:
    mu: float = 1.0
    inv_bond: float = 0.0
    epsilon: float = 0.1
    d: int = 1

    def __post_init__(self):
        if not 1.0 <= self.mu <= MU_MAX:
            raise DomainError(f"shallowness parameter mu must lie in [1, {MU_MAX:g}], got {self.mu}")
        if self.inv_bond < 0.0:
            raise DomainError(f"inverse Bond number must be nonnegative, got {self.inv_bond}")
        if not 0.0 < self.epsilon <= 1.0:
            raise DomainError(f"steepness epsilon must lie in (0, 1], got {self.epsilon}")
        if self.d not in (1, 2):
            raise DomainError(f"dimension must be 1 or 2, got {self.d}")

    @property
    def sqrt_mu(self):
        return float(np.sqrt(self.mu))

    def with_epsilon(self, epsilon):
        return PhysicalParams(self.mu, self.inv_bond, epsilon, self.d)


def _as_vector(xi):
    xi = np.asarray(xi, dtype=float)
    return xi.reshape(1) if xi.ndim == 0 else xi


def _norm(xi):
    return np.sqrt(np.sum(xi ** 2, axis=0))


def _tanh_sech2(x):
    big = x > TANH_CLAMP
    xs = np.where(big, 0.0, x)
    t = np.where(big, 1.0, np.tanh(xs))
    s = np.where(big, 0.0, 1.0 / np.cosh(xs) ** 2)
    return t, s


def _radial_g0(r, params):
    """g0 as a function of r = |xi| with its first two radial derivatives."""
    h = params.sqrt_mu
    t, s = _tanh_sech2(h * r)
    f = r * t
    f1 = t + h * r * s
    f2 = 2.0 * h * s - 2.0 * h * h * r * t * s
    return f, f1, f2


def _radial_omega(r, params):
    sigma = params.inv_bond
    f, f1, f2 = _radial_g0(r, params)
    b = 1.0 + sigma * r ** 2
    b1 = 2.0 * sigma * r
    b2 = 2.0 * sigma
    w = np.sqrt(b * f)
    with np.errstate(divide="ignore", invalid="ignore"):
        w1 = (b1 * f + b * f1) / (2.0 * w)
        w2 = ((b2 * f + 2.0 * b1 * f1 + b * f2) - 2.0 * w1 ** 2) / (2.0 * w)
    return w, w1, w2


def _radial_hessian(xi, r, d1, d2):
    """Hessian of a radial function from its radial derivatives; r > 0 assumed."""
    d = xi.shape[0]
    n = xi / r
    outer = np.einsum("a...,b...->ab...", n, n)
    eye = np.eye(d).reshape((d, d) + (1,) * (xi.ndim - 1))
    return d2 * outer + (d1 / r) * (eye - outer)


def g0(xi, params: PhysicalParams):
    xi = _as_vector(xi)
    r = _norm(xi)
    t, _ = _tanh_sech2(params.sqrt_mu * r)
    return r * t


def b_factor(xi, params: PhysicalParams):
    xi = _as_vector(xi)
    return 1.0 + params.inv_bond * np.sum(xi ** 2, axis=0)


def omega(xi, params: PhysicalParams):
    return np.sqrt(b_factor(xi, params) * g0(xi, params))


def grad_g0(xi, params: PhysicalParams):
    xi = _as_vector(xi)
    r = _norm(xi)
    _, f1, _ = _radial_g0(r, params)
    safe = np.where(r > 0.0, r, 1.0)
    return np.where(r > 0.0, f1 / safe, 0.0) * xi


def hessian_g0(xi, params: PhysicalParams):
    xi = _as_vector(xi)
    d = xi.shape[0]
    r = _norm(xi)
    _, f1, f2 = _radial_g0(r, params)
    small = r < SMALL_XI
    safe = np.where(small, 1.0, r)
    hess = _radial_hessian(np.where(small, 1.0, xi), safe, f1, f2)
    eye = np.eye(d).reshape((d, d) + (1,) * (xi.ndim - 1))
    # limit at the origin: 2 sqrt(mu) I
    return np.where(small, 2.0 * params.sqrt_mu * eye, hess)


def _require_nonzero(xi):
    r = _norm(xi)
    if np.any(r < SMALL_XI):
        raise SingularPointError("omega is not differentiable at xi = 0")
    return r


def grad_omega(xi, params: PhysicalParams):
    xi = _as_vector(xi)
    r = _require_nonzero(xi)
    _, w1, _ = _radial_omega(r, params)
    return (w1 / r) * xi


def hessian_omega(xi, params: PhysicalParams):
    xi = _as_vector(xi)
    r = _require_nonzero(xi)
    _, w1, w2 = _radial_omega(r, params)
    return _radial_hessian(xi, r, w1, w2)


@dataclass(frozen=True, eq=False)
class WaveComponent:
    """Dispersion data of one carrier wave."""

    xi: np.ndarray
    omega: float
    b: float
    g: float
    grad_g: np.ndarray
    group_velocity: np.ndarray
    bo_velocity: np.ndarray
    hessian_omega: np.ndarray = field(repr=False)
    hessian_g: np.ndarray = field(repr=False)

    @classmethod
    def from_wavevector(cls, xi, params: PhysicalParams):
        xi = _as_vector(xi).copy()
        if xi.shape != (params.d,):
            raise DomainError(f"wave vector {xi} does not have dimension {params.d}")
        w = float(omega(xi, params))
        b = float(b_factor(xi, params))
        gv = grad_omega(xi, params)
        return cls(
            xi=xi,
            omega=w,
            b=b,
            g=float(g0(xi, params)),
            grad_g=grad_g0(xi, params),
            group_velocity=gv,
            bo_velocity=(gv - 2.0 * params.inv_bond * (w / b) * xi) / b,
            hessian_omega=hessian_omega(xi, params),
            hessian_g=hessian_g0(xi, params),
        )

    @property
    def xi_sq(self):
        return float(self.xi @ self.xi)

    def relation_defect(self):
        return abs(self.omega ** 2 - self.b * self.g) / max(self.omega ** 2, 1e-300)


def bo_velocity(wave: WaveComponent, params: PhysicalParams):
    return (wave.group_velocity - 2.0 * params.inv_bond * (wave.omega / wave.b) * wave.xi) / wave.b


def hessian_identity_sides(wave: WaveComponent, psi, params: PhysicalParams):
    """Both sides of

        grad'.H_omega grad' psi = (b/omega) H_j psi - (1/omega) (b v.grad')^2 psi + sigma (omega/b) lap' psi

    with H_j = 1/2 grad'.H_g0 grad' and v the Bond-corrected velocity, on a macro field.
    """
    k = psi.grid.wavenumbers
    qf_w = np.einsum("a...,ab,b...->...", k, wave.hessian_omega, k)
    qf_g = np.einsum("a...,ab,b...->...", k, wave.hessian_g, k)
    vk = np.tensordot(bo_velocity(wave, params), k, axes=(0, 0))
    lhs = -qf_w
    rhs = (
        -(wave.b / wave.omega) * 0.5 * qf_g
        + (1.0 / wave.omega) * (wave.b * vk) ** 2
        - params.inv_bond * (wave.omega / wave.b) * np.sum(k ** 2, axis=0)
    )
    return SpectralField(psi.grid, lhs * psi.coeffs, psi.real), SpectralField(psi.grid, rhs * psi.coeffs, psi.real)


def dispersion_table(k_values, params: PhysicalParams, direction=None):
    """Dispersion data along a ray of wave vectors k * direction."""
    direction = np.asarray([1.0] + [0.0] * (params.d - 1) if direction is None else direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    rows = []
    for k in np.asarray(k_values, dtype=float):
        xi = k * direction
        row = {f"xi{a}": xi[a] for a in range(params.d)}
        row["omega"] = float(omega(xi, params))
        row["b"] = float(b_factor(xi, params))
        row["g"] = float(g0(xi, params))
        gg = grad_g0(xi, params)
        if np.linalg.norm(xi) < SMALL_XI:
            gw = np.full(params.d, np.nan)
            logger.info("grad omega undefined at xi = 0, reported as NaN")
        else:
            gw = grad_omega(xi, params)
        for a in range(params.d):
            row[f"grad_omega{a}"] = gw[a]
        for a in range(params.d):
            row[f"grad_g{a}"] = gg[a]
        row["phase_speed"] = row["omega"] / abs(k) if abs(k) >= SMALL_XI else np.nan
        rows.append(row)
    return pd.DataFrame(rows)
