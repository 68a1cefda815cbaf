"""Dirichlet-Neumann operator of the finite-depth fluid domain.

G[eps zeta] psi is expanded in powers of eps around the flat surface,

    G[eps zeta] psi = sum_m eps^m G_m[zeta] psi,

with G_0 = |D| tanh(sqrt(mu)|D|). Orders m >= 1 come from the shape-Taylor
recursion

    G_m psi = (zeta^m/m!) a_{m+1}(D) psi - grad(zeta^m/m!) . grad(a_{m-1}(D) psi)
              - sum_{n=1..m} G_{m-n}[zeta]((zeta^n/n!) a_n(D) psi),

a_n = |D|^n for even n and |D|^n tanh(sqrt(mu)|D|) for odd n, which gives back
the closed forms of G_1 and G_2 below.
"""
import logging
from dataclasses import dataclass
from math import factorial

import numpy as np

from pkg.dispersion.dispersion import PhysicalParams
from pkg.spectral.field import Multiplier, SpectralField, apply_multiplier, dealias, div, dot
from pkg.utils.errors import DepthViolationError, DomainError

logger = logging.getLogger(__name__)

MAX_ORDER = 8


@dataclass(frozen=True)
class DnoConfig:
    order: int = 4
    dealias: float = 2.0 / 3.0
    h_min: float = 0.5

    def __post_init__(self):
        if not 0 <= self.order <= MAX_ORDER:
            raise DomainError(f"DNO truncation order must lie in [0, {MAX_ORDER}], got {self.order}")
        if not 0.0 < self.dealias <= 1.0:
            raise DomainError(f"dealias fraction must lie in (0, 1], got {self.dealias}")
        if not 0.0 < self.h_min < 1.0:
            raise DomainError(f"h_min must lie in (0, 1), got {self.h_min}")


def _tanh_symbol(params):
    h = params.sqrt_mu

    def symbol(k):
        r = np.sqrt(np.sum(k ** 2, axis=0))
        return np.tanh(h * r)

    return symbol


def g0_multiplier(params: PhysicalParams):
    tanh = _tanh_symbol(params)
    return Multiplier(lambda k: np.sqrt(np.sum(k ** 2, axis=0)) * tanh(k), "even", "G0")


def a_multiplier(n, params: PhysicalParams):
    """|D|^n for even n, |D|^n tanh(sqrt(mu)|D|) for odd n."""
    tanh = _tanh_symbol(params)
    if n % 2 == 0:
        return Multiplier(lambda k: np.sum(k ** 2, axis=0) ** (n // 2), "even", f"a{n}")
    return Multiplier(lambda k: np.sqrt(np.sum(k ** 2, axis=0)) ** n * tanh(k), "even", f"a{n}")


def P_multiplier(u: SpectralField, params: PhysicalParams):
    h = params.sqrt_mu
    m = Multiplier(lambda k: np.sqrt(np.sum(k ** 2, axis=0)) / np.sqrt(1.0 + h * np.sqrt(np.sum(k ** 2, axis=0))), "even", "P")
    return apply_multiplier(m, u)


def G0(psi: SpectralField, params: PhysicalParams):
    return apply_multiplier(g0_multiplier(params), psi)


def G1(zeta, psi, params: PhysicalParams, fraction=2.0 / 3.0):
    g0psi = G0(psi, params)
    flux = tuple(dealias(zeta * p, fraction) for p in psi.grad())
    return -G0(dealias(zeta * g0psi, fraction), params) - div(flux)


def G2(zeta, psi, params: PhysicalParams, fraction=2.0 / 3.0):
    g0psi = G0(psi, params)
    zsq = dealias(zeta * zeta, fraction)
    inner = G0(dealias(zeta * g0psi, fraction), params)
    first = G0(dealias(zeta * inner, fraction), params)
    second = dealias(zsq * g0psi, fraction).laplacian()
    third = G0(dealias(zsq * psi.laplacian(), fraction), params)
    return first + 0.5 * second + 0.5 * third


class _ShapeSeries:
    """Evaluates G_m[zeta] on arbitrary data through the recursion."""

    def __init__(self, zeta, params, fraction, order):
        self.params = params
        self.fraction = fraction
        self.powers = [SpectralField.constant(zeta.grid, 1.0)]
        for n in range(1, order + 1):
            self.powers.append(dealias(self.powers[-1] * zeta, fraction))
        self.scaled = [p / factorial(n) for n, p in enumerate(self.powers)]
        self._a = {}

    def a(self, n, phi):
        if n == 0:
            return phi
        if n not in self._a:
            self._a[n] = a_multiplier(n, self.params)
        return apply_multiplier(self._a[n], phi)

    def term(self, m, phi):
        if m == 0:
            return G0(phi, self.params)
        f = self.fraction
        zm = self.scaled[m]
        out = dealias(zm * self.a(m + 1, phi), f) - dealias(dot(zm.grad(), self.a(m - 1, phi).grad()), f)
        for n in range(1, m + 1):
            out = out - self.term(m - n, dealias(self.scaled[n] * self.a(n, phi), f))
        return out


def dno_terms(zeta, psi, params: PhysicalParams, order, fraction=2.0 / 3.0):
    """[G_0 psi, G_1[zeta] psi, ..., G_order[zeta] psi], unscaled by eps."""
    series = _ShapeSeries(zeta, params, fraction, order)
    return [series.term(m, psi) for m in range(order + 1)]


def depth_guard(zeta, eps):
    return 1.0 - eps * zeta.max_abs()


def check_guard(zeta, eps, h_min):
    guard = depth_guard(zeta, eps)
    if guard < h_min:
        raise DepthViolationError(guard, h_min)
    return guard


def dno_apply(zeta, psi, eps, config: DnoConfig, params: PhysicalParams):
    """Truncated expansion sum_{m<=order} eps^m G_m[zeta] psi of G[eps zeta] psi."""
    check_guard(zeta, eps, config.h_min)
    if eps == 0.0 or config.order == 0:
        return G0(psi, params)
    terms = dno_terms(zeta, psi, params, config.order, config.dealias)
    out = terms[0]
    for m in range(1, len(terms)):
        out = out + terms[m] * eps ** m
    return out


def w_velocity(zeta, psi, eps, config: DnoConfig, params: PhysicalParams, g_psi=None):
    """Vertical velocity at the surface, (G[eps zeta] psi + eps grad zeta . grad psi) / (1 + eps^2 |grad zeta|^2).

    g_psi may carry an already evaluated G[eps zeta] psi.
    """
    if g_psi is None:
        g_psi = dno_apply(zeta, psi, eps, config, params)
    gz = zeta.grad()
    num = g_psi + dealias(dot(gz, psi.grad()), config.dealias) * eps
    den = dot(gz, gz) * eps ** 2 + 1.0
    return dealias(num / den, config.dealias)
