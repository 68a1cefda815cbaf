"""Two-scale epsilon-series expansion of the water-wave operator.

A quantity is stored as a truncated series

    sum_{p <= 2} eps^p sum_n f_{p,n}(t', X') exp(i n.theta),   theta_j = xi_j.X - w_j t,

keyed by (p, n) with n in Z^3. On such a series the micro gradient acts as
i xi_n + eps grad', the time derivative as -i w_n + eps d/dt' and G_0 through
the Taylor expansion of its symbol around xi_n. Expanding the full operator on
the ansatz gives the eps^1 and eps^2 rows of every harmonic: the coupling
families are read off these rows, and after all amplitudes are solved the same
rows evaluate the back-substitution residual.
"""
import logging
from dataclasses import dataclass, field
from numbers import Number
from typing import Dict, Mapping, Optional

import numpy as np

from pkg.dispersion.dispersion import g0, grad_g0, hessian_g0
from pkg.dispersion.resonance import (
    CARRIERS,
    I_INDICES,
    K_INDICES,
    NonresonanceReport,
    WaveTriple,
    harmonic_key,
)
from pkg.modulation.coefficients import (
    CouplingFamilies,
    HarmonicAmplitudes,
    closing_terms,
    mean_source_rate,
    mean_wave_source,
    route_collisions,
    transport_rates,
)
from pkg.spectral.field import SpectralField, directional, quadratic_form
from pkg.utils.errors import DependencyError

logger = logging.getLogger(__name__)

MAX_ORDER = 2
ZERO_KEY = (0, 0, 0)


def unit_key(j):
    return harmonic_key((j,))


def _negate(key):
    return tuple(-n for n in key)


class EpsSeries:
    """Truncated harmonic-keyed eps-series of macro fields (orders 0..cap)."""

    __slots__ = ("grid", "cap", "terms")

    def __init__(self, grid, cap=MAX_ORDER, terms=None):
        self.grid = grid
        self.cap = cap
        self.terms: Dict[tuple, SpectralField] = {}
        for (p, key), u in (terms or {}).items():
            self.add(p, key, u)

    def add(self, p, key, u):
        if p > self.cap:
            return
        slot = (p, key)
        self.terms[slot] = u if slot not in self.terms else self.terms[slot] + u

    def put_real(self, p, key, u):
        """Add u e^{i key.theta} + c.c. (u itself for the zero key)."""
        if key == ZERO_KEY:
            self.add(p, key, u.as_complex())
            return
        self.add(p, key, u.as_complex())
        self.add(p, _negate(key), u.conj().as_complex())

    def __getitem__(self, slot):
        if slot in self.terms:
            return self.terms[slot]
        return SpectralField.zeros(self.grid, real=False)

    def __contains__(self, slot):
        return slot in self.terms

    def items(self):
        return self.terms.items()

    def _like(self):
        return EpsSeries(self.grid, self.cap)

    def __add__(self, other):
        out = EpsSeries(self.grid, min(self.cap, other.cap), self.terms)
        for (p, key), u in other.items():
            out.add(p, key, u)
        return out

    def __neg__(self):
        return EpsSeries(self.grid, self.cap, {slot: -u for slot, u in self.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Number):
            return EpsSeries(self.grid, self.cap, {slot: u * other for slot, u in self.items()})
        cap = min(self.cap, other.cap)
        out = EpsSeries(self.grid, cap)
        for (p, k1), u in self.items():
            for (q, k2), v in other.items():
                if p + q > cap:
                    continue
                out.add(p + q, tuple(a + b for a, b in zip(k1, k2)), u * v)
        return out

    __rmul__ = __mul__

    def shifted(self, n):
        """eps^n times the series."""
        out = EpsSeries(self.grid, min(self.cap + n, MAX_ORDER))
        for (p, key), u in self.items():
            out.add(p + n, key, u)
        return out

    def capped(self, cap):
        return EpsSeries(self.grid, cap, {s: u for s, u in self.items() if s[0] <= cap})

    def max_abs(self, order=None):
        values = [u.max_abs() for (p, _), u in self.items() if order is None or p == order]
        return max(values, default=0.0)


def dot_series(u, v):
    out = u[0] * v[0]
    for a in range(1, len(u)):
        out = out + u[a] * v[a]
    return out


class TwoScale:
    """Two-scale operators for one wave triple; caches the symbol data per key."""

    def __init__(self, triple: WaveTriple):
        self.triple = triple
        self.params = triple.params
        self._symbols = {}

    def symbol(self, key):
        if key not in self._symbols:
            xi = np.asarray(self.triple.xi_of(key), dtype=float).reshape(self.params.d)
            self._symbols[key] = (
                xi,
                self.triple.omega_of(key),
                float(g0(xi, self.params)),
                grad_g0(xi, self.params),
                hessian_g0(xi, self.params),
            )
        return self._symbols[key]

    def deriv(self, s: EpsSeries, axis):
        out = s._like()
        for (p, key), u in s.items():
            xi = self.symbol(key)[0]
            if xi[axis] != 0.0:
                out.add(p, key, u * (1j * float(xi[axis])))
            out.add(p + 1, key, u.derivative(axis))
        return out

    def grad(self, s: EpsSeries):
        return tuple(self.deriv(s, a) for a in range(self.params.d))

    def div(self, vector):
        out = self.deriv(vector[0], 0)
        for a in range(1, len(vector)):
            out = out + self.deriv(vector[a], a)
        return out

    def laplacian(self, s):
        return self.div(self.grad(s))

    def g0(self, s: EpsSeries):
        """G_0 = g0(xi_n) - i eps grad g0(xi_n).grad' - (eps^2/2) grad'.H_g0(xi_n) grad'."""
        out = s._like()
        for (p, key), u in s.items():
            _, _, g, grad_g, hess_g = self.symbol(key)
            if g != 0.0:
                out.add(p, key, u * g)
            out.add(p + 1, key, directional(grad_g, u) * -1j)
            out.add(p + 2, key, quadratic_form(hess_g, u) * -0.5)
        return out

    def dt(self, s: EpsSeries, rates: Mapping):
        """-i w_n f_{p,n} + eps d/dt' f_{p,n}; rates absent from the mapping count as zero."""
        out = s._like()
        for (p, key), u in s.items():
            w = self.symbol(key)[1]
            if w != 0.0:
                out.add(p, key, u * (-1j * w))
            if p + 1 <= s.cap and (p, key) in rates:
                out.add(p + 1, key, rates[(p, key)])
        return out

    # water-wave operator ---------------------------------------------------

    def G1(self, zeta, psi):
        return -self.g0(zeta * self.g0(psi)) - self.div(tuple(zeta * g for g in self.grad(psi)))

    def G2(self, zeta, psi):
        g0psi = self.g0(psi)
        zsq = zeta * zeta
        return (
            self.g0(zeta * self.g0(zeta * g0psi))
            + self.laplacian(zsq * g0psi) * 0.5
            + self.g0(zsq * self.laplacian(psi)) * 0.5
        )

    def dno(self, zeta, psi):
        """G[eps zeta] psi = G_0 psi + eps G_1[zeta] psi + eps^2 G_2[zeta] psi."""
        out = self.g0(psi)
        out = out + self.G1(zeta.capped(1), psi.capped(1)).shifted(1)
        out = out + self.G2(zeta.capped(0), psi.capped(0)).shifted(2)
        return out

    def n2(self, zeta, psi, g_psi):
        """zeta - sigma div(grad zeta (1 - eps^2 |grad zeta|^2/2)) + (eps/2)|grad psi|^2 - (eps/2)(G psi + eps grad zeta.grad psi)^2."""
        sigma = self.params.inv_bond
        gz = self.grad(zeta)
        gp = self.grad(psi)
        out = zeta - self.div(gz) * sigma
        if sigma != 0.0:
            z0 = zeta.capped(0)
            gz0 = self.grad(z0)
            curvature = tuple(g * dot_series(gz0, gz0) for g in gz0)
            out = out + self.div(curvature).shifted(2) * (0.5 * sigma)
        first = tuple(g.capped(1) for g in gp)
        out = out + dot_series(first, first).shifted(1) * 0.5
        w = g_psi.capped(1) + dot_series(tuple(g.capped(0) for g in gz), tuple(g.capped(0) for g in gp)).shifted(1)
        w = w.capped(1)
        out = out - (w * w).shifted(1) * 0.5
        return out


@dataclass
class Ansatz:
    zeta: EpsSeries
    psi: EpsSeries
    zeta_rates: Dict[tuple, SpectralField] = field(default_factory=dict)
    psi_rates: Dict[tuple, SpectralField] = field(default_factory=dict)


def _put_rate(rates, p, key, u):
    rates[(p, key)] = u.as_complex()
    if key != ZERO_KEY:
        rates[(p, _negate(key))] = u.conj().as_complex()


def build_ansatz(
    triple: WaveTriple,
    psi0,
    psi00,
    psi00_t,
    psi1,
    harmonics: HarmonicAmplitudes,
    harmonic_rates: Optional[Mapping] = None,
    psi1_t: Optional[Mapping] = None,
    second: bool = True,
):
    """Series of (zeta, psi) on the two-scale ansatz and their d/dt' companions.

    second=False leaves out every eps^2 amplitude. Missing harmonic_rates or
    psi1_t count as zero in the time rows.
    """
    harmonics.require("zeta1", "first", "zeta10")
    if second:
        harmonics.require("zeta2", "second", "third", "zeta20")
    grid = psi00.grid
    params = triple.params
    zeta = EpsSeries(grid)
    psi = EpsSeries(grid)
    zr, pr = {}, {}

    v0 = transport_rates(triple, psi0)
    for j in CARRIERS:
        w = triple.wave(j)
        key = unit_key(j)
        pol = 1j * w.omega / w.b
        zeta.put_real(0, key, harmonics.zeta0[j])
        psi.put_real(0, key, psi0[j])
        _put_rate(pr, 0, key, v0[j])
        _put_rate(zr, 0, key, v0[j] * pol)
        zeta.put_real(1, key, harmonics.zeta1[j])
        psi.put_real(1, key, psi1[j])
        dpsi1 = psi1_t[j] if psi1_t is not None else SpectralField.zeros(grid, real=False)
        _put_rate(pr, 1, key, dpsi1)
        _put_rate(zr, 1, key, directional(w.bo_velocity, v0[j]) + dpsi1 * pol)
        if second:
            zeta.put_real(2, key, harmonics.zeta2[j])

    psi.put_real(0, ZERO_KEY, psi00)
    _put_rate(pr, 0, ZERO_KEY, psi00_t)
    zeta.put_real(1, ZERO_KEY, harmonics.zeta10)
    wave_rhs = psi00.laplacian() * params.sqrt_mu + mean_wave_source(triple, psi0)
    _put_rate(zr, 1, ZERO_KEY, (mean_source_rate(triple, psi0) - wave_rhs).real_part())

    for index in I_INDICES:
        key = harmonic_key(index)
        z1, p1 = harmonics.first[index]
        zeta.put_real(1, key, z1)
        psi.put_real(1, key, p1)
        if harmonic_rates is not None and index in harmonic_rates:
            dz, dp = harmonic_rates[index]
            _put_rate(zr, 1, key, dz)
            _put_rate(pr, 1, key, dp)
        if second:
            z2, p2 = harmonics.second[index]
            zeta.put_real(2, key, z2)
            psi.put_real(2, key, p2)
    if second:
        for index in K_INDICES:
            z3, p3 = harmonics.third[index]
            key = harmonic_key(index)
            zeta.put_real(2, key, z3)
            psi.put_real(2, key, p3)
        zeta.put_real(2, ZERO_KEY, harmonics.zeta20)
    return Ansatz(zeta, psi, zr, pr)


def expand_operator(ops: TwoScale, ansatz: Ansatz):
    """(G[eps zeta] psi, N^2) on the ansatz."""
    g_psi = ops.dno(ansatz.zeta, ansatz.psi)
    return g_psi, ops.n2(ansatz.zeta, ansatz.psi, g_psi)


def residual_rows(ops: TwoScale, ansatz: Ansatz, report: Optional[NonresonanceReport] = None):
    """(dt zeta - G psi, dt psi + N^2) on the ansatz, coinciding phases merged."""
    g_psi, n2 = expand_operator(ops, ansatz)
    row1 = ops.dt(ansatz.zeta, ansatz.zeta_rates) - g_psi
    row2 = ops.dt(ansatz.psi, ansatz.psi_rates) + n2
    if report is not None:
        row1, row2 = merge_phases(row1, report), merge_phases(row2, report)
    return row1, row2


def merge_phases(rows: EpsSeries, report: NonresonanceReport):
    """Sum the rows of harmonics sharing one physical phase into their representative key."""
    target = {}
    for group in report.coincidences:
        for index in group[1:]:
            target[harmonic_key(index)] = harmonic_key(group[0])
    for index, j in report.carrier_collisions.items():
        target[harmonic_key(index)] = unit_key(j)
    for key in list(target):
        target[_negate(key)] = _negate(target[key])
    out = EpsSeries(rows.grid, rows.cap)
    for (p, key), u in rows.items():
        out.add(p, target.get(key, key), u)
    return out


def extract_coefficients(
    triple: WaveTriple,
    psi0,
    psi1,
    psi00,
    harmonics: HarmonicAmplitudes,
    report: Optional[NonresonanceReport] = None,
    ops: Optional[TwoScale] = None,
):
    """C/D/P/Q families read off the eps^2 rows of the expanded operator."""
    ops = ops or TwoScale(triple)
    sigma = triple.params.inv_bond
    zero = SpectralField.zeros(psi00.grid, real=False)
    ansatz = build_ansatz(triple, psi0, psi00, zero, psi1, harmonics, second=False)
    g_psi, n2 = expand_operator(ops, ansatz)
    out = CouplingFamilies()
    zeta0 = harmonics.zeta0
    for j in CARRIERS:
        w = triple.wave(j)
        key = unit_key(j)
        drift = directional(w.xi, psi00) * 1j
        p_j = -g_psi[(2, key)] - directional(w.grad_g, psi1[j]) * 1j
        q_j = n2[(2, key)] + directional(w.xi, harmonics.zeta1[j]) * (2j * sigma)
        h_j = quadratic_form(w.hessian_g, psi0[j]) * 0.5
        out.C[j] = h_j + harmonics.zeta10 * psi0[j] * (w.g ** 2 - w.xi_sq) + zeta0[j] * drift - p_j
        out.D[j] = -zeta0[j].laplacian() * sigma + psi0[j] * drift - q_j
    for index in I_INDICES:
        e = triple[index]
        key = harmonic_key(index)
        z1, p1 = harmonics.first[index]
        out.C[index] = g_psi[(2, key)] + directional(e.grad_g, p1) * 1j
        out.D[index] = -n2[(2, key)] - directional(e.xi, z1) * (2j * sigma)
    for index in K_INDICES:
        key = harmonic_key(index)
        out.C[index] = g_psi[(2, key)]
        out.D[index] = -n2[(2, key)]
    out.C00 = SpectralField.zeros(psi00.grid)
    out.D00 = SpectralField.zeros(psi00.grid)
    out.C0 = (g_psi[(2, ZERO_KEY)] + psi00.laplacian() * triple.params.sqrt_mu).real_part()
    out.D0 = (-n2[(2, ZERO_KEY)]).real_part()
    route_collisions(out, report)
    return closing_terms(out, triple, psi0, psi00, harmonics)


def solvability(ops: TwoScale, ansatz: Ansatz, psi1):
    """E_j and zeta_2j from the eps^2 carrier rows of an ansatz without zeta_2j and d/dt' psi_1j.

    With X = (i/2w)(b row_1 + i w row_2): d/dt' psi_1j = X, E_j = X + grad w . grad' psi_1j,
    zeta_2j = -(row_2 + X)/b.
    """
    if any(p == 2 for p, _ in ansatz.zeta.terms):
        raise DependencyError("solvability needs an ansatz without eps^2 amplitudes")
    row1, row2 = residual_rows(ops, ansatz)
    forcing, zeta2 = {}, {}
    for j in CARRIERS:
        w = ops.triple.wave(j)
        key = unit_key(j)
        r1, r2 = row1[(2, key)], row2[(2, key)]
        x = (r1 * w.b + r2 * (1j * w.omega)) * (0.5j / w.omega)
        forcing[j] = x + directional(w.group_velocity, psi1[j])
        zeta2[j] = -(r2 + x) * (1.0 / w.b)
    return forcing, zeta2
