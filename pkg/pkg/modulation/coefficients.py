"""Leading order polarization, second harmonic sources and the first order harmonic solves.

Macroscopic amplitudes are SpectralFields on the macro grid, keyed by carrier
number j in (1, 2, 3) or by the harmonic index tuples of I and K.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from pkg.dispersion.resonance import (
    CARRIERS,
    I_INDICES,
    NEAR_RESONANCE,
    HarmonicEntry,
    NonresonanceReport,
    WaveTriple,
    index_label,
)
from pkg.spectral.field import SpectralField, directional, quadratic_form
from pkg.utils.errors import DependencyError, NearResonanceError

logger = logging.getLogger(__name__)

Pair = Tuple[SpectralField, SpectralField]


def abs_sq(u: SpectralField):
    return (u * u.conj()).real_part()


def plus_cc(u: SpectralField):
    """u + conj(u) as a real field."""
    return (u + u.conj()).real_part()


@dataclass
class HarmonicAmplitudes:
    """Derived amplitudes of the two-scale approximation at one macroscopic time.

    The closure zeta_00 = psi_10 = psi_2j = psi_20 = 0 is fixed; psi_00 and
    psi_1j live in the macro state. Coinciding harmonics keep a single
    representative; the others hold zero fields.
    """

    ZETA00 = 0.0
    PSI10 = 0.0
    PSI2J = 0.0
    PSI20 = 0.0

    zeta0: Dict[int, SpectralField]
    zeta1: Dict[int, SpectralField] = field(default_factory=dict)
    zeta2: Dict[int, SpectralField] = field(default_factory=dict)
    first: Dict[tuple, Pair] = field(default_factory=dict)
    second: Dict[tuple, Pair] = field(default_factory=dict)
    third: Dict[tuple, Pair] = field(default_factory=dict)
    zeta10: Optional[SpectralField] = None
    zeta20: Optional[SpectralField] = None

    def __post_init__(self):
        grid = self.grid
        for name, value in self.fields():
            if value is not None and value.grid != grid:
                raise ValueError(f"amplitude {name} lives on {value.grid}, expected {grid}")

    @property
    def grid(self):
        return self.zeta0[1].grid

    def fields(self):
        for j, u in self.zeta0.items():
            yield f"zeta0{j}", u
        for j, u in self.zeta1.items():
            yield f"zeta1{j}", u
        for j, u in self.zeta2.items():
            yield f"zeta2{j}", u
        for order, table in ((1, self.first), (2, self.second), (2, self.third)):
            for index, (z, p) in table.items():
                yield f"zeta{order}{index_label(index)}", z
                yield f"psi{order}{index_label(index)}", p
        yield "zeta10", self.zeta10
        yield "zeta20", self.zeta20

    def require(self, *names):
        for name in names:
            value = getattr(self, name)
            if value is None or (isinstance(value, dict) and not value):
                raise DependencyError(f"harmonic amplitude block '{name}' is not available yet")


def polarize_leading(psi0: Mapping[int, SpectralField], triple: WaveTriple):
    """zeta_0j = i (omega_j / b_j) psi_0j."""
    return {j: psi0[j] * (1j * triple.wave(j).omega / triple.wave(j).b) for j in CARRIERS}


def second_harmonic_sources(triple: WaveTriple, psi0: Mapping[int, SpectralField]):
    """Sources (A_ji, B_ji) of the first order second harmonic rows and the mean source B_0."""
    zeta0 = polarize_leading(psi0, triple)
    sources = {}
    for index in I_INDICES:
        j, s = index
        i = abs(s)
        e = triple[index]
        wj, wi = triple.wave(j), triple.wave(i)
        if s == j:
            a = zeta0[j] * psi0[j] * -(e.g * wj.g - 2.0 * wj.xi_sq)
            b = psi0[j] * psi0[j] * (0.5 * (wj.g ** 2 + wj.xi_sq))
        elif s > 0:
            a = (zeta0[j] * psi0[i] * -(e.g * wi.g - float(e.xi @ wi.xi))
                 + zeta0[i] * psi0[j] * -(e.g * wj.g - float(e.xi @ wj.xi)))
            b = psi0[j] * psi0[i] * (wj.g * wi.g + float(wj.xi @ wi.xi))
        else:
            a = (zeta0[j] * psi0[i].conj() * -(e.g * wi.g + float(e.xi @ wi.xi))
                 + zeta0[i].conj() * psi0[j] * -(e.g * wj.g - float(e.xi @ wj.xi)))
            b = psi0[j] * psi0[i].conj() * (wj.g * wi.g - float(wj.xi @ wi.xi))
        sources[index] = (a, b)
    b0 = mean_source(triple, psi0)
    return sources, b0


def mean_source(triple: WaveTriple, psi0):
    """B_0 = sum_j (g_j^2 - |xi_j|^2) |psi_0j|^2."""
    out = SpectralField.zeros(psi0[1].grid)
    for j in CARRIERS:
        w = triple.wave(j)
        out = out + abs_sq(psi0[j]) * (w.g ** 2 - w.xi_sq)
    return out


def solve_harmonic(entry: HarmonicEntry, s1, s2, gate=NEAR_RESONANCE):
    """Solve -i w zeta - g psi = s1, b zeta - i w psi = s2 for one harmonic."""
    if entry.defect < gate:
        raise NearResonanceError(index_label(entry.index), entry.defect, gate)
    den = entry.denominator
    zeta = (s1 * (1j * entry.omega) - s2 * entry.g) * (1.0 / den)
    psi = (s1 * entry.b + s2 * (1j * entry.omega)) * (1.0 / den)
    return zeta, psi


def merge_sources(sources, family, report: Optional[NonresonanceReport]):
    """Sum the sources of coinciding harmonics into their representative.

    Non-representatives map to None, indices routed into a carrier forcing are dropped.
    """
    merged = {}
    for index in family:
        if index not in sources:
            continue
        if report is not None and index in report.carrier_collisions:
            continue
        rep = report.representative(index) if report is not None else index
        s1, s2 = sources[index]
        if rep == index:
            merged[index] = (s1, s2)
        else:
            r1, r2 = merged[rep]
            merged[rep] = (r1 + s1, r2 + s2)
            merged[index] = None
    return merged


def solve_family(triple, sources, family, report=None, gate=NEAR_RESONANCE):
    grid = next(iter(sources.values()))[0].grid
    zero = SpectralField.zeros(grid, real=False)
    out = {}
    for index, source in merge_sources(sources, family, report).items():
        out[index] = (zero, zero) if source is None else solve_harmonic(triple[index], *source, gate=gate)
    for index in family:
        out.setdefault(index, (zero, zero))
    return out


def solve_first_harmonics(sources, triple: WaveTriple, report=None, gate=NEAR_RESONANCE):
    """(zeta_1ji, psi_1ji) for every (j, i) in I from the sources (A_ji, B_ji)."""
    return solve_family(triple, sources, I_INDICES, report, gate)


def zeta1j(psi1j, psi0j, wave, params):
    """zeta_1j = i (omega_j/b_j) psi_1j + grad_Bo omega_j . grad' psi_0j."""
    return psi1j * (1j * wave.omega / wave.b) + directional(wave.bo_velocity, psi0j)


def zeta10(psi00_t, b0):
    return (b0 - psi00_t).real_part()


def transport_rates(triple: WaveTriple, psi0):
    """d/dt' psi_0j = -grad omega_j . grad' psi_0j."""
    return {j: -directional(triple.wave(j).group_velocity, psi0[j]) for j in CARRIERS}


def polarized_rate(quadratic, triple, psi0):
    """Exact d/dt' of a quadratic function of the transported amplitudes.

    For Q quadratic (real-bilinear in psi_0), dQ[psi](v) = (Q(psi + v) - Q(psi - v)) / 2.
    quadratic maps a carrier dict to a field or a nested structure of fields.
    """
    v = transport_rates(triple, psi0)
    plus = quadratic({j: psi0[j] + v[j] for j in CARRIERS})
    minus = quadratic({j: psi0[j] - v[j] for j in CARRIERS})
    return _half_difference(plus, minus)


def _half_difference(plus, minus):
    if isinstance(plus, SpectralField):
        return (plus - minus) * 0.5
    if isinstance(plus, dict):
        return {k: _half_difference(plus[k], minus[k]) for k in plus}
    return tuple(_half_difference(p, m) for p, m in zip(plus, minus))


def harmonic_time_derivatives(triple, psi0, report=None, gate=NEAR_RESONANCE):
    """d/dt' of (zeta_1ji, psi_1ji) for every (j, i) in I through the transport of psi_0j."""

    def first(p):
        sources, _ = second_harmonic_sources(triple, p)
        return solve_first_harmonics(sources, triple, report, gate)

    return polarized_rate(first, triple, psi0)


def mean_source_rate(triple, psi0):
    """d/dt' B_0."""
    return polarized_rate(lambda p: mean_source(triple, p), triple, psi0).real_part()


def mean_wave_source(triple: WaveTriple, psi0):
    """Source of the mean field wave equation,

        sum_j ((g_j^2 - |xi_j|^2) d/dt' + 2 (omega_j/b_j) xi_j . grad') |psi_0j|^2,

    with d/dt' |psi_0j|^2 = -grad omega_j . grad' |psi_0j|^2 along the transport.
    """
    out = SpectralField.zeros(psi0[1].grid)
    for j in CARRIERS:
        w = triple.wave(j)
        direction = -(w.g ** 2 - w.xi_sq) * w.group_velocity + 2.0 * (w.omega / w.b) * w.xi
        out = out + directional(direction, abs_sq(psi0[j]))
    return out.real_part()


@dataclass
class CouplingFamilies:
    """C/D coefficients of the second order rows, keyed by carrier j, I index or K index."""

    C: Dict[object, SpectralField] = field(default_factory=dict)
    D: Dict[object, SpectralField] = field(default_factory=dict)
    C0: Optional[SpectralField] = None
    D0: Optional[SpectralField] = None
    C00: Optional[SpectralField] = None
    D00: Optional[SpectralField] = None
    P: Dict[int, SpectralField] = field(default_factory=dict)
    Q: Dict[int, SpectralField] = field(default_factory=dict)
    routed: Tuple[tuple, ...] = ()

    def blocks(self):
        """(name, field) pairs of every coefficient, for dumps and comparisons."""
        for name, table in (("C", self.C), ("D", self.D)):
            for key, u in table.items():
                label = f"{name}{key}" if isinstance(key, int) else f"{name}{index_label(key)}"
                yield label, u
        for name in ("C0", "D0", "C00", "D00"):
            yield name, getattr(self, name)
        for name, table in (("P", self.P), ("Q", self.Q)):
            for j, u in table.items():
                yield f"{name}{j}", u


def route_collisions(families: CouplingFamilies, report: Optional[NonresonanceReport]):
    """Move C_jik, D_jik of a cubic harmonic with e_jik = e_j into the C_j, D_j slots."""
    if report is None or families.routed:
        return families
    routed = []
    for index, j in report.carrier_collisions.items():
        families.C[j] = families.C[j] + families.C[index]
        families.D[j] = families.D[j] + families.D[index]
        families.C[index] = families.C[index] * 0.0
        families.D[index] = families.D[index] * 0.0
        routed.append(index)
        logger.info(f"cubic coefficients of {index_label(index)} added to carrier {j}")
    families.routed = tuple(routed)
    return families


def closing_terms(families: CouplingFamilies, triple: WaveTriple, psi0, psi00, harmonics: HarmonicAmplitudes):
    """P_j = (H_j + (g_j^2 - |xi_j|^2) zeta_10) psi_0j + i xi_j zeta_0j . grad' psi_00 - C_j and

    Q_j = -sigma lap' zeta_0j + i xi_j psi_0j . grad' psi_00 - D_j.
    """
    sigma = triple.params.inv_bond
    zeta0 = harmonics.zeta0
    for j in CARRIERS:
        w = triple.wave(j)
        drift = directional(w.xi, psi00) * 1j
        h_j = quadratic_form(w.hessian_g, psi0[j]) * 0.5
        families.P[j] = h_j + harmonics.zeta10 * psi0[j] * (w.g ** 2 - w.xi_sq) + zeta0[j] * drift - families.C[j]
        families.Q[j] = -zeta0[j].laplacian() * sigma + psi0[j] * drift - families.D[j]
    return families


def finite(fields):
    return all(np.all(np.isfinite(u.coeffs)) for u in fields)
