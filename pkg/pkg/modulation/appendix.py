"""Closed-form cubic coupling coefficients.

Building blocks a_k^(n) (carriers), gamma_ji^(n) and c_ji^(n) (second
harmonics) are combined into d_j^(n) and d_jik^(n) by fixed pairing rules; the
C/D families of the second order rows follow from them. Vector valued blocks
(n = 1, 3, 6, 8) are tuples of fields over the axes; two vectors combine by a
dot product.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

from pkg.dispersion.resonance import CARRIERS, I_INDICES, K_INDICES, NonresonanceReport, WaveTriple
from pkg.modulation.coefficients import (
    CouplingFamilies,
    HarmonicAmplitudes,
    closing_terms,
    plus_cc,
    route_collisions,
)
from pkg.spectral.field import SpectralField, directional
from pkg.utils.errors import DependencyError

logger = logging.getLogger(__name__)

BLOCKS = tuple(range(1, 12))
VECTOR_BLOCKS = (1, 3, 6, 8)

# target -> [(second harmonic index, conjugate c, carrier k, conjugate a)]
FIRST_HARMONIC_RULES = {
    1: [((1, 1), False, 1, True), ((1, 2), False, 2, True), ((1, 3), False, 3, True),
        ((1, -2), False, 2, False), ((1, -3), False, 3, False)],
    2: [((1, 2), False, 1, True), ((2, 2), False, 2, True), ((2, 3), False, 3, True),
        ((1, -2), True, 1, False), ((2, -3), False, 3, False)],
    3: [((1, 3), False, 1, True), ((2, 3), False, 2, True), ((3, 3), False, 3, True),
        ((1, -3), True, 1, False), ((2, -3), True, 2, False)],
}


def _third_harmonic_rules():
    rules = {}
    for j in CARRIERS:
        rules[(j, j, j)] = [((j, j), False, j, False)]
    for j, i in ((1, 2), (1, 3), (2, 3)):
        rules[(j, j, i)] = [((j, j), False, i, False), ((j, i), False, j, False)]
        rules[(i, i, j)] = [((i, i), False, j, False), ((j, i), False, i, False)]
        rules[(j, j, -i)] = [((j, j), False, i, True), ((j, -i), False, j, False)]
        rules[(i, i, -j)] = [((i, i), False, j, True), ((j, -i), True, i, False)]
    rules[(1, 2, 3)] = [((2, 3), False, 1, False), ((1, 3), False, 2, False), ((1, 2), False, 3, False)]
    rules[(1, 2, -3)] = [((2, -3), False, 1, False), ((1, -3), False, 2, False), ((1, 2), False, 3, True)]
    rules[(1, 3, -2)] = [((2, -3), True, 1, False), ((1, 3), False, 2, True), ((1, -2), False, 3, False)]
    rules[(2, 3, -1)] = [((2, 3), False, 1, True), ((1, -3), True, 2, False), ((1, -2), True, 3, False)]
    return {index: rules[index] for index in K_INDICES}


THIRD_HARMONIC_RULES = _third_harmonic_rules()


def _conj(u):
    if isinstance(u, tuple):
        return tuple(x.conj() for x in u)
    return u.conj()


def _times(c, a):
    if isinstance(c, tuple) and isinstance(a, tuple):
        out = c[0] * a[0]
        for x, y in zip(c[1:], a[1:]):
            out = out + x * y
        return out
    if isinstance(c, tuple):
        return tuple(x * a for x in c)
    if isinstance(a, tuple):
        return tuple(c * y for y in a)
    return c * a


def _add(u, v):
    if isinstance(u, tuple):
        return tuple(x + y for x, y in zip(u, v))
    return u + v


def _vector(xi, u):
    """i xi u as a tuple over the axes."""
    return tuple(u * (1j * float(x)) for x in xi)


def combine(c_table, a_table, rules):
    out = None
    for index, conj_c, k, conj_a in rules:
        c = _conj(c_table[index]) if conj_c else c_table[index]
        a = _conj(a_table[k]) if conj_a else a_table[k]
        term = _times(c, a)
        out = term if out is None else _add(out, term)
    return out


@dataclass
class CoeffTables:
    a: Dict[int, Dict[int, object]] = field(default_factory=dict)
    gamma: Dict[int, Dict[tuple, SpectralField]] = field(default_factory=dict)
    c: Dict[int, Dict[tuple, object]] = field(default_factory=dict)
    d: Dict[int, Dict[object, object]] = field(default_factory=dict)


class _Partner:
    """Second member of a harmonic index (j, s): carrier |s| data, conjugated for s < 0."""

    def __init__(self, triple, s, psi0, zeta0, psi1=None, zeta1=None):
        i = abs(s)
        w = triple.wave(i)
        sign = 1.0 if s > 0 else -1.0
        pick = (lambda u: u) if s > 0 else (lambda u: u.conj())
        self.xi = sign * w.xi
        self.g = w.g
        self.xi_sq = w.xi_sq
        self.grad_g = sign * w.grad_g
        self.psi0 = pick(psi0[i])
        self.zeta0 = pick(zeta0[i])
        self.psi1 = pick(psi1[i]) if psi1 is not None else None
        self.zeta1 = pick(zeta1[i]) if zeta1 is not None else None


def _pair_data(triple, index, psi0, zeta0, psi1=None, zeta1=None):
    j, s = index
    first = _Partner(triple, j, psi0, zeta0, psi1, zeta1)
    second = _Partner(triple, s, psi0, zeta0, psi1, zeta1)
    half = 0.5 if s == j else 1.0
    return first, second, half


def _gamma(triple, index, psi0, zeta0, psi1ji):
    e = triple[index]
    pj, pi, half = _pair_data(triple, index, psi0, zeta0)
    g1 = psi1ji * e.g + (
        pj.zeta0 * pi.psi0 * (pi.xi_sq - e.g * pi.g) + pi.zeta0 * pj.psi0 * (pj.xi_sq - e.g * pj.g)
    ) * half
    g2 = pj.zeta0 * pi.zeta0 * (float(pj.xi @ pi.xi) * half)
    g3 = (pj.zeta0 * pi.psi0 * pi.g + pi.zeta0 * pj.psi0 * pj.g) * half
    g4 = pj.zeta0 * pi.zeta0 * (2.0 * half)
    return g1, g2, g3, g4


def appendix_tables(triple: WaveTriple, psi0, harmonics: HarmonicAmplitudes):
    """All a/gamma/c blocks and their d combinations."""
    if not harmonics.first:
        raise DependencyError("appendix tables need the first order second harmonics (zeta_1ji, psi_1ji)")
    zeta0 = harmonics.zeta0
    tables = CoeffTables()
    a = {n: {} for n in BLOCKS}
    for k in CARRIERS:
        w = triple.wave(k)
        a[1][k] = _vector(w.xi, psi0[k])
        a[2][k] = psi0[k] * w.g
        a[3][k] = _vector(w.xi, zeta0[k])
        a[4][k] = psi0[k] * w.g
        a[5][k] = zeta0[k]
        a[6][k] = _vector(w.xi, psi0[k])
        a[7][k] = psi0[k] * -w.xi_sq
        a[8][k] = _vector(w.xi, zeta0[k])
        a[9][k] = zeta0[k]
        a[10][k] = psi0[k] * w.g
        a[11][k] = psi0[k] * -w.xi_sq
    tables.a = a

    gamma = {n: {} for n in (1, 2, 3, 4)}
    c = {n: {} for n in BLOCKS}
    for index in I_INDICES:
        if index not in harmonics.first:
            raise DependencyError(f"second harmonic {index} missing from the first order amplitudes")
        zeta1ji, psi1ji = harmonics.first[index]
        e = triple[index]
        g1, g2, g3, g4 = _gamma(triple, index, psi0, zeta0, psi1ji)
        gamma[1][index], gamma[2][index], gamma[3][index], gamma[4][index] = g1, g2, g3, g4
        c[1][index] = _vector(e.xi, psi1ji)
        c[2][index] = g1
        c[3][index] = g2
        c[4][index] = zeta1ji
        c[5][index] = (psi1ji - g3) * e.g
        c[6][index] = _vector(e.xi, zeta1ji)
        c[7][index] = zeta1ji
        c[8][index] = _vector(e.xi, psi1ji)
        c[9][index] = psi1ji * -e.xi_sq
        c[10][index] = g4
        c[11][index] = g4
    tables.gamma = gamma
    tables.c = c

    d = {n: {} for n in BLOCKS}
    for n in BLOCKS:
        for target, rules in FIRST_HARMONIC_RULES.items():
            d[n][target] = combine(c[n], a[n], rules)
        for target, rules in THIRD_HARMONIC_RULES.items():
            d[n][target] = combine(c[n], a[n], rules)
    tables.d = d
    return tables


def _cubic_C(d, target, g, xi_sq):
    return (
        -(d[4][target] + d[5][target]) * g
        - (d[6][target] + d[7][target] + d[8][target] + d[9][target])
        - d[10][target] * (0.5 * xi_sq)
        + d[11][target] * (0.5 * g)
    )


def _dot_i(xi, vector):
    """i xi . vector for a constant xi."""
    out = vector[0] * (1j * float(xi[0]))
    for x, v in zip(xi[1:], vector[1:]):
        out = out + v * (1j * float(x))
    return out


def _second_harmonic_D(triple, index, psi0, zeta0, psi1):
    pj, pi, half = _pair_data(triple, index, psi0, zeta0, psi1)
    out = (
        pi.psi0 * directional(pi.xi + pi.g * pj.grad_g, pj.psi0) * -1j
        + pj.psi0 * directional(pj.xi + pj.g * pi.grad_g, pi.psi0) * -1j
        + (pi.psi0 * pj.psi1 + pj.psi0 * pi.psi1) * (float(pj.xi @ pi.xi) + pj.g * pi.g)
    )
    return out * half


def _second_harmonic_C(triple, index, psi0, zeta0, psi1, zeta1):
    e = triple[index]
    pj, pi, half = _pair_data(triple, index, psi0, zeta0, psi1, zeta1)
    out = (
        directional(pi.g * e.grad_g - pi.xi, pj.zeta0 * pi.psi0) * 1j
        + directional(pj.g * e.grad_g - pj.xi, pi.zeta0 * pj.psi0) * 1j
        + pj.zeta0 * directional(e.g * pi.grad_g - e.xi, pi.psi0) * 1j
        + pi.zeta0 * directional(e.g * pj.grad_g - e.xi, pj.psi0) * 1j
        - (pi.psi0 * pj.zeta1 + pj.zeta0 * pi.psi1) * (pi.g * e.g - float(pi.xi @ e.xi))
        - (pj.psi0 * pi.zeta1 + pi.zeta0 * pj.psi1) * (pj.g * e.g - float(pj.xi @ e.xi))
    )
    return out * half


def assemble_CD(
    triple: WaveTriple,
    psi0,
    psi1,
    psi00,
    harmonics: HarmonicAmplitudes,
    tables: CoeffTables,
    report: Optional[NonresonanceReport] = None,
):
    """C/D families of every harmonic together with P_j, Q_j.

    Cubic harmonics listed as carrier collisions in the report are folded
    into the carrier slots before P_j, Q_j are formed.
    """
    harmonics.require("zeta1", "zeta10")
    sigma = triple.params.inv_bond
    zeta0, zeta1 = harmonics.zeta0, harmonics.zeta1
    d = tables.d
    out = CouplingFamilies()

    cross = SpectralField.zeros(psi00.grid)
    zeta_sq = SpectralField.zeros(psi00.grid)
    weighted_zeta_sq = SpectralField.zeros(psi00.grid)
    for i in CARRIERS:
        w = triple.wave(i)
        cross = cross + plus_cc(zeta0[i] * psi0[i].conj() * w.xi_sq)
        zeta_sq = zeta_sq + (zeta0[i] * zeta0[i].conj()).real_part()
        weighted_zeta_sq = weighted_zeta_sq + (zeta0[i] * zeta0[i].conj()).real_part() * w.xi_sq

    for j in CARRIERS:
        w = triple.wave(j)
        out.D[j] = (
            -d[1][j] + d[2][j]
            + cross * psi0[j] * w.g
            + (_dot_i(w.xi, d[3][j]) + weighted_zeta_sq * zeta0[j] * w.xi_sq) * sigma
        )
        out.C[j] = _cubic_C(d, j, w.g, w.xi_sq) - zeta_sq * psi0[j] * (2.0 * w.xi_sq * w.g)

    for index in K_INDICES:
        e = triple[index]
        out.D[index] = -d[1][index] + d[2][index] + _dot_i(e.xi, d[3][index]) * sigma
        out.C[index] = _cubic_C(d, index, e.g, e.xi_sq)

    for index in I_INDICES:
        out.D[index] = _second_harmonic_D(triple, index, psi0, zeta0, psi1)
        out.C[index] = _second_harmonic_C(triple, index, psi0, zeta0, psi1, zeta1)

    out.D00 = SpectralField.zeros(psi00.grid)
    out.C00 = SpectralField.zeros(psi00.grid)
    d0 = SpectralField.zeros(psi00.grid, real=False)
    c0 = SpectralField.zeros(psi00.grid, real=False)
    for j in CARRIERS:
        w = triple.wave(j)
        d0 = d0 + psi0[j].conj() * directional(w.xi - w.g * w.grad_g, psi0[j]) * 1j
        d0 = d0 + psi0[j].conj() * psi1[j] * (w.g ** 2 - w.xi_sq)
        c0 = c0 + directional(w.xi, zeta0[j] * psi0[j].conj()) * 1j
    out.D0 = plus_cc(d0) + out.D00
    out.C0 = plus_cc(c0) + out.C00

    route_collisions(out, report)
    return closing_terms(out, triple, psi0, psi00, harmonics)
