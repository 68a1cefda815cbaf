"""Harmonic catalog of a wave triple, non-resonance checks and resonance scans."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import optimize

from pkg.dispersion.dispersion import (
    SMALL_XI,
    PhysicalParams,
    WaveComponent,
    b_factor,
    g0,
    grad_g0,
    hessian_g0,
    omega,
)
from pkg.utils.errors import DomainError

logger = logging.getLogger(__name__)

CARRIERS = (1, 2, 3)
I_INDICES = ((1, 1), (2, 2), (3, 3), (1, 2), (1, -2), (1, 3), (1, -3), (2, 3), (2, -3))
K_INDICES = (
    (1, 1, 1), (2, 2, 2), (3, 3, 3),
    (1, 1, 2), (1, 1, -2), (1, 1, 3), (1, 1, -3),
    (2, 2, 3), (2, 2, -3), (2, 2, 1), (2, 2, -1),
    (3, 3, 1), (3, 3, -1), (3, 3, 2), (3, 3, -2),
    (1, 2, 3), (1, 2, -3), (1, 3, -2), (2, 3, -1),
)

DEFAULT_TOL = 1.0e-6
NEAR_RESONANCE = 1.0e-3

SCAN_COLUMNS = ["mu", "inv_bond", "order", "family", "k1", "k2", "defect", "kind"]


def harmonic_key(index) -> Tuple[int, int, int]:
    """Integer exponent vector n with e_index = e_1^n1 e_2^n2 e_3^n3."""
    n = [0, 0, 0]
    for s in index:
        n[abs(s) - 1] += 1 if s > 0 else -1
    return tuple(n)


def index_label(index):
    return "".join(str(s) if s > 0 else f"({s})" for s in index)


@dataclass(frozen=True, eq=False)
class HarmonicEntry:
    index: tuple
    key: tuple
    xi: np.ndarray
    omega: float
    b: float
    g: float
    grad_g: np.ndarray
    hessian_g: np.ndarray = field(repr=False)

    @property
    def defect(self):
        return abs(self.omega ** 2 - self.b * self.g) / max(1.0, self.omega ** 2)

    @property
    def xi_sq(self):
        return float(self.xi @ self.xi)

    @property
    def denominator(self):
        return self.omega ** 2 - self.b * self.g


class WaveTriple:
    """Three carrier waves and the catalog of their second and third harmonics."""

    def __init__(self, waves: Sequence[WaveComponent], params: PhysicalParams):
        if len(waves) != 3:
            raise DomainError(f"a wave triple needs exactly three carriers, got {len(waves)}")
        self.waves = tuple(waves)
        self.params = params
        self.coinciding_carriers = [
            (a + 1, b + 1)
            for a in range(3)
            for b in range(a + 1, 3)
            if np.allclose(self.waves[a].xi, self.waves[b].xi, rtol=0.0, atol=1e-12)
        ]
        for pair in self.coinciding_carriers:
            logger.warning(f"carriers {pair[0]} and {pair[1]} coincide (xi = {self.wave(pair[0]).xi})")
        self.harmonics: Dict[tuple, HarmonicEntry] = {}
        for index in I_INDICES + K_INDICES:
            self.harmonics[index] = self._entry(index)

    @classmethod
    def from_wavevectors(cls, wavevectors, params: PhysicalParams):
        return cls([WaveComponent.from_wavevector(xi, params) for xi in wavevectors], params)

    def wave(self, j) -> WaveComponent:
        return self.waves[j - 1]

    def xi_of(self, key):
        return sum(n * w.xi for n, w in zip(key, self.waves))

    def omega_of(self, key):
        return float(sum(n * w.omega for n, w in zip(key, self.waves)))

    def _entry(self, index):
        key = harmonic_key(index)
        xi = self.xi_of(key)
        return HarmonicEntry(
            index=index,
            key=key,
            xi=xi,
            omega=self.omega_of(key),
            b=float(b_factor(xi, self.params)),
            g=float(g0(xi, self.params)),
            grad_g=grad_g0(xi, self.params),
            hessian_g=hessian_g0(xi, self.params),
        )

    def __getitem__(self, index) -> HarmonicEntry:
        return self.harmonics[tuple(index)]

    def relabeled(self, order):
        """Triple with carriers permuted (order is a permutation of 1, 2, 3)."""
        return WaveTriple([self.wave(j) for j in order], self.params)

    def reflected(self):
        """Triple with every xi_j -> -xi_j."""
        return WaveTriple.from_wavevectors([-w.xi for w in self.waves], self.params)


@dataclass
class NonresonanceReport:
    tol: float
    quadratic: Dict[tuple, float] = field(default_factory=dict)
    cubic: Dict[tuple, float] = field(default_factory=dict)
    coincidences: List[tuple] = field(default_factory=list)
    carrier_collisions: Dict[tuple, int] = field(default_factory=dict)
    near_resonant: List[tuple] = field(default_factory=list)
    coinciding_carriers: List[tuple] = field(default_factory=list)

    def failed(self):
        bad = [i for i, v in self.quadratic.items() if v <= self.tol]
        bad += [i for i, v in self.cubic.items() if v <= self.tol and i not in self.carrier_collisions]
        return bad

    @property
    def passed(self):
        return not self.failed() and not self.coinciding_carriers

    def representative(self, index):
        for group in self.coincidences:
            if index in group:
                return group[0]
        return index

    def to_frame(self):
        rows = []
        for kind, table in (("quadratic", self.quadratic), ("cubic", self.cubic)):
            for index, defect in table.items():
                rows.append(
                    {
                        "order": kind,
                        "index": index_label(index),
                        "defect": defect,
                        "passed": defect > self.tol or index in self.carrier_collisions,
                        "collides_with": self.carrier_collisions.get(index, 0),
                        "representative": index_label(self.representative(index)),
                    }
                )
        return pd.DataFrame(rows)


def _same_phase(a: HarmonicEntry, b_xi, b_omega, tol):
    scale = max(1.0, abs(a.omega), abs(b_omega))
    return np.allclose(a.xi, b_xi, rtol=0.0, atol=tol * scale) and abs(a.omega - b_omega) <= tol * scale


def check_nonresonance(triple: WaveTriple, tol: float = DEFAULT_TOL, near: float = NEAR_RESONANCE):
    if tol <= 0.0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    report = NonresonanceReport(tol=tol, coinciding_carriers=list(triple.coinciding_carriers))
    for index in I_INDICES:
        report.quadratic[index] = triple[index].defect
    for index in K_INDICES:
        entry = triple[index]
        report.cubic[index] = entry.defect
        for j in CARRIERS:
            w = triple.wave(j)
            if _same_phase(entry, w.xi, w.omega, tol):
                report.carrier_collisions[index] = j
                logger.warning(f"cubic harmonic {index_label(index)} coincides with carrier {j}; routed into its forcing")

    for family in (I_INDICES, K_INDICES):
        seen = []
        for index in family:
            if index in report.carrier_collisions:
                continue
            entry = triple[index]
            for group in seen:
                head = triple[group[0]]
                if _same_phase(entry, head.xi, head.omega, tol):
                    group.append(index)
                    break
            else:
                seen.append([index])
        for group in seen:
            if len(group) > 1:
                report.coincidences.append(tuple(group))
                logger.warning(f"harmonics {[index_label(i) for i in group]} coincide; merged into {index_label(group[0])}")

    for index, defect in list(report.quadratic.items()) + list(report.cubic.items()):
        if index in report.carrier_collisions:
            continue
        if defect <= tol:
            logger.warning(f"harmonic {index_label(index)} is resonant (defect {defect:.3e})")
        elif defect < near:
            report.near_resonant.append(index)
            logger.warning(f"harmonic {index_label(index)} is near-resonant (defect {defect:.3e})")
    return report


def r0(x, lam, c):
    """Gravity resonance function.

    r0 = sqrt(s tanh(x s)) - sqrt(lam tanh(x lam)) - sqrt(tanh x),  s = sqrt(1 + lam^2 + 2 c lam),
    negative for lam > 0 when the depth is finite.
    """
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    c = np.asarray(c, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("r0 requires x > 0")
    if np.any(lam < 0.0):
        raise DomainError("r0 requires lambda >= 0")
    if np.any(np.abs(c) > 1.0):
        raise DomainError("r0 requires -1 <= c <= 1")
    s = np.sqrt(np.maximum(1.0 + lam ** 2 + 2.0 * c * lam, 0.0))
    out = np.sqrt(s * np.tanh(x * s)) - np.sqrt(lam * np.tanh(x * lam)) - np.sqrt(np.tanh(x))
    return out if out.ndim else float(out)


def _defect_functions(order):
    """Families of resonance defects for collinear wave numbers in one dimension."""
    if order == 2:
        return {
            "second_harmonic": (lambda p, k1, k2: _rel(omega(2 * k2, p) ** 2, (2 * omega(k2, p)) ** 2), False),
            "sum": (lambda p, k1, k2: _rel(omega(k1 + k2, p) ** 2, (omega(k1, p) + omega(k2, p)) ** 2), True),
            "difference": (lambda p, k1, k2: _rel(omega(k1 + k2, p) ** 2, (omega(k1, p) - omega(k2, p)) ** 2), True),
        }
    if order == 3:
        return {
            "third_harmonic": (lambda p, k1, k2: _rel(omega(3 * k2, p) ** 2, (3 * omega(k2, p)) ** 2), False),
            "sum": (lambda p, k1, k2: _rel(omega(2 * k1 + k2, p) ** 2, (2 * omega(k1, p) + omega(k2, p)) ** 2), True),
            "difference": (lambda p, k1, k2: _rel(omega(2 * k1 + k2, p) ** 2, (2 * omega(k1, p) - omega(k2, p)) ** 2), True),
        }
    raise DomainError(f"harmonic order must be 2 or 3, got {order}")


def _rel(lhs, rhs):
    return (lhs - rhs) / np.maximum(1.0, rhs)


def _degenerate(order, family, k1, k2):
    if abs(k2) < SMALL_XI:
        return True
    if family.endswith("harmonic"):
        return False
    if abs(k1) < SMALL_XI:
        return True
    combined = k1 + k2 if order == 2 else 2 * k1 + k2
    if abs(combined) < SMALL_XI:
        return True
    # k2 = -k1 gives back the first carrier
    return order == 3 and abs(k1 + k2) < SMALL_XI


def _scan_line(func, params, k1, k_values, meta, rows):
    values = np.array([func(params, k1, k) for k in k_values])
    rows.append({**meta, "k1": k1, "k2": k_values[int(np.argmin(np.abs(values)))], "defect": float(np.min(np.abs(values))), "kind": "minimum"})
    for a in range(len(k_values) - 1):
        lo, hi = k_values[a], k_values[a + 1]
        fa, fb = values[a], values[a + 1]
        if fa == 0.0:
            rows.append({**meta, "k1": k1, "k2": lo, "defect": 0.0, "kind": "root"})
        elif fa * fb < 0.0:
            root = optimize.brentq(lambda k: func(params, k1, k), lo, hi, xtol=1e-14)
            rows.append({**meta, "k1": k1, "k2": root, "defect": float(func(params, k1, root)), "kind": "root"})
        elif 0 < a and abs(fa) < abs(values[a - 1]) and abs(fa) < abs(fb):
            res = optimize.minimize_scalar(
                lambda k: abs(func(params, k1, k)), bounds=(k_values[a - 1], hi), method="bounded", options={"xatol": 1e-12}
            )
            rows.append({**meta, "k1": k1, "k2": float(res.x), "defect": float(res.fun), "kind": "local_minimum"})


def scan_resonances(mu_values, inv_bond_values, k_values, order=2):
    """Grid scan of resonance defects for collinear (one-dimensional) wave numbers.

    For every (mu, 1/Bo) cell and every family, the scan runs along k2 (and for
    interaction families for every k1 of the grid), records the smallest defect
    and refines sign changes with Brent's method and interior minima with a
    bounded scalar minimization.
    """
    k_values = np.asarray(k_values, dtype=float)
    families = _defect_functions(order)
    rows = []
    if k_values.size == 0:
        return pd.DataFrame(rows, columns=SCAN_COLUMNS)
    for mu in mu_values:
        for inv_bond in inv_bond_values:
            params = PhysicalParams(mu=float(mu), inv_bond=float(inv_bond), epsilon=1.0, d=1)
            for family, (func, pairwise) in families.items():
                meta = {"mu": float(mu), "inv_bond": float(inv_bond), "order": order, "family": family}
                outer = k_values if pairwise else [0.0]
                for k1 in outer:
                    line = np.array([k for k in k_values if not _degenerate(order, family, k1, k)])
                    if line.size == 0:
                        continue
                    _scan_line(func, params, float(k1), line, meta, rows)
    frame = pd.DataFrame(rows, columns=SCAN_COLUMNS)
    logger.info(f"resonance scan (order {order}) produced {len(frame)} rows, {int((frame['kind'] == 'root').sum())} roots")
    return frame
