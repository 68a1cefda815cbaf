"""Forcing of the first corrector and the second order harmonic amplitudes."""
import logging
from typing import Mapping, Optional

from pkg.dispersion.resonance import CARRIERS, I_INDICES, K_INDICES, NEAR_RESONANCE, NonresonanceReport, WaveTriple
from pkg.modulation.coefficients import CouplingFamilies, HarmonicAmplitudes, solve_family
from pkg.spectral.field import directional, quadratic_form
from pkg.utils.errors import DependencyError

logger = logging.getLogger(__name__)


def _require_carriers(families: CouplingFamilies):
    missing = [j for j in CARRIERS if j not in families.C or j not in families.D]
    if missing:
        raise DependencyError(f"C_j / D_j missing for carriers {missing}")


def cubic_forcing(triple: WaveTriple, psi0, b0, families: CouplingFamilies):
    """E~_j = i (b_j/2w_j)(g_j^2 - |xi_j|^2) B_0 psi_0j - i (b_j/2w_j) C_j + D_j/2."""
    _require_carriers(families)
    out = {}
    for j in CARRIERS:
        w = triple.wave(j)
        k = 1j * w.b / (2.0 * w.omega)
        out[j] = b0 * psi0[j] * (k * (w.g ** 2 - w.xi_sq)) - families.C[j] * k + families.D[j] * 0.5
    return out


def forcing_Ej(triple: WaveTriple, psi0, psi00, psi00_t, b0, families: CouplingFamilies, cubic=True):
    """Forcing E_j of the transport equation for psi_1j.

    E_j = (i/2) grad'.H_w grad' psi_0j
          - i psi_0j ((b_j/2w_j)(g_j^2 - |xi_j|^2) d/dt' + xi_j . grad') psi_00 + E~_j.

    cubic=False drops E~_j (dispersive and mean-field part only).
    """
    tilde = cubic_forcing(triple, psi0, b0, families) if cubic else None
    out = {}
    for j in CARRIERS:
        w = triple.wave(j)
        mean = psi00_t * (w.b / (2.0 * w.omega) * (w.g ** 2 - w.xi_sq)) + directional(w.xi, psi00)
        e = quadratic_form(w.hessian_omega, psi0[j]) * 0.5j - psi0[j] * mean * 1j
        out[j] = e + tilde[j] if cubic else e
    return out


def F_j(triple: WaveTriple, psi0, psi00_t, b0, families: CouplingFamilies):
    _require_carriers(families)
    sigma = triple.params.inv_bond
    out = {}
    for j in CARRIERS:
        w = triple.wave(j)
        v = w.bo_velocity
        dispersive = quadratic_form(w.hessian_omega, psi0[j]) * (-0.5j / w.b)
        capillary = (
            directional(w.xi, directional(v, psi0[j])) * 2.0 + psi0[j].laplacian() * (w.omega / w.b)
        ) * (1j * sigma / w.b)
        k = 0.5j / w.omega * (w.g ** 2 - w.xi_sq)
        mean = psi0[j] * psi00_t * k - b0 * psi0[j] * k
        cubic = families.C[j] * (0.5j / w.omega) + families.D[j] * (0.5 / w.b)
        out[j] = dispersive + capillary + mean + cubic
    return out


def zeta2j_and_Fj(triple: WaveTriple, psi0, psi1, psi00_t, b0, families: CouplingFamilies):
    """zeta_2j = grad_Bo w_j . grad' psi_1j + F_j (psi_2j = 0); returns (zeta_2j, F_j)."""
    f = F_j(triple, psi0, psi00_t, b0, families)
    zeta2 = {j: directional(triple.wave(j).bo_velocity, psi1[j]) + f[j] for j in CARRIERS}
    return zeta2, f


def zeta20(families: CouplingFamilies):
    """zeta_20 = D_0 with psi_10 = 0."""
    if families.D0 is None:
        raise DependencyError("D_0 is required for zeta_20")
    return families.D0.real_part()


def second_harmonic_row_sources(triple: WaveTriple, harmonics: HarmonicAmplitudes, families, rates):
    """Right-hand sides of the eps^2 second harmonic rows.

    (C_ji - d/dt' zeta_1ji - i g'_ji . grad' psi_1ji, D_ji - d/dt' psi_1ji + 2 i sigma xi_ji . grad' zeta_1ji)
    """
    sigma = triple.params.inv_bond
    sources = {}
    for index in I_INDICES:
        if index not in rates:
            raise DependencyError(f"time derivative of the second harmonic {index} missing")
        e = triple[index]
        zeta1, psi1 = harmonics.first[index]
        dzeta, dpsi = rates[index]
        s1 = families.C[index] - dzeta - directional(e.grad_g, psi1) * 1j
        s2 = families.D[index] - dpsi + directional(e.xi, zeta1) * (2j * sigma)
        sources[index] = (s1, s2)
    return sources


def solve_second_harmonics(
    triple: WaveTriple,
    harmonics: HarmonicAmplitudes,
    families: CouplingFamilies,
    rates: Mapping,
    report: Optional[NonresonanceReport] = None,
    gate: float = NEAR_RESONANCE,
):
    """(zeta_2ji, psi_2ji) over I, (zeta_2jik, psi_2jik) over K and zeta_20.

    rates holds d/dt' (zeta_1ji, psi_1ji). Cubic harmonics routed into a carrier stay zero.
    """
    harmonics.require("first")
    second = solve_family(triple, second_harmonic_row_sources(triple, harmonics, families, rates), I_INDICES, report, gate)
    cubic_sources = {index: (families.C[index], families.D[index]) for index in K_INDICES}
    third = solve_family(triple, cubic_sources, K_INDICES, report, gate)
    return second, third, zeta20(families)

