"""Evaluated coefficient bundle of the modulation system at one macroscopic time."""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

from pkg.dispersion.resonance import CARRIERS, NEAR_RESONANCE, NonresonanceReport, WaveTriple
from pkg.modulation.appendix import CoeffTables, appendix_tables, assemble_CD
from pkg.modulation.coefficients import (
    CouplingFamilies,
    HarmonicAmplitudes,
    harmonic_time_derivatives,
    polarize_leading,
    second_harmonic_sources,
    solve_first_harmonics,
    zeta1j,
    zeta10,
)
from pkg.modulation.expansion import extract_coefficients
from pkg.modulation.forcing import forcing_Ej, solve_second_harmonics, zeta2j_and_Fj
from pkg.spectral.field import SpectralField

logger = logging.getLogger(__name__)

SOURCES = ("appendix", "expansion")
LEVELS = ("forcing", "full")


@dataclass
class CoefficientSet:
    t: float
    source: str
    harmonics: HarmonicAmplitudes
    families: CouplingFamilies
    b0: SpectralField
    forcing: Dict[int, SpectralField]
    tables: Optional[CoeffTables] = None
    F: Dict[int, SpectralField] = field(default_factory=dict)
    rates: Dict[tuple, tuple] = field(default_factory=dict)

    @property
    def complete(self):
        return self.harmonics.zeta20 is not None


def build_coefficients(
    state,
    triple: WaveTriple,
    source: str = "appendix",
    report: Optional[NonresonanceReport] = None,
    gate: float = NEAR_RESONANCE,
    level: str = "full",
):
    """Coefficients at the macro state (t, psi_0j, psi_00, d/dt' psi_00, psi_1j).

    level="forcing" stops once E_j is known, which is all the forced transport needs.
    """
    if source not in SOURCES:
        raise ValueError(f"unknown coefficient source '{source}', expected one of {SOURCES}")
    if level not in LEVELS:
        raise ValueError(f"unknown assembly level '{level}', expected one of {LEVELS}")
    params = triple.params
    psi0, psi00, psi00_t, psi1 = state.psi0, state.psi00, state.psi00_t, state.psi1

    sources, b0 = second_harmonic_sources(triple, psi0)
    first = solve_first_harmonics(sources, triple, report, gate)
    harmonics = HarmonicAmplitudes(
        zeta0=polarize_leading(psi0, triple),
        zeta1={j: zeta1j(psi1[j], psi0[j], triple.wave(j), params) for j in CARRIERS},
        first=first,
        zeta10=zeta10(psi00_t, b0),
    )

    tables = None
    if source == "appendix":
        tables = appendix_tables(triple, psi0, harmonics)
        families = assemble_CD(triple, psi0, psi1, psi00, harmonics, tables, report)
    else:
        families = extract_coefficients(triple, psi0, psi1, psi00, harmonics, report)

    out = CoefficientSet(
        t=state.t,
        source=source,
        harmonics=harmonics,
        families=families,
        b0=b0,
        forcing=forcing_Ej(triple, psi0, psi00, psi00_t, b0, families),
        tables=tables,
    )
    if level == "forcing":
        return out

    harmonics.zeta2, out.F = zeta2j_and_Fj(triple, psi0, psi1, psi00_t, b0, families)
    out.rates = harmonic_time_derivatives(triple, psi0, report, gate)
    harmonics.second, harmonics.third, harmonics.zeta20 = solve_second_harmonics(
        triple, harmonics, families, out.rates, report, gate
    )
    logger.debug(f"coefficients assembled at t' = {state.t:.6g} from the {source} tables")
    return out
