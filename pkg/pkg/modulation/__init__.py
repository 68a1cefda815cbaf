from pkg.modulation.assembly import CoefficientSet, build_coefficients
from pkg.modulation.coefficients import CouplingFamilies, HarmonicAmplitudes
from pkg.modulation.envelopes import make_envelope
from pkg.modulation.reconstruct import ReconstructionSet, reconstruct, reconstruction_provider
from pkg.modulation.solver import (
    MacroState,
    Trajectory,
    integrate,
    step_transport_exact,
    step_transport_forced,
    step_wave,
)
