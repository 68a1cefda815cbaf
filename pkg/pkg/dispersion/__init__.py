from pkg.dispersion.dispersion import (
    PhysicalParams,
    WaveComponent,
    b_factor,
    bo_velocity,
    dispersion_table,
    g0,
    grad_g0,
    grad_omega,
    hessian_g0,
    hessian_identity_sides,
    hessian_omega,
    omega,
)
from pkg.dispersion.resonance import (
    I_INDICES,
    K_INDICES,
    HarmonicEntry,
    NonresonanceReport,
    WaveTriple,
    check_nonresonance,
    harmonic_key,
    r0,
    scan_resonances,
)
