from pkg.spectral.grid import Grid
from pkg.spectral.field import (
    Multiplier,
    SpectralField,
    apply_multiplier,
    dealias,
    dealias_mask,
    directional,
    div,
    dot,
    inner,
    quadratic_form,
    resample,
    sobolev_norm,
)
