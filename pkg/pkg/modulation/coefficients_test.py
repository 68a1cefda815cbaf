import numpy as np
import pytest

from pkg.dispersion.resonance import CARRIERS, I_INDICES, K_INDICES, NonresonanceReport
from pkg.modulation.coefficients import (
    CouplingFamilies,
    HarmonicAmplitudes,
    abs_sq,
    finite,
    harmonic_time_derivatives,
    mean_source,
    mean_source_rate,
    mean_wave_source,
    plus_cc,
    polarize_leading,
    route_collisions,
    second_harmonic_sources,
    solve_first_harmonics,
    solve_harmonic,
    zeta1j,
)
from pkg.modulation.solver import transported
from pkg.spectral.field import SpectralField, directional
from pkg.utils.errors import DependencyError, NearResonanceError

STEP = 1e-4


def centered(func, state, triple):
    """Centered difference of func(psi0) along the transport of the envelopes."""
    plus = func(transported(state.psi0, STEP, triple))
    minus = func(transported(state.psi0, -STEP, triple))
    return plus, minus


def test_leading_pair_solves_the_homogeneous_rows(setup):
    zeta0 = polarize_leading(setup.state.psi0, setup.triple)
    for j in CARRIERS:
        w = setup.triple.wave(j)
        psi = setup.state.psi0[j]
        row1 = zeta0[j] * (-1j * w.omega) - psi * w.g
        row2 = zeta0[j] * w.b - psi * (1j * w.omega)
        assert row1.max_abs() < 1e-14 and row2.max_abs() < 1e-14


def test_harmonic_solve_back_substitutes(setup):
    rng = np.random.default_rng(4)
    shape = setup.grid.shape
    s1 = SpectralField.from_values(setup.grid, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    s2 = SpectralField.from_values(setup.grid, rng.standard_normal(shape) - 1j * rng.standard_normal(shape))
    for index in I_INDICES + K_INDICES:
        e = setup.triple[index]
        zeta, psi = solve_harmonic(e, s1, s2)
        assert (zeta * (-1j * e.omega) - psi * e.g - s1).max_abs() < 1e-12
        assert (zeta * e.b - psi * (1j * e.omega) - s2).max_abs() < 1e-12


def test_near_resonant_harmonic_is_gated(setup):
    e = setup.triple[(1, 1)]
    zero = SpectralField.zeros(setup.grid, real=False)
    with pytest.raises(NearResonanceError) as info:
        solve_harmonic(e, zero, zero, gate=e.defect * 2.0)
    assert info.value.index == "11"


def test_first_harmonics_solve_their_rows(setup):
    sources, b0 = second_harmonic_sources(setup.triple, setup.state.psi0)
    first = solve_first_harmonics(sources, setup.triple, setup.report)
    assert set(first) == set(I_INDICES)
    for index in I_INDICES:
        if any(index in group for group in setup.report.coincidences):
            continue
        e = setup.triple[index]
        zeta, psi = first[index]
        a, b = sources[index]
        assert (zeta * (-1j * e.omega) - psi * e.g - a).max_abs() < 1e-13
        assert (zeta * e.b - psi * (1j * e.omega) - b).max_abs() < 1e-13
    assert b0.real
    assert (b0 - mean_source(setup.triple, setup.state.psi0)).max_abs() == 0.0


def test_first_corrector_polarization(setup):
    state, triple = setup.state, setup.triple
    w = triple.wave(2)
    z = zeta1j(state.psi1[2], state.psi0[2], w, setup.params)
    expected = state.psi1[2] * (1j * w.omega / w.b) + directional(w.bo_velocity, state.psi0[2])
    assert (z - expected).max_abs() < 1e-15


def test_time_derivatives_follow_the_transport(setup):
    state, triple = setup.state, setup.triple

    def first(psi0):
        sources, _ = second_harmonic_sources(triple, psi0)
        return solve_first_harmonics(sources, triple, setup.report)

    rates = harmonic_time_derivatives(triple, state.psi0, setup.report)
    plus, minus = centered(first, state, triple)
    for index in I_INDICES:
        for part in range(2):
            fd = (plus[index][part] - minus[index][part]) * (0.5 / STEP)
            assert (rates[index][part] - fd).max_abs() < 1e-7, f"d/dt' of harmonic {index}"

    plus, minus = centered(lambda p: mean_source(triple, p), state, triple)
    fd = (plus - minus) * (0.5 / STEP)
    assert (mean_source_rate(triple, state.psi0) - fd).max_abs() < 1e-7


def test_mean_wave_source(setup):
    state, triple = setup.state, setup.triple
    plus, minus = centered(lambda p: {j: abs_sq(p[j]) for j in CARRIERS}, state, triple)
    expected = SpectralField.zeros(setup.grid)
    for j in CARRIERS:
        w = triple.wave(j)
        dt = (plus[j] - minus[j]) * (0.5 / STEP)
        expected = expected + dt * (w.g ** 2 - w.xi_sq) + directional(2.0 * (w.omega / w.b) * w.xi, abs_sq(state.psi0[j]))
    source = mean_wave_source(triple, state.psi0)
    assert source.real
    assert (source - expected).max_abs() < 1e-7


def test_missing_blocks_are_reported(setup):
    zeta0 = polarize_leading(setup.state.psi0, setup.triple)
    harmonics = HarmonicAmplitudes(zeta0=zeta0)
    with pytest.raises(DependencyError):
        harmonics.require("first")
    with pytest.raises(DependencyError):
        harmonics.require("zeta10")
    names = [name for name, _ in harmonics.fields()]
    assert names[:3] == ["zeta01", "zeta02", "zeta03"]


def test_collisions_are_folded_into_the_carrier(setup):
    grid = setup.grid
    one = SpectralField.constant(grid, 1.0).as_complex()
    families = CouplingFamilies(
        C={key: one * (k + 1) for k, key in enumerate(list(CARRIERS) + list(K_INDICES))},
        D={key: one for key in list(CARRIERS) + list(K_INDICES)},
    )
    report = NonresonanceReport(tol=1e-6, carrier_collisions={(1, 1, -2): 1})
    before = families.C[1].mean() + families.C[(1, 1, -2)].mean()
    route_collisions(families, report)
    assert families.routed == ((1, 1, -2),)
    assert families.C[1].mean() == pytest.approx(before)
    assert families.C[(1, 1, -2)].max_abs() == 0.0
    assert families.D[1].mean() == pytest.approx(2.0)
    route_collisions(families, report)
    assert families.D[1].mean() == pytest.approx(2.0), "routing twice must not add twice"


def test_helpers(setup):
    psi = setup.state.psi0[1]
    assert plus_cc(psi).real and abs_sq(psi).real
    assert np.allclose(plus_cc(psi).values, 2.0 * psi.values.real)
    assert finite([psi, setup.state.psi00])
    assert not finite([psi * np.nan])


if __name__ == "__main__":
    pytest.main(["-v", __file__])
