import numpy as np
import pytest

from pkg.dispersion.dispersion import PhysicalParams
from pkg.dispersion.resonance import CARRIERS, WaveTriple
from pkg.modulation.assembly import build_coefficients
from pkg.modulation.expansion import ZERO_KEY, EpsSeries, TwoScale, build_ansatz, solvability, unit_key
from pkg.spectral.field import SpectralField
from pkg.spectral.grid import Grid
from pkg.utils.errors import DependencyError
from pkg.waterwaves import dno

TWO_PI = 2.0 * np.pi
MACRO = Grid(1, 8, TWO_PI)
MICRO = Grid(1, 32, TWO_PI)

amplitudes = [
    {1: 0.3, 2: 0.2j, 3: 0.1 - 0.05j},
    {1: 0.5, 2: 0.0, 3: 0.25},
]

triples = [
    (PhysicalParams(mu=1.0, epsilon=0.1), [[1.0], [-1.0], [2.0]]),
    (PhysicalParams(mu=1.5, inv_bond=0.1, epsilon=0.1), [[1.0], [-2.0], [3.0]]),
]


def constant_series(triple, amps):
    s = EpsSeries(MACRO)
    for j in CARRIERS:
        s.put_real(0, unit_key(j), SpectralField.constant(MACRO, amps[j]))
    return s


def on_micro(series, triple, p=0):
    """Physical field of the eps^p terms of a series of constant envelopes."""
    x = MICRO.points[0]
    total = np.zeros(MICRO.shape, dtype=complex)
    for (q, key), u in series.items():
        if q != p:
            continue
        xi = float(np.atleast_1d(triple.xi_of(key))[0])
        total = total + u.mean() * np.exp(1j * xi * x)
    return total


def micro_field(triple, amps):
    x = MICRO.points[0]
    values = sum(2.0 * np.real(amps[j] * np.exp(1j * float(triple.wave(j).xi[0]) * x)) for j in CARRIERS)
    return SpectralField.from_values(MICRO, values, real=True)


def test_series_truncates_at_its_cap():
    one = SpectralField.constant(MACRO, 1.0)
    s = EpsSeries(MACRO, cap=1)
    s.add(0, ZERO_KEY, one)
    s.add(1, (1, 0, 0), one)
    s.add(2, (1, 0, 0), one)
    assert (2, (1, 0, 0)) not in s
    sq = s * s
    assert sq.cap == 1
    assert sorted(slot for slot, _ in sq.items()) == [(0, ZERO_KEY), (1, (1, 0, 0))]
    assert sq[(1, (1, 0, 0))].mean() == pytest.approx(2.0)
    shifted = s.shifted(1)
    assert (2, (1, 0, 0)) in shifted and (1, ZERO_KEY) in shifted
    assert shifted.capped(1).max_abs(2) == 0.0
    assert s[(0, (0, 1, 0))].max_abs() == 0.0


def test_put_real_adds_the_conjugate():
    s = EpsSeries(MACRO)
    u = SpectralField.constant(MACRO, 0.2 + 0.3j)
    s.put_real(1, (1, -1, 0), u)
    assert s[(1, (-1, 1, 0))].mean() == pytest.approx(0.2 - 0.3j)
    s.put_real(0, ZERO_KEY, SpectralField.constant(MACRO, 0.5))
    assert s[(0, ZERO_KEY)].mean() == pytest.approx(0.5)
    assert len(s.terms) == 3


def test_time_derivative_uses_the_phase_frequency():
    params, carriers = triples[0]
    triple = WaveTriple.from_wavevectors(carriers, params)
    ops = TwoScale(triple)
    s = constant_series(triple, amplitudes[0])
    rate = SpectralField.constant(MACRO, 1.0 + 0j)
    out = ops.dt(s, {(0, unit_key(1)): rate})
    w = triple.wave(1).omega
    assert out[(0, unit_key(1))].mean() == pytest.approx(-1j * w * amplitudes[0][1])
    assert out[(1, unit_key(1))].mean() == pytest.approx(1.0)
    assert (1, unit_key(2)) not in out


@pytest.mark.parametrize("amps", amplitudes)
@pytest.mark.parametrize("params,carriers", triples)
def test_leading_terms_reproduce_the_shape_derivatives(params, carriers, amps):
    triple = WaveTriple.from_wavevectors(carriers, params)
    ops = TwoScale(triple)
    zeta = constant_series(triple, amps)
    psi = constant_series(triple, {j: 1j * a for j, a in amps.items()})
    zeta_x = micro_field(triple, amps)
    psi_x = micro_field(triple, {j: 1j * a for j, a in amps.items()})

    expected = dno.G1(zeta_x, psi_x, params, fraction=1.0).values
    assert np.allclose(on_micro(ops.G1(zeta, psi), triple), expected, atol=1e-12)
    expected = dno.G2(zeta_x, psi_x, params, fraction=1.0).values
    assert np.allclose(on_micro(ops.G2(zeta, psi), triple), expected, atol=1e-12)
    expected = dno.G0(psi_x, params).values
    assert np.allclose(on_micro(ops.g0(psi), triple), expected, atol=1e-13)


def test_solvability_needs_a_reduced_ansatz(setup):
    coeffs = build_coefficients(setup.state, setup.triple, "appendix", setup.report)
    ansatz = build_ansatz(
        setup.triple,
        setup.state.psi0,
        setup.state.psi00,
        setup.state.psi00_t,
        setup.state.psi1,
        coeffs.harmonics,
    )
    with pytest.raises(DependencyError):
        solvability(TwoScale(setup.triple), ansatz, setup.state.psi1)


if __name__ == "__main__":
    pytest.main(["-v", __file__])
