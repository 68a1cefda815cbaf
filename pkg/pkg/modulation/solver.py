"""Time integration of the macroscopic modulation system.

Unknowns: psi_0j (exact transport), the mean field pair (psi_00, d/dt' psi_00)
(forced wave equation d^2/dt'^2 psi_00 - sqrt(mu) lap' psi_00 = S) and psi_1j
(transport forced by E_j). psi_0j is never integrated: it is shifted from the
initial data to any requested time.
"""
import logging
from bisect import bisect_right
from dataclasses import dataclass
from math import ceil, factorial
from typing import Callable, Dict, List, Optional

import numpy as np

from pkg.dispersion.resonance import CARRIERS, NEAR_RESONANCE, NonresonanceReport, WaveTriple
from pkg.modulation.assembly import build_coefficients
from pkg.modulation.coefficients import mean_wave_source
from pkg.modulation.forcing import forcing_Ej
from pkg.spectral.field import SpectralField
from pkg.utils.errors import NumericalAbortError

logger = logging.getLogger(__name__)

SERIES_LIMIT = 1.0
SERIES_TERMS = 16


@dataclass(frozen=True)
class MacroState:
    t: float
    psi0: Dict[int, SpectralField]
    psi00: SpectralField
    psi00_t: SpectralField
    psi1: Dict[int, SpectralField]

    def __post_init__(self):
        grid = self.psi00.grid
        for name, u in self.fields():
            if u.grid != grid:
                raise ValueError(f"{name} lives on {u.grid}, expected {grid}")
        if not (self.psi00.real and self.psi00_t.real):
            raise ValueError("psi_00 and its time derivative must be real fields")

    @property
    def grid(self):
        return self.psi00.grid

    def fields(self):
        for j in CARRIERS:
            yield f"psi0{j}", self.psi0[j]
            yield f"psi1{j}", self.psi1[j]
        yield "psi00", self.psi00
        yield "psi00_t", self.psi00_t

    def is_finite(self):
        return all(np.all(np.isfinite(u.coeffs)) for _, u in self.fields())

    @classmethod
    def initial(cls, psi0, grid, psi00=None, psi00_t=None, psi1=None):
        """Initial state; mean field and first corrector default to zero."""
        zero = SpectralField.zeros(grid)
        return cls(
            t=0.0,
            psi0={j: psi0[j].as_complex() for j in CARRIERS},
            psi00=psi00 if psi00 is not None else zero,
            psi00_t=psi00_t if psi00_t is not None else zero,
            psi1={j: (psi1[j] if psi1 is not None else zero).as_complex() for j in CARRIERS},
        )


def _transport_phase(u: SpectralField, velocity, dt):
    return np.exp(-1j * np.tensordot(np.asarray(velocity, dtype=float), u.grid.wavenumbers, axes=(0, 0)) * dt)


def step_transport_exact(psi0j: SpectralField, dt: float, triple: WaveTriple, j: int):
    """Advance d/dt' u + grad w_j . grad' u = 0 by dt exactly in Fourier space."""
    if dt == 0.0:
        return psi0j
    phase = _transport_phase(psi0j, triple.wave(j).group_velocity, dt)
    return SpectralField(psi0j.grid, phase * psi0j.coeffs, psi0j.real)


def transported(psi0, t, triple):
    return {j: step_transport_exact(psi0[j], t, triple, j) for j in CARRIERS}


def envelope_mass(psi0):
    return {j: float(np.real(psi0[j].grid.measure * np.vdot(psi0[j].coeffs, psi0[j].coeffs))) for j in CARRIERS}


def _kernel_moments(freq, h):
    """Moments int_0^h s^n sin(W(h-s))/W ds and int_0^h s^n cos(W(h-s)) ds, n = 0, 1, 2.

    Series in x = W h below SERIES_LIMIT (covers W = 0), closed form above.
    """
    x = freq * h
    small = np.abs(x) < SERIES_LIMIT
    sin_m = [np.zeros_like(freq) for _ in range(3)]
    cos_m = [np.zeros_like(freq) for _ in range(3)]
    xs = np.where(small, x, 0.0)
    for n in range(3):
        s_sum = np.zeros_like(freq)
        c_sum = np.zeros_like(freq)
        for m in range(SERIES_TERMS):
            sign = -1.0 if m % 2 else 1.0
            s_sum = s_sum + sign * xs ** (2 * m) * factorial(n) / factorial(n + 2 * m + 2)
            c_sum = c_sum + sign * xs ** (2 * m) * factorial(n) / factorial(n + 2 * m + 1)
        sin_m[n] = np.where(small, h ** (n + 2) * s_sum, 0.0)
        cos_m[n] = np.where(small, h ** (n + 1) * c_sum, 0.0)
    w = np.where(small, 1.0, freq)
    c, s = np.cos(w * h), np.sin(w * h)
    ss0 = (1.0 - c) / w
    cc0 = s / w
    ss1 = h / w - cc0 / w
    cc1 = ss0 / w
    ss2 = h * h / w - 2.0 * cc1 / w
    cc2 = 2.0 * ss1 / w
    for n, (ss, cc) in enumerate(((ss0, cc0), (ss1, cc1), (ss2, cc2))):
        sin_m[n] = np.where(small, sin_m[n], ss / w)
        cos_m[n] = np.where(small, cos_m[n], cc)
    return sin_m, cos_m


def step_wave(psi00, psi00_t, t, dt, params, source: Callable[[float], SpectralField]):
    """Advance (psi_00, d/dt' psi_00) by dt.

    Every Fourier mode is rotated by the exact propagator at frequency mu^(1/4)|k|;
    the Duhamel integral uses the quadratic interpolant of S on the Simpson
    nodes t, t + dt/2, t + dt, integrated exactly against the kernel. The mean
    mode is the same formula at zero frequency.
    """
    if dt == 0.0:
        return psi00, psi00_t
    grid = psi00.grid
    freq = params.mu ** 0.25 * grid.wavenumber_norm
    w = np.where(freq > 0.0, freq, 1.0)
    c, s = np.cos(freq * dt), np.sin(freq * dt)
    u, v = psi00.coeffs, psi00_t.coeffs
    u_new = c * u + np.where(freq > 0.0, s / w, dt) * v
    v_new = -freq * s * u + c * v

    s0, sm, s1 = (source(t).coeffs, source(t + 0.5 * dt).coeffs, source(t + dt).coeffs)
    a = (s0, (-3.0 * s0 + 4.0 * sm - s1) / dt, (2.0 * s0 - 4.0 * sm + 2.0 * s1) / dt ** 2)
    sin_m, cos_m = _kernel_moments(freq, dt)
    for n in range(3):
        u_new = u_new + a[n] * sin_m[n]
        v_new = v_new + a[n] * cos_m[n]
    return SpectralField(grid, u_new, real=True), SpectralField(grid, v_new, real=True)


def step_transport_forced(psi1, t, dt, triple: WaveTriple, forcing: Callable[[float], Dict[int, SpectralField]]):
    """Advance d/dt' psi_1j + grad w_j . grad' psi_1j = E_j by dt.

    Classical four stage scheme on the integrating-factor variable
    exp(i (grad w_j . k) s) psi_1j(k); forcing(t) returns E_j for every carrier.
    E_j does not depend on psi_1j, so both midpoint stages share one evaluation.
    """
    if dt == 0.0:
        return psi1
    nodes = (t, t + 0.5 * dt, t + dt)
    e = [forcing(time) for time in nodes]
    out = {}
    for j in CARRIERS:
        u = psi1[j]
        velocity = triple.wave(j).group_velocity
        k1, k2, k4 = (_transport_phase(u, velocity, -(time - t)) * e[n][j].coeffs for n, time in enumerate(nodes))
        k3 = k2
        w = u.coeffs + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[j] = SpectralField(u.grid, _transport_phase(u, velocity, dt) * w, False)
    return out


@dataclass
class Trajectory:
    triple: WaveTriple
    dt: float
    samples: List[MacroState]
    source: str = "appendix"
    report: Optional[NonresonanceReport] = None
    gate: float = NEAR_RESONANCE

    @property
    def times(self):
        return [s.t for s in self.samples]

    def final(self):
        return self.samples[-1]

    def state_at(self, t):
        """State at any t' in the sampled range, re-stepped from the nearest earlier sample."""
        times = self.times
        if t < times[0] - 1e-12 or t > times[-1] + 1e-12:
            raise ValueError(f"t' = {t} outside the integrated range [{times[0]}, {times[-1]}]")
        i = max(bisect_right(times, t + 1e-14) - 1, 0)
        start = self.samples[i]
        if abs(t - start.t) <= 1e-14:
            return start
        n = max(1, ceil((t - start.t) / self.dt - 1e-9))
        return advance(start, t - start.t, n, self.triple, self.source, self.report, self.gate)


def mean_source_provider(psi0_initial, triple):
    def source(t):
        return mean_wave_source(triple, transported(psi0_initial, t, triple))

    return source


def forcing_provider(psi0_initial, triple, wave_at, source="appendix", report=None, gate=NEAR_RESONANCE, cubic=True):
    """E_j(t') from the transported psi_0j and the mean field pair wave_at(t')."""
    grid = psi0_initial[1].grid
    zero = SpectralField.zeros(grid, real=False)

    def forcing(t):
        psi00, psi00_t = wave_at(t)
        state = MacroState(t, transported(psi0_initial, t, triple), psi00, psi00_t, {j: zero for j in CARRIERS})
        coeffs = build_coefficients(state, triple, source, report, gate, level="forcing")
        if cubic:
            return coeffs.forcing
        return forcing_Ej(triple, state.psi0, psi00, psi00_t, coeffs.b0, coeffs.families, cubic=False)

    return forcing


def _step(state: MacroState, dt, psi0_initial, triple, source, report, gate):
    params = triple.params
    mean = mean_source_provider(psi0_initial, triple)
    t = state.t
    pairs = {t: (state.psi00, state.psi00_t)}

    def wave_at(time):
        if time not in pairs:
            pairs[time] = step_wave(state.psi00, state.psi00_t, t, time - t, params, mean)
        return pairs[time]

    forcing = forcing_provider(psi0_initial, triple, wave_at, source, report, gate)
    psi1 = step_transport_forced(state.psi1, t, dt, triple, forcing)
    psi00, psi00_t = wave_at(t + dt)
    return MacroState(t + dt, transported(psi0_initial, t + dt, triple), psi00, psi00_t, psi1)


def _initial_envelopes(state: MacroState, triple):
    """psi_0j at t' = 0 recovered from a state at any time."""
    return transported(state.psi0, -state.t, triple)


def advance(state, duration, steps, triple, source="appendix", report=None, gate=NEAR_RESONANCE):
    psi0_initial = _initial_envelopes(state, triple)
    dt = duration / steps
    for _ in range(steps):
        state = _step(state, dt, psi0_initial, triple, source, report, gate)
        if not state.is_finite():
            raise NumericalAbortError(state.t)
    return state


def integrate(
    initial: MacroState,
    T0: float,
    dt: float,
    triple: WaveTriple,
    source: str = "appendix",
    report: Optional[NonresonanceReport] = None,
    gate: float = NEAR_RESONANCE,
    sample_every: int = 1,
):
    """Integrate to T0 with steps of at most dt; every sample_every-th state is stored."""
    if T0 < 0.0 or dt <= 0.0:
        raise ValueError(f"need T0 >= 0 and dt > 0, got T0={T0}, dt={dt}")
    steps = ceil(T0 / dt - 1e-9) if T0 > 0.0 else 0
    step = T0 / steps if steps else dt
    fastest = triple.params.mu ** 0.25 * float(np.max(initial.grid.wavenumber_norm))
    if fastest > 0.0 and step > 2.0 * np.pi / fastest / 20.0:
        logger.warning(f"dt' = {step:.3g} resolves the fastest mean-field mode with fewer than 20 steps per period")
    psi0_initial = _initial_envelopes(initial, triple)
    samples = [initial]
    state = initial
    for n in range(1, steps + 1):
        state = _step(state, step, psi0_initial, triple, source, report, gate)
        if not state.is_finite():
            raise NumericalAbortError(state.t)
        if n % sample_every == 0 or n == steps:
            samples.append(state)
            mass = envelope_mass(state.psi0)
            logger.debug(f"t' = {state.t:.4f}, envelope mass {[f'{mass[j]:.12g}' for j in CARRIERS]}")
    logger.info(f"modulation system integrated to t' = {state.t:.6g} in {steps} steps")
    return Trajectory(triple, step, samples, source, report, gate)
