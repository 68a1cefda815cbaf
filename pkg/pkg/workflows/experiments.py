"""Experiment runners behind the CLI subcommands.

Every runner takes a validated ExperimentConfig and an output directory,
writes its CSV and YAML summary there and returns the summary.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

import numpy as np
import pandas as pd

from pkg.dispersion.dispersion import WaveComponent, dispersion_table
from pkg.dispersion.resonance import CARRIERS, I_INDICES, K_INDICES, WaveTriple, check_nonresonance, index_label, r0, scan_resonances
from pkg.modulation.assembly import SOURCES, build_coefficients
from pkg.modulation.coefficients import finite
from pkg.modulation.reconstruct import ReconstructionSet, micro_grid, reconstruct, reconstruction_provider
from pkg.modulation.solver import MacroState, envelope_mass, integrate
from pkg.spectral.field import sobolev_norm
from pkg.spectral.grid import Grid
from pkg.spectral.io import write_binary, write_csv
from pkg.utils.errors import ConfigError, GateError, NumericalAbortError
from pkg.waterwaves.diagnostics import check_depth, check_hyperbolicity, energy_norm, error_norm
from pkg.waterwaves.dno import DnoConfig
from pkg.waterwaves.evolution import integrate_ww, resolving_step
from pkg.waterwaves.residual import difference_step, residual_evaluator
from pkg.workflows.config import ExperimentConfig
from pkg.workflows.report import emit_csv, fit_slope, render_markdown, write_summary

logger = logging.getLogger(__name__)

MACRO_PERIOD = 2.0 * np.pi
EXPECTED_RESIDUAL = {"leading": 1.0, "first": 2.0, "full": 3.0}
R0_SAMPLES = 41


# shared setup -------------------------------------------------------------


def macro_grid(cfg: ExperimentConfig):
    return Grid(cfg.params.d, cfg.scale.macro_n, MACRO_PERIOD)


def build_triple(cfg: ExperimentConfig, eps):
    return WaveTriple.from_wavevectors(cfg.carriers.as_arrays(), cfg.physical(eps))


def prepare_triple(cfg: ExperimentConfig, eps):
    """Carrier triple at steepness eps; a resonant triple fails the non-resonance gate."""
    triple = build_triple(cfg, eps)
    report = check_nonresonance(triple, cfg.gates.resonance_tol, cfg.gates.near_resonance)
    if not report.passed:
        defects = {**report.quadratic, **report.cubic}
        worst = min((defects[i] for i in report.failed()), default=0.0)
        raise GateError("nonresonance", worst, cfg.gates.resonance_tol)
    return triple, report


def initial_state(cfg: ExperimentConfig, triple):
    grid = macro_grid(cfg)
    rng = cfg.rng()
    psi0 = {j: spec.build(grid, rng) for j, spec in zip(CARRIERS, cfg.envelopes.waves)}
    psi00 = cfg.modulation.psi00.build(grid, rng).real_part()
    psi1 = {j: cfg.modulation.psi1.build(grid, rng) for j in CARRIERS}
    return MacroState.initial(psi0, grid, psi00=psi00, psi1=psi1)


def sample_every(cfg: ExperimentConfig):
    return max(1, int(round(1.0 / (cfg.run.snapshots_per_unit * cfg.run.dt_macro))))


def simulate_macro(cfg: ExperimentConfig, eps, T=None):
    triple, report = prepare_triple(cfg, eps)
    state = initial_state(cfg, triple)
    trajectory = integrate(
        state,
        cfg.run.T0 if T is None else T,
        cfg.run.dt_macro,
        triple,
        cfg.modulation.coefficients,
        report,
        cfg.gates.near_resonance,
        sample_every(cfg),
    )
    return triple, report, trajectory


def fastest_frequency(triple: WaveTriple):
    """Largest |omega| over carriers and harmonics of the approximation."""
    carriers = [abs(triple.wave(j).omega) for j in CARRIERS]
    harmonics = [abs(triple[index].omega) for index in I_INDICES + K_INDICES]
    return max(carriers + harmonics)


def reconstruct_state(trajectory, state, micro, order):
    triple = trajectory.triple
    level = "full" if order == "full" else "forcing"
    coeffs = build_coefficients(state, triple, trajectory.source, trajectory.report, trajectory.gate, level=level)
    U, _ = reconstruct(ReconstructionSet(state, coeffs, triple, order), micro)
    return U


def fan_out(job, cfg: ExperimentConfig, scales, **kwargs):
    """job(cfg, M) for every M, in a process pool when runtime.workers > 1; results in input order."""
    workers = min(cfg.runtime.workers, len(scales))
    if workers > 1:
        logger.info(f"running {len(scales)} jobs on {workers} workers")
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(partial(job, cfg, **kwargs), scales))
    return [job(cfg, M, **kwargs) for M in scales]


def _path(out_dir, cfg, name):
    return Path(out_dir) / f"{cfg.output.prefix}_{name}"


def _fits(eps, values, name, expected, points, fits, expected_table):
    """Fit one quantity into the shared summary tables when enough points exist."""
    if len(eps) < 3:
        logger.warning(f"{name}: {len(eps)} scale(s) given, a slope fit needs 3")
        return None
    fit = fit_slope(eps, values)
    fits[name] = fit.as_dict()
    expected_table[name] = expected
    for e, v, r in zip(eps, values, fit.residuals):
        points.append({"name": name, "eps": float(e), "value": float(v), "residual": float(r)})
    logger.info(f"{name}: slope {fit.slope:.4f} (expected {expected})")
    return fit


def _report_context(cfg, title, fits, expected, points, gates=None, refinement=None):
    return {
        "title": title,
        "carriers": cfg.carriers.wavevectors,
        "mu": cfg.params.mu,
        "inv_bond": cfg.params.inv_bond,
        "d": cfg.params.d,
        "source": cfg.modulation.coefficients,
        "fits": fits,
        "expected": expected,
        "points": points,
        "gates": gates or [],
        "refinement": refinement or [],
    }


# dispersion-table -----------------------------------------------------------


def run_dispersion_table(cfg: ExperimentConfig, out_dir):
    params = cfg.physical(cfg.scale.eps[0])
    k_values = np.linspace(cfg.tables.k_min, cfg.tables.k_max, cfg.tables.k_count)
    frame = dispersion_table(k_values, params, cfg.tables.direction)
    emit_csv(frame, _path(out_dir, cfg, "dispersion.csv"))
    carriers = {}
    for j, xi in zip(CARRIERS, cfg.carriers.as_arrays()):
        w = WaveComponent.from_wavevector(xi, params)
        carriers[f"carrier{j}"] = {
            "xi": xi.tolist(),
            "omega": float(w.omega),
            "group_velocity": [float(v) for v in w.group_velocity],
        }
    summary = {"rows": len(frame), "mu": params.mu, "inv_bond": params.inv_bond, "carriers": carriers}
    write_summary(summary, _path(out_dir, cfg, "dispersion.yaml"))
    return summary


# resonance-scan -------------------------------------------------------------


def r0_maximum(mu_values):
    """Largest r0 over a (x, lambda, c) sample grid with lambda > 0; negative for finite depth."""
    lam = np.linspace(0.05, 5.0, R0_SAMPLES)
    c = np.linspace(-1.0, 1.0, R0_SAMPLES)
    best = -np.inf
    for mu in mu_values:
        L, C = np.meshgrid(lam, c, indexing="ij")
        best = max(best, float(np.max(r0(np.sqrt(mu), L, C))))
    return best


def run_resonance_scan(cfg: ExperimentConfig, out_dir):
    k_values = np.linspace(cfg.scan.k_min, cfg.scan.k_max, cfg.scan.k_count)
    frames = [scan_resonances(cfg.scan.mu, cfg.scan.inv_bond, k_values, order) for order in cfg.scan.orders]
    frame = pd.concat(frames, ignore_index=True)
    emit_csv(frame, _path(out_dir, cfg, "resonance_scan.csv"))

    triple = build_triple(cfg, cfg.scale.eps[0])
    report = check_nonresonance(triple, cfg.gates.resonance_tol, cfg.gates.near_resonance)
    emit_csv(report.to_frame(), _path(out_dir, cfg, "nonresonance.csv"))
    summary = {
        "scan_rows": len(frame),
        "roots": int((frame["kind"] == "root").sum()) if len(frame) else 0,
        "triple_passed": report.passed,
        "near_resonant": [index_label(i) for i in report.near_resonant],
        "coincidences": [[index_label(i) for i in group] for group in report.coincidences],
        "carrier_collisions": {index_label(i): j for i, j in report.carrier_collisions.items()},
        "gravity_r0_max": r0_maximum(cfg.scan.mu),
    }
    write_summary(summary, _path(out_dir, cfg, "resonance_scan.yaml"))
    return summary


# simulate -------------------------------------------------------------------


def simulate_job(cfg: ExperimentConfig, M, out_dir=None):
    eps = 1.0 / M
    triple, _, trajectory = simulate_macro(cfg, eps)
    rows = []
    for state in trajectory.samples:
        row = {"M": M, "eps": eps, "t": state.t}
        mass = envelope_mass(state.psi0)
        for j in CARRIERS:
            row[f"mass{j}"] = mass[j]
        row["psi00_l2"] = sobolev_norm(state.psi00, 0.0)
        row["psi00_t_l2"] = sobolev_norm(state.psi00_t, 0.0)
        for j in CARRIERS:
            row[f"psi1{j}_l2"] = sobolev_norm(state.psi1[j], 0.0)
        rows.append(row)
    final = trajectory.final()
    if out_dir is not None:
        for j in CARRIERS:
            write_binary(final.psi1[j], _path(out_dir, cfg, f"M{M}_psi1{j}.bin"))
        write_binary(final.psi00, _path(out_dir, cfg, f"M{M}_psi00.bin"))
        micro = micro_grid(final.grid, eps, cfg.scale.micro_n)
        U = reconstruct_state(trajectory, final, micro, "full")
        write_csv(U.zeta, _path(out_dir, cfg, f"M{M}_zeta_spectrum.csv"))
    return rows


def run_simulate(cfg: ExperimentConfig, out_dir):
    results = fan_out(simulate_job, cfg, cfg.scale.M, out_dir=str(out_dir))
    frame = pd.DataFrame([row for rows in results for row in rows])
    emit_csv(frame, _path(out_dir, cfg, "simulate.csv"))
    drift = {}
    for M, rows in zip(cfg.scale.M, results):
        drift[M] = max(abs(rows[-1][f"mass{j}"] - rows[0][f"mass{j}"]) / max(rows[0][f"mass{j}"], 1e-300) for j in CARRIERS)
    summary = {"T0": cfg.run.T0, "samples": len(frame), "envelope_mass_drift": drift}
    write_summary(summary, _path(out_dir, cfg, "simulate.yaml"))
    return summary


# residual -------------------------------------------------------------------


def residual_job(cfg: ExperimentConfig, M):
    eps = 1.0 / M
    params = cfg.physical(eps)
    triple, report = prepare_triple(cfg, eps)
    frequency = fastest_frequency(triple)
    h = difference_step(eps, frequency, cfg.residual.fd_safety)
    T = max(cfg.run.residual_times) + 3.0 * h * eps + cfg.run.dt_macro
    trajectory = integrate(
        initial_state(cfg, triple), T, cfg.run.dt_macro, triple, cfg.modulation.coefficients, report,
        cfg.gates.near_resonance, sample_every(cfg),
    )
    micro = micro_grid(trajectory.final().grid, eps, cfg.scale.micro_n)
    # keep the difference stencil inside the integrated interval
    t_end = trajectory.final().t / eps
    times = [min(max(t / eps, 3.0 * h), t_end - 3.0 * h) for t in cfg.run.residual_times]
    frames = []
    for order in cfg.residual.orders:
        provider = reconstruction_provider(trajectory, micro, order, cfg.modulation.coefficients, cfg.gates.near_resonance)
        frames.append(
            residual_evaluator(provider, times, params, cfg.dno_config(), frequency, cfg.residual.s, cfg.residual.fd_safety, order)
        )
    frame = pd.concat(frames, ignore_index=True)
    frame.insert(0, "M", M)
    return frame


def run_residual(cfg: ExperimentConfig, out_dir):
    frame = pd.concat(fan_out(residual_job, cfg, cfg.scale.M), ignore_index=True)
    emit_csv(frame, _path(out_dir, cfg, "residual.csv"))
    fits, expected, points = {}, {}, []
    for order in cfg.residual.orders:
        worst = frame[frame["order"] == order].groupby("eps")["residual"].max().sort_index(ascending=False)
        _fits(worst.index.to_numpy(), worst.to_numpy(), f"residual_{order}", EXPECTED_RESIDUAL[order], points, fits, expected)
    summary = {"experiment": "residual", "eps": cfg.scale.eps, "fits": fits, "expected": expected}
    write_summary(summary, _path(out_dir, cfg, "residual.yaml"))
    render_markdown(_report_context(cfg, "Residual scaling", fits, expected, points), _path(out_dir, cfg, "residual.md"))
    return summary


# convergence ----------------------------------------------------------------


def convergence_job(cfg: ExperimentConfig, M, micro_n=None, dno_order=None):
    """Full water waves from U_a(0) against eps U_a1 over t <= T0/eps, sup over snapshots."""
    eps = 1.0 / M
    params = cfg.physical(eps)
    dno = DnoConfig(order=dno_order or cfg.dno.order, dealias=cfg.dno.dealias, h_min=cfg.gates.h_min)
    N = cfg.convergence.sobolev_index
    triple, _, trajectory = simulate_macro(cfg, eps)
    samples = trajectory.samples
    micro = micro_grid(samples[0].grid, eps, micro_n or cfg.scale.micro_n)

    U0 = reconstruct_state(trajectory, samples[0], micro, "full")
    depth = check_depth(U0, params, cfg.gates.h_min)
    a_min = check_hyperbolicity(U0, params, dno, cfg.gates.a0)

    times = [s.t / eps for s in samples]
    dt = cfg.run.dt_micro or resolving_step(micro, params)
    ww = integrate_ww(U0, times[-1], dt, params, dno, snapshots=times[1:-1])
    if len(ww.samples) != len(samples):
        raise NumericalAbortError(ww.final().t, f"{len(ww.samples)} snapshots for {len(samples)} macro samples")

    rows = []
    for state, U in zip(samples, ww.samples):
        Ua1 = reconstruct_state(trajectory, state, micro, "first")
        row = {"M": M, "eps": eps, "t": state.t, "error": error_norm(U.scaled(eps), Ua1.scaled(eps), N)}
        if cfg.convergence.include_leading:
            Ua0 = reconstruct_state(trajectory, state, micro, "leading")
            row["error_leading"] = error_norm(U.scaled(eps), Ua0.scaled(eps), N)
        rows.append(row)
    drift = abs(ww.energy[-1] - ww.energy[0]) / max(abs(ww.energy[0]), 1e-300)
    return {
        "M": M,
        "eps": eps,
        "depth": depth,
        "a_min": a_min,
        "energy_norm_initial": energy_norm(U0, N, params, dno),
        "energy_norm_final": energy_norm(ww.final(), N, params, dno),
        "hamiltonian_drift": drift,
        "rows": rows,
    }


def _sup(result, column="error"):
    return max(row[column] for row in result["rows"])


def refinement_changes(cfg: ExperimentConfig, results):
    """Relative change of the sup error under doubled micro grid and DNO order + 1."""
    refined = fan_out(convergence_job, cfg, cfg.scale.M, micro_n=2 * cfg.scale.micro_n, dno_order=cfg.dno.order + 1)
    changes = []
    for base, fine in zip(results, refined):
        e0, e1 = _sup(base), _sup(fine)
        change = abs(e1 - e0) / e0 if e0 > 0.0 else abs(e1)
        if change > cfg.convergence.refinement_tol:
            logger.warning(f"M = {base['M']}: refinement changes the error by {100 * change:.1f}%")
        changes.append({"eps": base["eps"], "change": change})
    return changes


def run_convergence(cfg: ExperimentConfig, out_dir):
    if cfg.params.inv_bond != 0.0:
        raise ConfigError("convergence runs need the gravity case, inv_bond = 0", key="params.inv_bond")
    results = fan_out(convergence_job, cfg, cfg.scale.M)
    frame = pd.DataFrame([row for r in results for row in r["rows"]])
    emit_csv(frame, _path(out_dir, cfg, "convergence.csv"))

    d = cfg.params.d
    eps = [r["eps"] for r in results]
    fits, expected, points = {}, {}, []
    _fits(eps, [_sup(r) for r in results], "error_first", 3.0 - d / 2.0, points, fits, expected)
    if cfg.convergence.include_leading:
        _fits(eps, [_sup(r, "error_leading") for r in results], "error_leading", 2.0 - d / 2.0, points, fits, expected)
    gates = [{"eps": r["eps"], "depth": r["depth"], "a_min": r["a_min"]} for r in results]
    refinement = refinement_changes(cfg, results) if cfg.convergence.refinement_check else []

    summary = {
        "experiment": "convergence",
        "eps": eps,
        "fits": fits,
        "expected": expected,
        "gates": gates,
        "refinement": refinement,
        "hamiltonian_drift": {r["M"]: r["hamiltonian_drift"] for r in results},
        "energy_norm": {r["M"]: [r["energy_norm_initial"], r["energy_norm_final"]] for r in results},
    }
    write_summary(summary, _path(out_dir, cfg, "convergence.yaml"))
    render_markdown(
        _report_context(cfg, "Error scaling", fits, expected, points, gates, refinement), _path(out_dir, cfg, "convergence.md")
    )
    return summary


# coeff-dump -----------------------------------------------------------------


def run_coeff_dump(cfg: ExperimentConfig, out_dir):
    """Every coefficient block at t' = 0 from both coefficient sources, with their relative difference."""
    triple, report = prepare_triple(cfg, cfg.scale.eps[0])
    state = initial_state(cfg, triple)
    sets = {source: build_coefficients(state, triple, source, report, cfg.gates.near_resonance) for source in SOURCES}
    blocks = {source: dict(s.families.blocks()) for source, s in sets.items()}
    for source, table in blocks.items():
        if not finite(table.values()):
            raise NumericalAbortError(0.0, f"non-finite coefficients from the {source} tables")
    rows = []
    for name, u in blocks["appendix"].items():
        v = blocks["expansion"][name]
        norm = sobolev_norm(u, 0.0)
        diff = sobolev_norm(u - v, 0.0)
        rows.append(
            {
                "kind": "coefficient",
                "name": name,
                "appendix_l2": norm,
                "expansion_l2": sobolev_norm(v, 0.0),
                "max_abs": u.max_abs(),
                "relative_difference": diff / norm if norm > 0.0 else diff,
            }
        )
    for name, u in sets[cfg.modulation.coefficients].harmonics.fields():
        rows.append({"kind": "amplitude", "name": name, "appendix_l2": sobolev_norm(u, 0.0), "max_abs": u.max_abs()})
    frame = pd.DataFrame(rows)
    emit_csv(frame, _path(out_dir, cfg, "coefficients.csv"))
    coeffs = frame[frame["kind"] == "coefficient"]
    summary = {
        "eps": cfg.scale.eps[0],
        "blocks": int(len(coeffs)),
        "max_relative_difference": float(coeffs["relative_difference"].max()),
        "forcing_l2": {j: sobolev_norm(sets[cfg.modulation.coefficients].forcing[j], 0.0) for j in CARRIERS},
    }
    write_summary(summary, _path(out_dir, cfg, "coefficients.yaml"))
    return summary
