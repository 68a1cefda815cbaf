from pathlib import Path

import pandas as pd
import pytest
import yaml

from pkg import cli
from pkg.utils.errors import NumericalAbortError
from pkg.workflows import experiments

CONFIGS = Path(__file__).resolve().parents[1] / "test" / "configs"
SMALL = str(CONFIGS / "small.yaml")
ZERO_WAVES = "envelopes.waves=[{family: zero}, {family: zero}, {family: zero}]"

quick_runs = [
    ("dispersion-table", [], "small_dispersion.csv"),
    ("resonance-scan", [], "small_resonance_scan.csv"),
    ("coeff-dump", [], "small_coefficients.csv"),
    ("simulate", ["--set", "scale.M=[4]"], "small_simulate.csv"),
    ("convergence", ["--set", ZERO_WAVES, "--set", "scale.M=[4]"], "small_convergence.csv"),
]

config_failures = [
    (str(CONFIGS / "unknown_key.yaml"), []),
    (str(CONFIGS / "broken.yaml"), []),
    (str(CONFIGS / "empty.yaml"), []),
    (SMALL, ["--set", "scale.M"]),
    (SMALL, ["--set", "params.mu=0.5"]),
]

gate_failures = [
    ("violated_depth.yaml", "convergence"),
    ("violated_hyperbolicity.yaml", "convergence"),
]


def run(command, config, *extra, output):
    return cli.main([command, "--config", config, "--output", str(output), *extra])


def test_registry_lists_every_subcommand():
    names = set(cli.get_available_experiments())
    assert names == {"dispersion-table", "resonance-scan", "simulate", "residual", "convergence", "coeff-dump"}
    for entry in cli.get_available_experiments().values():
        assert callable(cli.resolve_runner(entry))


@pytest.mark.parametrize("command,extra,produced", quick_runs)
def test_subcommands_write_their_tables(tmp_path, command, extra, produced):
    assert run(command, SMALL, *extra, output=tmp_path) == cli.EXIT_OK
    frame = pd.read_csv(tmp_path / produced)
    assert len(frame) > 0
    assert list(tmp_path.glob("small_*.yaml")), "every run writes a summary"


def test_dispersion_table_rows(tmp_path):
    run("dispersion-table", SMALL, output=tmp_path)
    summary = yaml.safe_load((tmp_path / "small_dispersion.yaml").read_text())
    assert summary["rows"] == 9
    assert set(summary["carriers"]) == {"carrier1", "carrier2", "carrier3"}


def test_resonance_scan_reports_the_triple(tmp_path):
    run("resonance-scan", SMALL, output=tmp_path)
    summary = yaml.safe_load((tmp_path / "small_resonance_scan.yaml").read_text())
    assert summary["triple_passed"] is True
    assert summary["roots"] == 0
    assert summary["gravity_r0_max"] < 0.0


def test_coefficient_sources_agree_on_overlapping_envelopes(tmp_path):
    assert run("coeff-dump", str(CONFIGS / "overlap.yaml"), output=tmp_path) == cli.EXIT_OK
    frame = pd.read_csv(tmp_path / "overlap_coefficients.csv")
    coeffs = frame[frame["kind"] == "coefficient"]
    scale = coeffs["appendix_l2"].max()
    assert scale > 1e-3, "overlapping envelopes must couple"
    absolute = coeffs["relative_difference"] * coeffs["appendix_l2"].where(coeffs["appendix_l2"] > 0.0, 1.0)
    worst = coeffs.loc[absolute.idxmax(), "name"]
    assert absolute.max() <= 1e-8 * scale, f"coefficient {worst} differs between the two sources"


def test_simulation_keeps_envelope_mass(tmp_path):
    assert run("simulate", SMALL, "--set", "scale.M=[4,8]", output=tmp_path) == cli.EXIT_OK
    summary = yaml.safe_load((tmp_path / "small_simulate.yaml").read_text())
    assert all(drift < 1e-12 for drift in summary["envelope_mass_drift"].values())
    assert (tmp_path / "small_M8_psi00.bin").exists()
    assert (tmp_path / "small_M8_zeta_spectrum.csv").exists()


def test_workers_give_the_same_tables(tmp_path):
    serial, pooled = tmp_path / "serial", tmp_path / "pooled"
    assert run("simulate", SMALL, "--set", "scale.M=[4,8]", output=serial) == cli.EXIT_OK
    assert run("simulate", SMALL, "--set", "scale.M=[4,8]", "--set", "runtime.workers=2", output=pooled) == cli.EXIT_OK
    assert (serial / "small_simulate.csv").read_bytes() == (pooled / "small_simulate.csv").read_bytes()


@pytest.mark.parametrize("config,extra", config_failures)
def test_configuration_errors_exit_with_one(tmp_path, config, extra):
    assert run("simulate", config, *extra, output=tmp_path) == cli.EXIT_CONFIG


def test_capillary_convergence_is_refused(tmp_path):
    assert run("convergence", SMALL, "--set", "params.inv_bond=0.1", output=tmp_path) == cli.EXIT_CONFIG


@pytest.mark.parametrize("config,command", gate_failures)
def test_violated_hypotheses_exit_with_two(tmp_path, config, command):
    assert run(command, str(CONFIGS / config), "--set", "scale.M=[4]", output=tmp_path) == cli.EXIT_GATE


def test_resonant_triple_exits_with_two(tmp_path):
    assert run("simulate", SMALL, "--set", "carriers.wavevectors=[[1],[1],[2]]", output=tmp_path) == cli.EXIT_GATE


def test_numerical_abort_exits_with_three(tmp_path, monkeypatch):
    def blow_up(cfg, out_dir):
        raise NumericalAbortError(0.25)

    monkeypatch.setattr(experiments, "run_simulate", blow_up)
    assert run("simulate", SMALL, output=tmp_path) == cli.EXIT_ABORT


@pytest.mark.slow
def test_residual_slopes(tmp_path):
    assert run("residual", str(CONFIGS / "residual.yaml"), output=tmp_path) == cli.EXIT_OK
    fits = yaml.safe_load((tmp_path / "residual_residual.yaml").read_text())["fits"]
    assert abs(fits["residual_first"]["slope"] - 2.0) < 0.3, fits["residual_first"]
    assert abs(fits["residual_full"]["slope"] - 3.0) < 0.3, fits["residual_full"]


@pytest.mark.slow
def test_headline_error_slopes(tmp_path):
    assert run("convergence", str(CONFIGS / "headline.yaml"), output=tmp_path) == cli.EXIT_OK
    summary = yaml.safe_load((tmp_path / "headline_convergence.yaml").read_text())
    assert 2.1 <= summary["fits"]["error_first"]["slope"] <= 2.9, summary["fits"]
    assert summary["fits"]["error_first"]["slope"] > summary["fits"]["error_leading"]["slope"]
    assert all(g["depth"] >= 0.5 and g["a_min"] >= 0.5 for g in summary["gates"])


if __name__ == "__main__":
    pytest.main(["-v", __file__])
