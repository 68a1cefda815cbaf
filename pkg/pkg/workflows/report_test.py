import numpy as np
import pandas as pd
import pytest
import yaml

from pkg.workflows.report import emit_csv, fit_slope, render_markdown, write_summary

power_laws = [
    ([0.2, 0.1, 0.05], 3.0, 0.7),
    ([0.25, 0.125, 0.0625, 0.03125], 2.0, 1.5),
    ([1 / 16, 1 / 32, 1 / 64], 2.5, 0.01),
]


def test_csv_is_deterministic(tmp_path):
    frame = pd.DataFrame({"eps": [0.1, 1 / 3], "value": [np.pi, 1e-17], "name": ["a,b", "c"]})
    first = emit_csv(frame, tmp_path / "out" / "a.csv")
    second = emit_csv(frame.to_dict("records"), tmp_path / "b.csv")
    raw = first.read_bytes()
    assert raw == second.read_bytes()
    assert b"\r\n" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "eps,value,name"
    assert lines[1] == '0.10000000000000001,3.1415926535897931,"a,b"'
    assert float(lines[2].split(",")[0]) == 1 / 3


@pytest.mark.parametrize("eps,slope,scale", power_laws)
def test_slope_of_an_exact_power_law(eps, slope, scale):
    values = [scale * e ** slope for e in eps]
    fit = fit_slope(eps, values)
    assert fit.slope == pytest.approx(slope, abs=1e-12)
    assert fit.intercept == pytest.approx(np.log(scale), abs=1e-12)
    assert max(abs(r) for r in fit.residuals) < 1e-12
    assert fit.within(slope - 0.3, slope + 0.3)
    assert set(fit.as_dict()) == {"slope", "intercept", "r_value", "residuals"}


def test_slope_needs_three_points():
    with pytest.raises(ValueError):
        fit_slope([0.1, 0.05], [1.0, 0.5])
    with pytest.raises(ValueError):
        fit_slope([0.1, 0.05, 0.025], [1.0, 0.5])


def test_slope_of_vanishing_values_is_undefined():
    fit = fit_slope([0.1, 0.05, 0.025], [1e-3, 0.0, 1e-5])
    assert np.isnan(fit.slope)
    assert not fit.within(-10.0, 10.0)


def test_summary_and_markdown(tmp_path):
    fit = fit_slope([0.2, 0.1, 0.05], [0.008, 0.001, 0.000125])
    summary = {"experiment": "residual", "fits": {"residual_full": fit.as_dict()}}
    path = write_summary(summary, tmp_path / "s.yaml")
    assert yaml.safe_load(path.read_text())["fits"]["residual_full"]["slope"] == pytest.approx(3.0)

    context = {
        "title": "Residual scaling",
        "carriers": [[1], [-1], [2]],
        "mu": 1.0,
        "inv_bond": 0.0,
        "d": 1,
        "source": "appendix",
        "fits": {"residual_full": fit.as_dict()},
        "expected": {"residual_full": 3.0},
        "points": [{"name": "residual_full", "eps": 0.2, "value": 0.008, "residual": 0.0}],
        "gates": [{"eps": 0.2, "depth": 0.9, "a_min": 0.95}],
        "refinement": [],
    }
    text = render_markdown(context, tmp_path / "r.md").read_text()
    assert text.startswith("# Residual scaling")
    assert "| residual_full | 3.0000 | 3.0 |" in text
    assert "## Gates" in text and "## Refinement" not in text


if __name__ == "__main__":
    pytest.main(["-v", __file__])
