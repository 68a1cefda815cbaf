"""CSV, YAML and markdown emission for experiment results."""
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List

import numpy as np
import pandas as pd
import yaml
from jinja2 import Template
from scipy import stats

logger = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).parent / "templates"
FLOAT_FORMAT = "%.17g"


def emit_csv(rows, path):
    """Deterministic CSV: 17 significant digits, LF endings, minimal quoting."""
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    print(f"[INFO] CSV saved to {path}")
    return path


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    residuals: List[float] = field(default_factory=list)
    r_value: float = float("nan")

    def within(self, lo, hi):
        return bool(lo <= self.slope <= hi)

    def as_dict(self):
        return {
            "slope": float(self.slope),
            "intercept": float(self.intercept),
            "r_value": float(self.r_value),
            "residuals": [float(r) for r in self.residuals],
        }


def fit_slope(eps, values):
    """Least squares fit of log(values) against log(eps)."""
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    if eps.shape != values.shape:
        raise ValueError(f"eps and values differ in length: {eps.size} vs {values.size}")
    if eps.size < 3:
        raise ValueError(f"a slope fit needs at least 3 points, got {eps.size}")
    if np.any(values <= 0.0) or not np.all(np.isfinite(values)):
        logger.warning("slope fit skipped: values must be positive and finite")
        return SlopeFit(float("nan"), float("nan"), [float("nan")] * eps.size)
    x, y = np.log(eps), np.log(values)
    fit = stats.linregress(x, y)
    residuals = y - (fit.intercept + fit.slope * x)
    return SlopeFit(float(fit.slope), float(fit.intercept), residuals.tolist(), float(fit.rvalue))


def write_summary(summary, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.dump(summary, sort_keys=False))
    print(f"[INFO] Summary saved to {path}")
    return path


def render_markdown(context, path, template="summary.md.j2"):
    text = Template((TEMPLATE_DIR / template).read_text()).render(**context)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(f"[INFO] Report saved to {path}")
    return path
