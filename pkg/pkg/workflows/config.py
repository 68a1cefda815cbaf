"""Experiment configuration: YAML sections validated into an ExperimentConfig."""
import logging
import os
from pathlib import Path
from typing import List, Literal, Optional, Sequence

import dotenv
import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from pkg.dispersion.dispersion import MU_MAX, PhysicalParams
from pkg.modulation.envelopes import make_envelope
from pkg.utils.errors import ConfigError
from pkg.waterwaves.dno import DnoConfig

dotenv.load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = "config/experiment.yaml"
DEFAULT_OUTPUT = "output"
DEALIAS_CUTOFF = 2.0 / 3.0


def default_config_path():
    return os.getenv("MODULATION_CONFIG", DEFAULT_CONFIG)


def _power_of_two(n):
    return n >= 8 and not n & (n - 1)


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ParamsSection(Section):
    mu: float = 1.0
    inv_bond: float = 0.0
    d: Literal[1, 2] = 1

    @field_validator("mu")
    @classmethod
    def _mu(cls, v):
        if not 1.0 <= v <= MU_MAX:
            raise ValueError(f"mu must lie in [1, {MU_MAX:g}]")
        return v

    @field_validator("inv_bond")
    @classmethod
    def _inv_bond(cls, v):
        if v < 0.0:
            raise ValueError("the inverse Bond number must be nonnegative")
        return v

    def physical(self, epsilon):
        return PhysicalParams(mu=self.mu, inv_bond=self.inv_bond, epsilon=epsilon, d=self.d)


class CarriersSection(Section):
    wavevectors: List[List[int]] = Field(default_factory=lambda: [[1], [-1], [2]])

    @field_validator("wavevectors")
    @classmethod
    def _three(cls, v):
        if len(v) != 3:
            raise ValueError(f"exactly three carrier wave vectors are needed, got {len(v)}")
        if any(not any(c) for c in v):
            raise ValueError("carrier wave vectors must be nonzero")
        return v

    def as_arrays(self):
        return [np.asarray(c, dtype=float) for c in self.wavevectors]


class EnvelopeSpec(Section):
    family: Literal["gaussian", "mode", "zero"] = "gaussian"
    amplitude: float = 1.0
    width: float = 0.5
    center: float = 0.0
    index: int = 1
    # null draws a phase from runtime.seed
    phase: Optional[float] = 0.0

    @field_validator("width")
    @classmethod
    def _positive_width(cls, v):
        if v <= 0.0:
            raise ValueError("envelope width must be positive")
        return v

    def build(self, grid, rng):
        phase = self.phase if self.phase is not None else float(rng.uniform(0.0, 2.0 * np.pi))
        if self.family == "gaussian":
            return make_envelope(grid, "gaussian", amplitude=self.amplitude, center=self.center, width=self.width, phase=phase)
        if self.family == "mode":
            return make_envelope(grid, "mode", amplitude=self.amplitude, index=self.index, phase=phase)
        return make_envelope(grid, "zero")


class EnvelopesSection(Section):
    waves: List[EnvelopeSpec] = Field(
        default_factory=lambda: [
            EnvelopeSpec(amplitude=0.3, center=3.0, width=0.8),
            EnvelopeSpec(amplitude=0.3, center=3.5, width=0.8, phase=1.0),
            EnvelopeSpec(amplitude=0.3, center=2.5, width=0.8, phase=2.0),
        ]
    )

    @field_validator("waves")
    @classmethod
    def _three(cls, v):
        if len(v) != 3:
            raise ValueError(f"one envelope per carrier is needed, got {len(v)}")
        return v


class ScaleSection(Section):
    M: List[int] = Field(default_factory=lambda: [16, 32, 64])
    micro_n: int = 2048
    macro_n: int = 128

    @field_validator("M")
    @classmethod
    def _ascending(cls, v):
        if not v:
            raise ValueError("at least one scale ratio is needed")
        if any(m < 1 for m in v):
            raise ValueError("scale ratios must be positive integers")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("scale ratios must be strictly increasing (eps = 1/M strictly decreasing)")
        return v

    @field_validator("micro_n", "macro_n")
    @classmethod
    def _grid_size(cls, v):
        if not _power_of_two(v):
            raise ValueError(f"grid size must be a power of two >= 8, got {v}")
        return v

    @property
    def eps(self):
        return [1.0 / m for m in self.M]


class RunSection(Section):
    T0: float = 1.0
    dt_macro: float = 0.005
    dt_micro: Optional[float] = None
    snapshots_per_unit: int = 16
    residual_times: List[float] = Field(default_factory=lambda: [0.0, 0.5])

    @field_validator("T0", "dt_macro")
    @classmethod
    def _positive(cls, v):
        if v <= 0.0:
            raise ValueError("must be positive")
        return v

    @field_validator("dt_micro")
    @classmethod
    def _positive_or_auto(cls, v):
        if v is not None and v <= 0.0:
            raise ValueError("must be positive or null")
        return v

    @field_validator("snapshots_per_unit")
    @classmethod
    def _at_least_one(cls, v):
        if v < 1:
            raise ValueError("at least one snapshot per unit time is needed")
        return v


class GatesSection(Section):
    h_min: float = 0.5
    a0: float = 0.5
    resonance_tol: float = 1.0e-6
    near_resonance: float = 1.0e-3

    @field_validator("h_min", "a0", "resonance_tol", "near_resonance")
    @classmethod
    def _positive(cls, v):
        if v <= 0.0:
            raise ValueError("gates must be positive")
        return v

    @field_validator("h_min")
    @classmethod
    def _below_one(cls, v):
        if v >= 1.0:
            raise ValueError("h_min must be below 1")
        return v


class DnoSection(Section):
    order: int = 4
    dealias: float = DEALIAS_CUTOFF

    def build(self, h_min):
        return DnoConfig(order=self.order, dealias=self.dealias, h_min=h_min)


class ModulationSection(Section):
    coefficients: Literal["appendix", "expansion"] = "appendix"
    psi00: EnvelopeSpec = Field(default_factory=lambda: EnvelopeSpec(family="zero"))
    psi1: EnvelopeSpec = Field(default_factory=lambda: EnvelopeSpec(family="zero"))


class ResidualSection(Section):
    s: float = 1.0
    fd_safety: float = 1.0e-3
    orders: List[Literal["leading", "first", "full"]] = Field(default_factory=lambda: ["first", "full"])


class ConvergenceSection(Section):
    sobolev_index: int = 3
    include_leading: bool = False
    refinement_check: bool = False
    refinement_tol: float = 0.05

    @field_validator("sobolev_index")
    @classmethod
    def _index(cls, v):
        if v < 2:
            raise ValueError("the error norm needs N >= 2")
        return v


class TablesSection(Section):
    k_min: float = 0.0
    k_max: float = 10.0
    k_count: int = 101
    direction: Optional[List[float]] = None


class ScanSection(Section):
    mu: List[float] = Field(default_factory=lambda: [1.0, 4.0])
    inv_bond: List[float] = Field(default_factory=lambda: [0.0, 0.1])
    k_min: float = 0.05
    k_max: float = 5.0
    k_count: int = 100
    orders: List[Literal[2, 3]] = Field(default_factory=lambda: [2, 3])


class RuntimeSection(Section):
    workers: int = 1
    seed: int = 0

    @field_validator("workers")
    @classmethod
    def _workers(cls, v):
        if v < 1:
            raise ValueError("need at least one worker")
        return v


class OutputSection(Section):
    directory: str = DEFAULT_OUTPUT
    prefix: str = "run"


class ExperimentConfig(Section):
    params: ParamsSection = Field(default_factory=ParamsSection)
    carriers: CarriersSection = Field(default_factory=CarriersSection)
    envelopes: EnvelopesSection = Field(default_factory=EnvelopesSection)
    scale: ScaleSection = Field(default_factory=ScaleSection)
    run: RunSection = Field(default_factory=RunSection)
    gates: GatesSection = Field(default_factory=GatesSection)
    dno: DnoSection = Field(default_factory=DnoSection)
    modulation: ModulationSection = Field(default_factory=ModulationSection)
    residual: ResidualSection = Field(default_factory=ResidualSection)
    convergence: ConvergenceSection = Field(default_factory=ConvergenceSection)
    tables: TablesSection = Field(default_factory=TablesSection)
    scan: ScanSection = Field(default_factory=ScanSection)
    runtime: RuntimeSection = Field(default_factory=RuntimeSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def _consistent(self):
        d = self.params.d
        for c in self.carriers.wavevectors:
            if len(c) != d:
                raise ValueError(f"carriers.wavevectors: carrier {c} does not have {d} components")
        # the third harmonic must stay inside the dealiased band of the coarsest micro grid
        k_max = 3.0 * max(float(np.linalg.norm(c)) for c in self.carriers.wavevectors)
        cutoff = self.dno.dealias * self.scale.micro_n / (2.0 * max(self.scale.M))
        if k_max >= cutoff:
            raise ValueError(
                f"scale.micro_n: {self.scale.micro_n} points resolve wave numbers below {cutoff:.3g} at M = {max(self.scale.M)}, "
                f"the third harmonics reach {k_max:.3g}"
            )
        for t in self.run.residual_times:
            if not 0.0 <= t <= self.run.T0:
                raise ValueError(f"run.residual_times: {t} lies outside [0, T0 = {self.run.T0}]")
        return self

    def physical(self, epsilon):
        return self.params.physical(epsilon)

    def dno_config(self):
        return self.dno.build(self.gates.h_min)

    def rng(self):
        return np.random.default_rng(self.runtime.seed)


def _key_lines(text):
    """section.key -> 1-based line of the key in the YAML source."""
    lines = {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return lines
    if not isinstance(root, yaml.MappingNode):
        return lines
    for key_node, value_node in root.value:
        section = key_node.value
        lines[section] = key_node.start_mark.line + 1
        if isinstance(value_node, yaml.MappingNode):
            for sub_key, _ in value_node.value:
                lines[f"{section}.{sub_key.value}"] = sub_key.start_mark.line + 1
    return lines


def _error_key(error):
    loc = [str(p) for p in error["loc"] if not isinstance(p, int)]
    message = error["msg"]
    if not loc and ":" in message:
        # model level checks name their key in front of the message
        head = message.split(":", 1)[0].replace("Value error, ", "").strip()
        if "." in head and " " not in head:
            return head
    return ".".join(loc[:2]) if loc else None


def validate_config(data, text=""):
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        key = _error_key(first)
        line = _key_lines(text).get(key) if key else None
        raise ConfigError(first["msg"], line=line, key=key) from None


def parse_overrides(overrides: Sequence[str]):
    """['section.key=value', ...] -> [(['section', 'key'], value)], values typed by YAML."""
    parsed = []
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not of the form section.key=value")
        key, raw = item.split("=", 1)
        path = key.strip().split(".")
        if len(path) < 2 or not all(path):
            raise ConfigError(f"override key must be section.key, got '{key}'", key=key)
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as e:
            raise ConfigError(f"override value '{raw}' does not parse: {e}", key=key) from None
        parsed.append((path, value))
    return parsed


def apply_overrides(data, overrides: Sequence[str]):
    for path, value in parse_overrides(overrides):
        node = data
        for part in path[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"cannot set a key below '{part}', which is not a section", key=".".join(path))
            node = child
        node[path[-1]] = value
        logger.info(f"config override {'.'.join(path)} = {value!r}")
    return data


def parse_config(text, overrides: Sequence[str] = ()):
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"YAML parse error: {getattr(e, 'problem', e)}", line=line) from None
    if data is None:
        raise ConfigError("configuration is empty", line=1)
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping of sections", line=1)
    data = apply_overrides(data, overrides)
    return validate_config(data, text)


def load_config(path=None, overrides: Sequence[str] = ()):
    path = Path(path or default_config_path())
    if not path.exists():
        raise ConfigError(f"config file {path} not found")
    cfg = parse_config(path.read_text(), overrides)
    logger.info(f"loaded config {path}")
    return cfg


def serialize_config(cfg: ExperimentConfig):
    return yaml.safe_dump(cfg.model_dump(mode="python"), sort_keys=False)


def output_directory(cfg: ExperimentConfig, override=None):
    """--output beats MODULATION_OUTPUT beats output.directory."""
    return Path(override or os.getenv("MODULATION_OUTPUT") or cfg.output.directory)
