"""Run configuration: a YAML file validated into pydantic models.

Physical quantities may be given as plain numbers (SI) or as strings with a
unit suffix, e.g. ``"547 nm"``, ``"130 us"``, ``"1.4 kHz"``, ``"86.909 u"``.
``"inf"`` is accepted wherever an infinite coherence length makes sense.
"""

from __future__ import annotations

import json
import re
import secrets
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, field_validator, model_validator

from .disorder import DisorderModel
from .lattice import ATOMIC_MASS_UNIT, DEFAULT_SPACING, RB87_MASS, LatticeParams

_UNITS = {
    "length": {"m": 1.0, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9},
    "frequency": {"hz": 1.0, "khz": 1e3, "mhz": 1e6},
    "mass": {"kg": 1.0, "u": ATOMIC_MASS_UNIT},
}
_QUANTITY = re.compile(r"^\s*([-+0-9.eE]+)\s*([a-zA-Zµ]*)\s*$")


def parse_quantity(value, kind: str) -> float:
    """Convert ``value`` (number or unit-suffixed string) to SI."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, str):
        raise ValueError(f"expected a number or a string with a {kind} unit, got {value!r}")
    if value.strip().lower() in ("inf", "+inf", "infinity"):
        return float("inf")  # "Infinity" is how config snapshots spell it
    match = _QUANTITY.match(value)
    if not match:
        raise ValueError(f"cannot parse {value!r} as a {kind}")
    number, unit = match.groups()
    if not unit:
        return float(number)
    table = _UNITS[kind]
    key = unit if unit in table else unit.lower()
    if key not in table:
        raise ValueError(f"unknown {kind} unit {unit!r}; use one of {sorted(table)}")
    return float(number) * table[key]


def _quantity(kind: str):
    return BeforeValidator(lambda v: v if v is None else parse_quantity(v, kind))


Length = Annotated[float, _quantity("length")]
Time = Annotated[float, _quantity("time")]
Frequency = Annotated[float, _quantity("frequency")]
Mass = Annotated[float, _quantity("mass")]
Sites = Annotated[float, BeforeValidator(lambda v: float(v) if isinstance(v, str) else v)]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", ser_json_inf_nan="strings")


class LatticeSection(_Section):
    spacing: Length = DEFAULT_SPACING
    mass: Mass = RB87_MASS
    depth: float = Field(5.0, gt=0)
    sigma: Optional[Length] = None
    wavelength: Optional[Length] = None

    @field_validator("spacing", "mass", "sigma", "wavelength")
    @classmethod
    def _positive(cls, v):
        if v is not None and not v > 0:
            raise ValueError("must be > 0")
        return v

    def params(self) -> LatticeParams:
        return LatticeParams(d=self.spacing, M=self.mass, s=self.depth, sigma=self.sigma, lambda_opt=self.wavelength)


class DisorderSection(_Section):
    model: Literal["coherent", "independent-uniform", "gaussian-random-walk"] = "coherent"
    epsilon: float = Field(0.0, ge=0)
    n_max: int = Field(1024, ge=1)

    def build(self) -> DisorderModel:
        return DisorderModel(self.model, self.epsilon)


class SweepSection(_Section):
    t_max: Time = 1e-3
    n_points: int = Field(51, ge=12)

    @field_validator("t_max")
    @classmethod
    def _positive(cls, v):
        if not v > 0:
            raise ValueError("must be > 0")
        return v


class ScheduleSection(_Section):
    kind: Literal["diffusive", "ballistic", "explicit"] = "diffusive"
    t_q: List[Time] = Field(default_factory=lambda: [1e-3, 2e-3, 5e-3, 10e-3, 20e-3, 50e-3, 100e-3, 150e-3])
    xi_coh: Optional[List[Sites]] = None

    @model_validator(mode="after")
    def _check(self):
        if len(self.t_q) < 3:
            raise ValueError("a quench schedule needs at least 3 t_q values")
        if any(not t > 0 for t in self.t_q):
            raise ValueError("t_q values must be > 0")
        if self.kind == "explicit":
            if self.xi_coh is None or len(self.xi_coh) != len(self.t_q):
                raise ValueError("explicit schedules need one xi_coh per t_q")
            if any(not x > 0 for x in self.xi_coh):
                raise ValueError("xi_coh values must be > 0 (use 'inf' for long-range order)")
        return self


class AnalysisSection(_Section):
    talbot_time: Optional[Time] = None  # period used for synthesis; theory value if omitted
    reference_decay: Time = 525e-6
    noise: float = Field(0.02, ge=0)  # 1-sigma noise as a fraction of the signal swing
    tunnelling_time: Time = 1.3e-3  # hbar / J
    chemical_potential: Frequency = 1.4e3  # mu / h
    schedule: ScheduleSection = Field(default_factory=ScheduleSection)


class OracleSection(_Section):
    grid_step: float = Field(1.0 / 32, gt=0)  # units of sigma
    padding: float = Field(12.0, gt=0)  # units of sigma
    n_configs: int = Field(10, ge=1)
    half_width: int = Field(10, ge=1)
    taus: List[float] = Field(default_factory=lambda: [0.0, 0.25, 0.5, 1.0])
    mc_taus: List[float] = Field(default_factory=lambda: [0.5, 1.0, 1.5, 2.0])
    mc_samples: int = Field(10_000, ge=2)
    mc_epsilon: float = Field(1.0, ge=0)
    n_duality: int = Field(20, ge=1)


class OutputSection(_Section):
    dir: Optional[str] = None
    format: Literal["csv", "csv+svg"] = "csv+svg"
    seed: Optional[int] = Field(None, ge=0, lt=2**64)


class RunConfig(_Section):
    lattice: LatticeSection = Field(default_factory=LatticeSection)
    disorder: DisorderSection = Field(default_factory=DisorderSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    analysis: AnalysisSection = Field(default_factory=AnalysisSection)
    oracle: OracleSection = Field(default_factory=OracleSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def _validate_domain(self):
        # run the module-level invariants before any computation
        self.lattice.params()
        self.disorder.build()
        return self

    def with_seed(self) -> "RunConfig":
        """Copy with a seed filled in (random if absent)."""
        if self.output.seed is not None:
            return self
        output = self.output.model_copy(update={"seed": secrets.randbits(63)})
        return self.model_copy(update={"output": output})

    def snapshot(self) -> dict:
        """Plain-JSON view; infinities become the string "Infinity"."""
        return json.loads(self.model_dump_json())


def load_config(path: Optional[Union[str, Path]]) -> RunConfig:
    """Read and validate a YAML config; ``None`` gives the defaults."""
    if path is None:
        return RunConfig()
    text = Path(path).read_text(encoding="utf-8")
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: top level must be a mapping")
    return RunConfig.model_validate(data)


def format_validation_error(exc) -> str:
    """One line per problem, prefixed with the dotted field path."""
    lines = []
    for err in exc.errors():
        where = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{where}: {err['msg']}")
    return "\n".join(lines)
