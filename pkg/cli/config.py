# file: cli/config.py

"""
Experiment configuration: a frozen dataclass validated before any run and round-tripped
through JSON.
"""

import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, Optional

from clocks.minmax import MinMaxClock
from clocks.sap import GrowthFunction, SapClock, SapConfig, SapFixedClock
from data_io import read_json, write_json
from errors import ConfigError, InvalidInputError

logger = logging.getLogger(__name__)

ALGORITHMS = ("minmax", "sap", "sap-fixed")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment.

    ``algorithm`` and exactly one of ``scenario``/``schedule`` are required. ``init`` is
    ``preset`` (the scenario's worst-case states, else seeded random), ``random``, or a schedule
    file whose init section matches the algorithm. ``horizon`` defaults to ``10 n P max(M, 1)``.
    """

    algorithm: str
    scenario: Optional[str] = None
    schedule: Optional[str] = None
    scenario_params: Dict[str, object] = field(default_factory=dict)
    period: int = 2
    growth: str = "successor"
    factor: int = 1
    init: str = "preset"
    horizon: Optional[int] = None
    seed: int = 0
    reps: int = 1
    out: Optional[str] = None
    verbosity: int = 1
    early_stop: bool = True
    delta_cap: int = 8

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if (self.scenario is None) == (self.schedule is None):
            raise ConfigError("exactly one of scenario and schedule must be given")
        for name in ("period", "factor", "reps", "delta_cap"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.horizon is not None and self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")
        if self.verbosity not in (0, 1, 2):
            raise ConfigError(f"verbosity must be 0, 1 or 2, got {self.verbosity}")
        try:
            GrowthFunction.parse(self.growth)
        except InvalidInputError as e:
            raise ConfigError(str(e))

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "ExperimentConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown config keys {unknown}")
        if "algorithm" not in data:
            raise ConfigError("config needs an 'algorithm'")
        for key, value in data.items():
            _check_type(key, value)
        return cls(**data)

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)

    def save(self, file_path: str) -> None:
        write_json(self.to_dict(), file_path)
        logger.info(f"saved config to {file_path}")

    @classmethod
    def load(cls, file_path: str) -> "ExperimentConfig":
        data = read_json(file_path)
        if not isinstance(data, dict):
            raise ConfigError(f"{file_path}: config must be a JSON object")
        return cls.from_dict(data)

    def build_algorithm(self):
        if self.algorithm == "minmax":
            return MinMaxClock()
        if self.algorithm == "sap":
            return SapClock(SapConfig(self.period, GrowthFunction.parse(self.growth)))
        return SapFixedClock(self.period, self.factor)

    def default_horizon(self, n: int) -> int:
        return self.horizon or 10 * n * self.period * max(self.factor, 1)


_TYPES = {
    "algorithm": str, "scenario": (str, type(None)), "schedule": (str, type(None)), "scenario_params": dict,
    "period": int, "growth": str, "factor": int, "init": str, "horizon": (int, type(None)), "seed": int,
    "reps": int, "out": (str, type(None)), "verbosity": int, "early_stop": bool, "delta_cap": int,
}


def _check_type(key: str, value) -> None:
    expected = _TYPES[key]
    if isinstance(value, bool) and expected is int:
        raise ConfigError(f"config key {key!r} must be an integer, got {value!r}")
    if not isinstance(value, expected):
        raise ConfigError(f"config key {key!r} has type {type(value).__name__}")
