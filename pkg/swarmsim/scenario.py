# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
"""
Scenario configuration: dataclasses, JSON loading with exhaustive validation, presets.

A scenario file is one JSON object. Required keys: name, n_agents, controller
("linear" or "wmsr"), f, dt, steps, seed. Everything else has a default; the
nested sections (comm, gains, connectivity, velocity, power_iteration, metrics)
take the fields of the matching dataclass. Unknown keys are errors.
"""
import json
import logging
import math
import os
import typing
from dataclasses import dataclass
from dataclasses import field
from dataclasses import fields
from dataclasses import is_dataclass
from dataclasses import replace
from enum import Enum
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Union

import numpy as np

from .adversary import AdversaryBehavior
from .adversary import PlacementStrategy
from .consensus import ConsensusGains
from .control import ConnectivityControlParams
from .exceptions import ScenarioConfigError
from .graph import CommParams
from .graph import DEFAULT_EDGE_THRESHOLD
from .spectral import PowerIterationParams

log = logging.getLogger("swarmsim.scenario")

PRESET_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "presets")

REQUIRED_FIELDS = ("name", "n_agents", "controller", "f", "dt", "steps", "seed")


class ControllerKind(str, Enum):
    LINEAR = "linear"
    WMSR = "wmsr"


class EstimatorMode(str, Enum):
    EXACT = "exact"
    DISTRIBUTED = "distributed"


@dataclass
class VelocitySchedule:
    """ Reference velocity: constant speed, heading turning linearly over ``turn_duration`` seconds """
    speed: float = 4.0
    # degrees from +x, counter-clockwise
    start_heading: float = 90.0
    turn_angle: float = 0.0
    turn_duration: float = 0.0

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError(f"Expected speed >= 0, got {self.speed}")
        if self.turn_duration < 0:
            raise ValueError(f"Expected turn_duration >= 0, got {self.turn_duration}")

    def heading(self, t: float) -> float:
        if self.turn_duration > 0:
            progress = min(max(t / self.turn_duration, 0.0), 1.0)
        else:
            progress = 1.0
        return math.radians(self.start_heading + self.turn_angle * progress)

    def at(self, t: float, dimension: int = 2) -> np.ndarray:
        v = np.zeros(dimension)
        heading = self.heading(t)
        v[0] = self.speed * math.cos(heading)
        v[1] = self.speed * math.sin(heading)
        # exact zeros instead of 1e-16 leftovers keep outputs tidy
        v[np.abs(v) < 1e-12 * max(self.speed, 1.0)] = 0.0
        return v


@dataclass
class AdversarySpec:
    behavior: AdversaryBehavior
    placement: PlacementStrategy = PlacementStrategy.RANDOM
    # random placement only; falls back to the scenario seed
    seed: Optional[int] = None

    def __post_init__(self):
        self.placement = PlacementStrategy(self.placement)


@dataclass
class MetricsParams:
    transient_fraction: float = 0.2
    hull_tolerance: float = 1e-2
    # tail of the run used for the settled lambda2 rate
    settle_fraction: float = 0.1

    def __post_init__(self):
        if not 0 <= self.transient_fraction < 1:
            raise ValueError(f"Expected transient_fraction in [0, 1), got {self.transient_fraction}")
        if not 0 < self.settle_fraction <= 1:
            raise ValueError(f"Expected settle_fraction in (0, 1], got {self.settle_fraction}")
        if self.hull_tolerance < 0:
            raise ValueError(f"Expected hull_tolerance >= 0, got {self.hull_tolerance}")


@dataclass
class ScenarioConfig:
    name: str
    n_agents: int
    controller: ControllerKind
    f: int
    dt: float
    steps: int
    seed: int
    description: str = ""
    formation_radius: float = 15.0
    initial_square: float = 60.0
    edge_threshold: float = DEFAULT_EDGE_THRESHOLD
    comm: CommParams = field(default_factory=CommParams)
    # gains.f_param is ignored; f above is authoritative
    gains: ConsensusGains = field(default_factory=ConsensusGains)
    connectivity: ConnectivityControlParams = field(default_factory=ConnectivityControlParams)
    velocity: VelocitySchedule = field(default_factory=VelocitySchedule)
    adversaries: List[AdversarySpec] = field(default_factory=list)
    estimator: EstimatorMode = EstimatorMode.EXACT
    power_iteration: PowerIterationParams = field(default_factory=PowerIterationParams)
    estimator_period: int = 50
    metrics: MetricsParams = field(default_factory=MetricsParams)
    output_dir: Optional[str] = None

    def __post_init__(self):
        self.controller = ControllerKind(self.controller)
        self.estimator = EstimatorMode(self.estimator)
        problems: List[str] = []
        _validate({f.name: getattr(self, f.name) for f in fields(self)}, problems)
        if problems:
            raise ScenarioConfigError(problems)

    def consensus_gains(self) -> ConsensusGains:
        """ Gains with the W-MSR parameter the controller actually runs with """
        return replace(self.gains, f_param=self.f if self.controller is ControllerKind.WMSR else 0)


def _validate(values: Dict[str, Any], errors: List[str]) -> None:
    """ Range and cross-field checks on top-level scenario values; absent keys are skipped """
    def check(key, ok, message):
        if key in values and not ok(values[key]):
            errors.append(f"{key}: {message.format(values[key])}")

    check("name", bool, "expected a nonempty string")
    check("n_agents", lambda n: n >= 3, "expected >= 3 for a polygon formation, got {}")
    check("f", lambda f: f >= 0, "expected >= 0, got {}")
    check("dt", lambda dt: dt > 0, "expected > 0, got {}")
    check("steps", lambda steps: steps >= 1, "expected >= 1, got {}")
    check("formation_radius", lambda r: r > 0, "expected > 0, got {}")
    check("initial_square", lambda side: side > 0, "expected > 0, got {}")
    check("edge_threshold", lambda th: 0 < th <= 1, "expected in (0, 1], got {}")
    check("estimator_period", lambda p: p >= 1, "expected >= 1, got {}")
    if "n_agents" not in values:
        return
    n = values["n_agents"]
    if "f" in values and values["f"] > n:
        errors.append(f"f: expected <= n_agents ({n}), got {values['f']}")
    if "adversaries" in values and len(values["adversaries"]) >= n:
        errors.append(f"adversaries: {len(values['adversaries'])} entries leave no normal agent among {n}")


_SECTIONS = {
    "comm": CommParams,
    "gains": ConsensusGains,
    "connectivity": ConnectivityControlParams,
    "velocity": VelocitySchedule,
    "power_iteration": PowerIterationParams,
    "metrics": MetricsParams,
}
# not settable from JSON
_HIDDEN = {ConsensusGains: {"f_param"}}


def _unwrap_optional(hint):
    if typing.get_origin(hint) is Union:
        args = [a for a in typing.get_args(hint) if a is not type(None)]
        if len(args) == 1:
            return args[0], True
    return hint, False


def _coerce(value: Any, hint, path: str, errors: List[str]):
    hint, optional = _unwrap_optional(hint)
    if value is None:
        if optional:
            return None
        errors.append(f"{path}: must not be null")
        return None
    if isinstance(hint, type) and issubclass(hint, Enum):
        try:
            return hint(value)
        except ValueError:
            errors.append(f"{path}: expected one of {[m.value for m in hint]}, got {value!r}")
            return None
    if hint is bool:
        if not isinstance(value, bool):
            errors.append(f"{path}: expected a boolean, got {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            errors.append(f"{path}: expected an integer, got {value!r}")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"{path}: expected a number, got {value!r}")
            return value
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            errors.append(f"{path}: expected a string, got {value!r}")
        return value
    return value


def _build(cls, data: Any, path: str, errors: List[str]):
    if not isinstance(data, dict):
        errors.append(f"{path}: expected an object, got {type(data).__name__}")
        return None
    hints = typing.get_type_hints(cls)
    allowed = {f.name for f in fields(cls) if f.init} - _HIDDEN.get(cls, set())
    for key in data:
        if key not in allowed:
            errors.append(f"{path}.{key}: unknown field")
    before = len(errors)
    kwargs = {k: _coerce(data[k], hints[k], f"{path}.{k}", errors) for k in allowed if k in data}
    if len(errors) > before:
        return None
    try:
        return cls(**kwargs)
    except ValueError as e:
        errors.append(f"{path}: {e}")
        return None


def _build_adversary(data: Any, path: str, errors: List[str]) -> Optional[AdversarySpec]:
    if not isinstance(data, dict):
        errors.append(f"{path}: expected an object, got {type(data).__name__}")
        return None
    for key in data:
        if key not in ("behavior", "placement", "seed"):
            errors.append(f"{path}.{key}: unknown field")
    behavior = None
    if "behavior" not in data:
        errors.append(f"{path}.behavior: missing required field")
    elif not isinstance(data["behavior"], dict):
        errors.append(f"{path}.behavior: expected an object")
    else:
        try:
            behavior = AdversaryBehavior.from_dict(data["behavior"])
        except ValueError as e:
            errors.append(f"{path}.behavior: {e}")
    before = len(errors)
    placement = _coerce(data.get("placement", "random"), PlacementStrategy, f"{path}.placement", errors)
    seed = _coerce(data.get("seed"), Optional[int], f"{path}.seed", errors)
    if behavior is None or len(errors) > before:
        return None
    return AdversarySpec(behavior=behavior, placement=placement, seed=seed)


def config_from_dict(data: Any) -> ScenarioConfig:
    """ Validate a parsed scenario; every problem found is reported in one ScenarioConfigError """
    if not isinstance(data, dict):
        raise ScenarioConfigError([f"expected a JSON object at top level, got {type(data).__name__}"])
    errors: List[str] = []
    hints = typing.get_type_hints(ScenarioConfig)
    allowed = {f.name for f in fields(ScenarioConfig)}
    for key in data:
        if key not in allowed:
            errors.append(f"{key}: unknown field")
    for key in REQUIRED_FIELDS:
        if key not in data:
            errors.append(f"{key}: missing required field")

    kwargs: Dict[str, Any] = {}
    # top-level values that parsed cleanly, range-checked even when other keys failed
    parsed: Dict[str, Any] = {}
    for key in allowed & set(data):
        before = len(errors)
        if key in _SECTIONS:
            kwargs[key] = _build(_SECTIONS[key], data[key], key, errors)
        elif key == "adversaries":
            if not isinstance(data[key], list):
                errors.append("adversaries: expected a list")
            else:
                kwargs[key] = [_build_adversary(a, f"adversaries[{k}]", errors) for k, a in enumerate(data[key])]
        else:
            kwargs[key] = _coerce(data[key], hints[key], key, errors)
        if len(errors) == before and key in kwargs:
            parsed[key] = kwargs[key]
    if errors:
        _validate(parsed, errors)
        raise ScenarioConfigError(errors)
    try:
        return ScenarioConfig(**kwargs)
    except ScenarioConfigError:
        raise
    except (ValueError, TypeError) as e:
        raise ScenarioConfigError([str(e)])


def _plain(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, AdversaryBehavior):
        return value.to_dict()
    if is_dataclass(value):
        return {
            f.name: _plain(getattr(value, f.name))
            for f in fields(value) if f.name not in _HIDDEN.get(type(value), set())
        }
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def config_to_dict(config: ScenarioConfig) -> Dict[str, Any]:
    return _plain(config)


def load_config(path: Union[str, os.PathLike]) -> ScenarioConfig:
    with open(path, "r") as f:
        text = f.read()
    if not text.strip():
        data = {}
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ScenarioConfigError([f"{os.fspath(path)}: invalid JSON ({e})"])
    config = config_from_dict(data)
    log.debug("Loaded scenario %r from %s", config.name, path)
    return config


def write_config(config: ScenarioConfig, path: Union[str, os.PathLike]) -> None:
    with open(path, "w") as f:
        json.dump(config_to_dict(config), f, indent=2)
        f.write("\n")


def list_presets() -> List[str]:
    return sorted(f[:-5] for f in os.listdir(PRESET_DIR) if f.endswith(".json"))


def load_preset(name: str) -> ScenarioConfig:
    if name not in list_presets():
        raise ScenarioConfigError([f"unknown preset {name!r}; available: {', '.join(list_presets())}"])
    return load_config(os.path.join(PRESET_DIR, f"{name}.json"))
