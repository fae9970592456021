"""INI-style scenario configuration.

Sections mirror the configuration dataclasses and keys mirror their field
names::

    [vessel]
    mass = 25, 30, 6          ; diagonal, or 9 values row-major
    damping = 8, 10, 4
    t_max = 20

    [dock]
    center = 10, -5
    orientation = 0.0         ; radians

    [mppi]
    K = 512
    sigma = 4, 4, 4, 4

    [scenario]
    scenario_id = 1
    seeds = 0, 1, 2
    initial_state = 2, -5, 0  ; x, y, psi[, u, v, r]

Unknown sections and keys raise :class:`ConfigurationError`; omitted keys
keep their defaults.
"""

from __future__ import annotations

import configparser
import dataclasses
from pathlib import Path

import numpy as np

from .cost import CostWeights
from .dynamics import ConfigurationError, VesselParams, VesselState
from .mppi import MppiConfig
from .perception.pipeline import PerceptionConfig
from .scenario import DockSpec, LidarConfig, ScenarioConfig, SuccessCriteria

SECTIONS = ("vessel", "dock", "lidar", "perception", "mppi", "cost", "scenario")

_VESSEL_KEYS = {"mass": "M", "damping": "N", "length": "length", "width": "width", "t_max": "t_max",
                "allocation": "B"}
_SUCCESS_KEYS = {f.name for f in dataclasses.fields(SuccessCriteria)}
_SCENARIO_KEYS = {"scenario_id", "initial_state", "entrance_latch", "time_limit", "seeds"} | _SUCCESS_KEYS


def _floats(text: str, name: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"{name}: expected comma-separated numbers, got {text!r}") from exc


def _coerce(text: str, default, name: str):
    """Parse ``text`` into the type of the field's default value."""
    try:
        if isinstance(default, bool):
            return configparser.RawConfigParser.BOOLEAN_STATES[text.strip().lower()]
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, str):
            return text.strip()
    except (KeyError, ValueError) as exc:
        raise ConfigurationError(f"{name}: cannot parse {text!r}") from exc
    if isinstance(default, tuple):
        vals = _floats(text, name)
        if default and all(isinstance(v, int) for v in default):
            return tuple(int(v) for v in vals)
        return tuple(vals)
    raise ConfigurationError(f"{name}: unsupported field type")


def _matrix(text: str, name: str, shape: tuple[int, int]) -> np.ndarray:
    vals = _floats(text, name)
    if shape == (3, 3) and len(vals) == 3:
        return np.diag(vals)
    if len(vals) != shape[0] * shape[1]:
        raise ConfigurationError(f"{name}: expected {shape[0] * shape[1]} values, got {len(vals)}")
    return np.array(vals).reshape(shape)


def _apply(obj, items: dict[str, str], section: str):
    """Return ``obj`` with the dataclass fields named in ``items`` replaced."""
    names = {f.name for f in dataclasses.fields(obj)}
    changes = {}
    for key, text in items.items():
        if key not in names:
            raise ConfigurationError(f"unknown key {key!r} in [{section}]")
        changes[key] = _coerce(text, getattr(obj, key), f"{section}.{key}")
    try:
        return dataclasses.replace(obj, **changes)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"[{section}]: {exc}") from exc


def _vessel(items: dict[str, str]) -> VesselParams:
    kwargs = {}
    for key, text in items.items():
        if key not in _VESSEL_KEYS:
            raise ConfigurationError(f"unknown key {key!r} in [vessel]")
        field = _VESSEL_KEYS[key]
        if field in ("M", "N"):
            kwargs[field] = _matrix(text, f"vessel.{key}", (3, 3))
        elif field == "B":
            kwargs[field] = _matrix(text, f"vessel.{key}", (3, 4))
        else:
            kwargs[field] = _coerce(text, 0.0, f"vessel.{key}")
    return VesselParams(**kwargs)


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    """Build a :class:`ScenarioConfig` from INI text."""
    # case-sensitive keys: the sample count is K, not k
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigurationError(f"{source}: {exc}") from exc
    unknown = [s for s in parser.sections() if s not in SECTIONS]
    if unknown:
        raise ConfigurationError(f"unknown section(s) {', '.join(unknown)} in {source}")
    sec = {s: dict(parser.items(s)) if parser.has_section(s) else {} for s in SECTIONS}

    vessel = _vessel(sec["vessel"])
    dock_items = dict(sec["dock"])
    dock = DockSpec()
    if "center" in dock_items:
        c = _floats(dock_items.pop("center"), "dock.center")
        if len(c) != 2:
            raise ConfigurationError("dock.center: expected two values")
        dock = dataclasses.replace(dock, center=(c[0], c[1]))
    dock = _apply(dock, dock_items, "dock")
    if min(dock.width, dock.depth) <= 0 or dock.wall_thickness <= 0:
        raise ConfigurationError("dock dimensions must be positive")

    perception_items = dict(sec["perception"])
    perception = _apply(PerceptionConfig(), perception_items, "perception")
    if "berth_depth" not in perception_items:
        # the berth depth prior follows the configured dock unless overridden
        perception = dataclasses.replace(perception, berth_depth=dock.depth)

    scen = dict(sec["scenario"])
    for key in scen:
        if key not in _SCENARIO_KEYS:
            raise ConfigurationError(f"unknown key {key!r} in [scenario]")
    success = _apply(SuccessCriteria(), {k: v for k, v in scen.items() if k in _SUCCESS_KEYS}, "scenario")
    base = ScenarioConfig()
    kwargs = {}
    for key in ("scenario_id", "entrance_latch", "time_limit", "seeds"):
        if key in scen:
            kwargs[key] = _coerce(scen[key], getattr(base, key), f"scenario.{key}")
    if "initial_state" in scen:
        vals = _floats(scen["initial_state"], "scenario.initial_state")
        if len(vals) not in (3, 6):
            raise ConfigurationError("scenario.initial_state: expected x, y, psi[, u, v, r]")
        try:
            kwargs["initial_state"] = VesselState(*vals)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc

    try:
        return ScenarioConfig(
            dock=dock,
            vessel=vessel,
            lidar=_apply(LidarConfig(), sec["lidar"], "lidar"),
            perception=perception,
            mppi=_apply(MppiConfig(), sec["mppi"], "mppi"),
            cost=_apply(base.cost, sec["cost"], "cost"),
            success=success,
            **kwargs,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(str(exc)) from exc


def load_config(path) -> ScenarioConfig:
    """Read a configuration file; I/O problems surface as ``OSError``."""
    p = Path(path)
    return parse_config(p.read_text(), str(p))
