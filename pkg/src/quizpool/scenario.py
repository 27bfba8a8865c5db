"""Scenario files: ``{"config": ..., "population": ..., "simulation": ...}``.

Parsing is strict. Unknown keys are rejected and every failure names the
offending field, e.g. ``config.cp: must lie in (0,1]``.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Mapping

from .config import ConfigError, parse_config
from .simulator import Scenario, parse_population

SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    pass


def scenario_from_dict(data: Any) -> Scenario:
    if not isinstance(data, Mapping):
        raise ConfigError("scenario", "top level must be an object")
    extra = sorted(set(data) - {"config", "population", "simulation"})
    if extra:
        raise ConfigError(extra[0], "unknown field")
    for key in ("config", "population", "simulation"):
        if key not in data:
            raise ConfigError(key, "required")
    sim = data["simulation"]
    if not isinstance(sim, Mapping):
        raise ConfigError("simulation", "must be an object")
    extra = sorted(set(sim) - {"num_players", "seed", "trials"})
    if extra:
        raise ConfigError(f"simulation.{extra[0]}", "unknown field")
    if "num_players" not in sim:
        raise ConfigError("simulation.num_players", "required")
    return Scenario(
        config=parse_config(data["config"]),
        population=parse_population(data["population"]),
        num_players=sim["num_players"],
        seed=sim.get("seed", 0),
        trials=sim.get("trials", 1),
    )


def parse_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario file.

    Raises ``FileNotFoundError``, ``ScenarioError`` (bad JSON, with position)
    or ``ConfigError`` (constraint violation, with field path).
    """
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(data)


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def scenario_hash(scenario: Scenario) -> str:
    return hashlib.sha256(canonical_json(scenario.to_dict()).encode()).hexdigest()


def report_header(scenario: Scenario, seed: int) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "scenario_hash": scenario_hash(scenario),
        "seed": seed,
        "scenario": scenario.to_dict(),
    }
