"""Declarative experiment configs (JSON) for the command-line runner.

A config names the game (builtin function families or truth-table files plus
the four kernel entries), the initial state, integrator settings, the
analyses to run and their thresholds, and optionally a sweep grid.  See the
README for the full schema and the bundled files under ``configs/``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .boolfn import BooleanFunction, load_truth_table, make_builtin, parse_truth_table
from .dynamics import FIELD_KINDS, IntegratorConfig
from .errors import InputError
from .game import PayoffKernel, TeamGame

ANALYSIS_KINDS = ("classify", "period", "hamiltonian", "averages", "ce", "chasing")


@dataclass(frozen=True)
class AnalysisSettings:
    """Knobs and acceptance thresholds for the analyze pipeline."""

    horizon_periods: int = 50
    samples_per_period: int = 1000
    drift_periods: int = 1
    drift_points: int = 400
    rate_profile_time: float = 60.0
    return_tol: float = 1e-6
    drift_tol: float = 1e-6
    avg_tol: float = 1e-3
    regret_tol: float = 1e-6
    ce_tol: float = 1e-4
    fixed_tol: float = 1e-9
    chasing_guard: float = 1e-9

    def __post_init__(self):
        for name in ("horizon_periods", "samples_per_period", "drift_periods", "drift_points"):
            if getattr(self, name) < 1:
                raise InputError(f"{name} must be at least 1")
        for name in (
            "rate_profile_time",
            "return_tol",
            "drift_tol",
            "avg_tol",
            "regret_tol",
            "ce_tol",
            "fixed_tol",
            "chasing_guard",
        ):
            if getattr(self, name) <= 0:
                raise InputError(f"{name} must be positive")


@dataclass(frozen=True)
class SweepSettings:
    """Random interior grid of initial states."""

    count: int = 100
    seed: int = 0
    margin: float = 0.05
    min_periodic_fraction: float = 0.99

    def __post_init__(self):
        if self.count < 1:
            raise InputError("sweep count must be at least 1")
        if not 0.0 <= self.margin < 0.5:
            raise InputError("sweep margin must lie in [0, 0.5)")
        if not 0.0 <= self.min_periodic_fraction <= 1.0:
            raise InputError("min_periodic_fraction must lie in [0, 1]")


@dataclass(frozen=True)
class ExperimentConfig:
    label: str
    game: TeamGame
    initial_state: np.ndarray
    integrator: IntegratorConfig
    field_kind: str = "rescaled"
    analyses: tuple[str, ...] = ()
    analysis: AnalysisSettings = field(default_factory=AnalysisSettings)
    sweep: SweepSettings | None = None


def _require_mapping(obj, what: str) -> dict:
    if not isinstance(obj, dict):
        raise InputError(f"{what} must be a JSON object, got {type(obj).__name__}")
    return obj


def _reject_unknown(obj: dict, known, what: str) -> None:
    unknown = set(obj) - set(known)
    if unknown:
        raise InputError(f"unknown keys in {what}: {sorted(unknown)}")


def _build_function(spec, base_dir: Path, which: str) -> BooleanFunction:
    spec = _require_mapping(spec, f"game.{which}")
    _reject_unknown(spec, ("builtin", "arity", "table_file", "table"), f"game.{which}")
    sources = [key for key in ("builtin", "table_file", "table") if key in spec]
    if len(sources) != 1:
        raise InputError(
            f"game.{which} needs exactly one of 'builtin', 'table_file', 'table'"
        )
    if "builtin" in spec:
        if "arity" not in spec:
            raise InputError(f"game.{which}: builtin requires 'arity'")
        return make_builtin(spec["builtin"], int(spec["arity"]))
    if "table_file" in spec:
        path = Path(spec["table_file"])
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise InputError(f"game.{which}: truth-table file not found: {path}")
        return load_truth_table(path)
    bits = str(spec["table"])
    arity = max(1, (len(bits) - 1).bit_length())
    return parse_truth_table(f"{arity} {bits}")


def _build_kernel(spec) -> PayoffKernel:
    if isinstance(spec, (list, tuple)):
        if len(spec) != 4:
            raise InputError("kernel list must have exactly four entries [a, b, c, d]")
        return PayoffKernel(*[float(v) for v in spec])
    spec = _require_mapping(spec, "game.kernel")
    _reject_unknown(spec, ("a", "b", "c", "d"), "game.kernel")
    try:
        return PayoffKernel(
            float(spec["a"]), float(spec["b"]), float(spec["c"]), float(spec["d"])
        )
    except KeyError as exc:
        raise InputError(f"game.kernel missing entry {exc}") from exc


def _build_integrator(spec) -> IntegratorConfig:
    if spec is None:
        return IntegratorConfig()
    spec = _require_mapping(spec, "integrator")
    known = {f.name for f in fields(IntegratorConfig)}
    _reject_unknown(spec, known, "integrator")
    return IntegratorConfig(**spec)


def _build_settings(cls, spec, what: str):
    if spec is None:
        return cls()
    spec = _require_mapping(spec, what)
    known = {f.name for f in fields(cls)}
    _reject_unknown(spec, known, what)
    return cls(**spec)


def parse_config(data: dict, base_dir: Path, label: str = "experiment") -> ExperimentConfig:
    data = _require_mapping(data, "config")
    _reject_unknown(
        data,
        ("label", "game", "initial_state", "integrator", "field", "analyses", "analysis", "sweep"),
        "config",
    )
    if "game" not in data:
        raise InputError("config requires a 'game' section")
    game_spec = _require_mapping(data["game"], "game")
    _reject_unknown(game_spec, ("f", "g", "kernel"), "game")
    for key in ("f", "g", "kernel"):
        if key not in game_spec:
            raise InputError(f"game requires '{key}'")
    game = TeamGame(
        _build_function(game_spec["f"], base_dir, "f"),
        _build_function(game_spec["g"], base_dir, "g"),
        _build_kernel(game_spec["kernel"]),
    )
    if "initial_state" not in data:
        raise InputError("config requires 'initial_state'")
    state = np.asarray(data["initial_state"], dtype=np.float64)
    if state.shape != (game.n + game.m,):
        raise InputError(
            f"initial_state must have {game.n + game.m} coordinates "
            f"(n={game.n}, m={game.m}), got shape {state.shape}"
        )
    if np.any(state < 0.0) or np.any(state > 1.0):
        raise InputError("initial_state coordinates must lie in [0, 1]")
    field_kind = data.get("field", "rescaled")
    if field_kind not in FIELD_KINDS:
        raise InputError(f"field must be one of {FIELD_KINDS}, got {field_kind!r}")
    analyses = tuple(data.get("analyses", ()))
    for kind in analyses:
        if kind not in ANALYSIS_KINDS:
            raise InputError(f"unknown analysis {kind!r}; choose from {ANALYSIS_KINDS}")
    return ExperimentConfig(
        label=str(data.get("label", label)),
        game=game,
        initial_state=state,
        integrator=_build_integrator(data.get("integrator")),
        field_kind=field_kind,
        analyses=analyses,
        analysis=_build_settings(AnalysisSettings, data.get("analysis"), "analysis"),
        sweep=(
            _build_settings(SweepSettings, data["sweep"], "sweep")
            if "sweep" in data
            else None
        ),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise InputError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(data, path.parent, label=path.stem)
