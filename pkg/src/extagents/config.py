"""Run configuration: defaults, YAML config files and command-line overrides.

Values are resolved in three layers, later ones winning: built-in defaults,
the config file, then explicit overrides.  Keys use the experiment
vocabulary (``input_length``, ``chunk_size``, ``max_timesteps``, ...).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Literal, Mapping

import yaml

from .backend.config import BackendConfig, RoleBackends
from .backend.cost import GPT4O_MINI, CostModel
from .backend.templates import TASKS
from .errors import ConfigError
from .knowledge import TokenCounter, format_token_count, parse_token_count
from .sync import RANKING_MODES, RankingMode, SyncOptions

Method = Literal["extagents", "direct", "chain_of_agents", "llm_mapreduce"]
METHODS = ("extagents", "direct", "chain_of_agents", "llm_mapreduce")

# the input-length grid, 8k to 1024k
DEFAULT_GRID = tuple(8 * 1024 * 2 ** i for i in range(8))


@dataclass(frozen=True)
class BaselineConfig:
    expected_message_len: int = 500
    group_fanin_cap: int = 16

    def __post_init__(self) -> None:
        if self.expected_message_len <= 0:
            raise ConfigError("expected_message_len must be > 0", field="baseline.expected_message_len")
        if self.group_fanin_cap < 2:
            raise ConfigError("group_fanin_cap must be >= 2", field="baseline.group_fanin_cap")


@dataclass(frozen=True)
class RunConfig:
    method: Method = "extagents"
    input_budget: int = 128 * 1024
    chunk_size: int = 8 * 1024
    T: int = 5
    S: int = 5
    interleaved: bool = False
    ranking_mode: RankingMode = "llm_rated"
    role_backends: RoleBackends = field(default_factory=RoleBackends)
    seed: int = 0
    language: Literal["en", "zh"] = "en"
    task: str = "infbench"
    schedule_first_exponent: int = 0
    accumulate_every_round: bool = False
    exclusion: bool = False
    exclusion_patience: int = 2
    workers: int = 8
    cost_model: CostModel = GPT4O_MINI
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    templates_dir: str | None = None
    chars_per_token: Fraction | None = None

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {', '.join(METHODS)}",
                              field="method")
        if self.input_budget <= 0:
            raise ConfigError("input_length must be > 0", field="input_length")
        if self.chunk_size <= 0:
            raise ConfigError("chunk_size must be > 0", field="chunk_size")
        if self.chunk_size >= self.role_backends.seeking.max_context:
            raise ConfigError("chunk_size must be < max_context", field="chunk_size")
        if self.T < 1:
            raise ConfigError("max_timesteps must be >= 1", field="max_timesteps")
        if self.S < 1:
            raise ConfigError("schedule_cap must be >= 1", field="schedule_cap")
        if self.ranking_mode not in RANKING_MODES:
            raise ConfigError(f"unknown ranking mode {self.ranking_mode!r}", field="ranking_mode")
        if self.interleaved and self.ranking_mode != "retrieval_priority":
            raise ConfigError("the interleaved pipeline needs ranking_mode retrieval_priority",
                              field="interleaved")
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}", field="task")
        if self.language not in ("en", "zh"):
            raise ConfigError(f"unknown language {self.language!r}", field="language")
        if self.schedule_first_exponent not in (0, 1):
            raise ConfigError("schedule_first_exponent must be 0 or 1", field="schedule_first_exponent")
        if self.exclusion_patience < 1:
            raise ConfigError("exclusion_patience must be >= 1", field="exclusion_patience")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1", field="workers")

    @property
    def counter(self) -> TokenCounter:
        return TokenCounter(chars_per_token=self.chars_per_token)

    @property
    def sync_options(self) -> SyncOptions:
        return SyncOptions(self.ranking_mode, self.exclusion, self.exclusion_patience)

    def with_changes(self, **changes: Any) -> RunConfig:
        return replace(self, **changes)

    def to_record(self) -> dict[str, Any]:
        """Config-file shaped mapping; ``from_mapping(to_record())`` round-trips."""
        return {
            "method": self.method,
            "input_length": format_token_count(self.input_budget),
            "chunk_size": format_token_count(self.chunk_size),
            "max_timesteps": self.T,
            "schedule_cap": self.S,
            "interleaved": self.interleaved,
            "ranking_mode": self.ranking_mode,
            "backends": self.role_backends.to_record(),
            "seed": self.seed,
            "language": self.language,
            "task": self.task,
            "schedule_first_exponent": self.schedule_first_exponent,
            "accumulate_every_round": self.accumulate_every_round,
            "exclusion": self.exclusion,
            "exclusion_patience": self.exclusion_patience,
            "workers": self.workers,
            "cost": self.cost_model.to_record(),
            "baseline": {"expected_message_len": self.baseline.expected_message_len,
                         "group_fanin_cap": self.baseline.group_fanin_cap},
            "templates_dir": self.templates_dir,
            "chars_per_token": str(self.chars_per_token) if self.chars_per_token is not None else None,
        }

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> RunConfig:
        values = dict(data)
        unknown = set(values) - _FILE_KEYS
        if unknown:
            name = sorted(unknown)[0]
            raise ConfigError(f"unknown config field {name!r}", field=name)
        kwargs: dict[str, Any] = {}
        try:
            for key, attr in _RENAMES.items():
                if key in values:
                    kwargs[attr] = values[key]
            for key in ("input_budget", "chunk_size"):
                if key in kwargs:
                    kwargs[key] = parse_token_count(kwargs[key])
            for key in ("T", "S", "seed", "schedule_first_exponent", "exclusion_patience", "workers"):
                if key in kwargs:
                    kwargs[key] = _as_int(kwargs[key], key)
            for key in ("interleaved", "accumulate_every_round", "exclusion"):
                if key in kwargs:
                    kwargs[key] = _as_bool(kwargs[key], key)
            if values.get("backends") is not None:
                kwargs["role_backends"] = _role_backends(values["backends"])
            if values.get("cost") is not None:
                kwargs["cost_model"] = CostModel.from_record(values["cost"])
            if values.get("baseline") is not None:
                baseline = dict(values["baseline"])
                if "expected_message_len" in baseline:
                    baseline["expected_message_len"] = parse_token_count(baseline["expected_message_len"])
                kwargs["baseline"] = BaselineConfig(**baseline)
            if values.get("chars_per_token") is not None:
                kwargs["chars_per_token"] = Fraction(str(values["chars_per_token"]))
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config value: {exc}") from exc
        return cls(**kwargs)


_RENAMES = {
    "method": "method",
    "input_length": "input_budget",
    "chunk_size": "chunk_size",
    "max_timesteps": "T",
    "schedule_cap": "S",
    "interleaved": "interleaved",
    "ranking_mode": "ranking_mode",
    "seed": "seed",
    "language": "language",
    "task": "task",
    "schedule_first_exponent": "schedule_first_exponent",
    "accumulate_every_round": "accumulate_every_round",
    "exclusion": "exclusion",
    "exclusion_patience": "exclusion_patience",
    "workers": "workers",
    "templates_dir": "templates_dir",
}
_FILE_KEYS = set(_RENAMES) | {"backends", "cost", "baseline", "chars_per_token"}
_ROLES = ("seeking", "reasoning", "rating")


def _as_int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ConfigError(f"{name} must be an integer", field=name)
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{name} must be an integer", field=name) from None


def _as_bool(value: Any, name: str) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ("true", "yes", "1", "false", "no", "0"):
        return value.lower() in ("true", "yes", "1")
    raise ConfigError(f"{name} must be a boolean", field=name)


def _role_backends(data: Any) -> RoleBackends:
    """``backends`` may set shared fields at top level and per-role fields under role keys."""
    if not isinstance(data, Mapping):
        raise ConfigError("backends must be a mapping", field="backends")
    shared = {k: v for k, v in data.items() if k not in _ROLES}
    roles = {}
    for role in _ROLES:
        specific = data.get(role)
        if specific is None:
            roles[role] = None
            continue
        if not isinstance(specific, Mapping):
            raise ConfigError(f"backends.{role} must be a mapping", field=f"backends.{role}")
        roles[role] = {**shared, **specific}
    try:
        seeking = BackendConfig.from_mapping(roles["seeking"] or shared)
        reasoning = BackendConfig.from_mapping(roles["reasoning"] or shared)
        rating = BackendConfig.from_mapping(roles["rating"]) if roles["rating"] is not None else None
    except ConfigError as exc:
        raise ConfigError(f"backends: {exc}", field=f"backends.{exc.field}") from exc
    return RoleBackends(seeking, reasoning, rating)


def deep_merge(base: Mapping[str, Any], top: Mapping[str, Any]) -> dict[str, Any]:
    out = dict(base)
    for key, value in top.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), Mapping):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def read_config_file(path: str | Path) -> dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}", field="config") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}", field="config") from exc
    if data is None:
        return {}
    if not isinstance(data, Mapping):
        raise ConfigError(f"config file {path} must hold a mapping", field="config")
    return dict(data)


def load_run_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """Defaults, then the file at ``path``, then ``overrides`` (same vocabulary as the file)."""
    merged: dict[str, Any] = {}
    if path is not None:
        merged = deep_merge(merged, read_config_file(path))
    if overrides:
        top = {k: v for k, v in overrides.items() if v is not None}
        shared = top.get("backends")
        if isinstance(shared, Mapping) and isinstance(merged.get("backends"), Mapping):
            # a shared override must also beat per-role values from the file
            pushed = {k: v for k, v in shared.items() if k not in _ROLES}
            for role in _ROLES:
                if isinstance(merged["backends"].get(role), Mapping):
                    top["backends"] = deep_merge(top["backends"], {role: pushed})
        merged = deep_merge(merged, top)
    return RunConfig.from_mapping(merged)
