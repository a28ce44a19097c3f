"""Session configuration: values, defaults, TOML loading, backend wiring.

Explanation capture defaults follow the sampling strategy (committee-based
sampling asks for explanations, random does not) and can be overridden
explicitly either way.
"""

from __future__ import annotations

import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .backends import (
    Backend,
    HttpBackend,
    HttpBackendConfig,
    SyntheticBackend,
    SyntheticBackendConfig,
)
from .errors import ConfigError
from .prompting import load_default_template
from .sampling import SamplingConfig

DATA_DIR_ENV = "APE_DATA_DIR"

BACKEND_TYPES = ("synthetic", "http")


@dataclass(frozen=True)
class BackendSettings:
    type: str = "synthetic"
    model_id: str = "default"
    max_output_tokens: int = 256
    # synthetic model parameters
    threshold: float = 0.5
    gain: float = 4.0
    demo_radius: float = 0.15
    demo_gain_step: float = 2.0
    # http parameters (credential always comes from the environment)
    base_url: str | None = None
    timeout: float = 30.0
    max_in_flight: int = 4

    def __post_init__(self):
        if self.type not in BACKEND_TYPES:
            raise ConfigError(f"unknown backend type: {self.type!r}")


@dataclass(frozen=True)
class Templates:
    task_description: str
    input_template: str
    answer_instruction: str
    answer_instruction_reasoned: str

    @classmethod
    def defaults(cls) -> "Templates":
        return cls(
            task_description=load_default_template("task_description").strip("\n"),
            input_template=load_default_template("input_template").strip("\n"),
            answer_instruction=load_default_template("answer_instruction").strip("\n"),
            answer_instruction_reasoned=load_default_template("answer_instruction_reasoned").strip("\n"),
        )


@dataclass(frozen=True)
class SessionConfig:
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    backend: BackendSettings = field(default_factory=BackendSettings)
    templates: Templates = field(default_factory=Templates.defaults)
    require_explanation: bool | None = None
    evaluate_each_iteration: bool = True
    max_iterations: int | None = None

    @property
    def explanations_required(self) -> bool:
        if self.require_explanation is not None:
            return self.require_explanation
        return self.sampling.strategy == "self_consistency"


def build_backend(config: SessionConfig) -> Backend:
    """Construct the configured completion backend."""
    settings = config.backend
    if settings.type == "synthetic":
        return SyntheticBackend(
            SyntheticBackendConfig(
                threshold=settings.threshold,
                gain=settings.gain,
                demo_radius=settings.demo_radius,
                demo_gain_step=settings.demo_gain_step,
                seed=config.sampling.seed,
            )
        )
    return HttpBackend(
        HttpBackendConfig(
            base_url=settings.base_url,
            timeout=settings.timeout,
            max_in_flight=settings.max_in_flight,
        )
    )


def _template_from(entry: Any, base_dir: Path, key: str) -> str:
    """A template entry is either inline text or a path to a text file."""
    if isinstance(entry, str):
        return entry.strip("\n")
    if isinstance(entry, dict) and "path" in entry:
        path = Path(entry["path"])
        if not path.is_absolute():
            path = base_dir / path
        try:
            return path.read_text(encoding="utf-8").strip("\n")
        except OSError as exc:
            raise ConfigError(f"cannot read template {key!r} from {path}: {exc}") from exc
    raise ConfigError(f"template {key!r} must be a string or a {{path = ...}} table")


def session_config_from_dict(raw: dict[str, Any], base_dir: Path | None = None) -> SessionConfig:
    """Build a SessionConfig from a parsed config mapping."""
    base_dir = base_dir or Path.cwd()
    known = {"strategy", "batch_size", "committee_size", "mode", "seed", "candidate_cap",
             "require_explanation", "evaluate_each_iteration", "max_iterations",
             "backend", "templates", "pool_path", "eval_path"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    sampling_kwargs = {
        key: raw[key]
        for key in ("strategy", "batch_size", "committee_size", "mode", "seed", "candidate_cap")
        if key in raw
    }
    sampling = SamplingConfig(**sampling_kwargs)

    backend_raw = dict(raw.get("backend", {}))
    try:
        backend = BackendSettings(**backend_raw)
    except TypeError as exc:
        raise ConfigError(f"bad backend settings: {exc}") from exc

    templates = Templates.defaults()
    overrides = raw.get("templates", {})
    if overrides:
        fields = {}
        for key in ("task_description", "input_template", "answer_instruction",
                    "answer_instruction_reasoned"):
            if key in overrides:
                fields[key] = _template_from(overrides[key], base_dir, key)
        templates = replace(templates, **fields)

    return SessionConfig(
        sampling=sampling,
        backend=backend,
        templates=templates,
        require_explanation=raw.get("require_explanation"),
        evaluate_each_iteration=raw.get("evaluate_each_iteration", True),
        max_iterations=raw.get("max_iterations"),
    )


def load_config_file(path: str | Path) -> tuple[SessionConfig, dict[str, Any]]:
    """Parse a TOML config file; returns the config plus the raw mapping.

    The raw mapping is kept so callers can pick up the pool/eval paths that
    may sit alongside the engine settings.
    """
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    return session_config_from_dict(raw, base_dir=path.parent), raw


def data_dir(override: str | Path | None = None) -> Path:
    """Resolve the session storage directory (flag, env var, or cwd)."""
    if override is not None:
        return Path(override)
    return Path(os.environ.get(DATA_DIR_ENV, ".") or ".")
