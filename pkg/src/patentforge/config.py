"""Service and pipeline configuration.

Values load from an optional JSON file and can be overridden per-key by
PATENTFORGE_* environment variables (which win). Unknown keys in the file
are rejected so typos fail loudly.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ValidationError

_ENV_PREFIX = "PATENTFORGE_"


@dataclass
class ServiceConfig:
    data_dir: str = "./data"
    threshold: float = 0.1
    top_k: int = 5
    deadline_seconds: float = 600.0
    max_output_tokens: int = 512
    remote_endpoint: str | None = None
    auth_token: str | None = None
    frontend_dir: str | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ValidationError(f"threshold must be in [0, 1], got {self.threshold}")
        if self.top_k < 1:
            raise ValidationError(f"top_k must be >= 1, got {self.top_k}")
        if self.deadline_seconds <= 0:
            raise ValidationError("deadline_seconds must be positive")
        if self.max_output_tokens < 1:
            raise ValidationError("max_output_tokens must be >= 1")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _coerce(name: str, raw: str, target_type: type):
    if target_type is float:
        return float(raw)
    if target_type is int:
        return int(raw)
    return raw


def load_config(path: str | Path | None = None) -> ServiceConfig:
    """Build a ServiceConfig from an optional JSON file plus env overrides."""
    values: dict = {}
    known = {f.name: f for f in fields(ServiceConfig)}
    if path is not None:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ValidationError("config file must hold a JSON object")
        unknown = set(data) - set(known)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        values.update(data)
    for name, spec in known.items():
        raw = os.environ.get(_ENV_PREFIX + name.upper())
        if raw is None:
            continue
        base_type = {"threshold": float, "deadline_seconds": float,
                     "top_k": int, "max_output_tokens": int}.get(name, str)
        try:
            values[name] = _coerce(name, raw, base_type)
        except ValueError as exc:
            raise ValidationError(
                f"bad value for {_ENV_PREFIX + name.upper()}: {raw!r}"
            ) from exc
    return ServiceConfig(**values)
