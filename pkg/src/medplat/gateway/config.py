"""Gateway configuration: one JSON file, env overrides for port and the
remote generation URL."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .. import fixture_path
from ..errors import ValidationError

ENV_PORT = "MEDPLAT_PORT"
ENV_GATEWAY_URL = "MEDPLAT_GATEWAY_URL"


@dataclass
class ApiConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    catalog_path: str = str(fixture_path("nstri_catalog.jsonl"))
    drugs_path: str = str(fixture_path("drugs.jsonl"))
    concepts_path: str = str(fixture_path("concepts.jsonl"))
    papers_path: str = str(fixture_path("papers.jsonl"))
    policy_path: str = str(fixture_path("policy.json"))
    sessions_path: str = str(fixture_path("sessions.json"))
    audit_log_path: str | None = None
    embedder: str = "reference"
    embedding_dim: int = 256
    generation_gateway: str = "stub"
    gateway_url: str | None = None
    gateway_path: str = "/v1/completions"
    gateway_model: str = "default"
    gateway_timeout_s: float = 30.0
    context_budget: int = 6000
    ui_dist_path: str | None = None

    def __post_init__(self):
        if not 1 <= self.port <= 65535:
            raise ValidationError(f"port must be in [1, 65535], got {self.port}")
        if self.embedder not in ("reference", "remote"):
            raise ValidationError(f"embedder must be reference|remote, got {self.embedder!r}")
        if self.generation_gateway not in ("stub", "remote"):
            raise ValidationError(
                f"generation_gateway must be stub|remote, got {self.generation_gateway!r}"
            )
        for label in ("catalog", "drugs", "concepts", "papers", "policy", "sessions"):
            path = getattr(self, f"{label}_path")
            if not Path(path).exists():
                raise ValidationError(f"{label}_path does not exist: {path}")

    @classmethod
    def load(cls, path=None) -> "ApiConfig":
        obj = {}
        if path is not None:
            with Path(path).open(encoding="utf-8") as fh:
                obj = json.load(fh)
        if ENV_PORT in os.environ:
            obj["port"] = int(os.environ[ENV_PORT])
        if ENV_GATEWAY_URL in os.environ:
            obj["gateway_url"] = os.environ[ENV_GATEWAY_URL]
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)
