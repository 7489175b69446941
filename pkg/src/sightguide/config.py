"""Gateway configuration: YAML file schema plus environment overrides.

Schema (all endpoint roles are required; everything else has defaults):

    frame_buffer_capacity: 32
    session_ttl_ms: 1800000
    session_log: /var/log/sightguide/sessions.ndjson   # optional
    generation:
      min_length: 1
      max_length: 200
      beam_width: 5
      length_penalty: 1.0
      repetition_penalty: 3.0
      temperature: 1.0
    endpoints:
      tagger: {base_url: "http://tagger:9001", timeout_ms: 10000}
      vlm:    {base_url: "http://vlm:9002", timeout_ms: 60000, auth_token: "..."}
      asr:    {base_url: "http://asr:9003", timeout_ms: 15000}
      tts:    {base_url: "http://tts:9004", timeout_ms: 15000}

Environment overrides, applied after the file: SIGHTGUIDE_<ROLE>_URL and
SIGHTGUIDE_<ROLE>_TOKEN with ROLE in TAGGER, VLM, ASR, TTS.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml

from .backends.base import BackendEndpoint, BackendRole
from .domain import GenerationParams
from .errors import ConfigError
from .gateway import DEFAULT_FRAME_BUFFER_CAPACITY, DEFAULT_SESSION_TTL_MS

_DEFAULT_TIMEOUT_MS = 30_000.0


@dataclass(frozen=True)
class GatewayConfig:
    endpoints: dict[BackendRole, BackendEndpoint]
    generation: GenerationParams = field(default_factory=GenerationParams)
    frame_buffer_capacity: int = DEFAULT_FRAME_BUFFER_CAPACITY
    session_ttl_ms: float = DEFAULT_SESSION_TTL_MS
    session_log: Optional[Path] = None

    def __post_init__(self) -> None:
        missing = [role.value for role in BackendRole if role not in self.endpoints]
        if missing:
            raise ConfigError(f"endpoints missing for roles: {', '.join(missing)}")
        if self.frame_buffer_capacity < 1:
            raise ConfigError("frame_buffer_capacity must be >= 1")
        if self.session_ttl_ms <= 0:
            raise ConfigError("session_ttl_ms must be > 0")


def _parse_endpoint(role: BackendRole, raw: Any) -> BackendEndpoint:
    if not isinstance(raw, Mapping):
        raise ConfigError(f"endpoints.{role.value} must be a mapping")
    if "base_url" not in raw:
        raise ConfigError(f"endpoints.{role.value}.base_url is required")
    try:
        return BackendEndpoint(
            role=role,
            base_url=str(raw["base_url"]),
            timeout_ms=float(raw.get("timeout_ms", _DEFAULT_TIMEOUT_MS)),
            auth_token=raw.get("auth_token"),
        )
    except ValueError as exc:
        raise ConfigError(f"endpoints.{role.value}: {exc}") from exc


def _parse_generation(raw: Any) -> GenerationParams:
    if raw is None:
        return GenerationParams()
    if not isinstance(raw, Mapping):
        raise ConfigError("generation must be a mapping")
    known = set(GenerationParams.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown generation settings: {', '.join(sorted(unknown))}")
    try:
        return dataclasses.replace(GenerationParams(), **dict(raw))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"generation: {exc}") from exc


def apply_env_overrides(
    config: GatewayConfig, env: Mapping[str, str] = os.environ
) -> GatewayConfig:
    endpoints = dict(config.endpoints)
    for role in BackendRole:
        endpoint = endpoints[role]
        url = env.get(f"SIGHTGUIDE_{role.value.upper()}_URL")
        token = env.get(f"SIGHTGUIDE_{role.value.upper()}_TOKEN")
        if url:
            endpoint = dataclasses.replace(endpoint, base_url=url)
        if token:
            endpoint = dataclasses.replace(endpoint, auth_token=token)
        endpoints[role] = endpoint
    return dataclasses.replace(config, endpoints=endpoints)


def load_config(path: Path, env: Mapping[str, str] = os.environ) -> GatewayConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file is not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, Mapping):
        raise ConfigError("config root must be a mapping")

    endpoints_raw = raw.get("endpoints")
    if not isinstance(endpoints_raw, Mapping):
        raise ConfigError("endpoints section is required")
    endpoints = {}
    for role in BackendRole:
        if role.value not in endpoints_raw:
            raise ConfigError(f"endpoints.{role.value} is required")
        endpoints[role] = _parse_endpoint(role, endpoints_raw[role.value])

    session_log = raw.get("session_log")
    config = GatewayConfig(
        endpoints=endpoints,
        generation=_parse_generation(raw.get("generation")),
        frame_buffer_capacity=int(raw.get("frame_buffer_capacity", DEFAULT_FRAME_BUFFER_CAPACITY)),
        session_ttl_ms=float(raw.get("session_ttl_ms", DEFAULT_SESSION_TTL_MS)),
        session_log=Path(session_log) if session_log else None,
    )
    return apply_env_overrides(config, env)
