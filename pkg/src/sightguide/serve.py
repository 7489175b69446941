"""Run the gateway as an HTTP server.

Two modes:
  * ``--config FILE`` wires the four backend roles to real HTTP services
    described in a YAML config.
  * ``--mock`` runs entirely in-process against scripted backends loaded
    from scenario files, which is what integration tests and the web client
    demo use.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

import uvicorn

from .api import build_app
from .backends import (
    BackendRole,
    HttpGenerator,
    HttpSynthesizer,
    HttpTagger,
    HttpTranscriber,
    MockGenerator,
    MockSynthesizer,
    MockTagger,
    MockTranscriber,
)
from .config import load_config
from .errors import ConfigError
from .gateway import Gateway
from .scenarios import build_fixture_set, load_scenarios

DEFAULT_SCENARIO_DIR = Path("fixtures") / "scenarios"


def build_gateway_from_config(path: Path, session_log: Optional[Path] = None) -> Gateway:
    cfg = load_config(path)
    endpoints = cfg.endpoints
    return Gateway(
        tagger=HttpTagger(endpoints[BackendRole.TAGGER]),
        generator=HttpGenerator(endpoints[BackendRole.VLM]),
        transcriber=HttpTranscriber(endpoints[BackendRole.ASR]),
        synthesizer=HttpSynthesizer(endpoints[BackendRole.TTS]),
        generation=cfg.generation,
        frame_buffer_capacity=cfg.frame_buffer_capacity,
        session_ttl_ms=cfg.session_ttl_ms,
        session_log=session_log or cfg.session_log,
    )


def build_mock_gateway(scenario_dir: Path, session_log: Optional[Path] = None) -> Gateway:
    scenarios = load_scenarios(scenario_dir)
    fixtures = build_fixture_set(scenarios)
    return Gateway(
        tagger=MockTagger(fixtures),
        generator=MockGenerator(fixtures),
        transcriber=MockTranscriber(fixtures),
        synthesizer=MockSynthesizer(),
        session_log=session_log,
    )


def parse_args(argv: Optional[list[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="sightguide-gateway", description="Assistive perception gateway server."
    )
    mode = parser.add_mutually_exclusive_group(required=True)
    mode.add_argument("--config", type=Path, help="YAML config wiring real backends")
    mode.add_argument(
        "--mock", action="store_true", help="serve scripted mock backends instead"
    )
    parser.add_argument(
        "--scenarios",
        type=Path,
        default=DEFAULT_SCENARIO_DIR,
        help=f"scenario directory for --mock (default: {DEFAULT_SCENARIO_DIR})",
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8080)
    parser.add_argument("--session-log", type=Path, default=None)
    parser.add_argument("--log-level", default="info")
    return parser.parse_args(argv)


def main(argv: Optional[list[str]] = None) -> int:
    args = parse_args(argv)
    try:
        if args.mock:
            gateway = build_mock_gateway(args.scenarios, args.session_log)
        else:
            gateway = build_gateway_from_config(args.config, args.session_log)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    app = build_app(gateway)
    uvicorn.run(app, host=args.host, port=args.port, log_level=args.log_level)
    return 0


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
