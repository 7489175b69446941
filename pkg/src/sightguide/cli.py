"""Command line front end for the evaluation harness."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .vizwiz import (
    METRIC_COLUMNS,
    aggregate_manual_scores,
    join_predictions,
    load_annotations,
    load_manual_scores,
    render_manual_scores,
    render_report,
    report,
    report_json,
)


def parse_args(argv: Optional[list[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="vqa-eval",
        description="Score model answers against crowd-annotated VQA references.",
    )
    parser.add_argument("--annotations", type=Path, required=True)
    parser.add_argument("--predictions", type=Path, required=True)
    parser.add_argument("--out", type=Path, help="write the report here instead of stdout")
    parser.add_argument(
        "--metrics",
        default=",".join(METRIC_COLUMNS),
        help="comma-separated subset of: " + ", ".join(METRIC_COLUMNS),
    )
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--manual-scores", type=Path, help="optional manual 0..10 scores")
    return parser.parse_args(argv)


def main(argv: Optional[list[str]] = None) -> int:
    args = parse_args(argv)
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    try:
        items = load_annotations(args.annotations)
        items = join_predictions(items, args.predictions)
        rows = report(items)
        if args.format == "json":
            output = report_json(rows, metrics)
        else:
            output = render_report(rows, metrics)
        if args.manual_scores is not None:
            means = aggregate_manual_scores(load_manual_scores(args.manual_scores))
            output += "\n\n" + render_manual_scores(means)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out is not None:
        args.out.write_text(output + "\n", encoding="utf-8")
    else:
        print(output)
    return 0


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
