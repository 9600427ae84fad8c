"""Command-line entry point."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import load_config
from .errors import Rdf2GmlError, ValidationError
from .pipeline import FEATURE_MODES, dry_run_plan, run_pipeline

log = logging.getLogger("rdf2gml")


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rdf2gml",
        description="Compile an RDF dump into a heterogeneous graph ML dataset.",
    )
    ap.add_argument("--config", help="config file (falls back to $RDF2GML_CONFIG)")
    ap.add_argument("--out", help="output directory (overrides [output] dir)")
    ap.add_argument("--features", choices=FEATURE_MODES, default="both",
                    help="which node feature families to compute (default: both)")
    ap.add_argument("--seed", type=int, help="override the configured random seed")
    ap.add_argument("--threads", type=int, default=1,
                    help="worker cap; 1 guarantees bit-deterministic output")
    ap.add_argument("--lenient", action="store_true",
                    help="skip and log malformed RDF statements instead of failing")
    ap.add_argument("--dry-run", action="store_true",
                    help="validate the config and print the plan without reading the dump body")
    ap.add_argument("--report", action="store_true",
                    help="render summary figures into <out>/report/ after the run")
    ap.add_argument("--log-level", default="info",
                    choices=["debug", "info", "warning", "error"])
    ap.add_argument("--version", action="version", version=f"rdf2gml {__version__}")
    return ap


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level.upper()),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config)
    except ValidationError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except Rdf2GmlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.dry_run:
        print(json.dumps(dry_run_plan(cfg), indent=2, sort_keys=True))
        return 0

    out_dir = Path(args.out or cfg.output.dir)
    try:
        stats, manifest = run_pipeline(
            cfg,
            features=args.features,
            out_dir=out_dir,
            seed=args.seed,
            threads=args.threads,
            lenient=True if args.lenient else None,
        )
    except Rdf2GmlError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    if args.report:
        from .report import render_report

        figures = render_report(out_dir)
        log.info("report figures: %s", ", ".join(str(f) for f in figures))

    total = sum(stats.stage_seconds.values())
    log.info("done in %.2fs; dataset written to %s", total, out_dir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
