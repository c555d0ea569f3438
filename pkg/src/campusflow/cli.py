"""Command-line pipeline driver.

Subcommands mirror the pipeline phases plus the synthetic generator and
the API server. A typical session:

    campusflow synth --seed 1 --students 20000 --out-dir out
    campusflow model --out-dir out
    campusflow export --out-dir out
    campusflow serve --out-dir out --port 8000

`synth` records where it wrote the CSVs, so `model` ingests them
automatically when no store cache exists yet; `ingest` does the same for
externally produced data.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import PipelineConfig
from .ingest import IngestError
from .pipeline import Pipeline, PipelineError
from .synth import WorldConfig, WorldConfigError, generate, manifest_check


def _load_config(path: str | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    return PipelineConfig.load(path)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out-dir", default="out",
                        help="pipeline output directory (default: out)")
    parser.add_argument("--config", default=None,
                        help="JSON config file overriding the defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="campusflow",
        description="Student-progression analytics pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic world with ground truth")
    _add_common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--students", type=int, default=20000)
    p.add_argument("--majors", type=int, default=12)
    p.add_argument("--noise", type=float, default=None,
                   help="grade noise sigma (default: world default)")
    p.add_argument("--courses-per-stage", type=int, default=3)
    p.add_argument("--dropout-rate", type=float, default=None)
    p.add_argument("--check", action="store_true",
                   help="verify the emitted files against the manifest")

    p = sub.add_parser("ingest", help="validate CSVs and build the store cache")
    _add_common(p)
    p.add_argument("--data", required=True, help="directory with the input CSVs")
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("model", help="build hierarchy, course graphs, dropout stats")
    _add_common(p)
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("export", help="write the scene JSONs for the UI")
    _add_common(p)
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("report", help="write the per-major dropout CSV")
    _add_common(p)

    p = sub.add_parser("serve", help="serve exported artifacts over HTTP")
    _add_common(p)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static", default=None,
                   help="optional directory with a built web UI to serve at /")

    return parser


def _cmd_synth(args, config: PipelineConfig) -> int:
    world_kwargs = {
        "students": args.students,
        "majors": args.majors,
        "courses_per_stage": args.courses_per_stage,
    }
    if args.noise is not None:
        world_kwargs["noise"] = args.noise
    if args.dropout_rate is not None:
        world_kwargs["dropout_rate"] = args.dropout_rate
    world = WorldConfig(**world_kwargs)
    data_dir = Path(args.out_dir) / "data"
    manifest = generate(data_dir, seed=args.seed, config=world)
    print(f"wrote {manifest['counts']['grade_rows']} grade rows, "
          f"{manifest['counts']['graduates']} graduates, "
          f"{manifest['counts']['withdrawn']} withdrawn to {data_dir}")
    Pipeline(args.out_dir, config).record_data_dir(data_dir)
    if args.check:
        problems = manifest_check(data_dir)
        if problems:
            for line in problems:
                print(f"manifest check: {line}", file=sys.stderr)
            return 1
        print("manifest check: ok")
    return 0


def _ensure_store(pipe: Pipeline, args) -> None:
    """Ingest automatically when synth already recorded a data directory."""
    if pipe.store_path.exists():
        return
    data_dir = pipe.manifest().get("data_dir")
    if data_dir and Path(data_dir).exists():
        summary = pipe.ingest(data_dir)
        if not summary.get("skipped"):
            print(f"ingested {summary['events']} events from {data_dir}")


def _cmd_model(args, config: PipelineConfig) -> int:
    pipe = Pipeline(args.out_dir, config)
    _ensure_store(pipe, args)
    result = pipe.model(force=args.force)
    if result.get("skipped"):
        print("model: up to date")
    else:
        print(f"model: {result['modeled_majors']} majors modeled, "
              f"{result['skipped_majors']} skipped, "
              f"{result['withdrawn']} withdrawn students "
              f"({result['unattributed']} unattributed) "
              f"in {result['seconds']:.1f}s")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args.config)
        if args.command == "synth":
            return _cmd_synth(args, config)
        if args.command == "ingest":
            pipe = Pipeline(args.out_dir, config)
            summary = pipe.ingest(args.data, force=args.force)
            if summary.get("skipped"):
                print("ingest: up to date")
            else:
                rejected = sum(summary["rejected"].values())
                print(f"ingest: {summary['events']} events, "
                      f"{summary['students']} students, "
                      f"{summary['majors']} majors, {rejected} rows rejected")
                pipe.record_data_dir(args.data)
            return 0
        if args.command == "model":
            return _cmd_model(args, config)
        if args.command == "export":
            pipe = Pipeline(args.out_dir, config)
            result = pipe.export(force=args.force)
            if result.get("skipped"):
                print("export: up to date")
            else:
                print(f"export: {result['files']} artifacts written")
            return 0
        if args.command == "report":
            pipe = Pipeline(args.out_dir, config)
            path = pipe.report()
            print(f"report: {path}")
            return 0
        if args.command == "serve":
            from .api import serve
            artifacts = Path(args.out_dir) / "artifacts"
            if not (artifacts / "tree.json").exists():
                print(f"no artifacts in {artifacts}; run the export step first",
                      file=sys.stderr)
                return 1
            serve(artifacts, port=args.port, host=args.host,
                  static_dir=args.static)
            return 0
    except (PipelineError, IngestError, WorldConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
