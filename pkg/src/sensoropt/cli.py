"""Command-line interface: place, compare, oracle."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .baselines import exhaustive
from .building import TimeGrid, build_uniform_shear_model
from .config import BASELINE_LABELS, ConfigError, load_config
from .fim import compute_elementary_set
from .pipeline import PipelineError, run_pipeline, write_report
from .priors import sample_prior


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sensoropt",
        description="Information-optimal sensor placement for shear buildings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    place = sub.add_parser("place", help="run the full placement pipeline")
    compare = sub.add_parser(
        "compare", help="run the pipeline with an explicit baseline list"
    )
    oracle = sub.add_parser(
        "oracle", help="exhaustive combinatorial optimum, where feasible"
    )

    for p in (place, compare, oracle):
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--quiet", action="store_true", help="suppress the summary")
    compare.add_argument(
        "--configs",
        required=True,
        help=f"comma-separated baseline labels, from {','.join(BASELINE_LABELS)}",
    )
    oracle.add_argument(
        "--exhaustive-cap",
        type=int,
        default=1_000_000,
        help="refuse enumerations larger than this many configurations",
    )
    return parser


def _resolve_out(args, config) -> Path:
    if args.out is not None:
        return Path(args.out)
    if config.output_dir is not None:
        return Path(config.output_dir)
    return Path("sensoropt-run")


def _run_place(args, baselines=None) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if baselines is not None:
        config.baselines = baselines
    report = run_pipeline(config)
    out = write_report(report, _resolve_out(args, config))
    if not args.quiet:
        stories = ", ".join(map(str, report.placement.stories))
        print(f"instrumented stories : {stories}")
        print(f"objective (binary)   : {report.placement.objective_binary:.6f}")
        print(f"certified optimal    : {'yes' if report.placement.certified_optimal else 'no'}")
        print(f"report written to    : {out}")
    return 0


def _run_compare(args) -> int:
    labels = tuple(label.strip() for label in args.configs.split(",") if label.strip())
    unknown = sorted(set(labels) - set(BASELINE_LABELS))
    if unknown:
        raise ConfigError([f"--configs: unknown labels {unknown}"])
    return _run_place(args, baselines=labels)


def _run_oracle(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    try:
        model = build_uniform_shear_model(config.n_dof)
        grid = TimeGrid(config.n_steps, config.dt)
        samples = sample_prior(config.prior, config.n_samples, config.seed)
        elems = compute_elementary_set(model, samples, grid)
        result = exhaustive(elems, config.budget, cap=args.exhaustive_cap)
    except Exception as exc:
        raise PipelineError("oracle", exc) from exc

    out = _resolve_out(args, config)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "config": config.to_dict(),
        "delta": result.delta.tolist(),
        "stories": [int(i) + 1 for i in result.delta.nonzero()[0]],
        "objective_value": result.objective_value,
        "n_evaluations": result.n_evaluations,
    }
    (out / "oracle.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    if not args.quiet:
        print(f"exhaustive optimum   : {', '.join(map(str, payload['stories']))}")
        print(f"objective value      : {result.objective_value:.6f}")
        print(f"configurations tried : {result.n_evaluations}")
        print(f"oracle written to    : {out / 'oracle.json'}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "place":
            return _run_place(args)
        if args.command == "compare":
            return _run_compare(args)
        return _run_oracle(args)
    except ConfigError as exc:
        print(f"configuration error:\n{exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:
        print(f"error in {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
