#!/usr/bin/env python3
"""Command-line interface for wdp-triage."""

import argparse
import dataclasses
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any

from wdp_triage.config import (
    config_exists,
    create_default_config,
    get_config_path,
    get_mix_config,
    get_seeds,
    get_selector_config,
    get_train_config,
    get_worker_count,
    load_config,
    save_json_config,
)
from wdp_triage.errors import ConfigError, TriageError
from wdp_triage.generators import FamilyRegistry
from wdp_triage.generators.base import LabeledInstance
from wdp_triage.generators.mixed import gen_mixed
from wdp_triage.hardness import (
    DEFAULT_SWEEP,
    HardnessDataset,
    HardnessModel,
    evaluate,
    threshold_sweep,
    train,
)
from wdp_triage.pipeline import (
    RunManifest,
    TriagePipeline,
    build_dataset,
    label_dataset,
    write_bench_bundle,
)
from wdp_triage.router import (
    CV_MODE,
    LEARNED_MODE,
    RECORD_HEADER,
    SelectorConfig,
    calibrate_cv_threshold,
    cv_histogram,
    evaluate_hybrid,
    hybrid_solve,
)
from wdp_triage.solvers import ExactSolver, SolverRegistry
from wdp_triage.solvers.exact import DEFAULT_TIME_LIMIT
from wdp_triage.utils.io import (
    DatasetReader,
    label_path,
    read_instance,
    write_csv,
    write_dataset,
    write_json,
)

logger = logging.getLogger(__name__)

SELECTOR_MODES = {"cv": CV_MODE, "learned": LEARNED_MODE}


def _parse_option(raw: str) -> tuple[str, Any]:
    key, sep, value = raw.partition("=")
    if not sep or not key:
        raise ConfigError(f"--option expects KEY=VALUE, got '{raw}'")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def _time_limit(args: argparse.Namespace, default: float) -> float:
    if args.time_limit_ms is None:
        return default
    if args.time_limit_ms <= 0:
        raise ConfigError(f"--time-limit-ms must be positive, got {args.time_limit_ms}")
    return args.time_limit_ms / 1000.0


def _selector(args: argparse.Namespace, config: dict[str, Any]) -> SelectorConfig:
    selector = get_selector_config(config)
    changes: dict[str, Any] = {"time_limit": _time_limit(args, selector.time_limit)}
    if args.selector is not None:
        changes["mode"] = SELECTOR_MODES[args.selector]
    mode = changes.get("mode", selector.mode)
    if args.threshold is not None:
        key = "learned_threshold" if mode == LEARNED_MODE else "cv_threshold"
        changes[key] = args.threshold
    selector = dataclasses.replace(selector, **changes)
    selector.require_valid()
    return selector


def _read_dataset(path: Path, verbose: bool) -> list[LabeledInstance]:
    reader = DatasetReader()
    labeled = reader.read_directory(path)
    if verbose:
        for filepath, error in reader.errors:
            print(f"Warning: {filepath.name}: {error}", file=sys.stderr)
    if reader.errors:
        print(f"Errors: {len(reader.errors)} files failed", file=sys.stderr)
    return labeled


def _load_model(path: Path | None) -> HardnessModel | None:
    return HardnessModel.load(path) if path is not None else None


def _finish(manifest: RunManifest, out_dir: Path, outputs: list[Path], start: float) -> None:
    manifest.outputs = sorted(p.relative_to(out_dir).as_posix() for p in outputs)
    manifest.wall_time = time.perf_counter() - start
    manifest.write(out_dir)


def cmd_generate(args: argparse.Namespace, config: dict[str, Any], workers: int) -> int:
    start = time.perf_counter()
    options = dict(_parse_option(raw) for raw in args.option)
    for key in ("k", "epsilon", "preset"):
        value = getattr(args, key)
        if value is not None:
            options[key] = value

    family = FamilyRegistry.get(args.family)(options)
    seed = args.seed if args.seed is not None else 0
    if args.count < 0:
        raise ConfigError(f"--count must be non-negative, got {args.count}")
    labeled = family.generate(args.count, seed) if args.count > 0 else []
    if args.label:
        labeled = label_dataset(labeled, _time_limit(args, DEFAULT_TIME_LIMIT), workers)

    outputs = [
        p for path in write_dataset(labeled, args.out) for p in (path, label_path(path))
    ]
    manifest = RunManifest(
        subcommand="generate",
        config={"family": args.family, "count": args.count, "options": options},
        seeds=[seed],
    )
    _finish(manifest, args.out, outputs, start)
    print(f"Generated {len(labeled)} '{args.family}' instances in {args.out}", file=sys.stderr)
    return 0


def cmd_solve(args: argparse.Namespace, config: dict[str, Any], workers: int) -> int:
    start = time.perf_counter()
    instance = read_instance(args.instance)
    solver_class = SolverRegistry.get(args.solver)
    solver = solver_class(time_limit=_time_limit(args, DEFAULT_TIME_LIMIT))
    if isinstance(solver, ExactSolver):
        solver.node_limit = args.node_limit
    result = solver.solve(instance)
    document = result.to_dict(instance)

    if args.out is None:
        print(json.dumps(document, indent=2))
        return 0
    path = write_json(document, args.out / f"{instance.name or 'instance'}.{args.solver}.json")
    manifest = RunManifest(
        subcommand="solve",
        config={"solver": args.solver, "node_limit": args.node_limit},
        inputs=[str(args.instance)],
    )
    _finish(manifest, args.out, [path], start)
    print(f"{args.solver}: welfare {result.welfare:g}", file=sys.stderr)
    return 0


def cmd_features(args: argparse.Namespace, config: dict[str, Any], workers: int) -> int:
    start = time.perf_counter()
    labeled = _read_dataset(args.dataset, args.verbose)
    dataset = build_dataset(labeled, workers)
    path = dataset.write_csv(args.out / "features.csv")
    manifest = RunManifest(subcommand="features", inputs=[str(args.dataset)])
    _finish(manifest, args.out, [path], start)
    print(f"Extracted features for {len(dataset)} instances", file=sys.stderr)
    return 0


def cmd_train(args: argparse.Namespace, config: dict[str, Any], workers: int) -> int:
    start = time.perf_counter()
    dataset = HardnessDataset.read_csv(args.features)
    seeds = [args.seed] if args.seed is not None else get_seeds(config)
    outputs = []
    for seed in seeds:
        model = train(dataset, get_train_config(config, seed))
        outputs.append(model.save(args.out / f"model_seed{seed}.json"))
        print(
            f"seed {seed}: best epoch {model.best_epoch}, val loss {model.best_val_loss:.6f}",
            file=sys.stderr,
        )
    manifest = RunManifest(
        subcommand="train",
        config={"train": config.get("train", {})},
        seeds=seeds,
        inputs=[str(args.features)],
    )
    _finish(manifest, args.out, outputs, start)
    return 0


def cmd_eval(args: argparse.Namespace, config: dict[str, Any], workers: int) -> int:
    start = time.perf_counter()
    model = HardnessModel.load(args.model)
    dataset = HardnessDataset.read_csv(args.features)
    threshold = args.threshold if args.threshold is not None else 0.05
    report = evaluate(model, dataset, threshold)
    sweep = threshold_sweep(model, dataset, DEFAULT_SWEEP)
    outputs = [
        write_json(report.to_dict(include_pairs=True), args.out / "eval_report.json"),
        write_csv(
            args.out / "threshold_sweep.csv",
            ["threshold", "accuracy"],
            [[repr(theta), repr(accuracy)] for theta, accuracy in sweep],
        ),
    ]
    manifest = RunManifest(
        subcommand="eval",
        config={"threshold": threshold},
        inputs=[str(args.model), str(args.features)],
    )
    _finish(manifest, args.out, outputs, start)
    print(
        f"MAE {report.mae:.4f}  r {report.pearson_r:.3f}  accuracy {report.accuracy:.3f}",
        file=sys.stderr,
    )
    return 0


def cmd_route(args: argparse.Namespace, config: dict[str, Any], workers: int) -> int:
    start = time.perf_counter()
    selector = _selector(args, config)
    model = _load_model(args.model)

    if args.input.is_file():
        instance = read_instance(args.input)
        outcome = hybrid_solve(instance, selector, model)
        document = {"decision": outcome.decision, **outcome.result.to_dict(instance)}
        print(json.dumps(document, indent=2))
        return 0

    labeled = _read_dataset(args.input, args.verbose)
    report = evaluate_hybrid(labeled, selector, model, workers=workers)
    if args.out is None:
        print(json.dumps(report.to_dict(), indent=2))
        return 0
    outputs = [
        write_json(report.to_dict(), args.out / "hybrid_report.json"),
        write_csv(
            args.out / "hybrid_instances.csv",
            RECORD_HEADER,
            [r.to_row() for r in report.records],
        ),
    ]
    manifest = RunManifest(
        subcommand="route",
        config={"selector": selector.to_dict()},
        inputs=[str(args.input)] + ([str(args.model)] if args.model else []),
    )
    _finish(manifest, args.out, outputs, start)
    print(
        f"overall gap {report.overall_gap:.4f}, routing accuracy {report.routing_accuracy:.3f}",
        file=sys.stderr,
    )
    return 0


def cmd_bench(args: argparse.Namespace, config: dict[str, Any], workers: int) -> int:
    start = time.perf_counter()
    selector = _selector(args, config)
    model = _load_model(args.model)
    bench = config.get("bench", {})
    seed = args.seed if args.seed is not None else int(bench.get("rng_seed", 2024))
    mix = dataclasses.replace(
        get_mix_config(config, "generate"),
        n_hard=int(bench.get("n_hard", 50)),
        n_easy=int(bench.get("n_easy", 50)),
        rng_seed=seed,
    )

    if bench.get("calibrate", True) and args.threshold is None:
        calibration = gen_mixed(dataclasses.replace(mix, rng_seed=seed + 1))
        selector = dataclasses.replace(
            selector, cv_threshold=calibrate_cv_threshold(cv_histogram(calibration))
        )

    bench_set = label_dataset(gen_mixed(mix), selector.time_limit, workers)
    outputs = write_bench_bundle(
        args.out,
        bench_set,
        selector,
        model,
        node_budget=int(bench.get("node_budget", 16)),
        budgets=[int(b) for b in bench.get("budget_sweep", [])],
        workers=workers,
    )
    manifest = RunManifest(
        subcommand="bench",
        config={"bench": bench, "selector": selector.to_dict()},
        seeds=[seed],
        inputs=[str(args.model)] if args.model else [],
    )
    _finish(manifest, args.out, outputs, start)
    print(f"Benchmarked {len(bench_set)} instances into {args.out}", file=sys.stderr)
    return 0


def cmd_pipeline(args: argparse.Namespace, config: dict[str, Any], workers: int) -> int:
    if args.config is None and not config_exists():
        print(
            "No pipeline.json found; running with defaults. "
            "Write one with: wdp-triage init-config",
            file=sys.stderr,
        )
    if args.seed is not None:
        config = {**config, "seeds": [args.seed]}
    pipeline = TriagePipeline(config, args.out, workers=workers, config_path=args.config)
    manifest = pipeline.run()
    print(
        f"Pipeline finished: {len(manifest.outputs)} files in {args.out}",
        file=sys.stderr,
    )
    return 0


def cmd_init_config(args: argparse.Namespace) -> int:
    path: Path = args.out if args.out is not None else get_config_path()
    if path.exists() and not args.force:
        raise ConfigError(f"{path} already exists (use --force to overwrite)")
    save_json_config(create_default_config(), path)
    print(f"Wrote default config to {path}", file=sys.stderr)
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "features": cmd_features,
    "train": cmd_train,
    "eval": cmd_eval,
    "route": cmd_route,
    "bench": cmd_bench,
    "pipeline": cmd_pipeline,
}


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subparser per subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Path to pipeline.json")
    common.add_argument("--seed", type=int, help="Run seed")
    common.add_argument(
        "--time-limit-ms",
        type=float,
        help="Wall-clock limit for the exact solver in milliseconds",
    )
    common.add_argument("-v", "--verbose", action="store_true", help="Verbose output")

    parser = argparse.ArgumentParser(
        prog="wdp-triage",
        description="Route auction winner determination between greedy and exact solvers",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  wdp-triage generate --family kstar --k 5 --epsilon 0.01 --out data/kstar
  wdp-triage generate --family mixed --count 200 --seed 7 --label --out data/mixed
  wdp-triage solve data/kstar/instances/kstar-k5-eps0.01.json --solver exact
  wdp-triage features data/mixed --out results
  wdp-triage train results/features.csv --out results/models
  wdp-triage route data/mixed --selector cv --out results/route
  wdp-triage init-config --out pipeline.json
  wdp-triage pipeline --config pipeline.json --out results
        """,
    )
    parser.add_argument(
        "--list-families",
        action="store_true",
        help="List available instance families",
    )
    parser.add_argument(
        "--list-solvers",
        action="store_true",
        help="List available solvers",
    )
    sub = parser.add_subparsers(dest="command")

    gen = sub.add_parser("generate", parents=[common], help="Generate instance files")
    gen.add_argument("--family", default="mixed", help="Instance family (default: mixed)")
    gen.add_argument("--count", type=int, default=1, help="Number of instances (default: 1)")
    gen.add_argument("--k", type=int, help="Fish per trap")
    gen.add_argument("--epsilon", type=float, help="k-star whale margin")
    gen.add_argument("--preset", help="Named trap preset")
    gen.add_argument(
        "--option",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Extra family option (repeatable)",
    )
    gen.add_argument("--label", action="store_true", help="Label with the exact solver")
    gen.add_argument("--out", type=Path, required=True, help="Output dataset directory")

    solve = sub.add_parser("solve", parents=[common], help="Solve one instance file")
    solve.add_argument("instance", type=Path, help="Instance JSON file")
    solve.add_argument("--solver", default="exact", help="Solver name (default: exact)")
    solve.add_argument("--node-limit", type=int, help="Node budget for the exact solver")
    solve.add_argument("--out", type=Path, help="Write the result here instead of stdout")

    feat = sub.add_parser("features", parents=[common], help="Extract the feature CSV")
    feat.add_argument("dataset", type=Path, help="Dataset directory")
    feat.add_argument("--out", type=Path, required=True, help="Output directory")

    tr = sub.add_parser("train", parents=[common], help="Train hardness models")
    tr.add_argument("features", type=Path, help="Labeled features CSV")
    tr.add_argument("--out", type=Path, required=True, help="Output directory")

    ev = sub.add_parser("eval", parents=[common], help="Evaluate a hardness model")
    ev.add_argument("model", type=Path, help="Model JSON")
    ev.add_argument("features", type=Path, help="Labeled features CSV")
    ev.add_argument("--threshold", type=float, help="Hard/easy gap threshold (default: 0.05)")
    ev.add_argument("--out", type=Path, required=True, help="Output directory")

    for name, help_text in (
        ("route", "Route instances through the selector"),
        ("bench", "Compare routing strategies on a fresh mixed set"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "route":
            p.add_argument("input", type=Path, help="Instance file or dataset directory")
            p.add_argument("--out", type=Path, help="Output directory")
        else:
            p.add_argument("--out", type=Path, required=True, help="Output directory")
        p.add_argument("--selector", choices=sorted(SELECTOR_MODES), help="Routing mode")
        p.add_argument("--threshold", type=float, help="Threshold of the chosen mode")
        p.add_argument("--model", type=Path, help="Hardness model JSON for learned routing")

    pipe = sub.add_parser("pipeline", parents=[common], help="Run the full experiment")
    pipe.add_argument("--out", type=Path, required=True, help="Results bundle directory")

    init = sub.add_parser("init-config", help="Write the default pipeline.json")
    init.add_argument(
        "--out", type=Path, help="Destination (default: ~/.config/wdp-triage/pipeline.json)"
    )
    init.add_argument("--force", action="store_true", help="Overwrite an existing file")
    init.add_argument("-v", "--verbose", action="store_true", help="Verbose output")

    return parser


def main(argv: list[str] | None = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.list_families:
        print("Available families:")
        for family_cls in FamilyRegistry.get_all_families():
            print(f"  - {family_cls.family}: {family_cls.description}")
        return 0

    if args.list_solvers:
        print("Available solvers:")
        for solver_cls in SolverRegistry.get_all_solvers():
            suffix = " (proves optimality)" if solver_cls.proves_optimality else ""
            print(f"  - {solver_cls.name}{suffix}")
        return 0

    if args.command is None:
        parser.print_help()
        return 1

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        if args.command == "init-config":
            return cmd_init_config(args)
        config = load_config(args.config)
        workers = get_worker_count()
        return COMMANDS[args.command](args, config, workers)
    except TriageError as e:
        print(f"error: {e.one_line()}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: IO_ERROR: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
