"""End-to-end experiment runner and the shared labeling and feature stages."""

import dataclasses
import logging
import math
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, TypeVar

import numpy as np

from wdp_triage import __version__
from wdp_triage.config import (
    get_mix_config,
    get_seeds,
    get_selector_config,
    get_train_config,
)
from wdp_triage.errors import ModelError, StageError, TriageError
from wdp_triage.features import FEATURE_NAMES, FeatureVector, extract
from wdp_triage.generators.base import LabeledInstance, MixConfig
from wdp_triage.generators.mixed import gen_mixed
from wdp_triage.hardness.ablation import LOGO_HEADER, logo_ablation
from wdp_triage.hardness.dataset import HardnessDataset, train_test_split
from wdp_triage.hardness.metrics import evaluate, permutation_importance, threshold_sweep
from wdp_triage.hardness.model import HardnessModel
from wdp_triage.hardness.training import train
from wdp_triage.router import (
    BUDGET_HEADER,
    LEARNED_MODE,
    RECORD_HEADER,
    SUMMARY_HEADER,
    SelectorConfig,
    budget_sweep,
    calibrate_cv_threshold,
    cv_histogram,
    run_bench,
)
from wdp_triage.solvers.base import optimality_gap
from wdp_triage.solvers.exact import DEFAULT_TIME_LIMIT, exact
from wdp_triage.solvers.greedy import greedy
from wdp_triage.utils.io import (
    MANIFEST_FILENAME,
    label_path,
    write_csv,
    write_dataset,
    write_json,
)
from wdp_triage.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

T = TypeVar("T")

CLASSIFIER_HEADER = ["Seed", "MAE", "Correlation", "Accuracy", "Precision", "Recall"]


def label_instance(job: tuple[LabeledInstance, float]) -> LabeledInstance:
    """Attach exact and greedy welfare plus the greedy gap to one instance."""
    item, time_limit = job
    reference = exact(item.instance, time_limit=time_limit)
    heuristic = greedy(item.instance)
    if not reference.proven_optimal:
        logger.warning("%s: optimum not proven within %.1fs", item.name, time_limit)
    return item.with_labels(
        greedy_gap=optimality_gap(reference.welfare, heuristic.welfare),
        optimal_welfare=reference.welfare,
        greedy_welfare=heuristic.welfare,
        proven_optimal=reference.proven_optimal,
    )


def label_dataset(
    labeled: Sequence[LabeledInstance],
    time_limit: float = DEFAULT_TIME_LIMIT,
    workers: int = 1,
) -> list[LabeledInstance]:
    """Label every instance with the exact solver, keeping input order."""
    return parallel_map(label_instance, [(item, time_limit) for item in labeled], workers)


def _extract_item(item: LabeledInstance) -> FeatureVector:
    return extract(item.instance)


def build_dataset(labeled: Sequence[LabeledInstance], workers: int = 1) -> HardnessDataset:
    """Extract features for every instance and pair them with labels."""
    vectors = parallel_map(_extract_item, list(labeled), workers)
    return HardnessDataset.from_labeled(labeled, vectors)


@dataclass
class RunManifest:
    """Record of one command run; written as manifest.json in its output directory."""

    subcommand: str
    config: dict[str, Any] = field(default_factory=dict)
    seeds: list[int] = field(default_factory=list)
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    version: str = __version__
    wall_time: float = 0.0
    status: str = "ok"
    failed_stage: str | None = None
    error: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def write(self, out_dir: Path) -> Path:
        return write_json(self.to_dict(), out_dir / MANIFEST_FILENAME)


def _fmt(x: float) -> str:
    return repr(float(x))


class TriagePipeline:
    """
    Runs generate -> label -> features -> train -> evaluate -> ablation -> bench.

    Usage:
        pipeline = TriagePipeline(load_config(path), Path("results"))
        manifest = pipeline.run()
    """

    STAGES = ("generate", "label", "features", "train", "evaluate", "ablation", "bench")

    def __init__(
        self,
        config: dict[str, Any],
        out_dir: Path,
        workers: int = 1,
        config_path: Path | None = None,
    ) -> None:
        """
        Initialize pipeline.

        Args:
            config: Full merged configuration
            out_dir: Results bundle directory
            workers: Worker processes for per-instance work
            config_path: Where the config came from (recorded in the manifest)
        """
        self.config = config
        self.out_dir = out_dir
        self.workers = workers
        self.config_path = config_path
        self.seeds = get_seeds(config)
        self._outputs: list[Path] = []
        self._labeled: list[LabeledInstance] = []
        self._dataset: HardnessDataset | None = None
        self._train_set: HardnessDataset | None = None
        self._test_set: HardnessDataset | None = None
        self._models: dict[int, HardnessModel] = {}
        self._importances: dict[int, np.ndarray] = {}

    @property
    def outputs(self) -> list[Path]:
        """Files written so far, relative to the bundle directory."""
        return [p.relative_to(self.out_dir) for p in self._outputs]

    def _record(self, path: Path) -> Path:
        self._outputs.append(path)
        return path

    def _section(self, name: str) -> dict[str, Any]:
        section = self.config.get(name, {})
        return section if isinstance(section, dict) else {}

    def _run_stage(self, name: str, fn: Callable[[], T]) -> T:
        logger.info("stage %s", name)
        try:
            return fn()
        except StageError:
            raise
        except (TriageError, OSError) as e:
            message = e.message if isinstance(e, TriageError) else str(e)
            raise StageError(name, message) from e

    def run(self) -> RunManifest:
        """
        Run every stage and write the manifest.

        Raises:
            StageError: Naming the failing stage (the manifest is still written)
        """
        start = time.perf_counter()
        manifest = RunManifest(
            subcommand="pipeline",
            config=self.config,
            seeds=list(self.seeds),
            inputs=[str(self.config_path)] if self.config_path else [],
        )
        self.out_dir.mkdir(parents=True, exist_ok=True)
        steps: list[tuple[str, Callable[[], Any]]] = [
            ("generate", self.generate),
            ("label", self.label),
            ("features", self.features),
            ("train", self.train),
            ("evaluate", self.evaluate),
            ("ablation", self.ablation),
            ("bench", self.bench),
        ]
        current: str | None = None
        try:
            for name, step in steps:
                current = name
                self._run_stage(name, step)
        except StageError as e:
            manifest.status = "failed"
            manifest.failed_stage = e.stage
            manifest.error = e.one_line()
            raise
        except Exception as e:
            manifest.status = "failed"
            manifest.failed_stage = current
            manifest.error = f"{type(e).__name__}: {e}"
            raise
        finally:
            manifest.outputs = sorted(p.as_posix() for p in self.outputs)
            manifest.wall_time = time.perf_counter() - start
            manifest.write(self.out_dir)
        return manifest

    def generate(self) -> None:
        mix = get_mix_config(self.config, "generate")
        self._labeled = gen_mixed(mix)
        logger.info("generated %d instances", len(self._labeled))

    def label(self) -> None:
        time_limit = float(self._section("label").get("time_limit", DEFAULT_TIME_LIMIT))
        self._labeled = label_dataset(self._labeled, time_limit, self.workers)
        for path in write_dataset(self._labeled, self.out_dir):
            self._record(path)
            self._record(label_path(path))

    def features(self) -> None:
        self._dataset = build_dataset(self._labeled, self.workers)
        self._record(self._dataset.write_csv(self.out_dir / "features.csv"))
        test_fraction = float(self._section("train").get("test_fraction", 0.2))
        self._train_set, self._test_set = train_test_split(self._dataset, test_fraction)

    def _sets(self) -> tuple[HardnessDataset, HardnessDataset]:
        if self._train_set is None or self._test_set is None:
            raise StageError("features", "feature stage has not run")
        return self._train_set, self._test_set

    def train(self) -> None:
        train_set, _ = self._sets()
        for seed in self.seeds:
            model = train(train_set, get_train_config(self.config, seed))
            self._models[seed] = model
            self._record(model.save(self.out_dir / "models" / f"model_seed{seed}.json"))

    def evaluate(self) -> None:
        _, test_set = self._sets()
        section = self._section("evaluate")
        threshold = float(section.get("threshold", 0.05))
        start = float(section.get("sweep_start", 0.006))
        step = float(section.get("sweep_step", 0.008))
        points = int(section.get("sweep_points", 11))
        grid = [round(start + step * i, 6) for i in range(points)]
        repeats = int(section.get("importance_repeats", 10))

        report_rows: list[list[str]] = []
        sweep_rows: list[list[str]] = []
        metrics: list[tuple[float, ...]] = []
        for seed in self.seeds:
            model = self._models[seed]
            report = evaluate(model, test_set, threshold)
            values = (
                report.mae,
                report.pearson_r,
                report.accuracy,
                report.precision,
                report.recall,
            )
            metrics.append(values)
            report_rows.append([str(seed), *(_fmt(v) for v in values)])
            for theta, accuracy in threshold_sweep(model, test_set, grid):
                sweep_rows.append([str(seed), _fmt(theta), _fmt(accuracy)])
            self._importances[seed] = permutation_importance(model, test_set, repeats, seed)

        means = [math.fsum(col) / len(metrics) for col in zip(*metrics, strict=True)]
        report_rows.append(["mean", *(_fmt(v) for v in means)])
        self._record(
            write_csv(self.out_dir / "classifier_report.csv", CLASSIFIER_HEADER, report_rows)
        )
        self._record(
            write_csv(
                self.out_dir / "threshold_sweep.csv", ["seed", "threshold", "accuracy"], sweep_rows
            )
        )

        importance_header = ["feature", *(f"seed_{s}" for s in self.seeds), "mean"]
        importance_rows = []
        for j, name in enumerate(FEATURE_NAMES):
            per_seed = [float(self._importances[s][j]) for s in self.seeds]
            importance_rows.append(
                [name, *(_fmt(v) for v in per_seed), _fmt(math.fsum(per_seed) / len(per_seed))]
            )
        self._record(
            write_csv(
                self.out_dir / "permutation_importance.csv", importance_header, importance_rows
            )
        )

    def ablation(self) -> None:
        if not self._section("ablation").get("enabled", True):
            logger.info("ablation disabled")
            return
        train_set, test_set = self._sets()
        importances = np.mean([self._importances[s] for s in self.seeds], axis=0)
        threshold = float(self._section("evaluate").get("threshold", 0.05))
        baseline, rows = logo_ablation(
            train_set,
            test_set,
            get_train_config(self.config, self.seeds[0]),
            self.seeds,
            importances=importances,
            threshold=threshold,
            workers=self.workers,
        )
        table = [row.to_row() for row in rows]
        table.append(["full_model", len(FEATURE_NAMES), _fmt(baseline), "", "", ""])
        self._record(write_csv(self.out_dir / "logo_ablation.csv", LOGO_HEADER, table))

    def _bench_mix(self) -> MixConfig:
        bench = self._section("bench")
        mix = get_mix_config(self.config, "generate")
        return dataclasses.replace(
            mix,
            n_hard=int(bench.get("n_hard", 50)),
            n_easy=int(bench.get("n_easy", 50)),
            rng_seed=int(bench.get("rng_seed", 2024)),
        )

    def _bench_model(self, selector: SelectorConfig) -> HardnessModel | None:
        model_path = self._section("bench").get("model_path")
        if model_path:
            path = Path(model_path)
            if not path.exists():
                raise StageError("bench", f"model file not found: {path}")
            return HardnessModel.load(path)
        if self._models:
            return self._models[self.seeds[0]]
        if selector.mode == LEARNED_MODE:
            raise StageError("bench", "learned routing needs model_path or a trained model")
        return None

    def bench(self) -> None:
        bench = self._section("bench")
        selector = get_selector_config(self.config)
        model = self._bench_model(selector)

        if bench.get("calibrate", True):
            threshold = calibrate_cv_threshold(cv_histogram(self._labeled))
            selector = dataclasses.replace(selector, cv_threshold=threshold)

        bench_set = label_dataset(gen_mixed(self._bench_mix()), selector.time_limit, self.workers)
        for path in write_bench_bundle(
            self.out_dir,
            bench_set,
            selector,
            model,
            node_budget=int(bench.get("node_budget", 16)),
            budgets=[int(b) for b in bench.get("budget_sweep", [])],
            workers=self.workers,
        ):
            self._record(path)


def write_bench_bundle(
    out_dir: Path,
    bench_set: Sequence[LabeledInstance],
    selector: SelectorConfig,
    model: HardnessModel | None = None,
    node_budget: int = 16,
    budgets: Sequence[int] = (),
    workers: int = 1,
) -> list[Path]:
    """
    Run the routing comparison on a labeled set and write its files.

    Writes cv_histogram.csv, hybrid_table.csv, hybrid_instances.csv,
    hybrid_report.json and, when ``budgets`` is non-empty, budget_sweep.csv.

    Returns:
        Paths written
    """
    if selector.mode == LEARNED_MODE and model is None:
        raise ModelError("learned routing needs a trained hardness model")
    written: list[Path] = []
    histogram = cv_histogram(bench_set)
    written.append(
        write_csv(
            out_dir / "cv_histogram.csv",
            ["tag", "name", "cv"],
            [[tag, name, _fmt(cv)] for tag, name, cv in histogram.rows],
        )
    )

    reports = run_bench(bench_set, selector, model, node_budget, workers)
    written.append(
        write_csv(out_dir / "hybrid_table.csv", SUMMARY_HEADER, [r.summary_row() for r in reports])
    )
    primary_label = "hybrid_learned" if selector.mode == LEARNED_MODE else "hybrid_selector"
    primary = next(r for r in reports if r.label == primary_label)
    written.append(
        write_csv(
            out_dir / "hybrid_instances.csv",
            RECORD_HEADER,
            [r.to_row() for r in primary.records],
        )
    )
    written.append(
        write_json(
            {
                "cv_threshold": selector.cv_threshold,
                "cv_histogram": histogram.to_dict(),
                "primary": primary.label,
                "reports": [
                    {k: v for k, v in r.to_dict().items() if k != "instances"} for r in reports
                ],
            },
            out_dir / "hybrid_report.json",
        )
    )

    if budgets:
        rows = budget_sweep(bench_set, budgets, selector.time_limit, workers)
        written.append(
            write_csv(out_dir / "budget_sweep.csv", BUDGET_HEADER, [row.to_row() for row in rows])
        )
    return written
