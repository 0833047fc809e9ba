"""Instance triage between greedy and the exact solver.

The CV selector routes an instance to the exact solver when its bid density
is nearly uniform across items, which is how trap structure shows up. The
learned selector routes by the regressor's predicted greedy gap.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass
from typing import Any

from wdp_triage.errors import ConfigError, DatasetError, ModelError
from wdp_triage.features import bid_density_cv, extract
from wdp_triage.generators.base import EASY, HARD, LabeledInstance
from wdp_triage.hardness.model import HardnessModel
from wdp_triage.models import WdpInstance
from wdp_triage.solvers.base import SolveResult, optimality_gap
from wdp_triage.solvers.exact import DEFAULT_TIME_LIMIT, exact
from wdp_triage.solvers.greedy import greedy
from wdp_triage.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

CHEAP = "cheap"
EXPENSIVE = "expensive"

CV_MODE = "cv_threshold"
LEARNED_MODE = "learned"
MODES = (CV_MODE, LEARNED_MODE)

DEFAULT_CV_THRESHOLD = 0.35
DEFAULT_LEARNED_THRESHOLD = 0.05

# Deterministic node budget for the "expensive only" bench row
BENCH_NODE_BUDGET = 16

# Routing policies understood by evaluate_hybrid
SELECTOR = "selector"
ORACLE = "oracle"
ALWAYS_CHEAP = "always_cheap"
ALWAYS_EXPENSIVE = "always_expensive"
POLICIES = (SELECTOR, ORACLE, ALWAYS_CHEAP, ALWAYS_EXPENSIVE)


@dataclass(frozen=True)
class SelectorConfig:
    """How instances are routed and how long the exact arm may run."""

    mode: str = CV_MODE
    cv_threshold: float = DEFAULT_CV_THRESHOLD
    learned_threshold: float = DEFAULT_LEARNED_THRESHOLD
    time_limit: float = DEFAULT_TIME_LIMIT
    node_limit: int | None = None

    def violations(self) -> list[str]:
        problems: list[str] = []
        if self.mode not in MODES:
            problems.append(f"mode must be one of {', '.join(MODES)}, got '{self.mode}'")
        for key, value in {
            "cv_threshold": self.cv_threshold,
            "learned_threshold": self.learned_threshold,
        }.items():
            if not math.isfinite(value):
                problems.append(f"{key} must be finite, got {value}")
        if not self.time_limit > 0:
            problems.append(f"time_limit must be positive, got {self.time_limit}")
        if self.node_limit is not None and self.node_limit < 1:
            problems.append(f"node_limit must be positive, got {self.node_limit}")
        return problems

    def require_valid(self) -> None:
        problems = self.violations()
        if problems:
            raise ConfigError("invalid selector config: " + "; ".join(problems))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def select(
    instance: WdpInstance, config: SelectorConfig, model: HardnessModel | None = None
) -> str:
    """
    Route one instance to ``"cheap"`` (greedy) or ``"expensive"`` (exact).

    CV mode: expensive iff bid density CV <= cv_threshold.
    Learned mode: expensive iff predicted gap > learned_threshold.

    Raises:
        ModelError: In learned mode without a trained model
    """
    config.require_valid()
    if config.mode == LEARNED_MODE:
        if model is None:
            raise ModelError("learned routing needs a trained hardness model")
        predicted = model.predict(extract(instance))
        return EXPENSIVE if predicted > config.learned_threshold else CHEAP
    return EXPENSIVE if bid_density_cv(instance) <= config.cv_threshold else CHEAP


@dataclass(frozen=True)
class HybridOutcome:
    """Result of solving one instance through the router."""

    decision: str
    result: SolveResult
    fell_back: bool = False


def solve_routed(instance: WdpInstance, decision: str, config: SelectorConfig) -> HybridOutcome:
    """
    Run the solver a decision points to.

    The exact arm keeps greedy's allocation if it somehow returns less.
    """
    cheap = greedy(instance)
    if decision == CHEAP:
        return HybridOutcome(decision=CHEAP, result=cheap)

    expensive = exact(instance, time_limit=config.time_limit, node_limit=config.node_limit)
    if expensive.welfare < cheap.welfare:
        logger.warning(
            "%s: exact returned %.6g below greedy %.6g; keeping greedy",
            instance.name or "instance",
            expensive.welfare,
            cheap.welfare,
        )
        return HybridOutcome(decision=EXPENSIVE, result=cheap, fell_back=True)
    return HybridOutcome(decision=EXPENSIVE, result=expensive)


def hybrid_solve(
    instance: WdpInstance, config: SelectorConfig, model: HardnessModel | None = None
) -> HybridOutcome:
    """Select a solver for the instance and run it."""
    return solve_routed(instance, select(instance, config, model), config)


@dataclass(frozen=True)
class RouteRecord:
    """Per-instance routing outcome against the labeled optimum."""

    name: str
    tag: str
    decision: str
    gap: float
    cv: float
    predicted_gap: float | None
    welfare: float
    optimal_welfare: float
    proven_optimal: bool

    def to_row(self) -> list[Any]:
        return [
            self.name,
            self.tag,
            self.decision,
            repr(self.gap),
            repr(self.cv),
            "" if self.predicted_gap is None else repr(self.predicted_gap),
        ]


RECORD_HEADER = ["name", "tag", "decision", "gap", "cv", "predicted_gap"]


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values) if values else 0.0


@dataclass(frozen=True)
class HybridReport:
    """Gap and routing accuracy of one routing policy over a tagged dataset."""

    label: str
    hard_gap: float
    easy_gap: float
    overall_gap: float
    routing_accuracy: float
    records: tuple[RouteRecord, ...]

    @classmethod
    def from_records(cls, label: str, records: Sequence[RouteRecord]) -> "HybridReport":
        routed_right = [(r.decision == EXPENSIVE) == (r.tag == HARD) for r in records]
        return cls(
            label=label,
            hard_gap=_mean([r.gap for r in records if r.tag == HARD]),
            easy_gap=_mean([r.gap for r in records if r.tag == EASY]),
            overall_gap=_mean([r.gap for r in records]),
            routing_accuracy=sum(routed_right) / len(records) if records else 0.0,
            records=tuple(records),
        )

    def summary_row(self) -> list[Any]:
        return [
            self.label,
            repr(self.hard_gap),
            repr(self.easy_gap),
            repr(self.overall_gap),
            repr(self.routing_accuracy),
        ]

    def to_dict(self) -> dict[str, Any]:
        """Convert to the hybrid report JSON document."""
        return {
            "label": self.label,
            "hard_gap": self.hard_gap,
            "easy_gap": self.easy_gap,
            "overall_gap": self.overall_gap,
            "routing_accuracy": self.routing_accuracy,
            "instances": [dict(zip(RECORD_HEADER, r.to_row(), strict=True)) for r in self.records],
        }


SUMMARY_HEADER = ["method", "hard_gap", "easy_gap", "overall_gap", "routing_accuracy"]


def _require_reference(item: LabeledInstance) -> tuple[str, float]:
    if item.tag not in (HARD, EASY):
        raise DatasetError(f"{item.name}: instance has no hard/easy tag")
    if item.optimal_welfare is None:
        raise DatasetError(f"{item.name}: instance has no optimal_welfare label")
    if item.proven_optimal is False:
        logger.warning("%s: reference welfare is not proven optimal", item.name)
    return item.tag, item.optimal_welfare


def _route_one(
    job: tuple[LabeledInstance, SelectorConfig, HardnessModel | None, str],
) -> RouteRecord:
    item, config, model, policy = job
    tag, optimal = _require_reference(item)
    instance = item.instance
    cv = bid_density_cv(instance)
    predicted = model.predict(extract(instance)) if model is not None else None

    if policy == ORACLE:
        decision = EXPENSIVE if tag == HARD else CHEAP
    elif policy == ALWAYS_CHEAP:
        decision = CHEAP
    elif policy == ALWAYS_EXPENSIVE:
        decision = EXPENSIVE
    else:
        decision = select(instance, config, model)

    outcome = solve_routed(instance, decision, config)
    return RouteRecord(
        name=item.name,
        tag=tag,
        decision=decision,
        gap=optimality_gap(optimal, outcome.result.welfare),
        cv=cv,
        predicted_gap=predicted,
        welfare=outcome.result.welfare,
        optimal_welfare=optimal,
        proven_optimal=outcome.result.proven_optimal,
    )


def evaluate_hybrid(
    dataset: Sequence[LabeledInstance],
    config: SelectorConfig,
    model: HardnessModel | None = None,
    policy: str = SELECTOR,
    label: str | None = None,
    workers: int = 1,
) -> HybridReport:
    """
    Route every instance, solve it, and score gaps against the labeled optima.

    Args:
        dataset: Instances with hard/easy tags and optimal_welfare labels
        config: Selector settings (also the exact arm's budget)
        model: Hardness model, required for learned routing
        policy: ``selector`` (use config), ``oracle`` (use tags),
            ``always_cheap`` or ``always_expensive``
        label: Row label in reports (defaults to the policy)
        workers: Process count

    Raises:
        DatasetError: If an instance lacks a tag or optimum
        ConfigError: On an unknown policy
    """
    if policy not in POLICIES:
        raise ConfigError(f"unknown routing policy '{policy}' (known: {', '.join(POLICIES)})")
    config.require_valid()
    for item in dataset:
        _require_reference(item)
    if policy == SELECTOR and config.mode == LEARNED_MODE and model is None:
        raise ModelError("learned routing needs a trained hardness model")

    jobs = [(item, config, model, policy) for item in dataset]
    records = parallel_map(_route_one, jobs, workers)
    report = HybridReport.from_records(label or policy, records)
    logger.debug(
        "%s: overall gap %.4f, routing accuracy %.3f",
        report.label,
        report.overall_gap,
        report.routing_accuracy,
    )
    return report


@dataclass(frozen=True)
class CvHistogram:
    """Raw bid density CVs grouped by tag."""

    hard: tuple[float, ...]
    easy: tuple[float, ...]
    rows: tuple[tuple[str, str, float], ...]

    @property
    def max_hard(self) -> float | None:
        return max(self.hard) if self.hard else None

    @property
    def min_easy(self) -> float | None:
        return min(self.easy) if self.easy else None

    @property
    def separated(self) -> bool:
        """True when every hard CV is below every easy CV."""
        if self.max_hard is None or self.min_easy is None:
            return True
        return self.max_hard < self.min_easy

    def to_dict(self) -> dict[str, Any]:
        return {
            "hard": list(self.hard),
            "easy": list(self.easy),
            "max_hard": self.max_hard,
            "min_easy": self.min_easy,
        }


def cv_histogram(dataset: Sequence[LabeledInstance]) -> CvHistogram:
    """Bid density CV of each tagged instance, grouped by tag."""
    hard: list[float] = []
    easy: list[float] = []
    rows: list[tuple[str, str, float]] = []
    for item in dataset:
        cv = bid_density_cv(item.instance)
        if item.tag == HARD:
            hard.append(cv)
        elif item.tag == EASY:
            easy.append(cv)
        else:
            continue
        rows.append((item.tag, item.name, cv))
    return CvHistogram(hard=tuple(hard), easy=tuple(easy), rows=tuple(rows))


def calibrate_cv_threshold(histogram: CvHistogram) -> float:
    """Midpoint between the largest hard CV and the smallest easy CV.

    Falls back to the default threshold when a tag group is empty.
    """
    if histogram.max_hard is None or histogram.min_easy is None:
        logger.warning("cannot calibrate CV threshold without both tags; using default")
        return DEFAULT_CV_THRESHOLD
    if not histogram.separated:
        logger.warning(
            "hard and easy CVs overlap (max hard %.4f >= min easy %.4f)",
            histogram.max_hard,
            histogram.min_easy,
        )
    return (histogram.max_hard + histogram.min_easy) / 2.0


def run_bench(
    dataset: Sequence[LabeledInstance],
    config: SelectorConfig,
    model: HardnessModel | None = None,
    expensive_node_budget: int = BENCH_NODE_BUDGET,
    workers: int = 1,
) -> list[HybridReport]:
    """
    Compare routing strategies on one tagged dataset.

    Rows: greedy_only, expensive_only (exact under a small node budget),
    hybrid_selector (CV), hybrid_learned (only with a model), hybrid_oracle.
    """
    cv_config = SelectorConfig(
        mode=CV_MODE,
        cv_threshold=config.cv_threshold,
        time_limit=config.time_limit,
        node_limit=config.node_limit,
    )
    budget_config = SelectorConfig(time_limit=config.time_limit, node_limit=expensive_node_budget)

    reports = [
        evaluate_hybrid(dataset, cv_config, None, ALWAYS_CHEAP, "greedy_only", workers),
        evaluate_hybrid(dataset, budget_config, None, ALWAYS_EXPENSIVE, "expensive_only", workers),
        evaluate_hybrid(dataset, cv_config, None, SELECTOR, "hybrid_selector", workers),
    ]
    if model is not None:
        learned_config = SelectorConfig(
            mode=LEARNED_MODE,
            learned_threshold=config.learned_threshold,
            time_limit=config.time_limit,
            node_limit=config.node_limit,
        )
        reports.append(
            evaluate_hybrid(dataset, learned_config, model, SELECTOR, "hybrid_learned", workers)
        )
    reports.append(evaluate_hybrid(dataset, cv_config, None, ORACLE, "hybrid_oracle", workers))
    return reports


@dataclass(frozen=True)
class BudgetRow:
    """Exact solver quality at one node budget."""

    node_limit: int
    hard_gap: float
    easy_gap: float
    overall_gap: float
    proven_fraction: float

    def to_row(self) -> list[Any]:
        return [
            self.node_limit,
            repr(self.hard_gap),
            repr(self.easy_gap),
            repr(self.overall_gap),
            repr(self.proven_fraction),
        ]


BUDGET_HEADER = ["node_limit", "hard_gap", "easy_gap", "overall_gap", "proven_fraction"]


def budget_sweep(
    dataset: Sequence[LabeledInstance],
    budgets: Sequence[int],
    time_limit: float = DEFAULT_TIME_LIMIT,
    workers: int = 1,
) -> list[BudgetRow]:
    """Mean gap and proven-optimal share of the exact solver per node budget."""
    if not budgets:
        raise ConfigError("budget sweep needs at least one node budget")
    rows: list[BudgetRow] = []
    for budget in budgets:
        config = SelectorConfig(time_limit=time_limit, node_limit=int(budget))
        report = evaluate_hybrid(
            dataset, config, None, ALWAYS_EXPENSIVE, f"nodes_{budget}", workers
        )
        proven = [r.proven_optimal for r in report.records]
        rows.append(
            BudgetRow(
                node_limit=int(budget),
                hard_gap=report.hard_gap,
                easy_gap=report.easy_gap,
                overall_gap=report.overall_gap,
                proven_fraction=sum(proven) / len(proven) if proven else 0.0,
            )
        )
    return rows
