"""Tests for instance routing and the hybrid bench."""

import math
import statistics

import numpy as np
import pytest

from wdp_triage.errors import ConfigError, DatasetError, ModelError
from wdp_triage.features import bid_density_cv
from wdp_triage.generators import MixConfig, gen_mixed
from wdp_triage.generators.base import EASY, HARD, LabeledInstance
from wdp_triage.hardness import HardnessModel
from wdp_triage.models import Bid, Item, WdpInstance
from wdp_triage.pipeline import label_dataset
from wdp_triage.router import (
    ALWAYS_CHEAP,
    CHEAP,
    DEFAULT_CV_THRESHOLD,
    EXPENSIVE,
    LEARNED_MODE,
    ORACLE,
    CvHistogram,
    HybridReport,
    RouteRecord,
    SelectorConfig,
    budget_sweep,
    calibrate_cv_threshold,
    cv_histogram,
    evaluate_hybrid,
    hybrid_solve,
    run_bench,
    select,
)


def constant_model(output: float) -> HardnessModel:
    """A 'trained' model whose prediction is always ``output``."""
    model = HardnessModel.initialize(np.random.default_rng(0), hidden=4)
    model.params["W3"] = np.zeros_like(model.params["W3"])
    model.params["b3"] = np.array([output])
    model.trained = True
    return model


@pytest.fixture
def uneven_instance() -> WdpInstance:
    """Item 0 requested three times, item 1 once (density CV 0.5)."""
    return WdpInstance(
        items=(Item(id=0, capacity=2.0), Item(id=1)),
        bids=(
            Bid(id=0, value=3.0, items=(0,)),
            Bid(id=1, value=2.0, items=(0,)),
            Bid(id=2, value=1.0, items=(0, 1)),
        ),
        name="uneven",
    )


class TestSelect:
    """Tests for select."""

    def test_uniform_density_is_expensive(self, trap_instance: WdpInstance) -> None:
        """Test a trap (CV 0) goes to the exact solver."""
        assert select(trap_instance, SelectorConfig()) == EXPENSIVE

    def test_uneven_density_is_cheap(self, uneven_instance: WdpInstance) -> None:
        """Test CV above the threshold goes to greedy."""
        assert bid_density_cv(uneven_instance) == pytest.approx(0.5)
        assert select(uneven_instance, SelectorConfig()) == CHEAP

    def test_tie_goes_expensive(self, uneven_instance: WdpInstance) -> None:
        """Test CV exactly at the threshold routes to the exact solver."""
        config = SelectorConfig(cv_threshold=bid_density_cv(uneven_instance))
        assert select(uneven_instance, config) == EXPENSIVE

    def test_learned_needs_model(self, trap_instance: WdpInstance) -> None:
        """Test learned mode without a model raises."""
        with pytest.raises(ModelError):
            select(trap_instance, SelectorConfig(mode=LEARNED_MODE))

    def test_learned_threshold(self, uneven_instance: WdpInstance) -> None:
        """Test predicted gaps above the threshold route expensive."""
        config = SelectorConfig(mode=LEARNED_MODE, learned_threshold=0.05)
        assert select(uneven_instance, config, constant_model(0.5)) == EXPENSIVE
        assert select(uneven_instance, config, constant_model(0.0)) == CHEAP

    def test_expensive_share_falls_as_threshold_rises(
        self, labeled_mix: list[LabeledInstance], trained_model: HardnessModel
    ) -> None:
        """Test raising the learned threshold never routes more instances expensive."""
        instances = [item.instance for item in labeled_mix]
        counts: list[int] = []
        for threshold in np.linspace(0.0, 1.0, 11):
            config = SelectorConfig(mode=LEARNED_MODE, learned_threshold=float(threshold))
            counts.append(sum(select(x, config, trained_model) == EXPENSIVE for x in instances))
        assert all(a >= b for a, b in zip(counts, counts[1:]))
        assert counts[-1] == 0

    def test_hybrid_solve(self, trap_instance: WdpInstance, uneven_instance: WdpInstance) -> None:
        """Test the routed solver runs."""
        outcome = hybrid_solve(trap_instance, SelectorConfig())
        assert outcome.decision == EXPENSIVE
        assert outcome.result.welfare == 120.0
        assert not outcome.fell_back
        assert hybrid_solve(uneven_instance, SelectorConfig()).result.solver_name == "greedy"


class TestSelectorConfig:
    """Tests for SelectorConfig validation."""

    def test_defaults_valid(self) -> None:
        """Test the default config has no violations."""
        assert SelectorConfig().violations() == []
        assert SelectorConfig().cv_threshold == DEFAULT_CV_THRESHOLD

    def test_violations(self) -> None:
        """Test each bad setting is reported."""
        config = SelectorConfig(mode="magic", cv_threshold=math.nan, time_limit=0.0, node_limit=0)
        problems = config.violations()
        assert len(problems) == 4
        with pytest.raises(ConfigError, match="mode"):
            config.require_valid()


class TestEvaluateHybrid:
    """Tests for evaluate_hybrid and its reports."""

    def test_missing_tag(self, trap_instance: WdpInstance) -> None:
        """Test an untagged instance raises."""
        item = LabeledInstance(instance=trap_instance, optimal_welfare=120.0)
        with pytest.raises(DatasetError, match="tag"):
            evaluate_hybrid([item], SelectorConfig())

    def test_missing_optimum(self, trap_instance: WdpInstance) -> None:
        """Test an instance without optimal_welfare raises."""
        item = LabeledInstance(instance=trap_instance, tag=HARD)
        with pytest.raises(DatasetError, match="optimal_welfare"):
            evaluate_hybrid([item], SelectorConfig())

    def test_unknown_policy(self, trap_instance: WdpInstance) -> None:
        """Test an unknown policy raises."""
        item = LabeledInstance(instance=trap_instance, tag=HARD, optimal_welfare=120.0)
        with pytest.raises(ConfigError, match="policy"):
            evaluate_hybrid([item], SelectorConfig(), policy="coin_flip")

    def test_always_cheap_on_trap(self, trap_instance: WdpInstance) -> None:
        """Test greedy's gap on a trap is reported against the optimum."""
        item = LabeledInstance(instance=trap_instance, tag=HARD, optimal_welfare=120.0)
        report = evaluate_hybrid([item], SelectorConfig(), policy=ALWAYS_CHEAP)
        assert report.hard_gap == pytest.approx(1 / 6)
        assert report.easy_gap == 0.0
        assert report.routing_accuracy == 0.0
        assert report.records[0].decision == CHEAP

    def test_oracle_routes_by_tag(self, labeled_mix: list[LabeledInstance]) -> None:
        """Test the oracle sends hard to exact and easy to greedy."""
        report = evaluate_hybrid(labeled_mix[:20], SelectorConfig(), policy=ORACLE)
        assert report.routing_accuracy == 1.0
        assert report.hard_gap == 0.0

    def test_hard_gaps_dominate_easy(self, labeled_mix: list[LabeledInstance]) -> None:
        """Test the median hard greedy gap is over three times the median easy one."""
        gaps = {item.name: item.greedy_gap or 0.0 for item in labeled_mix}
        hard = [gaps[item.name] for item in labeled_mix if item.tag == HARD]
        easy = [gaps[item.name] for item in labeled_mix if item.tag == EASY]
        assert len(hard) + len(easy) >= 100
        assert statistics.median(hard) > 3 * statistics.median(easy)

    def test_report_from_records(self) -> None:
        """Test per-tag means and routing accuracy."""
        records = [
            RouteRecord("a", HARD, EXPENSIVE, 0.0, 0.1, None, 10.0, 10.0, True),
            RouteRecord("b", HARD, CHEAP, 0.4, 0.2, None, 6.0, 10.0, False),
            RouteRecord("c", EASY, CHEAP, 0.1, 0.6, 0.02, 9.0, 10.0, False),
        ]
        report = HybridReport.from_records("x", records)
        assert report.hard_gap == pytest.approx(0.2)
        assert report.easy_gap == pytest.approx(0.1)
        assert report.routing_accuracy == pytest.approx(2 / 3)
        assert report.to_dict()["instances"][2]["predicted_gap"] == "0.02"


class TestBench:
    """Tests for the CV histogram, calibration, bench rows and budget sweep."""

    def test_calibrate_midpoint(self) -> None:
        """Test the threshold lies halfway between the groups."""
        histogram = CvHistogram(hard=(0.1, 0.2), easy=(0.5, 0.6), rows=())
        assert histogram.separated
        assert calibrate_cv_threshold(histogram) == pytest.approx(0.35)

    def test_calibrate_overlap_and_empty(self) -> None:
        """Test overlapping groups still give the midpoint; a missing group gives the default."""
        overlap = CvHistogram(hard=(0.5,), easy=(0.3,), rows=())
        assert not overlap.separated
        assert calibrate_cv_threshold(overlap) == pytest.approx(0.4)
        empty = CvHistogram(hard=(0.1,), easy=(), rows=())
        assert calibrate_cv_threshold(empty) == DEFAULT_CV_THRESHOLD

    def test_histogram_skips_untagged(self, trap_instance: WdpInstance) -> None:
        """Test instances without a tag are left out."""
        histogram = cv_histogram([LabeledInstance(instance=trap_instance)])
        assert histogram.rows == ()
        assert histogram.max_hard is None

    def test_bench_rows(self, labeled_mix: list[LabeledInstance]) -> None:
        """Test row order and that routing never does worse than greedy alone."""
        subset = labeled_mix[:30]
        reports = run_bench(subset, SelectorConfig())
        labels = [r.label for r in reports]
        assert labels == ["greedy_only", "expensive_only", "hybrid_selector", "hybrid_oracle"]
        by_label = {r.label: r for r in reports}
        assert by_label["hybrid_selector"].overall_gap <= by_label["greedy_only"].overall_gap
        assert by_label["hybrid_oracle"].hard_gap == 0.0

    def test_bench_with_model(self, labeled_mix: list[LabeledInstance]) -> None:
        """Test a model adds the learned row before the oracle."""
        reports = run_bench(labeled_mix[:6], SelectorConfig(), model=constant_model(1.0))
        assert [r.label for r in reports][3:] == ["hybrid_learned", "hybrid_oracle"]
        assert reports[3].routing_accuracy == pytest.approx(
            sum(item.tag == HARD for item in labeled_mix[:6]) / 6
        )

    def test_calibrated_routing(self, labeled_mix: list[LabeledInstance]) -> None:
        """Test a calibrated CV threshold separates the mixed tags."""
        histogram = cv_histogram(labeled_mix)
        config = SelectorConfig(cv_threshold=calibrate_cv_threshold(histogram))
        report = evaluate_hybrid(labeled_mix, config)
        assert report.routing_accuracy >= 0.95

    def test_budget_sweep(self, labeled_mix: list[LabeledInstance]) -> None:
        """Test more nodes never worsen the gap or the proven share."""
        rows = budget_sweep(labeled_mix[:10], [1, 1000])
        assert [row.node_limit for row in rows] == [1, 1000]
        assert rows[1].overall_gap <= rows[0].overall_gap
        assert rows[1].proven_fraction >= rows[0].proven_fraction
        with pytest.raises(ConfigError):
            budget_sweep(labeled_mix, [])


@pytest.mark.slow
class TestRoutingQuality:
    """Routing on a fresh 50 hard + 50 easy set."""

    def test_hybrid_beats_greedy(self) -> None:
        """Test routing accuracy, zero hard gap and an overall gap within 0.02."""
        calibration = cv_histogram(gen_mixed(MixConfig(n_hard=100, n_easy=100, rng_seed=43)))
        bench_set = label_dataset(gen_mixed(MixConfig(n_hard=50, n_easy=50, rng_seed=42)))
        config = SelectorConfig(cv_threshold=calibrate_cv_threshold(calibration))
        reports = {r.label: r for r in run_bench(bench_set, config)}
        assert reports["hybrid_selector"].routing_accuracy >= 0.95
        assert reports["hybrid_selector"].overall_gap <= reports["greedy_only"].overall_gap
        assert reports["hybrid_selector"].hard_gap == 0.0
        assert reports["hybrid_selector"].overall_gap <= 0.02
