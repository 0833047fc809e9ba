"""Tests for instance generators and the family registry."""

import math

import pytest

from wdp_triage.errors import ConfigError
from wdp_triage.features import bid_density_cv
from wdp_triage.generators import (
    EASY,
    HARD,
    TRAP_PRESETS,
    Certificate,
    FamilyRegistry,
    LabeledInstance,
    MixConfig,
    TrapConfig,
    gen_erdos_renyi_mis,
    gen_kstar,
    gen_mixed,
    gen_preset,
    gen_star_trap_mis,
    gen_trap,
    mix_config_from_options,
    spawn_seeds,
)
from wdp_triage.generators.mis import star_certificate
from wdp_triage.graph import mwis_to_wdp
from wdp_triage.models import validate
from wdp_triage.solvers import brute_force_mwis, exact, greedy, optimality_gap


class TestKStar:
    """Tests for the k-star generator."""

    @pytest.mark.parametrize("k", range(2, 11))
    @pytest.mark.parametrize("epsilon", [0.0, 0.01, 0.5])
    def test_greedy_ratio_is_exact(self, k: int, epsilon: float) -> None:
        """Test greedy / optimal equals (1 + epsilon) / k with no tolerance."""
        instance, certificate = gen_kstar(TrapConfig(k=k, epsilon=epsilon))
        heuristic = greedy(instance).welfare
        optimal = exact(instance).welfare
        assert heuristic / optimal == (1 + epsilon) / k
        assert certificate.analytic_ratio == (1 + epsilon) / k
        assert certificate.greedy_welfare == heuristic
        assert certificate.optimal_welfare == optimal

    def test_certificate_ratio_example(self) -> None:
        """Test k=5, epsilon=0.01 gives ratio 0.202."""
        _, certificate = gen_kstar(TrapConfig(k=5, epsilon=0.01))
        assert certificate.analytic_ratio == pytest.approx(0.202, abs=1e-12)

    def test_shape(self) -> None:
        """Test one whale on every item and k fish on disjoint blocks."""
        instance, _ = gen_kstar(TrapConfig(k=4, m_trap=8))
        whale, *fish = instance.bids
        assert whale.items == tuple(range(8))
        blocks = [set(b.items) for b in fish]
        assert len(fish) == 4
        assert set().union(*blocks) == set(range(8))
        assert sum(len(b) for b in blocks) == 8

    def test_name(self) -> None:
        """Test the instance name carries k and epsilon."""
        instance, _ = gen_kstar(TrapConfig(k=5, epsilon=0.01))
        assert instance.name == "kstar-k5-eps0.01"

    def test_invalid_k(self) -> None:
        """Test k below 2 is rejected."""
        with pytest.raises(ConfigError, match="k must be at least 2"):
            gen_kstar(TrapConfig(k=1))

    def test_m_trap_too_small(self) -> None:
        """Test fewer items than fish is rejected."""
        with pytest.raises(ConfigError, match="cannot be partitioned"):
            gen_kstar(TrapConfig(k=4, m_trap=3))

    def test_negative_epsilon(self) -> None:
        """Test a negative margin is rejected."""
        with pytest.raises(ConfigError, match="epsilon"):
            gen_kstar(TrapConfig(k=3, epsilon=-0.1))

    def test_whale_must_stay_below_k(self) -> None:
        """Test a margin that lifts the whale to k or beyond is rejected."""
        with pytest.raises(ConfigError, match="below k"):
            gen_kstar(TrapConfig(k=2, epsilon=1.5))
        with pytest.raises(ConfigError, match="below k"):
            gen_kstar(TrapConfig(k=3, epsilon=2.0))


class TestTrap:
    """Tests for general traps and presets."""

    def test_certificate_matches_solvers(self) -> None:
        """Test greedy takes the whale and the optimum takes every fish."""
        instance, certificate = gen_trap(TrapConfig(k=3, v_w=100.0, v_f=40.0))
        assert greedy(instance).welfare == 100.0
        assert exact(instance).welfare == 120.0
        assert certificate.gap == pytest.approx(1 / 6)

    @pytest.mark.parametrize(
        "v_w,v_f",
        [(30.0, 40.0), (40.0, 40.0), (120.0, 40.0), (130.0, 40.0)],
    )
    def test_rejects_non_trap_values(self, v_w: float, v_f: float) -> None:
        """Test values outside v_f < v_w < k * v_f are rejected."""
        with pytest.raises(ConfigError):
            gen_trap(TrapConfig(k=3, v_w=v_w, v_f=v_f))

    @pytest.mark.parametrize("name", sorted(TRAP_PRESETS))
    def test_presets_match_certificates(self, name: str) -> None:
        """Test every preset's certificate agrees with the solvers."""
        instance, certificate = gen_preset(name)
        assert validate(instance) == []
        assert greedy(instance).welfare == pytest.approx(certificate.greedy_welfare)
        assert exact(instance).welfare == pytest.approx(certificate.optimal_welfare)

    def test_preset_gap_order(self) -> None:
        """Test presets are ordered by certificate gap."""
        order = ["tight_margin", "fewer_fish", "standard", "more_fish", "high_stakes", "two_whales"]
        gaps = [gen_preset(name)[1].gap for name in order]
        assert gaps == sorted(gaps)
        assert len(set(gaps)) == len(gaps)

    def test_two_whales_has_two_traps(self) -> None:
        """Test the two_whales preset composes two independent traps."""
        instance, certificate = gen_preset("two_whales")
        assert instance.n == 12
        assert certificate.greedy_welfare == 123.0

    def test_unknown_preset(self) -> None:
        """Test an unknown preset name raises."""
        with pytest.raises(ConfigError, match="unknown trap preset"):
            gen_preset("nope")


class TestCertificate:
    """Tests for Certificate."""

    def test_dict_round_trip(self) -> None:
        """Test from_dict(to_dict()) is lossless."""
        certificate = Certificate.from_welfare(1.01, 5.0)
        assert Certificate.from_dict(certificate.to_dict()) == certificate


class TestMixed:
    """Tests for the mixed hard/easy generator."""

    def test_counts_and_tags(self) -> None:
        """Test hard instances come first and carry their tags."""
        labeled = gen_mixed(MixConfig(n_hard=5, n_easy=4, rng_seed=1))
        assert [item.tag for item in labeled] == [HARD] * 5 + [EASY] * 4
        assert labeled[0].name == "hard-1-0000"
        assert labeled[5].name == "easy-1-0000"
        assert all(validate(item.instance) == [] for item in labeled)

    def test_deterministic(self) -> None:
        """Test the same config yields identical instances."""
        config = MixConfig(n_hard=3, n_easy=3, rng_seed=9)
        assert gen_mixed(config) == gen_mixed(config)

    def test_seed_changes_output(self) -> None:
        """Test a different seed yields different instances."""
        a = gen_mixed(MixConfig(n_hard=2, n_easy=2, rng_seed=1))
        b = gen_mixed(MixConfig(n_hard=2, n_easy=2, rng_seed=2))
        assert [x.instance.bids for x in a] != [x.instance.bids for x in b]

    def test_empty(self) -> None:
        """Test zero counts give an empty list."""
        assert gen_mixed(MixConfig(n_hard=0, n_easy=0)) == []

    def test_hard_instances_have_a_greedy_gap(self) -> None:
        """Test every hard instance loses welfare under greedy."""
        for item in gen_mixed(MixConfig(n_hard=10, n_easy=0, rng_seed=5)):
            assert greedy(item.instance).welfare < exact(item.instance).welfare

    def test_filler_free_hard_instances_are_certified(self) -> None:
        """Test hard instances without filler carry a matching certificate."""
        labeled = gen_mixed(MixConfig(n_hard=5, n_easy=0, filler_count=0, rng_seed=3))
        for item in labeled:
            assert item.certificate is not None
            assert greedy(item.instance).welfare == pytest.approx(
                item.certificate.greedy_welfare
            )
            assert exact(item.instance).welfare == pytest.approx(
                item.certificate.optimal_welfare
            )

    def test_hard_density_is_more_uniform(self) -> None:
        """Test hard instances have lower bid density CV than easy ones."""
        labeled = gen_mixed(MixConfig(n_hard=20, n_easy=20, rng_seed=8))
        hard = [bid_density_cv(x.instance) for x in labeled if x.tag == HARD]
        easy = [bid_density_cv(x.instance) for x in labeled if x.tag == EASY]
        assert sum(hard) / len(hard) < sum(easy) / len(easy)

    def test_item_pool_too_small(self) -> None:
        """Test an item budget below the largest trap draw is rejected."""
        with pytest.raises(ConfigError, match="item pool too small"):
            gen_mixed(MixConfig(n_items=10))

    def test_whale_ratio_must_keep_trap(self) -> None:
        """Test a whale ratio range that breaks the trap is rejected."""
        with pytest.raises(ConfigError, match="whale ratio"):
            gen_mixed(MixConfig(whale_ratio_low=0.4, k_min=2))

    def test_options_reject_unknown_keys(self) -> None:
        """Test loose options with an unknown key raise."""
        with pytest.raises(ConfigError, match="unknown mix option"):
            mix_config_from_options({"bogus": 1}, seed=0)

    def test_options_coerce_types(self) -> None:
        """Test option strings are converted to field types."""
        config = mix_config_from_options({"n_hard": "3", "fish_value_low": "25"}, seed=4)
        assert config.n_hard == 3
        assert config.fish_value_low == 25.0
        assert config.rng_seed == 4

    def test_filler_only_instances_are_nearly_greedy_optimal(self) -> None:
        """Test at least 95% of trap-free instances have a greedy gap of at most 0.05."""
        labeled = gen_mixed(MixConfig(n_hard=1000, n_easy=0, n_traps=0, rng_seed=17))
        gaps = [
            optimality_gap(exact(x.instance).welfare, greedy(x.instance).welfare) for x in labeled
        ]
        assert len(gaps) == 1000
        assert sum(gap <= 0.05 for gap in gaps) >= 950

    def test_filler_values_scale_with_fish(self) -> None:
        """Test filler values stay within the configured share of the fish value."""
        config = MixConfig(n_hard=20, n_easy=0, n_traps=1, k_min=2, k_max=2, rng_seed=4)
        for item in gen_mixed(config):
            bids = item.instance.bids
            v_f = bids[1].value
            fillers = bids[3:]
            assert len(fillers) == config.filler_count
            for bid in fillers:
                assert config.filler_ratio_low * v_f - 0.005 <= bid.value
                assert bid.value <= config.filler_ratio_high * v_f + 0.005

    def test_options_reject_fractional_counts(self) -> None:
        """Test a non-integral count option raises instead of truncating."""
        with pytest.raises(ConfigError, match="'n_hard' must be an integer"):
            mix_config_from_options({"n_hard": 2.5}, seed=0)
        with pytest.raises(ConfigError, match="'fish_value_low' must be a number"):
            mix_config_from_options({"fish_value_low": "cheap"}, seed=0)


class TestMis:
    """Tests for MWIS families."""

    def test_star_trap(self) -> None:
        """Test a heavy center loses to the leaves under greedy."""
        mwis = gen_star_trap_mis(5, 1.01, 1.0, seed=3)
        weight, nodes = brute_force_mwis(mwis)
        assert weight == 5.0
        assert len(nodes) == 5
        wdp = mwis_to_wdp(mwis)
        assert greedy(wdp).welfare == 1.01
        assert exact(wdp).welfare == 5.0

    def test_star_certificate(self) -> None:
        """Test the star certificate and its tie case."""
        certificate = star_certificate(5, 1.01, 1.0)
        assert certificate is not None
        assert certificate.analytic_ratio == pytest.approx(0.202)
        assert star_certificate(5, 1.0, 1.0) is None

    def test_star_rejects_small_k(self) -> None:
        """Test a star needs two leaves."""
        with pytest.raises(ConfigError):
            gen_star_trap_mis(1, 2.0, 1.0)

    def test_erdos_renyi(self) -> None:
        """Test G(n, p) weights stay in range and p=0 gives no edges."""
        mwis = gen_erdos_renyi_mis(12, 0.0, 2.0, 3.0, seed=1)
        assert mwis.edges == ()
        assert all(2.0 <= w <= 3.0 for w in mwis.weights)
        dense = gen_erdos_renyi_mis(6, 1.0, seed=1)
        assert len(dense.edges) == 15

    def test_erdos_renyi_rejects_bad_p(self) -> None:
        """Test p outside [0, 1] raises."""
        with pytest.raises(ConfigError):
            gen_erdos_renyi_mis(5, 1.5)


class TestFamilyRegistry:
    """Tests for FamilyRegistry."""

    def test_all_families_registered(self) -> None:
        """Test every built-in family is listed."""
        names = {f.family for f in FamilyRegistry.get_all_families()}
        assert {"kstar", "trap", "preset", "mixed", "star_mis", "er_mis"} <= names

    def test_unknown_family(self) -> None:
        """Test an unknown name raises ConfigError."""
        with pytest.raises(ConfigError, match="unknown family"):
            FamilyRegistry.get("nope")

    def test_kstar_family(self) -> None:
        """Test the kstar family forwards options."""
        family = FamilyRegistry.get("kstar")({"k": 5, "epsilon": 0.01})
        labeled = family.generate(1, seed=0)
        assert len(labeled) == 1
        assert labeled[0].tag == HARD
        assert labeled[0].certificate is not None
        assert labeled[0].certificate.analytic_ratio == pytest.approx(0.202)

    def test_repeated_instances_get_distinct_names(self) -> None:
        """Test count > 1 numbers otherwise identical instances."""
        labeled = FamilyRegistry.get("kstar")({"k": 3}).generate(3, seed=0)
        assert len({item.name for item in labeled}) == 3

    def test_preset_family_default_emits_all(self) -> None:
        """Test the preset family emits every preset by default."""
        labeled = FamilyRegistry.get("preset")().generate(1, seed=0)
        assert len(labeled) == len(TRAP_PRESETS)

    def test_mixed_family_splits_count(self) -> None:
        """Test an odd count puts the extra instance on the hard side."""
        labeled = FamilyRegistry.get("mixed")().generate(5, seed=2)
        assert [item.tag for item in labeled].count(HARD) == 3

    def test_er_family(self) -> None:
        """Test the er_mis family emits easy-tagged auctions."""
        labeled = FamilyRegistry.get("er_mis")({"n": 8, "p": 0.5}).generate(2, seed=1)
        assert all(isinstance(x, LabeledInstance) and x.tag == EASY for x in labeled)

    def test_trap_family_rejects_fractional_options(self) -> None:
        """Test item and fish counts must be whole numbers."""
        trap = FamilyRegistry.get("trap")
        with pytest.raises(ConfigError, match="'m_trap' must be an integer"):
            trap({"m_trap": 2.5}).generate(1, seed=0)
        with pytest.raises(ConfigError, match="'k' must be an integer"):
            trap({"k": "three"}).generate(1, seed=0)
        labeled = trap({"k": 3.0, "m_trap": "6"}).generate(1, seed=0)
        assert labeled[0].instance.m == 6


class TestSpawnSeeds:
    """Tests for spawn_seeds."""

    def test_deterministic_and_distinct(self) -> None:
        """Test seeds repeat across calls and differ from each other."""
        assert spawn_seeds(7, 5) == spawn_seeds(7, 5)
        assert len(set(spawn_seeds(7, 5))) == 5
        assert math.isfinite(float(spawn_seeds(7, 1)[0]))
