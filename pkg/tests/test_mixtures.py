"""Tests for training mixtures, the strategy suite and the budget frontier."""

import pytest
from hypothesis import given, settings, strategies as st

from src.models.annotation import Origin, Split
from src.models.errors import ConfigError, InfeasibleBudget, PoolOverlap, PoolTooSmall
from src.models.mixture import BudgetParams, MixtureSpec
from src.services.mixtures import budget_frontier, build_mixture, strategy_suite, suite_specs

from tests.builders import manifest


def pools(n_real: int = 1000, n_synth: int = 1000):
    real = manifest([f"real_{i:04d}.png" for i in range(n_real)], origin=Origin.REAL)
    synth = manifest([f"synth_{i:04d}.png" for i in range(n_synth)], origin=Origin.SYNTHETIC)
    return real, synth


class TestMixtureSpec:
    """Test cases for mixture names."""

    def test_name_round_trip(self):
        """R500_S500 parses into counts and prints back."""
        spec = MixtureSpec.from_name("R500_S500", seed=3)
        assert (spec.n_real, spec.n_synth, spec.seed) == (500, 500, 3)
        assert spec.name == "R500_S500"
        assert spec.total == 1000

    def test_malformed_name(self):
        """Names outside the R<n>_S<m> pattern raise ConfigError."""
        with pytest.raises(ConfigError):
            MixtureSpec.from_name("500_500")

    def test_negative_counts(self):
        """Counts must be nonnegative."""
        with pytest.raises(ValueError):
            MixtureSpec(n_real=-1, n_synth=0)


class TestBuildMixture:
    """Test cases for build_mixture."""

    def setup_method(self):
        self.real, self.synth = pools()

    def test_half_and_half(self):
        """R500_S500 from 1000/1000 pools holds 500 of each."""
        mixture = build_mixture(self.real, self.synth, MixtureSpec(500, 500, seed=1))
        names = mixture.image_names
        assert len(names) == len(set(names)) == 1000
        assert sum(n.startswith("real_") for n in names) == 500
        assert mixture.origin == Origin.MIXED
        assert mixture.split == Split.TRAIN
        assert mixture.provenance.extra['mixture']['name'] == "R500_S500"

    def test_real_only(self):
        """R1000_S0 takes the whole real pool."""
        mixture = build_mixture(self.real, self.synth, MixtureSpec(1000, 0))
        assert sorted(mixture.image_names) == sorted(self.real.image_names)
        assert mixture.origin == Origin.REAL

    def test_empty_mixture(self):
        """R0_S0 gives an empty manifest."""
        mixture = build_mixture(self.real, self.synth, MixtureSpec(0, 0))
        assert len(mixture) == 0
        assert mixture.origin == Origin.REAL

    def test_synthetic_only_origin(self):
        """A mixture without real images is synthetic."""
        assert build_mixture(self.real, self.synth, MixtureSpec(0, 10)).origin == Origin.SYNTHETIC

    def test_pool_too_small(self):
        """Asking for more images than a pool holds raises PoolTooSmall."""
        with pytest.raises(PoolTooSmall):
            build_mixture(self.real, self.synth, MixtureSpec(1001, 0))

    def test_pool_overlap(self):
        """Pools sharing image names raise PoolOverlap."""
        with pytest.raises(PoolOverlap):
            build_mixture(self.real, self.real, MixtureSpec(1, 1))

    def test_seed_decides_sample_and_order(self):
        """Equal seeds give equal manifests; another seed changes them."""
        first = build_mixture(self.real, self.synth, MixtureSpec(250, 750, seed=2))
        second = build_mixture(self.real, self.synth, MixtureSpec(250, 750, seed=2))
        other = build_mixture(self.real, self.synth, MixtureSpec(250, 750, seed=3))
        assert first.image_names == second.image_names
        assert first.image_names != other.image_names


class TestStrategySuite:
    """Test cases for the strategy suite."""

    def test_eleven_specs_per_seed(self):
        """Three strategies contribute 4 + 3 + 4 specs."""
        names = [(strategy, spec.name) for strategy, spec in suite_specs(seed=0)]
        assert names == [
            ('real_only', 'R250_S0'), ('real_only', 'R500_S0'), ('real_only', 'R750_S0'),
            ('real_only', 'R1000_S0'),
            ('mixed', 'R750_S250'), ('mixed', 'R500_S500'), ('mixed', 'R250_S750'),
            ('synthetic_only', 'R0_S250'), ('synthetic_only', 'R0_S500'), ('synthetic_only', 'R0_S750'),
            ('synthetic_only', 'R0_S1000'),
        ]

    def test_full_suite(self):
        """Five seeds give 55 manifests; mixed ones hold exactly 1000 images."""
        real, synth = pools()
        suite = strategy_suite(real, synth, seeds=[0, 1, 2, 3, 4])
        assert len(suite) == 55
        mixed = [m for _, m in suite if m.provenance.extra['strategy'] == 'mixed']
        assert len(mixed) == 15
        assert all(len(m) == 1000 for m in mixed)
        for spec, m in suite:
            assert len(m) == spec.total
            assert len(set(m.image_names)) == len(m)

    def test_suite_is_deterministic(self):
        """The same seed list twice gives identical manifests."""
        real, synth = pools()
        first = strategy_suite(real, synth, seeds=[7, 8])
        second = strategy_suite(real, synth, seeds=[7, 8])
        assert [m.to_dict() for _, m in first] == [m.to_dict() for _, m in second]

    def test_small_pools(self):
        """Pools below the suite total raise PoolTooSmall."""
        real, synth = pools(n_real=999)
        with pytest.raises(PoolTooSmall):
            strategy_suite(real, synth, seeds=[0])


class TestBudgetFrontier:
    """Test cases for the budget frontier."""

    def test_two_to_one_substitution(self):
        """C_R=2, C_S=1, C_T=1000 at step 250 trades one real image for two synthetic."""
        pairs = budget_frontier(BudgetParams(c_real=2, c_synth=1, c_total=1000), step=250)
        assert pairs == [(0, 1000), (250, 500), (500, 0)]

    def test_free_synthetic_needs_a_cap(self):
        """Free synthetic images are only bounded by n_synth_max."""
        params = BudgetParams(c_real=1, c_synth=0, c_total=0)
        with pytest.raises(ValueError):
            budget_frontier(params, step=1)
        assert budget_frontier(params, step=1, n_synth_max=50) == [(0, 50)]

    def test_zero_budgets(self):
        """Zero budgets with positive costs leave only (0, 0)."""
        params = BudgetParams(c_real=1, c_synth=1, c_total=0, t_real=1, t_synth=1, t_total=0)
        assert budget_frontier(params, step=5) == [(0, 0)]

    def test_time_budget_binds(self):
        """The tighter of cost and time decides n_synth."""
        params = BudgetParams(c_real=2, c_synth=1, c_total=1000, t_real=1, t_synth=1, t_total=600)
        assert budget_frontier(params, step=250) == [(0, 600), (250, 350), (500, 0)]

    def test_min_total_makes_it_infeasible(self):
        """No pair reaching min_total raises InfeasibleBudget."""
        with pytest.raises(InfeasibleBudget):
            budget_frontier(BudgetParams(c_real=2, c_synth=1, c_total=1000), step=250, min_total=2000)

    def test_invalid_step(self):
        """Step below 1 is rejected."""
        with pytest.raises(ValueError):
            budget_frontier(BudgetParams(c_real=2, c_synth=1, c_total=1000), step=0)


@pytest.mark.property
class TestBudgetProperties:
    """Property-based tests for the budget frontier."""

    @given(
        c_real=st.integers(1, 20), c_synth=st.integers(1, 20), c_total=st.integers(0, 2000),
        t_real=st.integers(0, 5), t_synth=st.integers(0, 5), t_total=st.integers(0, 2000),
        step=st.integers(1, 200)
    )
    @settings(max_examples=200, deadline=2000)
    def test_property_pairs_are_feasible_and_maximal(self, c_real, c_synth, c_total, t_real, t_synth,
                                                     t_total, step):
        """
        **Property: every frontier pair fits both budgets and one more synthetic image would not**
        """
        params = BudgetParams(c_real, c_synth, c_total, t_real, t_synth, t_total)
        try:
            pairs = budget_frontier(params, step)
        except InfeasibleBudget:
            return

        for n_real, n_synth in pairs:
            assert n_real % step == 0
            assert n_real * c_real + n_synth * c_synth <= c_total
            assert n_real * t_real + n_synth * t_synth <= t_total
            over_cost = n_real * c_real + (n_synth + 1) * c_synth > c_total
            over_time = n_real * t_real + (n_synth + 1) * t_synth > t_total
            assert over_cost or over_time or n_synth == 10 * max(c_total, t_total)
