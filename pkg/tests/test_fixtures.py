import numpy as np
import pytest

from fairscan.decomposition import decompose_atkinson, decompose_gini, decompose_variance
from fairscan.errors import InputError, ParameterError
from fairscan.fairness import gini_value
from fairscan.fixtures import (
    DEFAULT_MASKING_SPEC,
    SyntheticCohortSpec,
    generate_masking_cohort,
    generate_refinement_chain,
)


class TestMaskingCohort:
    def test_group_means_exact(self):
        cohort = generate_masking_cohort()
        grouped = cohort.grouped()
        means = grouped.means
        for label, target in zip(cohort.group_labels, DEFAULT_MASKING_SPEC.group_means):
            assert means[label] == pytest.approx(target, abs=1e-12)

    def test_equal_means_full_spread(self):
        spec = SyntheticCohortSpec(group_sizes=(10, 10), group_means=(0.5, 0.5), spread=1.0)
        cohort = generate_masking_cohort(spec)
        grouped = cohort.grouped()
        assert gini_value(grouped.mean_vector().values) == pytest.approx(0.0, abs=1e-12)
        assert gini_value(grouped.pooled()) == pytest.approx(0.5, abs=1e-12)

    def test_zero_spread_collapses_gap(self):
        spec = SyntheticCohortSpec(group_sizes=(4, 4), group_means=(0.3, 0.7), spread=0.0)
        grouped = generate_masking_cohort(spec).grouped()
        assert gini_value(grouped.pooled()) == pytest.approx(
            gini_value(grouped.mean_vector().values), abs=1e-12
        )

    def test_default_masks_individual_unfairness(self):
        grouped = generate_masking_cohort().grouped()
        between = gini_value(grouped.mean_vector().values)
        individual = gini_value(grouped.pooled())
        assert between < 0.05
        assert individual > 0.4

    def test_infeasible_spread_rejected(self):
        spec = SyntheticCohortSpec(group_sizes=(4, 4), group_means=(0.9, 0.5), spread=0.5)
        with pytest.raises(InputError):
            generate_masking_cohort(spec)

    def test_deterministic_for_fixed_seed(self):
        a = generate_masking_cohort()
        b = generate_masking_cohort()
        assert a.scores == b.scores

    def test_spec_validated(self):
        with pytest.raises(ParameterError):
            SyntheticCohortSpec(group_sizes=(5,), group_means=(0.5,))


class TestRefinementChain:
    def test_structure(self):
        chain = generate_refinement_chain(levels=2, seed=0, n_users=4)
        assert len(chain.levels) == 2
        assert len(set(chain.levels[0].values())) == 1
        assert len(set(chain.levels[1].values())) == 2

    def test_each_level_refines_previous(self):
        chain = generate_refinement_chain(levels=5, seed=3)
        for coarse, fine in zip(chain.levels, chain.levels[1:]):
            blocks: dict[str, set[str]] = {}
            for user, label in fine.items():
                blocks.setdefault(label, set()).add(coarse[user])
            # every fine block sits inside exactly one coarse block
            assert all(len(parents) == 1 for parents in blocks.values())

    def test_variance_between_non_decreasing(self):
        for seed in range(5):
            chain = generate_refinement_chain(levels=5, seed=seed)
            between = [decompose_variance(chain.grouped(l)).between for l in range(5)]
            assert all(b2 >= b1 - 1e-10 for b1, b2 in zip(between, between[1:]))

    def test_atkinson_identity_every_level(self):
        chain = generate_refinement_chain(levels=4, seed=7)
        for level in range(4):
            d = decompose_atkinson(chain.grouped(level), 0.5)
            assert (1 - d.total) == pytest.approx((1 - d.between) * (1 - d.within), abs=1e-10)

    def test_gini_residual_nonnegative_every_level(self):
        chain = generate_refinement_chain(levels=4, seed=9)
        for level in range(4):
            assert decompose_gini(chain.grouped(level)).residual >= -1e-10

    def test_deterministic(self):
        a = generate_refinement_chain(levels=3, seed=11)
        b = generate_refinement_chain(levels=3, seed=11)
        assert a == b

    def test_validation(self):
        with pytest.raises(ParameterError):
            generate_refinement_chain(levels=1)
