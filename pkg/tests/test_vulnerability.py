import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from taskrisk.clustering import ClusterSolution
from taskrisk.errors import ParameterError, TieWarning
from taskrisk.vulnerability import (
    SusceptibilityCriterion,
    label_clusters,
    score_criteria,
    subset_type,
    vulnerable_list,
)


def socs(n):
    return [f"{11 + i // 1000}-{1000 + i % 1000:04d}.00" for i in range(n)]


def crit(factor=0, direction="top", fraction=0.2, label="hazard-top-20"):
    return SusceptibilityCriterion(factor, direction, fraction, label)


class TestScoreCriteria:
    def test_top_20_of_ten(self):
        scores = np.arange(1.0, 11.0)[:, None]
        ids = socs(10)
        flags, types = score_criteria(scores, [crit()], ids)
        flagged = {s for s, f in flags.items() if f}
        assert flagged == {ids[9], ids[8]}
        assert types[ids[9]] == "hazard-top-20"
        assert types[ids[0]] == "none"

    def test_bottom_direction(self):
        scores = np.arange(1.0, 11.0)[:, None]
        ids = socs(10)
        flags, _ = score_criteria(scores, [crit(direction="bottom", label="low")], ids)
        assert {s for s, f in flags.items() if f} == {ids[0], ids[1]}

    @pytest.mark.parametrize("n", [5, 10, 37, 966])
    def test_flag_count_exactly_ceil(self, n):
        rng = np.random.default_rng(n)
        scores = rng.standard_normal((n, 2))
        ids = socs(n)
        flags, _ = score_criteria(scores, [crit()], ids)
        assert sum(1 for f in flags.values() if f) == math.ceil(0.2 * n)

    def test_ties_include_lower_row_index_first(self):
        scores = np.array([5.0, 5.0, 5.0, 1.0, 0.0])[:, None]
        ids = socs(5)
        with pytest.warns(TieWarning):
            flags, _ = score_criteria(scores, [crit()], ids)
        assert {s for s, f in flags.items() if f} == {ids[0]}

    def test_fraction_selecting_nothing_rejected(self):
        with pytest.raises(ParameterError):
            score_criteria(np.zeros((3, 1)), [crit()], socs(3))

    def test_up_to_seven_types_with_three_criteria(self):
        criteria = [
            crit(0, "top", 0.5, "a"),
            crit(1, "top", 0.5, "b"),
            crit(2, "top", 0.5, "c"),
        ]
        rng = np.random.default_rng(5)
        scores = rng.standard_normal((40, 3))
        _, types = score_criteria(scores, criteria, socs(40))
        nonempty = {t for t in types.values() if t != "none"}
        assert len(nonempty) <= 7
        assert nonempty <= {"a", "b", "c", "a+b", "a+c", "b+c", "a+b+c"}

    def test_bad_factor_index(self):
        with pytest.raises(ParameterError):
            score_criteria(np.zeros((10, 1)), [crit(factor=3)], socs(10))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.001, 1000.0))
    def test_scale_invariance(self, seed, scale):
        rng = np.random.default_rng(seed)
        scores = rng.standard_normal((25, 2))
        criteria = [crit(0, "top", 0.2, "t"), crit(1, "bottom", 0.2, "b")]
        base_flags, base_types = score_criteria(scores, criteria, socs(25))
        scaled_flags, scaled_types = score_criteria(scores * scale, criteria, socs(25))
        assert base_flags == scaled_flags and base_types == scaled_types


def solution_with_medoids(medoids, assignment):
    assignment = np.asarray(assignment)
    return ClusterSolution(
        k=len(medoids),
        medoids=list(medoids),
        assignment=assignment,
        cost_z=0.0,
        cost_history=[0.0],
    )


class TestLabelClusters:
    def make_f3(self):
        # three clusters of 4; medoid rows 0, 4, 8
        scores = np.zeros((12, 3))
        scores[0:4, 0] = 2.0  # cluster 0 high on the susceptible factor
        scores[4:8, 1] = 0.1
        scores[8:12, 1] = -0.1
        assignment = np.repeat([0, 1, 2], 4)
        return solution_with_medoids([0, 4, 8], assignment), scores

    def test_hazard_high_medoid_flagged(self):
        solution, scores = self.make_f3()
        flagged = label_clusters(solution, scores, {0}, {1}, threshold_sd=0.5)
        assert flagged == {0}

    def test_neither_condition_fires(self):
        solution, _ = self.make_f3()
        scores = np.zeros((12, 3))
        scores[:, 0] = -1.0  # susceptible scores low everywhere
        scores[:, 1] = 2.0  # bottleneck scores high everywhere
        assert label_clusters(solution, scores, {0}, {1}, threshold_sd=0.5) == set()

    def test_bottleneck_condition(self):
        solution, scores = self.make_f3()
        scores[4, 1] = -3.0  # medoid of cluster 1 deeply below threshold
        flagged = label_clusters(solution, scores, {0}, {1}, threshold_sd=0.5)
        assert flagged == {0, 1}

    def test_both_sets_empty_rejected(self):
        solution, scores = self.make_f3()
        with pytest.raises(ParameterError):
            label_clusters(solution, scores, set(), set())

    def test_single_sided_sets_allowed(self):
        solution, scores = self.make_f3()
        assert label_clusters(solution, scores, {0}, set()) == {0}
        assert label_clusters(solution, scores, set(), {1}) == set()

    def test_overlapping_sets_rejected(self):
        solution, scores = self.make_f3()
        with pytest.raises(ParameterError):
            label_clusters(solution, scores, {0, 1}, {1})

    def test_threshold_scales_with_scores(self):
        solution, scores = self.make_f3()
        base = label_clusters(solution, scores, {0}, {1}, threshold_sd=0.5)
        scaled = label_clusters(solution, scores * 3.0, {0}, {1}, threshold_sd=1.5)
        assert base == scaled


class TestVulnerableList:
    def test_members_of_flagged_clusters(self):
        solution, scores = TestLabelClusters().make_f3()
        ids = socs(12)
        criteria = [crit()]
        flags, types = score_criteria(scores, criteria, ids)
        report = vulnerable_list(criteria, flags, types, solution, {0}, ids, 0.5)
        assert report.vulnerable_occupations == sorted(ids[:4])
        assert report.counts_per_cluster == {0: 4, 1: 4, 2: 4}
        assert sum(report.counts_per_type.values()) == 12

    def test_empty_cluster_set_valid(self):
        solution, scores = TestLabelClusters().make_f3()
        ids = socs(12)
        criteria = [crit()]
        flags, types = score_criteria(scores, criteria, ids)
        report = vulnerable_list(criteria, flags, types, solution, set(), ids, 0.5)
        assert report.vulnerable_occupations == []

    def test_no_duplicates_and_subset_of_corpus(self):
        solution, scores = TestLabelClusters().make_f3()
        ids = socs(12)
        criteria = [crit()]
        flags, types = score_criteria(scores, criteria, ids)
        report = vulnerable_list(criteria, flags, types, solution, {0, 2}, ids, 0.5)
        assert len(report.vulnerable_occupations) == len(set(report.vulnerable_occupations))
        assert set(report.vulnerable_occupations) <= set(ids)


def test_subset_type_ordering():
    criteria = [crit(0, "top", 0.2, "a"), crit(1, "top", 0.2, "b")]
    assert subset_type(set(), criteria) == "none"
    assert subset_type({"b", "a"}, criteria) == "a+b"
