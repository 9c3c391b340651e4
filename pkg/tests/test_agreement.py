import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fairscan.agreement import (
    MeasureSeries,
    agreement_matrix,
    kendall_tau_b,
    rank_systems,
)
from fairscan.errors import InputError
from oracles import tau_b_matrix

small_ints = st.lists(st.integers(1, 3), min_size=2, max_size=6)


class TestKendallTauB:
    def test_identical_rankings(self):
        assert kendall_tau_b([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)

    def test_exact_reversal(self):
        assert kendall_tau_b([1, 2, 3, 4], [4, 3, 2, 1]) == pytest.approx(-1.0)

    def test_one_swap(self):
        assert kendall_tau_b([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(4 / 6)

    def test_single_tie_in_y(self):
        assert kendall_tau_b([1, 2, 3, 4], [1, 1, 2, 3]) == pytest.approx(
            5 / np.sqrt(30), abs=1e-12
        )

    def test_all_tied_is_undefined(self):
        assert kendall_tau_b([1, 1, 1], [1, 2, 3]) is None
        assert kendall_tau_b([1, 2, 3], [5, 5, 5]) is None

    def test_length_checks(self):
        with pytest.raises(InputError):
            kendall_tau_b([1], [1])
        with pytest.raises(InputError):
            kendall_tau_b([1, 2], [1, 2, 3])

    def test_matches_scipy_on_random_floats(self):
        scipy_stats = pytest.importorskip("scipy.stats")
        rng = np.random.default_rng(31)
        for _ in range(50):
            n = int(rng.integers(2, 20))
            x = rng.integers(0, 5, n).astype(float)
            y = rng.integers(0, 5, n).astype(float)
            got = kendall_tau_b(list(x), list(y))
            expected = scipy_stats.kendalltau(x, y).statistic
            if got is None:
                assert np.isnan(expected)
            else:
                assert got == pytest.approx(expected, abs=1e-12)

    @given(small_ints, small_ints)
    def test_symmetry(self, x, y):
        if len(x) != len(y):
            x, y = x[: min(len(x), len(y))], y[: min(len(x), len(y))]
        if len(x) < 2:
            return
        assert kendall_tau_b(x, y) == kendall_tau_b(y, x)

    @given(small_ints)
    def test_monotone_transform_invariance(self, x):
        y = [v * 10 + 7 for v in x]
        rng = np.random.default_rng(0)
        other = list(rng.integers(1, 4, len(x)).astype(float))
        assert kendall_tau_b(x, other) == kendall_tau_b(y, other)

    def test_exhaustive_enumeration_small(self):
        # full cross-check on every pair of length-4 vectors over {1,2,3}
        vecs = np.array(list(itertools.product([1, 2, 3], repeat=4)), dtype=float)
        oracle = tau_b_matrix(vecs)
        rows = [tuple(map(float, v)) for v in vecs]
        for a, xa in enumerate(rows):
            for b, xb in enumerate(rows):
                got = kendall_tau_b(xa, xb)
                if got is None:
                    assert np.isnan(oracle[a, b])
                else:
                    assert got == pytest.approx(oracle[a, b], abs=1e-12)


class TestRankSystems:
    def test_lower_better_sorts_ascending(self):
        r = rank_systems("gini", {"s1": 0.3, "s2": 0.1, "s3": 0.2}, "lower_better")
        assert r.flat() == ("s2", "s3", "s1")

    def test_higher_better_sorts_descending(self):
        r = rank_systems("min", {"s1": 0.3, "s2": 0.1}, "higher_better")
        assert r.flat() == ("s1", "s2")

    def test_tie_groups(self):
        r = rank_systems("sd", {"a": 0.2, "b": 0.1, "c": 0.2}, "lower_better")
        assert r.tiers == (("b",), ("a", "c"))


def _series(series_id, orientation, values):
    return MeasureSeries(series_id, orientation, values)


class TestAgreementMatrix:
    systems = [f"s{i}" for i in range(6)]

    def test_monotone_transforms_agree_perfectly(self):
        base = {s: float(i) for i, s in enumerate(self.systems)}
        squared = {s: v**2 for s, v in base.items()}
        m = agreement_matrix(
            [_series("ind:a", "lower_better", base)],
            [_series("grp:b", "lower_better", squared)],
        )
        assert m.cells[("ind:a", "grp:b")] == pytest.approx(1.0)

    def test_orientation_alignment(self):
        base = {s: float(i) for i, s in enumerate(self.systems)}
        negated = {s: -v for s, v in base.items()}
        m = agreement_matrix(
            [_series("ind:a", "higher_better", base)],
            [_series("grp:b", "lower_better", negated)],
        )
        assert m.cells[("ind:a", "grp:b")] == pytest.approx(1.0)

    def test_all_tied_column_undefined(self):
        tied = {s: 0.0 for s in self.systems}
        varying = {s: float(i) for i, s in enumerate(self.systems)}
        m = agreement_matrix(
            [_series("ind:gini", "lower_better", varying)],
            [_series("grp:min", "higher_better", tied)],
        )
        assert m.cells[("ind:gini", "grp:min")] is None
        assert "all-tied" in m.undefined_cause[("ind:gini", "grp:min")]

    def test_failed_series_excluded_with_reason(self):
        varying = {s: float(i) for i, s in enumerate(self.systems)}
        failed = dict(varying, s3=None)
        m = agreement_matrix(
            [_series("ind:a", "lower_better", varying)],
            [_series("grp:fstat", "lower_better", failed),
             _series("grp:gini", "lower_better", varying)],
        )
        assert m.col_ids == ("grp:gini",)
        assert m.excluded and m.excluded[0][0] == "grp:fstat"

    def test_equivalent_pairs_respect_threshold(self):
        a = {s: float(i) for i, s in enumerate(self.systems)}
        b = {s: float(i) for i, s in enumerate(self.systems)}
        c = {s: float(-i) for i, s in enumerate(self.systems)}
        m = agreement_matrix(
            [_series("ind:x", "lower_better", a)],
            [_series("grp:same", "lower_better", b), _series("grp:opposite", "lower_better", c)],
            threshold=0.9,
        )
        pairs = m.equivalent_pairs()
        assert ("ind:x", "grp:same", 1.0) in pairs
        assert all(p[1] != "grp:opposite" for p in pairs)

    def test_needs_two_systems(self):
        with pytest.raises(InputError):
            agreement_matrix(
                [_series("ind:a", "lower_better", {"s1": 0.0})],
                [_series("grp:b", "lower_better", {"s1": 0.0})],
            )

    def test_scaling_values_never_changes_cells(self):
        rng = np.random.default_rng(32)
        values = {s: float(v) for s, v in zip(self.systems, rng.random(6))}
        other = {s: float(v) for s, v in zip(self.systems, rng.random(6))}
        m1 = agreement_matrix(
            [_series("ind:a", "lower_better", values)],
            [_series("grp:b", "lower_better", other)],
        )
        scaled = {s: 1000.0 * v for s, v in values.items()}
        m2 = agreement_matrix(
            [_series("ind:a", "lower_better", scaled)],
            [_series("grp:b", "lower_better", other)],
        )
        assert m1.cells == m2.cells
