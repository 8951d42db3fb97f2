import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from rfocus.stats import student_t_sf, welch_p_values_by_column, welch_t_test


class TestStudentTSf:
    # frozen reference values from an independent t-distribution implementation
    @pytest.mark.parametrize("t, df, expected", [
        (2.776445105, 4, 0.02500000000505973),
        (2.0, 10, 0.036694017385370196),
        (1.0, 1, 0.24999999999999978),
        (0.5, 30.5, 0.31033176195726286),
    ])
    def test_reference_values(self, t, df, expected):
        assert student_t_sf(t, df) == pytest.approx(expected, abs=1e-6)

    def test_symmetry(self):
        assert student_t_sf(0.0, 5) == pytest.approx(0.5, abs=1e-12)
        assert student_t_sf(-2.0, 10) == pytest.approx(1.0 - student_t_sf(2.0, 10),
                                                       abs=1e-12)

    def test_infinite_statistic(self):
        assert student_t_sf(math.inf, 3) == 0.0
        assert student_t_sf(-math.inf, 3) == 1.0

    def test_invalid_df(self):
        with pytest.raises(ValueError):
            student_t_sf(1.0, 0)

    @given(hst.floats(-50, 50), hst.floats(0.5, 500))
    @settings(max_examples=80)
    def test_is_probability_and_decreasing(self, t, df):
        p = student_t_sf(t, df)
        assert 0.0 <= p <= 1.0
        assert student_t_sf(t + 1.0, df) <= p + 1e-12


class TestWelchTTest:
    def test_reference_example(self):
        a = [3.1, 2.9, 3.3, 3.0, 3.2]
        b = [2.5, 2.7, 2.4, 2.8]
        res = welch_t_test(a, b)
        assert res.statistic == pytest.approx(4.330127018922197, rel=1e-9)
        assert res.df == pytest.approx(6.047244094488189, rel=1e-9)
        assert res.p_value == pytest.approx(0.004838942460239547, rel=1e-6)

    def test_symmetric_in_sign(self):
        a = [1.0, 2.0, 3.0]
        b = [2.0, 3.0, 4.0]
        assert welch_t_test(a, b).p_value == pytest.approx(
            welch_t_test(b, a).p_value, abs=1e-12)

    def test_zero_variance_same_means(self):
        res = welch_t_test([2.0, 2.0], [2.0, 2.0])
        assert res.p_value == 1.0

    def test_zero_variance_different_means(self):
        res = welch_t_test([2.0, 2.0], [3.0, 3.0])
        assert res.p_value == 0.0
        assert math.isinf(res.statistic)

    def test_needs_two_observations(self):
        with pytest.raises(ValueError):
            welch_t_test([1.0], [1.0, 2.0])

    @given(hst.lists(hst.floats(-100, 100), min_size=2, max_size=20),
           hst.lists(hst.floats(-100, 100), min_size=2, max_size=20))
    @settings(max_examples=60)
    def test_p_in_unit_interval(self, a, b):
        assert 0.0 <= welch_t_test(a, b).p_value <= 1.0


class TestVectorizedWelch:
    def test_matches_scalar_test(self):
        rng = np.random.default_rng(5)
        states = rng.random((60, 12)) < 0.5
        values = rng.normal(0, 1, 60) + states[:, 3] * 0.8
        cols = np.arange(12)
        pvals = welch_p_values_by_column(states, values, cols)
        for j in cols:
            on = values[states[:, j]]
            off = values[~states[:, j]]
            if on.size >= 2 and off.size >= 2:
                expected = welch_t_test(on, off).p_value
                assert pvals[j] == pytest.approx(expected, abs=1e-10)

    def test_small_group_gets_p_one(self):
        states = np.zeros((10, 2), dtype=bool)
        states[0, 0] = True  # only one "on" sample in column 0
        values = np.arange(10.0)
        pvals = welch_p_values_by_column(states, values, np.array([0, 1]))
        assert pvals[0] == 1.0
        assert pvals[1] == 1.0  # column 1 has no on-group at all

    def test_detects_strong_effect(self):
        rng = np.random.default_rng(8)
        states = rng.random((200, 4)) < 0.5
        values = states[:, 2] * 5.0 + rng.normal(0, 0.1, 200)
        pvals = welch_p_values_by_column(states, values, np.arange(4))
        assert pvals[2] < 1e-10
        assert pvals[0] > 0.01
