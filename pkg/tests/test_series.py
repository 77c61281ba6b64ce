from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from rafkit.series import MultivariateSeries, Variable, window_at, zscore_window

from conftest import make_series


class TestMultivariateSeries:
    def test_valid_construction(self):
        s = make_series(np.arange(12.0).reshape(6, 2), targets=(1,))
        assert s.length == 6 and s.width == 2
        assert s.target_names == ("v1",)

    def test_rejects_gap_in_dates(self):
        dates = (date(2021, 1, 1), date(2021, 1, 2), date(2021, 1, 4))
        with pytest.raises(ValueError, match="1-day steps"):
            MultivariateSeries(dates, np.zeros((3, 1)), (Variable("a"),))

    def test_rejects_descending_dates(self):
        dates = (date(2021, 1, 2), date(2021, 1, 1))
        with pytest.raises(ValueError, match="1-day steps"):
            MultivariateSeries(dates, np.zeros((2, 1)), (Variable("a"),))

    def test_row_count_mismatch(self):
        dates = (date(2021, 1, 1), date(2021, 1, 2))
        with pytest.raises(ValueError, match="value rows"):
            MultivariateSeries(dates, np.zeros((3, 1)), (Variable("a"),))

    def test_rejects_bad_targets(self):
        with pytest.raises(ValueError, match="out of range"):
            make_series(np.zeros((3, 2)), targets=(5,))
        with pytest.raises(ValueError, match="duplicate"):
            make_series(np.zeros((3, 2)), targets=(0, 0))

    def test_values_immutable(self):
        s = make_series(np.zeros((3, 2)))
        with pytest.raises(ValueError):
            s.values[0, 0] = 1.0


class TestWindowAt:
    def test_basic_slice(self):
        # T=10, m=2, origin=4, l=3, h=2 -> lookback rows 2..4, future rows 5..6
        s = make_series(np.arange(20.0).reshape(10, 2))
        pair = window_at(s, origin=4, l=3, h=2)
        np.testing.assert_array_equal(pair.lookback, s.values[2:5])
        np.testing.assert_array_equal(pair.future, s.values[5:7])
        assert pair.origin == 4

    def test_boundary_accepted(self):
        s = make_series(np.arange(10.0).reshape(10, 1))
        pair = window_at(s, origin=2, l=3, h=1)
        np.testing.assert_array_equal(pair.lookback, s.values[0:3])

    def test_out_of_range_names_arguments(self):
        s = make_series(np.arange(10.0).reshape(10, 1))
        with pytest.raises(ValueError, match=r"origin=1.*l=3.*h=1.*T=10"):
            window_at(s, origin=1, l=3, h=1)
        with pytest.raises(ValueError, match="out of range"):
            window_at(s, origin=9, l=3, h=1)

    @given(
        origin=st.integers(min_value=0, max_value=29),
        l=st.integers(min_value=1, max_value=15),
        h=st.integers(min_value=1, max_value=15),
    )
    def test_pure_slice_property(self, origin, l, h):
        # concatenating lookback then future reproduces the contiguous rows
        s = make_series(np.arange(60.0).reshape(30, 2))
        if origin - l + 1 < 0 or origin + h > 29:
            with pytest.raises(ValueError):
                window_at(s, origin, l, h)
            return
        pair = window_at(s, origin, l, h)
        joined = np.vstack([pair.lookback, pair.future])
        np.testing.assert_array_equal(joined, s.values[origin - l + 1 : origin + h + 1])


class TestZscoreWindow:
    def test_hand_example(self):
        # [1,2,3]: population std sqrt(2/3), z = +-1.2247
        z = zscore_window(np.array([[1.0], [2.0], [3.0]]))
        np.testing.assert_allclose(
            z.ravel(), [-1.224744871391589, 0.0, 1.224744871391589], atol=1e-12
        )

    def test_constant_column_maps_to_zero(self):
        z = zscore_window(np.array([[5.0], [5.0], [5.0]]))
        np.testing.assert_array_equal(z, np.zeros((3, 1)))

    def test_standardized_input_is_fixed_point(self):
        x = np.array([[-1.224744871391589], [0.0], [1.224744871391589]])
        np.testing.assert_allclose(zscore_window(x), x, atol=1e-12)

    @settings(max_examples=100)
    @given(
        hnp.arrays(
            np.float64,
            hnp.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=20),
            elements=st.floats(-1e6, 1e6, allow_nan=False),
        )
    )
    def test_idempotent(self, x):
        once = zscore_window(x)
        twice = zscore_window(once)
        np.testing.assert_allclose(twice, once, atol=1e-10)

    def test_zscored_columns_have_unit_std(self, rng):
        x = rng.normal(3.0, 5.0, size=(40, 4))
        z = zscore_window(x)
        np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(z.std(axis=0), 1.0, atol=1e-12)
