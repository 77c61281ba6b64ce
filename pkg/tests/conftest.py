from datetime import date, timedelta

import numpy as np
import pytest

from rafkit.series import MultivariateSeries, Variable


def make_series(values, targets=(0,), start=date(2021, 1, 1)):
    values = np.asarray(values, dtype=float)
    dates = tuple(start + timedelta(days=i) for i in range(values.shape[0]))
    variables = tuple(Variable(f"v{i}", "ft") for i in range(values.shape[1]))
    return MultivariateSeries(dates, values, variables, tuple(targets))


@pytest.fixture
def rng():
    return np.random.default_rng(20240511)
