import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def assert_quat(actual, expected, tol=1e-12):
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    scale = max(1.0, float(np.max(np.abs(expected))))
    assert np.max(np.abs(actual - expected)) <= tol * scale, f"{actual} != {expected}"
