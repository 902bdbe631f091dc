import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import assert_quat
from finestruct import quaternion as qt
from finestruct.errors import SingularityError

component = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
quats = st.lists(component, min_size=4, max_size=4).map(np.array)
units = st.lists(component, min_size=3, max_size=3).filter(lambda v: math.hypot(*v) > 0.1).map(qt.unit_vector)


def test_basis_products():
    assert_quat(qt.mul(qt.E1, qt.E2), qt.E3)
    assert_quat(qt.mul(qt.E2, qt.E1), -qt.E3)
    assert_quat(qt.mul(qt.E1, qt.E1), -qt.ONE)


def test_identity_and_conjugate_pair():
    q = np.array([0.3, -1.2, 2.0, 0.5])
    assert_quat(qt.mul(q, qt.ONE), q)
    assert_quat(qt.mul(qt.ONE + qt.E1, qt.ONE - qt.E1), [2, 0, 0, 0])


def test_conj_mod_inv_examples():
    conj, mod, inverse = qt.conj_mod_inv(qt.ONE)
    assert_quat(conj, qt.ONE)
    assert mod == 1.0
    assert_quat(inverse, qt.ONE)
    conj, mod, inverse = qt.conj_mod_inv(qt.E1)
    assert_quat(conj, -qt.E1)
    assert mod == 1.0
    assert_quat(inverse, -qt.E1)
    assert qt.conj_mod_inv([1, 1, 1, 1])[1] == 2.0


def test_conj_mod_inv_of_zero_has_no_inverse():
    conj, mod, inverse = qt.conj_mod_inv(np.zeros(4))
    assert mod == 0.0
    assert inverse is None
    with pytest.raises(SingularityError):
        qt.inv(np.zeros(4))


def test_slice_coords_examples():
    assert qt.slice_coords([3, 0, 0, 0]) == (3.0, 0.0, None)
    u, v, unit = qt.slice_coords([1, 2, 0, 0])
    assert (u, v) == (1.0, 2.0)
    assert_quat(unit, qt.E1)
    u, v, unit = qt.slice_coords([1, 1, 1, 0])
    assert u == 1.0 and v == pytest.approx(math.sqrt(2))
    assert_quat(unit, [0, 1 / math.sqrt(2), 1 / math.sqrt(2), 0])


def test_power_matches_repeated_product():
    q = np.array([0.4, 0.3, -0.7, 0.2])
    acc = qt.ONE
    for n in range(1, 7):
        acc = qt.mul(acc, q)
        assert_quat(qt.power(q, n), acc)
    assert_quat(qt.mul(qt.power(q, -3), qt.power(q, 3)), qt.ONE)


@settings(max_examples=200, deadline=None)
@given(quats, quats, quats)
def test_associative_and_distributive(a, b, c):
    scale = 1.0 + float(qt.norm(a) * qt.norm(b) * qt.norm(c))
    assert np.max(np.abs(qt.mul(qt.mul(a, b), c) - qt.mul(a, qt.mul(b, c)))) <= 1e-12 * scale
    scale = 1.0 + float(qt.norm(a) * (qt.norm(b) + qt.norm(c)))
    assert np.max(np.abs(qt.mul(a, b + c) - qt.mul(a, b) - qt.mul(a, c))) <= 1e-12 * scale


@settings(max_examples=200, deadline=None)
@given(quats, quats)
def test_conjugate_reverses_products(a, b):
    scale = 1.0 + float(qt.norm(a) * qt.norm(b))
    assert np.max(np.abs(qt.conj(qt.mul(a, b)) - qt.mul(qt.conj(b), qt.conj(a)))) <= 1e-12 * scale


@settings(max_examples=200, deadline=None)
@given(component, component, units)
def test_slice_embedding_norm(u, v, unit):
    z = qt.from_slice(u, v, unit)
    zbar = qt.from_slice(u, -v, unit)
    assert_quat(qt.mul(z, zbar), [u * u + v * v, 0, 0, 0], tol=1e-12)
    assert_quat(qt.mul(unit, unit), -qt.ONE)


def test_array_broadcasting(rng):
    a = qt.random_quaternions(rng, 10)
    b = qt.random_quaternions(rng, 10)
    batched = qt.mul(a, b)
    for i in range(10):
        assert_quat(batched[i], qt.mul(a[i], b[i]))
    assert np.all(qt.norm(a) <= 1.0)
