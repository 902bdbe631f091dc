import numpy as np
import pytest

from conftest import assert_quat
from finestruct import families as fam
from finestruct import operators as ops
from finestruct import quaternion as qt
from finestruct.verify import sample_points

# exact values at q = 1 + 2e1 - e2 + e3/2, p = 1/2 + e1 - e3, computed with sympy's quaternions
Q_REF = np.array([1.0, 2.0, -1.0, 0.5])
P_REF = np.array([0.5, 1.0, 0.0, -1.0])
FROZEN = [
    ("H", 2, None, [-3 / 4, 0, 0, 0]),
    ("CA", 2, None, [-3 / 4, 4 / 3, -2 / 3, 1 / 3]),
    ("S", 2, None, [-9 / 4, -8, 4, -2]),
    ("R", 2, None, [-17, 9, -9 / 2, 9 / 4]),
    ("Ht", 1, P_REF, [1 / 2, -1, 0, 1]),
    ("Qt", 1, P_REF, [1 / 2, -1 / 3, -1 / 3, 7 / 6]),
]


@pytest.mark.parametrize("tag,n,p,expected", FROZEN)
def test_frozen_values(tag, n, p, expected):
    assert_quat(fam.eval_family(tag, n, Q_REF, p), expected)


def test_low_degree_examples(rng):
    q = qt.random_quaternions(rng, 10, 2.0)
    qb = qt.conj(q)
    ones = np.broadcast_to(qt.ONE, q.shape)
    np.testing.assert_allclose(fam.eval_family("H", 1, q), qt.real(q[:, 0]), atol=1e-14)
    np.testing.assert_allclose(fam.eval_family("CA", 0, q), ones, atol=1e-14)
    np.testing.assert_allclose(fam.eval_family("CA", 1, q), (2 * q + qb) / 3, atol=1e-14)
    np.testing.assert_allclose(fam.eval_family("P2", 0, q), 2 * ones, atol=1e-14)
    np.testing.assert_allclose(fam.eval_family("S", 1, q), qb, atol=1e-14)


@pytest.mark.parametrize("tag,one", [("Ht", "H"), ("Qt", "CA"), ("P2t", "P2"), ("Hcal", "Pneg")])
def test_zero_center_reduces_to_one_variable(tag, one, rng):
    q = qt.random_quaternions(rng, 20, 1.5)
    for n in range(6):
        np.testing.assert_allclose(fam.eval_family(tag, n, q, np.zeros(4)), fam.eval_family(one, n, q), atol=1e-12)


@pytest.mark.parametrize("tag", fam.TWO_VARIABLE)
def test_image_route_matches_expansion(tag, rng):
    p = np.array([0.3, -0.5, 0.4, 0.2])
    q = qt.random_quaternions(rng, 30, 1.5)
    for n in range(7):
        scale = (1 + qt.norm(q) + qt.norm(p)) ** (n + 2)
        diff = fam.eval_family(tag, n, q, p) - fam.eval_family_expanded(tag, n, q, p)
        assert np.max(qt.norm(diff) / scale) < 1e-12


@pytest.mark.parametrize("tag", fam.ONE_VARIABLE + fam.TWO_VARIABLE)
def test_closed_forms_agree_off_the_axis(tag, rng):
    p = np.array([0.3, -0.5, 0.4, 0.2]) if tag in fam.TWO_VARIABLE else None
    q = sample_points(rng, 40, 1.5)
    for n in range(7):
        scale = (1 + qt.norm(q) + (0 if p is None else qt.norm(p))) ** (n + 2)
        diff = fam.eval_family(tag, n, q, p) - fam.closed_form(tag, n, q, p)
        assert np.max(qt.norm(diff) / scale) < 1e-10


def test_center_requirements():
    with pytest.raises(ValueError):
        fam.eval_family("Ht", 1, Q_REF)
    with pytest.raises(ValueError):
        fam.eval_family("H", 1, Q_REF, P_REF)
    with pytest.raises(ValueError):
        fam.eval_family("Nope", 1, Q_REF)
    assert_quat(fam.eval_family("H̃", 1, Q_REF, P_REF), fam.eval_family("Ht", 1, Q_REF, P_REF))


def test_fueter_variables():
    xi = fam.fueter_variables(qt.ONE)
    for got, e in zip(xi, (qt.E1, qt.E2, qt.E3)):
        assert_quat(got, -e)
    xi = fam.fueter_variables(qt.E1)
    assert_quat(xi[0], qt.ONE)
    assert_quat(xi[1], np.zeros(4))
    for got in fam.fueter_variables(np.zeros(4)):
        assert_quat(got, np.zeros(4))


def test_fueter_polynomial_examples(rng):
    q = qt.random_quaternions(rng, 10)
    np.testing.assert_allclose(fam.eval_fueter_polynomial([0, 0, 0], q), np.broadcast_to(qt.ONE, q.shape))
    expected = qt.scale(qt.E1, q[:, 0]) - qt.real(q[:, 1])
    np.testing.assert_allclose(fam.eval_fueter_polynomial([1, 0, 0], q), expected, atol=1e-14)
    # both factors equal -1 at e1 + e2
    assert_quat(fam.eval_fueter_polynomial([1, 1, 0], qt.E1 + qt.E2), qt.ONE)
    assert_quat(fam.eval_family("Fueter", [1, 1, 0], qt.E1 + qt.E2), qt.ONE)


@pytest.mark.parametrize("nu", [[1, 1, 0], [2, 0, 1], [1, 1, 1]])
def test_fueter_polynomials_are_regular(nu, rng):
    q = qt.random_quaternions(rng, 20)
    d = ops.apply_numeric("D", lambda x: fam.eval_fueter_polynomial(nu, x), q)
    assert np.max(qt.norm(d)) < 1e-7


def test_fueter_degree_limit():
    with pytest.raises(ValueError):
        fam.eval_fueter_polynomial([5, 4, 0], qt.ONE)


def test_multiset_permutations_count():
    assert len(list(fam.multiset_permutations([0, 0, 1, 2]))) == 12


def test_appell_property_of_harmonic_two_variable(rng):
    p = np.array([0.2, 0.4, -0.1, 0.3])
    q = sample_points(rng, 20, 1.0)
    for n in range(1, 6):
        d0 = ops.apply_numeric("d_q0", lambda x, n=n: fam.eval_family("Ht", n, x, p), q)
        np.testing.assert_allclose(d0, n * fam.eval_family("Ht", n - 1, q, p), atol=1e-7)


def test_bounds(rng):
    q = qt.random_quaternions(rng, 500, 1.5)
    for n in range(13):
        bound = qt.norm(q) ** n * (1 + 1e-12) + 1e-15
        assert np.all(qt.norm(fam.eval_family("H", n, q)) <= bound)
        assert np.all(qt.norm(fam.eval_family("CA", n, q)) <= bound)
