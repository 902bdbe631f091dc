import numpy as np
import pytest

from conftest import assert_quat
from finestruct import families as fam
from finestruct import operators as ops
from finestruct import quaternion as qt
from finestruct.errors import RealAxisError
from finestruct.kernels import dbar_power_fueter_kernel, eval_kernel
from finestruct.star import spherical_block, star_power
from finestruct.verify import random_slice_polynomial, sample_points


def square(x):
    return qt.mul(x, x)


def identity(x):
    return np.array(x, dtype=float)


def test_numeric_examples(rng):
    assert_quat(ops.apply_numeric("D", identity, qt.ONE + qt.E2), [-2, 0, 0, 0], tol=1e-9)
    q = qt.random_quaternions(rng, 5, 2.0)
    np.testing.assert_allclose(ops.apply_numeric("Delta", square, q), np.broadcast_to(-4 * qt.ONE, q.shape), atol=1e-7)
    np.testing.assert_allclose(ops.apply_numeric("Dbar", identity, q), np.broadcast_to(4 * qt.ONE, q.shape), atol=1e-9)


def test_unknown_operator():
    with pytest.raises(ValueError):
        ops.apply_numeric("curl", identity, qt.ONE)
    with pytest.raises(ValueError):
        ops.apply_exact("d_q0", "star_power", 1, qt.E1, qt.ONE)


def test_euler_and_gamma_need_non_real_points():
    with pytest.raises(RealAxisError):
        ops.apply_numeric("Gamma", identity, 2 * qt.ONE)


def test_exact_examples(rng):
    p = np.array([0.3, 0.7, -0.4, 0.5])
    q = sample_points(rng, 10, 1.5, avoid=p)
    np.testing.assert_allclose(ops.apply_exact("Delta", "star_power", 2, p, q), np.broadcast_to(-4 * qt.ONE, q.shape), atol=1e-12)
    zero = np.zeros(4)
    for n in range(1, 6):
        expected = -2 * n * fam.eval_family("H", n - 1, q)
        np.testing.assert_allclose(ops.apply_exact("D", "star_power", n, zero, q), expected, atol=1e-10)
        expected = -4 * qt.scale(fam.eval_family("S", n, q), qt.norm2(q) ** (-(n + 1)))
        np.testing.assert_allclose(ops.apply_exact("Delta", "star_power", -n, zero, q), expected, atol=1e-9)


@pytest.mark.parametrize("target", ops.TARGETS)
@pytest.mark.parametrize("op", ops.EXACT_OPS)
def test_exact_matches_numeric(op, target, rng):
    p = np.array([-0.2, 0.4, 0.5, -0.3])
    q = sample_points(rng, 10, 1.6, avoid=p)
    for n in (-3, -1, 1, 2, 4):
        exact = ops.apply_exact(op, target, n, p, q)
        numeric = ops.apply_numeric(op, ops.target_function(target, n, p), q)
        assert np.max(qt.norm(exact - numeric) / np.maximum(qt.norm(exact), 1.0)) < 1e-6


def test_factorization(rng):
    f = random_slice_polynomial(rng, 5)
    q = sample_points(rng, 5, 1.0)
    lap = ops.apply_numeric("Delta", f, q)
    d_dbar = ops.apply_numeric("D", lambda x: ops.apply_numeric("Dbar", f, x), q)
    np.testing.assert_allclose(d_dbar, lap, atol=1e-5 * np.max(qt.norm(lap)))


def test_leibniz_rules(rng):
    g = random_slice_polynomial(rng, 4)
    q = sample_points(rng, 10, 1.0)
    qb = qt.conj(q)

    def qg(x):
        return qt.mul(x, g(x))

    dg = ops.apply_numeric("D", g, q)
    dbar_g = ops.apply_numeric("Dbar", g, q)
    d0g = ops.apply_numeric("d_q0", g, q)
    lap_g = ops.apply_numeric("Delta", g, q)
    tol = 1e-6
    np.testing.assert_allclose(ops.apply_numeric("Delta", qg, q), qt.mul(q, lap_g) + 2 * dg, atol=tol * 100)
    d_qg = ops.apply_numeric("D", qg, q)
    np.testing.assert_allclose(d_qg, qt.mul(qb, dg) - 2 * g(q), atol=tol)
    np.testing.assert_allclose(d_qg, qt.mul(q, dg) - 2 * g(qb), atol=tol)
    dbar_qg = ops.apply_numeric("Dbar", qg, q)
    np.testing.assert_allclose(dbar_qg, 4 * g(q) + 2 * qt.mul(q, d0g) - qt.mul(qb, dg), atol=tol)
    np.testing.assert_allclose(dbar_qg, 2 * g(q) + 2 * g(qb) + qt.mul(q, dbar_g), atol=tol)


def test_repeated_dbar_of_fueter_kernel():
    p = np.array([1.5, 0.4, -0.3, 0.2])
    q = np.array([[0.2, 0.3, 0.1, -0.2], [-0.4, 0.1, 0.5, 0.3]])

    def kernel(x):
        return eval_kernel("F_L", p, x)

    assert_quat(dbar_power_fueter_kernel(0, p, q), kernel(q))
    fn = kernel
    for n in range(1, 4):
        fn = (lambda g: (lambda x: ops.apply_numeric("Dbar", g, x, h=2e-3)))(fn)
        exact = dbar_power_fueter_kernel(n, p, q)
        numeric = fn(q)
        assert np.max(qt.norm(numeric - exact) / qt.norm(exact)) < 1e-5


def test_real_limit_of_harmonic_representation(rng):
    f = random_slice_polynomial(rng, 4)
    u = 0.4
    slope = ops.apply_numeric("d_q0", f, qt.real(u))
    values = []
    for v in (1e-3, 1e-4):
        q = qt.from_slice(u, v, qt.E2)
        values.append(ops.rep_formula_eval("D", f, q, unit=qt.E1))
    # the representation is even in v, so one Richardson step in v^2 removes the leading error
    extrapolated = (100 * values[1] - values[0]) / 99
    assert_quat(extrapolated, -2 * slope, tol=1e-7)
    assert_quat(ops.rep_formula_eval("D", f, qt.real(u)), -2 * slope, tol=1e-9)


def test_rep_formula_examples(rng):
    q = sample_points(rng, 5, 1.5)
    for x in q:
        assert_quat(ops.rep_formula_eval("D", identity, x), [-2, 0, 0, 0], tol=1e-9)
        assert_quat(ops.rep_formula_eval("Dbar", identity, x), [4, 0, 0, 0], tol=1e-9)
        assert_quat(ops.rep_formula_eval("Delta", square, x), [-4, 0, 0, 0], tol=1e-7)


def test_euler_gamma_identities(rng):
    q = sample_points(rng, 5, 1.5)
    # Gamma q = 2 vq, which gives Dq = -2
    gamma = ops.apply_numeric("Gamma", identity, q)
    np.testing.assert_allclose(gamma, 2 * qt.vector_part(q), atol=1e-9)
    d, dbar, delta = ops.euler_gamma_identities(identity, q)
    np.testing.assert_allclose(d, np.broadcast_to(-2 * qt.ONE, q.shape), atol=1e-9)

    def const(x):
        return np.broadcast_to([0.3, -1.0, 2.0, 0.5], np.shape(x)).copy()

    for out in ops.euler_gamma_identities(const, q):
        np.testing.assert_allclose(out, 0.0, atol=1e-12)

    def cube(x):
        return qt.power(x, 3)

    for op, value in zip(ops.EXACT_OPS, ops.euler_gamma_identities(cube, q)):
        np.testing.assert_allclose(value, ops.apply_numeric(op, cube, q), atol=1e-6)


def test_global_operator_on_blocks(rng):
    p = np.array([0.4, -0.6, 0.3, 0.5])
    q = sample_points(rng, 10, 1.5, avoid=p)
    np.testing.assert_allclose(ops.global_power_on_block(0, 3, p, q), spherical_block(p, q, 3), atol=1e-12)
    np.testing.assert_allclose(ops.global_power_on_block(1, 1, p, q), 2 * (p - q), atol=1e-12)
    for n in range(1, 5):
        c_n = 2.0**n * np.prod(range(1, n + 1)) * (-1) ** n
        np.testing.assert_allclose(ops.global_power_on_block(n, n, p, q), c_n * star_power(p, q, n), atol=1e-9)
    for x in q[:3]:
        for linear in (False, True):
            exact = ops.global_power_on_block(1, 2, p, x, with_linear_factor=linear)
            numeric = ops.global_numeric_on_block(2, p, x, with_linear_factor=linear)
            assert_quat(numeric, exact, tol=1e-7)
    with pytest.raises(ValueError):
        ops.global_power_on_block(3, 2, p, q)
