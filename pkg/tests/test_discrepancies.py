"""Printed forms that disagree with independent oracles, and the forms implemented instead.

Each test asserts the oracle-derived form and that the printed alternative is
rejected by the same oracle, so a change in either direction fails the suite.
"""

import math

import numpy as np

from finestruct import families as fam
from finestruct import kernels as ker
from finestruct import operators as ops
from finestruct import quaternion as qt
from finestruct.star import binomial_power, star_power
from finestruct.verify import sample_points


def rel(a, b):
    return float(np.max(qt.norm(a - b) / np.maximum(qt.norm(b), 1.0)))


def test_star_power_binomial_needs_alternating_sign(rng):
    # oracle: the n-fold left star product of q - p with itself
    p = sample_points(rng, 50, 1.2)
    q = sample_points(rng, 50, 1.2)
    for n in range(2, 7):
        iterated = binomial_power(q, 1).power(n).value(p)
        signed = sum(math.comb(n, r) * qt.mul(qt.power(q, r), qt.power(-p, n - r)) for r in range(n + 1))
        unsigned = sum(math.comb(n, r) * qt.mul(qt.power(q, r), qt.power(p, n - r)) for r in range(n + 1))
        assert rel(signed, iterated) < 1e-12
        assert rel(star_power(p, q, n), iterated) < 1e-10
        assert rel(unsigned, iterated) > 1e-3


def test_pseudo_cauchy_series_prefactor(rng):
    # oracle: termwise D of S_L^{-1}(p, q) = sum q^n p^{-1-n} with D q^n = -2n H_{n-1}, scaled by -1/2
    p = np.array([1.5, 0.9, -0.6, 0.8])
    q = sample_points(rng, 20, 0.5)
    pinv = qt.inv(p)
    termwise = sum(
        -0.5 * (-2.0 * (n + 1)) * qt.mul(fam.eval_family("H", n, q), qt.power(pinv, n + 2)) for n in range(100)
    )
    closed = ker.eval_kernel("Q_c_inv", p, q)
    assert rel(termwise, closed) < 1e-10
    value, _ = ker.kernel_series("Q_c_inv", p, q, N=100)
    assert rel(value, closed) < 1e-10
    assert rel(-2.0 * value, closed) > 0.5
    # at q = 0 only the n = 0 term survives, so the prefactor must be +1
    assert rel(ker.eval_kernel("Q_c_inv", p, np.zeros(4)), qt.power(p, -2)) < 1e-13


def test_dbar_of_two_variable_clifford_appell_has_factor_n(rng):
    # oracle: finite-difference Dbar
    center = np.array([0.3, -0.5, 0.4, 0.2])
    q = sample_points(rng, 50, 1.0)
    for n in range(1, 8):
        half_dbar = 0.5 * ops.apply_numeric("Dbar", lambda x, n=n: fam.eval_family("Qt", n, x, center), q)
        previous = fam.eval_family("Qt", n - 1, q, center)
        assert rel(half_dbar, n * previous) < 1e-6
        assert rel(half_dbar, 2 * n * previous) > 0.1


def test_fueter_kernel_at_zero_center_is_plus_four_e(rng):
    q = sample_points(rng, 20, 1.5)
    value = ker.eval_kernel("F_L", np.zeros(4), q)
    numeric = ops.apply_numeric("Delta", lambda x: qt.inv(-x), q)
    e = ker.eval_kernel("E", None, q)
    assert rel(value, numeric) < 1e-6
    assert rel(value, 4 * e) < 1e-12
    assert rel(value, -4 * e) > 1.0


def test_repeated_dbar_of_fueter_kernel_sign():
    p = np.array([1.5, 0.4, -0.3, 0.2])
    q = np.array([0.2, 0.3, 0.1, -0.2])
    numeric = ops.apply_numeric("Dbar", lambda x: ker.eval_kernel("F_L", p, x), q)
    exact = ker.dbar_power_fueter_kernel(1, p, q)
    assert rel(numeric, exact) < 1e-6
    assert rel(numeric, -exact) > 1.0


def test_leibniz_laplacian_uses_laplacian_of_g(rng):
    g = lambda x: qt.power(x, 3)  # noqa: E731
    q = sample_points(rng, 10, 1.0)
    lhs = ops.apply_numeric("Delta", lambda x: qt.mul(x, g(x)), q)
    dg = ops.apply_numeric("D", g, q)
    with_g = qt.mul(q, ops.apply_numeric("Delta", g, q)) + 2 * dg
    # Delta of the identity is zero, so a q Delta(q) term would drop the first part
    printed = 2 * dg
    assert rel(lhs, with_g) < 1e-6
    assert rel(lhs, printed) > 0.1
