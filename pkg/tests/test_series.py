import json
import warnings

import numpy as np
import pytest

from conftest import assert_quat
from finestruct import operators as ops
from finestruct import quaternion as qt
from finestruct import series as ser
from finestruct.errors import OutsideRegionError, OutsideRegionWarning
from finestruct.geometry import distance
from finestruct.kernels import eval_kernel
from finestruct.star import spherical_block
from finestruct.verify import sample_between_images, sample_cassini, sample_points

P = np.array([0.2, 0.3, -0.15, 0.2])


def geometric_coeffs(rng, count, ratio, start=0, sign=1):
    return {sign * k: rng.normal(size=4) * ratio**k for k in range(start, count)}


def test_constant_series(rng):
    c = np.array([0.3, -1.0, 0.5, 2.0])
    spec = ser.SeriesSpec("star_taylor", P, {0: c})
    value, tail = ser.eval_series(spec, qt.random_quaternions(rng, 10, 3.0))
    np.testing.assert_allclose(value, np.broadcast_to(c, (10, 4)))
    assert np.all(tail == 0)


def test_shifted_cauchy_kernel_series(rng):
    p = np.array([1.2, 0.2, -0.1, 0.15])
    coeffs = {n: -((-1.0) ** n) * qt.ONE for n in range(81)}
    spec = ser.SeriesSpec("star_taylor", p + qt.ONE, coeffs, 80)
    q = sample_between_images(rng, 10, p + qt.ONE, 0.0, 0.7)
    value, tail = ser.eval_series(spec, q)
    err = qt.norm(value - eval_kernel("S_L_inv", p, q))
    assert np.all(err <= 10 * tail + 1e-12)
    assert np.max(err) < 1e-9


def test_first_spherical_block(rng):
    spec = ser.SeriesSpec("spherical", P, {0: qt.ONE, 1: qt.ONE})
    q = qt.random_quaternions(rng, 10)
    value, _ = ser.eval_series(spec, q)
    np.testing.assert_allclose(value, qt.ONE + (q - P), atol=1e-14)


def test_negative_indices_rejected():
    with pytest.raises(ValueError):
        ser.SeriesSpec("star_taylor", P, {-1: qt.ONE})
    with pytest.raises(ValueError):
        ser.SeriesSpec("chebyshev", P, {})


def test_transform_examples(rng):
    q = sample_points(rng, 10, 1.0)
    linear = ser.SeriesSpec("star_taylor", P, {1: qt.ONE})
    fine = ser.fine_transform(linear, "D")
    assert fine.basis[0] == "Ht"
    assert_quat(fine.coeffs[0], -2 * qt.ONE)
    np.testing.assert_allclose(fine.evaluate(q), np.broadcast_to(-2 * qt.ONE, q.shape), atol=1e-12)
    fine = ser.fine_transform(linear, "Dbar")
    assert_quat(fine.coeffs[0], 2 * qt.ONE)
    np.testing.assert_allclose(fine.evaluate(q), np.broadcast_to(4 * qt.ONE, q.shape), atol=1e-12)
    fine = ser.fine_transform(ser.SeriesSpec("star_taylor", P, {2: qt.ONE}), "Delta")
    assert fine.basis[0] == "Qt"
    assert_quat(fine.coeffs[0], -4 * qt.ONE)
    np.testing.assert_allclose(fine.evaluate(q), np.broadcast_to(-4 * qt.ONE, q.shape), atol=1e-12)


def test_zero_series_transforms_to_zero(rng):
    q = sample_cassini(rng, 5, P, 0.0, 1.0)
    for kind in ser.KINDS:
        spec = ser.SeriesSpec(kind, P, {})
        for op in ops.EXACT_OPS:
            np.testing.assert_allclose(ser.fine_transform(spec, op).evaluate(q), 0.0)


def test_spherical_transform_examples(rng):
    q = sample_cassini(rng, 10, P, 0.0, 1.0)
    block = ser.SeriesSpec("spherical", P, {2: qt.ONE})
    expected = qt.real(-4 * (q[:, 0] - P[0]))
    np.testing.assert_allclose(ser.eval_fine_spherical(block, "D", q), expected, atol=1e-12)
    linear = ser.SeriesSpec("spherical", P, {3: qt.ONE})

    def f(x):
        return qt.mul(spherical_block(P, x, 1), x - P)

    np.testing.assert_allclose(ser.eval_fine_spherical(linear, "Dbar", q), ops.apply_numeric("Dbar", f, q), atol=1e-6)


@pytest.mark.parametrize("kind", ["star_taylor", "star_laurent"])
@pytest.mark.parametrize("op", ops.EXACT_OPS)
def test_transform_matches_closed_form(kind, op, rng):
    coeffs = geometric_coeffs(rng, 17, 0.5)
    lo = 0.0
    if kind == "star_laurent":
        coeffs.update(geometric_coeffs(rng, 17, 0.3, start=1, sign=-1))
        lo = 0.7
    spec = ser.SeriesSpec(kind, P, coeffs, 16)
    q = sample_between_images(rng, 20, P, lo, 1.0)
    fine = ser.fine_transform(spec, op).evaluate(q)
    closed = ser.closed_fine_eval(spec, op, q)
    np.testing.assert_allclose(fine, closed, atol=1e-9 * max(1.0, np.max(np.abs(closed))))


@pytest.mark.parametrize("kind", ser.KINDS)
@pytest.mark.parametrize("op", ops.EXACT_OPS)
def test_rebased_evaluation_matches_transform(kind, op, rng):
    coeffs = geometric_coeffs(rng, 9, 0.5)
    if kind.endswith("laurent"):
        coeffs.update(geometric_coeffs(rng, 5, 0.3, start=1, sign=-1))
    spec = ser.SeriesSpec(kind, P, coeffs, 8)
    # keep away from the radius where the rebased evaluation switches tables
    q = sample_points(rng, 200, 3.0, avoid=P)
    x = q - (P[0] if spec.is_spherical else 0.0) * qt.ONE
    switch = qt.vec_norm(P) if spec.is_spherical else qt.norm(P)
    q = q[np.abs(qt.norm(x) - switch) > 0.6][:10]
    fine = ser.fine_transform(spec, op).evaluate(q)
    rebased = ser.rebased_eval(spec, op, q)
    assert np.max(qt.norm(fine - rebased) / np.maximum(qt.norm(fine), 1.0)) < 1e-8


def test_taylor_spherical_relation_examples(rng):
    p = np.array([0.4, -0.6, 0.3, 0.5])
    q = sample_points(rng, 10, 1.0)
    lhs, rhs = ser.taylor_spherical_relation([qt.ONE], q, p, 0)
    np.testing.assert_allclose(lhs, np.broadcast_to(qt.ONE, q.shape))
    np.testing.assert_allclose(rhs, lhs)
    a = [np.zeros(4), np.zeros(4), qt.ONE]
    lhs, rhs = ser.taylor_spherical_relation(a, q, p, 1)
    np.testing.assert_allclose(lhs, -2 * (q - p), atol=1e-12)
    np.testing.assert_allclose(rhs, 2 * (p - q), atol=1e-12)
    lhs, rhs = ser.taylor_spherical_relation(rng.normal(size=(6, 4)), q, p, 3)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_spherical_fine_series_tail_ratio(rng):
    # unit coefficients scaled by R^-k; the fitted decay rate of the transformed
    # terms must not exceed (r/R)^2 by more than 10%
    radius = 1.2
    units = qt.unit_vector(rng.normal(size=(242, 3)))
    coeffs = {k: units[k] * radius ** (-k) for k in range(242)}
    q = sample_cassini(rng, 5, P, 0.5, 0.8)
    r = distance("cassini", q, P)
    blocks = np.arange(60, 121)
    for op in ops.EXACT_OPS:
        logs = []
        for n in blocks:
            term = qt.mul(ops.apply_exact(op, "spherical_block", n, P, q), coeffs[2 * n])
            term = term + qt.mul(ops.apply_exact(op, "spherical_linear", n, P, q), coeffs[2 * n + 1])
            logs.append(np.log(qt.norm(term)))
        rate = np.exp(np.polyfit(blocks, np.array(logs), 1)[0])
        assert np.all(rate <= (r / radius) ** 2 * 1.10)


def test_region_from_coefficients(rng):
    spec = ser.SeriesSpec("star_taylor", P, {k: qt.ONE * 0.5**k for k in range(40)}, 39)
    region = spec.region()
    assert region.tag == "star_dome"
    assert region.radii[0] == pytest.approx(2.0, rel=0.05)
    coeffs = {k: qt.ONE * 0.5 ** abs(k) for k in range(-20, 20)}
    spherical = ser.SeriesSpec("spherical_laurent", P, coeffs, 10)
    region = spherical.region()
    assert region.tag == "cassini_shell"
    assert region.radii == pytest.approx((0.5, 2.0), rel=0.05)
    finite = ser.SeriesSpec("star_laurent", P, {-1: qt.ONE, 2: qt.ONE})
    assert finite.region().radii == (0.0, float("inf"))


def test_outside_region_warns():
    spec = ser.SeriesSpec("star_taylor", np.zeros(4), {k: qt.ONE for k in range(20)}, 19)
    with pytest.warns(OutsideRegionWarning):
        ser.eval_series(spec, 2 * qt.ONE)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ser.eval_series(spec, 0.5 * qt.ONE)


def test_series_json_round_trip(rng):
    coeffs = {k: rng.normal(size=4) for k in range(-3, 4)}
    spec = ser.SeriesSpec("spherical_laurent", rng.normal(size=4), coeffs, 5)
    text = spec.dumps()
    again = ser.SeriesSpec.loads(text)
    assert again.dumps() == text
    for k in coeffs:
        np.testing.assert_array_equal(again.coeffs[k], coeffs[k])
    fine = ser.fine_transform(ser.SeriesSpec("star_laurent", P, coeffs, 5), "Delta")
    back = ser.FineSeries.from_json(json.loads(fine.dumps()))
    assert back.dumps() == fine.dumps()


def test_series_json_shape():
    spec = ser.SeriesSpec.from_json({"kind": "star_laurent", "center": [0, 1, 0, 0], "coeffs": {"-2": [1, 0, 0, 0], "0": [0, 1, 0, 0]}, "N": 32})
    assert sorted(spec.coeffs) == [-2, 0]
    assert spec.N == 32


def test_derivative_in_q0(rng):
    coeffs = geometric_coeffs(rng, 10, 0.5)
    for kind in ("star_taylor", "spherical"):
        spec = ser.SeriesSpec(kind, P, coeffs, 9)
        q = sample_points(rng, 5, 1.0, avoid=P)
        numeric = ops.apply_numeric("d_q0", lambda x: ser.eval_series(spec, x, check_region=False)[0], q)
        np.testing.assert_allclose(ser.derivative_q0_series(spec, q), numeric, atol=1e-8)


def test_empty_shell_warns():
    coeffs = {k: qt.ONE * 2.0 ** abs(k) for k in range(-20, 20)}
    spec = ser.SeriesSpec("star_laurent", P, coeffs, 19)
    with pytest.raises(OutsideRegionError):
        spec.region()
    with pytest.warns(OutsideRegionWarning):
        ser.eval_series(spec, qt.ONE)
