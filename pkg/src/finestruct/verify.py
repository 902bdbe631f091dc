"""Invariant groups shared by ``finestruct verify`` and the acceptance tests.

Each group runs a fixed, seeded battery of checks and returns a
:class:`GroupResult`. A check compares a measured residual (already scaled)
against its tolerance; the two sides of every identity come from
independent routes, for example a closed form against finite differences.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import families as fam
from . import kernels as ker
from . import operators as ops
from . import quadrature as quad
from . import quaternion as qt
from . import series as ser
from .geometry import _slice_images, distance
from .star import SliceFunction, binomial_power, sphere_value, star_power, star_power_bar, star_power_binomial


@dataclass
class Check:
    label: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tol)


@dataclass
class GroupResult:
    name: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst(self) -> Check:
        """The check closest to (or furthest past) its tolerance."""
        return max(self.checks, key=lambda c: c.residual / c.tol if np.isfinite(c.residual) else math.inf)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def summary(self) -> str:
        w = self.worst
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.name}: {len(self.checks)} checks, worst {w.label} "
            f"residual {w.residual:.3e} (tol {w.tol:.1e}), {self.seconds:.1f}s"
        )

    def add(self, label: str, residual, tol: float):
        self.checks.append(Check(label, float(np.max(residual)), tol))


# ---------------------------------------------------------------- sampling


def _rel(a, b, floor: float = 1.0) -> np.ndarray:
    """Pointwise ``|a - b| / max(|b|, floor)``."""
    return qt.norm(np.asarray(a) - np.asarray(b)) / np.maximum(qt.norm(b), floor)


def sample_points(rng, count, radius, *, avoid=None, min_gap=0.3, min_vec=0.15) -> np.ndarray:
    """Uniform points in a ball, away from the real axis and (optionally) from the sphere ``[avoid]``."""
    out = []
    while len(out) < count:
        q = qt.random_quaternions(rng, 4 * count, radius)
        keep = qt.vec_norm(q) > min_vec
        if avoid is not None:
            plus, minus = _slice_images(q, avoid)
            keep &= np.minimum(plus, minus) > min_gap
        out.extend(q[keep])
    return np.array(out[:count])


def sample_between_images(rng, count, center, lo, hi, *, min_vec=0.15) -> np.ndarray:
    """Points whose two slice images both lie at distance in ``(lo, hi)`` from ``center``."""
    c = qt.as_quat(center)
    c0, c1 = c[0], float(qt.vec_norm(c))
    if c1 + min_vec >= hi:
        raise ValueError("no point has both slice images that close to the center")
    out = []
    while len(out) < count:
        x = rng.uniform(c0 - hi, c0 + hi, 8 * count)
        y = rng.uniform(min_vec, hi, 8 * count)
        plus = np.hypot(x - c0, y - c1)
        minus = np.hypot(x - c0, y + c1)
        keep = (plus > lo) & (plus < hi) & (minus > lo) & (minus < hi)
        units = qt.random_units(rng, int(keep.sum()))
        out.extend(qt.from_slice(x[keep], y[keep], units))
    return np.array(out[:count])


def sample_cassini(rng, count, center, lo, hi, *, min_vec=0.15) -> np.ndarray:
    """Points with ``sqrt|Q_p(q)|`` in ``(lo, hi)``."""
    c = qt.as_quat(center)
    out = []
    span = hi + float(qt.vec_norm(c))
    while len(out) < count:
        q = c[0] * qt.ONE + qt.random_quaternions(rng, 8 * count, span)
        d = distance("cassini", q, c)
        keep = (d > lo) & (d < hi) & (qt.vec_norm(q) > min_vec)
        out.extend(q[keep])
    return np.array(out[:count])


def random_slice_polynomial(rng, degree: int) -> SliceFunction:
    return SliceFunction.monomials(rng.normal(size=(degree + 1, 4)))


def _center(rng, vec_scale=0.6) -> np.ndarray:
    p = rng.normal(size=4) * 0.5
    p[1:] *= vec_scale / max(qt.vec_norm(p), 1e-9)
    return p


# ---------------------------------------------------------------- groups


def operator_oracle(rng, points: int = 50) -> GroupResult:
    """Exact actions on star powers and spherical blocks against finite differences."""
    res = GroupResult("operator-oracle")
    p = np.array([0.3, 0.7, -0.4, 0.5])
    q = sample_points(rng, points, 1.8, avoid=p)
    cases = [("star_power", n) for n in range(1, 9)]
    cases += [("star_power", -n) for n in range(1, 6)]
    cases += [(t, n) for t in ("spherical_block", "spherical_linear") for n in range(-6, 7)]
    for target, n in cases:
        f = ops.target_function(target, n, p)
        for op in ops.EXACT_OPS:
            exact = ops.apply_exact(op, target, n, p, q)
            numeric = ops.apply_numeric(op, f, q)
            res.add(f"{op} {target} n={n}", _rel(numeric, exact), 1e-5)
    return res


def fueter_theorem(rng, polys: int = 20) -> GroupResult:
    """``Delta = D Dbar = Dbar D`` and ``D Delta f = 0`` on slice polynomials."""
    res = GroupResult("fueter-theorem")
    for i in range(polys):
        f = random_slice_polynomial(rng, int(rng.integers(2, 7)))
        q = sample_points(rng, 3, 1.2)
        lap = ops.apply_numeric("Delta", f, q)
        d_dbar = ops.apply_numeric("D", lambda x: ops.apply_numeric("Dbar", f, x), q)
        dbar_d = ops.apply_numeric("Dbar", lambda x: ops.apply_numeric("D", f, x), q)
        res.add(f"poly {i} Delta = D Dbar", _rel(d_dbar, lap), 1e-5)
        res.add(f"poly {i} Delta = Dbar D", _rel(dbar_d, lap), 1e-5)
        d_lap = ops.apply_numeric("D", lambda x: ops.apply_numeric("Delta", f, x), q)
        scale = np.maximum(qt.norm(lap), 1.0)
        res.add(f"poly {i} D Delta f = 0", qt.norm(d_lap) / scale, 1e-4)
    p = np.array([0.3, 0.7, -0.4, 0.5])
    q = sample_points(rng, 5, 1.5, avoid=p)
    for n in range(2, 9):
        lap = lambda x, n=n: ops.apply_exact("Delta", "star_power", n, p, x)  # noqa: E731
        d_lap = ops.apply_numeric("D", lap, q)
        res.add(f"D Delta (q-p)^*{n} = 0", qt.norm(d_lap) / np.maximum(qt.norm(lap(q)), 1.0), 1e-4)
    return res


def kernel_consistency(rng, points: int = 50) -> GroupResult:
    """Two forms of ``S_L^{-1}``, the operator images and the splitting identities."""
    res = GroupResult("kernels")
    p = sample_points(rng, points, 1.5)
    q = np.array([sample_points(rng, 1, 1.5, avoid=pi)[0] for pi in p])
    one = ker.eval_kernel("S_L_inv_I", p, q)
    two = ker.eval_kernel("S_L_inv_II", p, q)
    res.add("S_L_inv form I = form II", _rel(one, two), 1e-11)
    right_one = ker.eval_kernel("S_R_inv_I", p, q)
    right_two = ker.eval_kernel("S_R_inv_II", p, q)
    res.add("S_R_inv form I = form II", _rel(right_one, right_two), 1e-11)

    def s_left(x):
        return ker.eval_kernel("S_L_inv", p[:, None, :], x)

    res.add("D S_L_inv = -2 Q_c_inv", _rel(ops.apply_numeric("D", s_left, q), -2.0 * ker.eval_kernel("Q_c_inv", p, q)), 1e-5)
    res.add("Dbar S_L_inv = P2_L", _rel(ops.apply_numeric("Dbar", s_left, q), ker.eval_kernel("P2_L", p, q)), 1e-5)
    res.add("Delta S_L_inv = F_L", _rel(ops.apply_numeric("Delta", s_left, q), ker.eval_kernel("F_L", p, q)), 1e-5)
    for name in ("Q_c_inv", "P2_L", "F_L"):
        res.add(f"{name} splitting", _rel(ker.kernel_splitting(name, p, q), ker.eval_kernel(name, p, q)), 1e-9)
    res.add(
        "Q_c_inv from F_L connection",
        _rel(ker.kernel_splitting("Q_c_inv_connection", p, q), ker.eval_kernel("Q_c_inv", p, q)),
        1e-9,
    )
    return res


def _random_coeffs(rng, count, ratio, start=0, sign=1):
    return {sign * k: rng.normal(size=4) * ratio**k for k in range(start, count)}


def _series_sources(rng):
    """Source series of each kind with known radii and interior points."""
    p = np.array([0.2, 0.3, -0.15, 0.2])
    n = 32
    out = []
    coeffs = _random_coeffs(rng, n + 1, 0.5)
    out.append((ser.SeriesSpec("star_taylor", p, coeffs, n), sample_between_images(rng, 50, p, 0.0, 1.0)))
    coeffs = _random_coeffs(rng, 2 * n + 2, 0.5)
    out.append((ser.SeriesSpec("spherical", p, coeffs, n), sample_cassini(rng, 50, p, 0.0, 1.0)))
    coeffs = _random_coeffs(rng, n + 1, 0.5)
    coeffs.update(_random_coeffs(rng, n + 1, 0.3, start=1, sign=-1))
    out.append((ser.SeriesSpec("star_laurent", p, coeffs, n), sample_between_images(rng, 50, p, 0.7, 1.0)))
    coeffs = _random_coeffs(rng, 2 * n + 2, 0.5)
    coeffs.update(_random_coeffs(rng, 2 * n + 1, 0.3, start=1, sign=-1))
    out.append((ser.SeriesSpec("spherical_laurent", p, coeffs, n), sample_cassini(rng, 50, p, 0.7, 1.0)))
    return out


def series_machinery(rng) -> GroupResult:
    """Fine transforms against numeric operators, Taylor/spherical relation, kernel series."""
    res = GroupResult("series")
    for spec, q in _series_sources(rng):

        def f(x, spec=spec):
            return ser.eval_series(spec, x, check_region=False)[0]

        _, tail = ser.eval_series(spec, q, check_region=False)
        for op in ops.EXACT_OPS:
            fine = ser.fine_transform(spec, op).evaluate(q)
            numeric = ops.apply_numeric(op, f, q)
            scale = np.maximum(qt.norm(numeric), 1.0)
            res.add(f"{spec.kind} {op} transform", qt.norm(fine - numeric) / scale - tail / scale, 1e-5)
    p = np.array([0.4, -0.6, 0.3, 0.5])
    for trial in range(5):
        n = int(rng.integers(1, 5))
        a = rng.normal(size=(2 * n + 2, 4))
        q = sample_points(rng, 10, 1.5)
        lhs, rhs = ser.taylor_spherical_relation(a, q, p, n)
        res.add(f"Taylor/spherical relation N={n}", _rel(lhs, rhs), 1e-9)
    _kernel_series_checks(res, rng)
    return res


def _kernel_series_checks(res: GroupResult, rng):
    p = np.array([1.2, 0.8, -0.5, 0.9])
    radius = float(qt.norm(p))
    for name in ("S_L_inv", "Q_c_inv", "F_L", "P2_L"):
        u = qt.random_units(rng, 1)[0]
        q = 0.5 * radius * qt.unit_vector(u) + 0.1 * qt.ONE
        ratio = float(qt.norm(q)) / radius
        exact = ker.eval_kernel(name, p, q)
        value, _ = ker.kernel_series(name, p, q, N=80)
        res.add(f"{name} series about the origin", _rel(value, exact), 1e-9)
        # largest truncation error over two windows 20 terms apart; the max smooths oscillating terms
        partial = np.cumsum(ker.kernel_series_terms(name, p, q, 45), axis=0)
        errors = qt.norm(partial - exact)
        measured = (np.max(errors[40:46]) / np.max(errors[20:26])) ** (1.0 / 20.0)
        res.add(f"{name} tail ratio vs |q|/|p|", abs(measured / ratio - 1.0), 0.10)
    q = qt.ONE + qt.from_slice(-0.1, 0.3, qt.unit_vector([1.0, 2.0, -1.0]))
    value, _ = ker.kernel_series("E", p, q, N=120)
    res.add("E series about 1", _rel(value, ker.eval_kernel("E", p, q)), 1e-8)
    # both slice images must fit in the unit disc about p + 1, so keep |vec p| small
    p = np.array([1.2, 0.2, -0.1, 0.15])
    c = p + qt.ONE
    for name in ("S_L_inv", "Q_c_inv", "F_L", "P2_L"):
        q = sample_between_images(rng, 5, c, 0.0, 0.6)
        value, tail = ker.kernel_series(name, p, q, N=80, about="shifted")
        exact = ker.eval_kernel(name, p, q)
        res.add(f"{name} series about p+1", _rel(value, exact) - tail / np.maximum(qt.norm(exact), 1.0), 1e-8)


def integral_representations(rng) -> GroupResult:
    """Cauchy formula, fine integrals and slice independence."""
    res = GroupResult("integrals")
    planes = [qt.unit_vector(v) for v in ([1, 0, 0], [0, 1, 0], [1, 0, 1])]
    for i in range(5):
        f = random_slice_polynomial(rng, int(rng.integers(1, 6)))
        q = sample_points(rng, 1, 1.0)[0]
        contour = quad.Contour(planes[i % 3], 0.0, 2.0, 1024)
        res.add(f"Cauchy formula poly {i}", _rel(quad.cauchy_eval(f, q, contour), f(q)), 1e-8)
        for op in ops.EXACT_OPS:
            integral = quad.fine_integral(op, f, q, contour)
            rep = ops.rep_formula_eval(op, f, q)
            numeric = ops.apply_numeric(op, f, q)
            res.add(f"{op} integral = rep formula, poly {i}", _rel(integral, rep), 1e-6)
            res.add(f"{op} integral = numeric, poly {i}", _rel(integral, numeric), 1e-6)
            res.add(f"{op} rep formula = numeric, poly {i}", _rel(rep, numeric), 1e-6)
        for op in quad.INTEGRAL_OPS:
            dev = quad.slice_independence_check(f, q, planes, op=op, radii=(1.5, 2.5), nodes=512)
            res.add(f"{op} slice independence, poly {i}", dev / max(1.0, float(qt.norm(f(q)))), 1e-9)
    return res


def family_properties(rng, points: int = 500) -> GroupResult:
    """Appell relations, bounds, regularity and decompositions, ``n <= 10``."""
    res = GroupResult("families")
    q = qt.random_quaternions(rng, points, 1.0)
    q = q[qt.vec_norm(q) > 0.05]
    p = np.array([0.3, -0.5, 0.4, 0.2])
    size = np.maximum(qt.norm(q), 1.0)
    for n in range(1, 11):

        def fam_fn(tag, k, two=False):
            return lambda x: fam.eval_family(tag, k, x, p if two else None)

        scale = np.maximum(size**n, 1.0)
        d0 = ops.apply_numeric("d_q0", fam_fn("H", n), q)
        res.add(f"d0 H_{n} = n H_{n - 1}", qt.norm(d0 - n * fam.eval_family("H", n - 1, q)) / scale, 1e-7)
        dbar = ops.apply_numeric("Dbar", fam_fn("CA", n), q)
        res.add(f"Dbar/2 Q_{n} = n Q_{n - 1}", qt.norm(0.5 * dbar - n * fam.eval_family("CA", n - 1, q)) / scale, 1e-7)
        two_scale = np.maximum((qt.norm(q) + qt.norm(p)) ** n, 1.0)
        d0t = ops.apply_numeric("d_q0", fam_fn("Ht", n, True), q)
        res.add(f"d0 Ht_{n} = n Ht_{n - 1}", qt.norm(d0t - n * fam.eval_family("Ht", n - 1, q, p)) / two_scale, 1e-7)
        dbart = ops.apply_numeric("Dbar", fam_fn("Qt", n, True), q)
        res.add(
            f"Dbar/2 Qt_{n} = n Qt_{n - 1}",
            qt.norm(0.5 * dbart - n * fam.eval_family("Qt", n - 1, q, p)) / two_scale,
            1e-7,
        )
        reg_tol = 1e-6
        res.add(f"Delta H_{n} = 0", qt.norm(ops.apply_numeric("Delta", fam_fn("H", n), q)) / scale, reg_tol)
        res.add(f"Delta Ht_{n} = 0", qt.norm(ops.apply_numeric("Delta", fam_fn("Ht", n, True), q)) / two_scale, reg_tol)
        res.add(f"D Q_{n} = 0", qt.norm(ops.apply_numeric("D", fam_fn("CA", n), q)) / scale, reg_tol)
        res.add(f"D Qt_{n} = 0", qt.norm(ops.apply_numeric("D", fam_fn("Qt", n, True), q)) / two_scale, reg_tol)
        dd = ops.apply_numeric("D", lambda x: ops.apply_numeric("D", fam_fn("P2", n), x), q[:50])
        res.add(f"D^2 P2_{n} = 0", qt.norm(dd) / scale[:50], reg_tol)
        ddt = ops.apply_numeric("D", lambda x: ops.apply_numeric("D", fam_fn("P2t", n, True), x), q[:50])
        res.add(f"D^2 P2t_{n} = 0", qt.norm(ddt) / two_scale[:50], reg_tol)
        q0 = q[:, :1]
        poly1 = (n + 2) * fam.eval_family("CA", n, q) - q0 * n * fam.eval_family("CA", n - 1, q)
        res.add(f"P2_{n} from Clifford-Appell", qt.norm(fam.eval_family("P2", n, q) - poly1) / scale, 1e-10)
        qt_prev = fam.eval_family("Qt", n - 1, q, p)
        poly7 = (n + 2) * fam.eval_family("Qt", n, q, p) + n * qt.mul(qt_prev, p) - q0 * n * qt_prev
        res.add(f"P2t_{n} from Qt", qt.norm(fam.eval_family("P2t", n, q, p) - poly7) / two_scale, 1e-10)
        # binomial expansions in p, independent of the image evaluation
        tilde = star_power_binomial(p, q, n) + fam.eval_family_expanded("Ht", n, q, p)
        res.add(f"P2t_{n} = (q-p)^*{n} + Ht_{n}", qt.norm(fam.eval_family("P2t", n, q, p) - tilde) / two_scale, 1e-10)
        one = qt.power(q, n) + fam.eval_family("H", n, q)
        res.add(f"P2_{n} = q^{n} + H_{n}", qt.norm(fam.eval_family("P2", n, q) - one) / scale, 1e-10)
        polyharm = n * star_power_bar(p, q, n + 1) + qt.mul(fam.eval_family("Hcal", n, q, p), sphere_value(q, p))
        res.add(
            f"R2_{n} from Hcal", qt.norm(fam.eval_family("R2", n, q, p) - polyharm) / (two_scale * (1 + qt.norm(p)) ** 2), 1e-10
        )
    for n in range(0, 13):
        mag = qt.norm(q) ** n * (1.0 + 1e-12) + 1e-15
        # residual is the relative excess over the bound, zero when it holds
        res.add(f"|H_{n}| <= |q|^{n}", max(0.0, np.max(qt.norm(fam.eval_family("H", n, q)) / mag) - 1.0), 1e-12)
        res.add(f"|Q_{n}| <= |q|^{n}", max(0.0, np.max(qt.norm(fam.eval_family("CA", n, q)) / mag) - 1.0), 1e-12)
    for nu in ([1, 0, 0], [1, 1, 0], [2, 1, 0], [1, 1, 1], [3, 0, 1]):
        d = ops.apply_numeric("D", lambda x, nu=nu: fam.eval_fueter_polynomial(nu, x), q[:100])
        res.add(f"D P_{tuple(nu)} = 0", qt.norm(d), 1e-6)
    return res


def discrepancies(rng) -> GroupResult:
    """The oracle-resolved forms of the three known misprints."""
    res = GroupResult("discrepancies")
    p = sample_points(rng, 50, 1.2)
    q = sample_points(rng, 50, 1.2)
    for n in range(1, 7):
        iterated = binomial_power(q, n).value(p)
        signed = sum(math.comb(n, r) * qt.mul(qt.power(q, r), qt.power(-p, n - r)) for r in range(n + 1))
        res.add(f"(q-p)^*{n} = sum C(n,r) q^r (-p)^(n-r)", _rel(signed, iterated), 1e-12)
        res.add(f"stable (q-p)^*{n} = binomial sum", _rel(star_power(p, q, n), signed), 1e-10)
    for n in range(2, 7, 2):
        unsigned = sum(math.comb(n, r) * qt.mul(qt.power(q, r), qt.power(p, n - r)) for r in range(n + 1))
        # the sum without the sign of p must disagree by a visible margin
        gap = float(np.min(_rel(unsigned, binomial_power(q, n).value(p))))
        res.add(f"unsigned binomial sum differs from (q-p)^*{n}", 1e-3 / max(gap, 1e-300), 1.0)
    big_p = np.array([1.5, 0.9, -0.6, 0.8])
    small_q = sample_points(rng, 20, 0.5)
    value, _ = ker.kernel_series("Q_c_inv", big_p, small_q, N=100)
    res.add("Q_c_inv = +sum (n+1) H_n(q) p^(-2-n)", _rel(value, ker.eval_kernel("Q_c_inv", big_p, small_q)), 1e-10)
    res.add("Q_c_inv(p, 0) = p^-2", _rel(ker.eval_kernel("Q_c_inv", big_p, np.zeros(4)), qt.power(big_p, -2)), 1e-13)
    center = np.array([0.3, -0.5, 0.4, 0.2])
    pts = sample_points(rng, 100, 1.0)
    for n in range(1, 8):
        dbar = ops.apply_numeric("Dbar", lambda x, n=n: fam.eval_family("Qt", n, x, center), pts)
        ratio = qt.norm(0.5 * dbar) / np.maximum(qt.norm(fam.eval_family("Qt", n - 1, pts, center)), 1e-12)
        res.add(f"(Dbar/2) Qt_{n} = {n} Qt_{n - 1}", np.max(np.abs(ratio - n)) / n, 1e-6)
    return res


GROUPS = {
    "operator-oracle": operator_oracle,
    "fueter-theorem": fueter_theorem,
    "kernels": kernel_consistency,
    "series": series_machinery,
    "integrals": integral_representations,
    "families": family_properties,
    "discrepancies": discrepancies,
}


def run_group(name: str, seed: int = 0) -> GroupResult:
    if name not in GROUPS:
        raise KeyError(f"unknown verification group {name!r}; expected one of {', '.join(GROUPS)}")
    start = time.perf_counter()
    with np.errstate(all="ignore"):
        result = GROUPS[name](np.random.default_rng(seed))
    result.seconds = time.perf_counter() - start
    return result


def thread_cap() -> int:
    """Worker count from ``FINESTRUCT_THREADS`` (default 1)."""
    raw = os.environ.get("FINESTRUCT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_groups(names, seed: int = 0):
    """Run several groups, in parallel up to :func:`thread_cap`; results keep the given order."""
    names = list(names)
    workers = min(thread_cap(), len(names)) or 1
    if workers == 1:
        return [run_group(n, seed) for n in names]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda n: run_group(n, seed), names))
