"""Slice functions, star products, star powers and spherical blocks.

Two-variable objects such as ``(q - p)^{*n}`` are handled through
:class:`StarPoly`, a polynomial in ``p`` whose coefficients are quaternions
built from ``q`` and ``conj(q)`` alone, with the powers of ``p`` written on
the right. Such coefficients lie in the complex plane of ``q`` and commute,
so the right star product in ``p`` is the plain convolution of coefficient
lists. The same product is the left star product in ``q``, which is why a
single :func:`star_power` serves both readings.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable

import numpy as np

from . import quaternion as qt
from .errors import SingularityError

SINGULAR_TOL = 1e-12
# weight below which an image of p is treated as absent (q in the plane of p)
COPLANAR_TOL = 1e-14


@dataclass(frozen=True)
class StarCenter:
    """Center ``p = p0 + I_p p1`` of a star power or spherical block."""

    p: np.ndarray
    p0: float
    p1: float
    unit: np.ndarray | None

    @classmethod
    def of(cls, p) -> "StarCenter":
        if isinstance(p, StarCenter):
            return p
        p = qt.as_quat(p)
        if p.shape != (4,):
            raise ValueError("a star center is a single quaternion")
        u, v, unit = qt.slice_coords(p)
        return cls(p=p, p0=u, p1=v, unit=unit)


def _center_quat(p) -> np.ndarray:
    if isinstance(p, StarCenter):
        return p.p
    return qt.as_quat(p)


class StarPoly:
    """Polynomial ``sum_k C_k p^k`` with q-dependent coefficients ``C_k``."""

    def __init__(self, coeffs):
        self.coeffs = [np.asarray(c, dtype=float) for c in coeffs]

    @classmethod
    def linear(cls, x) -> "StarPoly":
        """The polynomial ``x - p``."""
        x = np.asarray(x, dtype=float)
        minus_one = np.broadcast_to(-qt.ONE, x.shape)
        return cls([x, minus_one])

    @classmethod
    def one(cls, shape) -> "StarPoly":
        return cls([np.broadcast_to(qt.ONE, tuple(shape) + (4,)).copy()])

    @classmethod
    def sphere(cls, q) -> "StarPoly":
        """``Q_{c,p}(q) = |q|^2 - 2 q0 p + p^2`` as a polynomial in ``p``."""
        q = np.asarray(q, dtype=float)
        return cls([qt.real(qt.norm2(q)), qt.real(-2.0 * q[..., 0]), np.broadcast_to(qt.ONE, q.shape).copy()])

    def star(self, other: "StarPoly") -> "StarPoly":
        out = [None] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                term = qt.mul(a, b)
                out[i + j] = term if out[i + j] is None else out[i + j] + term
        return StarPoly(out)

    def __add__(self, other: "StarPoly") -> "StarPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        out = []
        for k in range(n):
            a = self.coeffs[k] if k < len(self.coeffs) else None
            b = other.coeffs[k] if k < len(other.coeffs) else None
            out.append(a if b is None else b if a is None else a + b)
        return StarPoly(out)

    def __sub__(self, other: "StarPoly") -> "StarPoly":
        return self + other.scaled(-1.0)

    def scaled(self, s) -> "StarPoly":
        return StarPoly([c * s for c in self.coeffs])

    def left_mul(self, a) -> "StarPoly":
        """Multiply every coefficient on the left by a quaternion ``a`` from the plane of ``q``."""
        return StarPoly([qt.mul(a, c) for c in self.coeffs])

    def power(self, n: int) -> "StarPoly":
        if n < 0:
            raise ValueError("StarPoly.power needs n >= 0")
        out = StarPoly.one(self.coeffs[0].shape[:-1])
        for _ in range(n):
            out = out.star(self)
        return out

    def value(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        acc = None
        pk = None
        for k, c in enumerate(self.coeffs):
            pk = np.broadcast_to(qt.ONE, p.shape) if k == 0 else (p if k == 1 else qt.mul(pk, p))
            term = qt.mul(c, pk)
            acc = term if acc is None else acc + term
        return acc


def binomial_power(x, n: int) -> StarPoly:
    """``(x - p)^{*n}`` for ``n >= 0`` from the binomial formula."""
    x = np.asarray(x, dtype=float)
    coeffs = []
    xp = np.broadcast_to(qt.ONE, x.shape).copy()
    xpowers = [xp]
    for _ in range(n):
        xpowers.append(qt.mul(xpowers[-1], x))
    for k in range(n + 1):
        coeffs.append(xpowers[n - k] * (comb(n, k) * (-1.0) ** k))
    return StarPoly(coeffs)


def sphere_value(q, p) -> np.ndarray:
    """``Q_{c,p}(q) = p^2 - 2 q0 p + |q|^2``."""
    q = np.asarray(q, dtype=float)
    p = _center_quat(p)
    return qt.mul(p, p) - qt.scale(p, 2.0 * q[..., 0]) + qt.real(qt.norm2(q))


def sphere_inverse_power(q, p, n: int) -> np.ndarray:
    """``Q_{c,p}(q)^{-n}`` with a singularity check."""
    val = sphere_value(q, p)
    mag = qt.norm(val)
    scale = 1.0 + qt.norm2(q) + qt.norm2(_center_quat(p))
    if np.any(mag <= SINGULAR_TOL * scale):
        raise SingularityError("q lies on the sphere [p]", float(np.min(mag)))
    return qt.power(qt.inv(val), n)


def center_images(q, p):
    """Images ``z+`` and ``z-`` of ``p`` in the complex plane of ``q``.

    Returns ``(z_plus, z_minus, rot)`` with ``z_pm = p0 +- I_q p1`` and
    ``rot = I_q I_p``. A function ``g`` that is right slice in ``p`` (such as
    ``(q - p)^{*n}`` or any two-variable family) satisfies
    ``g(p) = (g(z+) + g(z-))/2 - (g(z+) - g(z-)) rot / 2``, see
    :func:`combine_images`. On the images everything commutes with ``q``.
    """
    q = qt.as_quat(q)
    pq = _center_quat(p)
    _, _, iq = qt.slice_split(q)
    p0 = pq[..., 0]
    p1 = qt.vec_norm(pq)
    _, _, ip = qt.slice_split(pq)
    zp = qt.real(p0) + qt.scale(iq, p1)
    zm = qt.real(p0) - qt.scale(iq, p1)
    return zp, zm, qt.mul(iq, ip)


def combine_images(g_plus, g_minus, rot) -> np.ndarray:
    """Recombine the values of a right slice function at the two images of ``p``.

    The result is ``g+ (1 - rot)/2 + g- (1 + rot)/2``. When ``q`` lies in the
    plane of ``p`` one weight vanishes and that image is dropped, so a
    divergent value there cannot leak into the sum.
    """
    w_plus = 0.5 * (qt.ONE - rot)
    w_minus = 0.5 * (qt.ONE + rot)
    with np.errstate(over="ignore", invalid="ignore"):
        t_plus = qt.mul(g_plus, w_plus)
        t_minus = qt.mul(g_minus, w_minus)
    t_plus = np.where((qt.norm(w_plus) < COPLANAR_TOL)[..., None], 0.0, t_plus)
    t_minus = np.where((qt.norm(w_minus) < COPLANAR_TOL)[..., None], 0.0, t_minus)
    return t_plus + t_minus


def on_images(fn, q, p) -> np.ndarray:
    """Evaluate ``fn(a, b)`` at ``a = q - z``, ``b = conj(q) - z`` for both images and recombine."""
    q = qt.as_quat(q)
    zp, zm, rot = center_images(q, p)
    qb = qt.conj(q)
    return combine_images(fn(q - zp, qb - zp), fn(q - zm, qb - zm), rot)


def star_power_binomial(p, q, n: int) -> np.ndarray:
    """``(q - p)^{*n}`` straight from the binomial sum (``n >= 0``).

    Loses precision through cancellation once ``|q|`` and ``|p|`` are large
    compared with ``|q - p|``; kept as an independent reference.
    """
    return binomial_power(qt.as_quat(q), n).value(_center_quat(p))


def star_power(p, q, n: int) -> np.ndarray:
    """``(q - p)^{*n}`` for any integer ``n``.

    For ``n >= 0`` this equals ``sum_r C(n, r) q^r (-p)^(n-r)``; for ``n < 0``
    it equals ``(conj(q) - p)^{*|n|} Q_{c,p}(q)^{-|n|}``. Both are evaluated
    through the images of ``p`` in the plane of ``q``, where they reduce to
    ordinary powers of ``q - z``.
    """
    q = qt.as_quat(q)
    if n < 0:
        zp, zm, _ = center_images(q, p)
        gap = np.minimum(qt.norm(q - zp), qt.norm(q - zm))
        scale = 1.0 + qt.norm(q) + qt.norm(_center_quat(p))
        if np.any(gap <= SINGULAR_TOL * scale):
            raise SingularityError("q lies on the sphere [p]", float(np.min(gap)))
    return on_images(lambda a, b: qt.power(a, n), q, p)


def star_power_bar(p, q, n: int) -> np.ndarray:
    """``(conj(q) - p)^{*n}`` for ``n >= 0``."""
    return on_images(lambda a, b: qt.power(b, n), q, p)


def _center_parts(p):
    """``(p0, p1^2)`` for a center given as a StarCenter or a (possibly batched) array."""
    if isinstance(p, StarCenter):
        return p.p0, p.p1 * p.p1
    p = qt.as_quat(p)
    return p[..., 0], np.sum(p[..., 1:] ** 2, axis=-1)


def spherical_base(p, q) -> np.ndarray:
    """``Q_p(q) = (q - p0)^2 + p1^2``; ``p`` may be batched like ``q``."""
    q = qt.as_quat(q)
    p0, p1sq = _center_parts(p)
    x = q - qt.real(p0)
    return qt.mul(x, x) + qt.real(p1sq)


def spherical_block(p, q, n: int) -> np.ndarray:
    """``Q_p^n(q) = ((q - p0)^2 + p1^2)^n`` for any integer ``n``."""
    q = qt.as_quat(q)
    base = spherical_base(p, q)
    if n < 0:
        mag = qt.norm(base)
        scale = 1.0 + qt.norm2(q) + qt.norm2(_center_quat(p))
        if np.any(mag <= SINGULAR_TOL * scale):
            raise SingularityError("q lies on the sphere [p]", float(np.min(mag)))
    return qt.power(base, n)


def spherical_term(p, q, k: int) -> np.ndarray:
    """Basis element of coefficient index ``k`` in a spherical expansion.

    Even ``k = 2n`` gives ``Q_p^n(q)``; odd ``k = 2n + 1`` gives
    ``Q_p^n(q) (q - p)``. Floor division makes this valid for negative ``k``.
    """
    n, linear = divmod(k, 2)
    block = spherical_block(p, q, n)
    if linear:
        return qt.mul(block, qt.as_quat(q) - _center_quat(p))
    return block


Components = Callable[[np.ndarray, np.ndarray], tuple]


class SliceFunction:
    """A slice function ``f(u + I v) = alpha(u, v) + I beta(u, v)``.

    ``components(u, v)`` returns the quaternion arrays ``(alpha, beta)``;
    alpha must be even and beta odd in ``v``.
    """

    def __init__(self, components: Components, name: str = "f"):
        self.components = components
        self.name = name

    def __call__(self, q) -> np.ndarray:
        u, v, unit = qt.slice_split(q)
        alpha, beta = self.components(u, v)
        return alpha + qt.mul(unit, beta)

    def __repr__(self) -> str:
        return f"SliceFunction({self.name})"

    @classmethod
    def monomials(cls, coeffs, name: str = "monomial_sum") -> "SliceFunction":
        """``f(q) = sum_n q^n a_n`` with quaternion coefficients ``a_n`` on the right."""
        coeffs = np.asarray(coeffs, dtype=float).reshape(-1, 4)

        def components(u, v):
            z = np.asarray(u, dtype=float) + 1j * np.asarray(v, dtype=float)
            zn = np.ones_like(z)
            alpha = np.zeros(z.shape + (4,))
            beta = np.zeros(z.shape + (4,))
            for a in coeffs:
                alpha = alpha + zn.real[..., None] * a
                beta = beta + zn.imag[..., None] * a
                zn = zn * z
            return alpha, beta

        return cls(components, name)

    @classmethod
    def intrinsic(cls, fn: Callable[[np.ndarray], np.ndarray], name: str = "intrinsic") -> "SliceFunction":
        """Lift a holomorphic ``fn`` on complex arrays with real Taylor coefficients."""

        def components(u, v):
            w = fn(np.asarray(u, dtype=float) + 1j * np.asarray(v, dtype=float))
            return qt.real(w.real), qt.real(w.imag)

        return cls(components, name)

    @classmethod
    def from_pointwise(cls, fn: Callable[[np.ndarray], np.ndarray], name: str = "pointwise", unit=qt.E1) -> "SliceFunction":
        """Recover ``(alpha, beta)`` of a slice function known only by its values.

        The pair is read off the slice of ``unit``; the result agrees with
        ``fn`` everywhere only when ``fn`` really is a slice function.
        """
        unit = qt.as_quat(unit)

        def components(u, v):
            plus = fn(qt.from_slice(u, v, unit))
            minus = fn(qt.from_slice(u, -np.asarray(v, dtype=float), unit))
            alpha = 0.5 * (plus + minus)
            beta = -0.5 * qt.mul(unit, plus - minus)
            return alpha, beta

        return cls(components, name)

    def star(self, other: "SliceFunction") -> "SliceFunction":
        """Left star product ``self *_L other``."""

        def components(u, v):
            a, b = self.components(u, v)
            a1, b1 = other.components(u, v)
            return qt.mul(a, a1) - qt.mul(b, b1), qt.mul(a, b1) + qt.mul(b, a1)

        return SliceFunction(components, f"({self.name} * {other.name})")

    def conjugate(self) -> "SliceFunction":
        def components(u, v):
            a, b = self.components(u, v)
            return qt.conj(a), qt.conj(b)

        return SliceFunction(components, f"{self.name}^c")

    def symmetrization(self) -> "SliceFunction":
        return self.star(self.conjugate())

    def star_inverse(self) -> "SliceFunction":
        """``(f^s)^{-1} f^c``; raises where ``f^s`` vanishes."""
        sym = self.symmetrization()
        conjugate = self.conjugate()

        def components(u, v):
            a, b = sym.components(u, v)
            # f^s is intrinsic, so only the real parts carry information
            ar, br = a[..., 0], b[..., 0]
            d = ar * ar + br * br
            if np.any(np.sqrt(d) <= SINGULAR_TOL):
                raise SingularityError("symmetrization vanishes", float(np.sqrt(np.min(d))))
            inv_a, inv_b = qt.real(ar / d), qt.real(-br / d)
            ca, cb = conjugate.components(u, v)
            return qt.mul(inv_a, ca) - qt.mul(inv_b, cb), qt.mul(inv_a, cb) + qt.mul(inv_b, ca)

        return SliceFunction(components, f"{self.name}^-*")

    def parity_defect(self, u, v) -> float:
        """Largest violation of the even/odd conditions on the given grid."""
        a, b = self.components(u, v)
        am, bm = self.components(u, -np.asarray(v, dtype=float))
        return float(max(np.max(qt.norm(a - am)), np.max(qt.norm(b + bm))))


def star_mul_left(f: SliceFunction, g: SliceFunction, q) -> np.ndarray:
    """Value of ``f *_L g`` at ``q``."""
    return f.star(g)(q)


def star_unary(f: SliceFunction, kind: str, q) -> np.ndarray:
    """Value at ``q`` of the conjugate, symmetrization or star inverse of ``f``."""
    if kind == "conjugate":
        return f.conjugate()(q)
    if kind == "symmetrization":
        return f.symmetrization()(q)
    if kind == "star_inverse":
        sym = f.symmetrization()(q)
        mag = qt.norm(sym)
        if np.any(mag <= SINGULAR_TOL * (1.0 + mag)):
            raise SingularityError("symmetrization vanishes at q", float(np.min(mag)))
        return f.star_inverse()(q)
    raise ValueError(f"unknown unary operation {kind!r}")


def representation_eval(f_plus, f_minus, q, unit) -> np.ndarray:
    """Value at ``q`` of a slice function known at ``u + I v`` and ``u - I v``.

    ``unit`` is the ``I`` of the known slice and ``q = u + I_q v`` for the
    same ``(u, v)``.
    """
    f_plus = np.asarray(f_plus, dtype=float)
    f_minus = np.asarray(f_minus, dtype=float)
    q = qt.as_quat(q)
    _, _, iq = qt.slice_split(q)
    rot = qt.mul(iq, unit)
    return 0.5 * (f_plus + f_minus) + 0.5 * qt.mul(rot, f_minus - f_plus)


def linear_function(p) -> SliceFunction:
    """The slice function ``q - p``."""
    pq = _center_quat(p)
    return SliceFunction.monomials([-pq, qt.ONE], name="q - p")


def slice_function_from_json(desc: dict) -> SliceFunction:
    """Build a slice function from a JSON descriptor.

    Supported kinds are ``monomial_sum`` with right coefficients and
    ``kernel`` naming one of the Cauchy-type kernels at a fixed ``p``.
    """
    kind = desc.get("kind")
    if kind == "monomial_sum":
        return SliceFunction.monomials(desc["coeffs"])
    if kind == "kernel":
        from .kernels import eval_kernel

        name = desc["name"]
        p = qt.as_quat(desc["p"])
        power = int(desc.get("power", 1))
        return SliceFunction.from_pointwise(lambda q: eval_kernel(name, p, q, power=power), name=name)
    raise ValueError(f"unknown slice function kind {kind!r}")
