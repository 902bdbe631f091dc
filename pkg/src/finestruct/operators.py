"""Dirac-type operators: numeric finite differences and exact actions.

The operators act on quaternion-valued functions of a quaternion variable:

* ``D = d0 + e1 d1 + e2 d2 + e3 d3`` (Cauchy-Fueter),
* ``Dbar = d0 - e1 d1 - e2 d2 - e3 d3``,
* ``Delta = d0^2 + d1^2 + d2^2 + d3^2``,
* ``Euler`` ``sum_k q_k d_k`` and ``Gamma`` ``-sum_{j<k} e_j e_k (q_j d_k - q_k d_j)``,
* ``V_left`` ``d0 + (vq / |vq|^2) Euler`` and ``V_right`` with the factor on the right.

Numeric application uses 4th-order central differences with one Richardson
step. Functions passed in must broadcast over leading axes.
"""

from __future__ import annotations

from math import prod
from typing import Callable

import numpy as np

from . import families as fam
from . import quaternion as qt
from .errors import RealAxisError, SingularityError
from .star import (
    sphere_inverse_power,
    spherical_block,
    star_power,
    StarCenter,
)

NUMERIC_OPS = ("D", "Dbar", "Delta", "d_q0", "Euler", "Gamma", "V_left", "V_right")
EXACT_OPS = ("D", "Dbar", "Delta")
TARGETS = ("star_power", "spherical_block", "spherical_linear")

QFunc = Callable[[np.ndarray], np.ndarray]

# offsets -2h, -h, h, 2h followed by the center point
_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])


def default_step(q) -> np.ndarray:
    return 1e-3 * (1.0 + qt.norm(q))


def kahan_sum(terms):
    """Compensated sum of a sequence of equally shaped arrays, in the given order."""
    total = np.zeros_like(terms[0])
    comp = np.zeros_like(terms[0])
    for t in terms:
        y = t - comp
        s = total + y
        comp = (s - total) - y
        total = s
    return total


def _raw_derivatives(f: QFunc, q: np.ndarray, h: np.ndarray, second: bool):
    """First (and optionally pure second) partials at steps ``h`` and ``h/2``."""
    pts = []
    for step in (h, 0.5 * h):
        for i in range(4):
            for s in _OFFSETS:
                pts.append(q + (s * step)[..., None] * qt.BASIS[i])
    pts.append(q)
    stack = np.stack(pts, axis=-2)
    vals = f(stack)
    out_first, out_second = [], []
    center = vals[..., -1, :]
    for level, step in enumerate((h, 0.5 * h)):
        first, sec = [], []
        for i in range(4):
            base = level * 16 + i * 4
            fm2, fm1, fp1, fp2 = (vals[..., base + j, :] for j in range(4))
            first.append((fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * step[..., None]))
            if second:
                sec.append((-fm2 + 16.0 * fm1 - 30.0 * center + 16.0 * fp1 - fp2) / (12.0 * step[..., None] ** 2))
        out_first.append(first)
        out_second.append(sec)
    return out_first, out_second


def partials(f: QFunc, q, h=None, second: bool = False):
    """Richardson-extrapolated partial derivatives ``[d0 f, d1 f, d2 f, d3 f]``.

    With ``second=True`` also returns the pure second partials.
    """
    q = qt.as_quat(q)
    h = default_step(q) if h is None else np.broadcast_to(np.asarray(h, dtype=float), q.shape[:-1])
    (f1, f2), (s1, s2) = _raw_derivatives(f, q, h, second)
    first = [(16.0 * b - a) / 15.0 for a, b in zip(f1, f2)]
    if not second:
        return first
    sec = [(16.0 * b - a) / 15.0 for a, b in zip(s1, s2)]
    return first, sec


def _require_nonreal(q):
    if np.any(qt.is_real(q)):
        raise RealAxisError("operator is singular on the real axis")


def _euler_gamma(first, q):
    euler = kahan_sum([qt.scale(first[k], q[..., k]) for k in (1, 2, 3)])
    terms = []
    for j, k in ((1, 2), (1, 3), (2, 3)):
        ejek = qt.mul(qt.BASIS[j], qt.BASIS[k])
        inner = qt.scale(first[k], q[..., j]) - qt.scale(first[j], q[..., k])
        terms.append(-qt.mul(ejek, inner))
    return euler, kahan_sum(terms)


def apply_numeric(op: str, f: QFunc, q, h=None) -> np.ndarray:
    """Apply operator ``op`` to ``f`` at ``q`` by finite differences."""
    if op not in NUMERIC_OPS:
        raise ValueError(f"unknown operator {op!r}")
    q = qt.as_quat(q)
    if op == "Delta":
        _, sec = partials(f, q, h, second=True)
        return kahan_sum(sec)
    first = partials(f, q, h)
    if op == "d_q0":
        return first[0]
    if op == "D":
        return kahan_sum([first[0]] + [qt.mul(qt.BASIS[i], first[i]) for i in (1, 2, 3)])
    if op == "Dbar":
        return kahan_sum([first[0]] + [-qt.mul(qt.BASIS[i], first[i]) for i in (1, 2, 3)])
    _require_nonreal(q)
    euler, gamma = _euler_gamma(first, q)
    if op == "Euler":
        return euler
    if op == "Gamma":
        return gamma
    vec = qt.vector_part(q)
    radial = vec / qt.norm2(vec)[..., None]
    if op == "V_left":
        return first[0] + qt.mul(radial, euler)
    return first[0] + qt.mul(euler, radial)


def euler_gamma_identities(f: QFunc, q, h=None):
    """``(Df, Dbar f, Delta f)`` assembled from the Euler and Gamma operators.

    Uses ``Df = -vq^{-1} Gamma f``, ``Dbar f = vq^{-1} (2 Euler + Gamma) f`` and
    ``Delta f = -vq^{-2} (2 Euler - Gamma) f`` where ``vq`` is the vector part.
    """
    q = qt.as_quat(q)
    _require_nonreal(q)
    first = partials(f, q, h)
    euler, gamma = _euler_gamma(first, q)
    vinv = qt.inv(qt.vector_part(q))
    d = -qt.mul(vinv, gamma)
    dbar = qt.mul(vinv, 2.0 * euler + gamma)
    delta = -qt.mul(qt.mul(vinv, vinv), 2.0 * euler - gamma)
    return d, dbar, delta


def _star_power_action(op, n, p, q):
    pq = p.p
    if n == 0:
        return np.zeros(q.shape)
    if n > 0:
        if op == "D":
            return -2.0 * n * fam.eval_family("Ht", n - 1, q, pq)
        if op == "Dbar":
            return 2.0 * n * fam.eval_family("P2t", n - 1, q, pq)
        if n < 2:
            return np.zeros(q.shape)
        return -2.0 * n * (n - 1) * fam.eval_family("Qt", n - 2, q, pq)
    m = -n
    if op == "D":
        return 2.0 * qt.mul(fam.eval_family("Hcal", m, q, pq), sphere_inverse_power(q, pq, m))
    if op == "Delta":
        return -4.0 * qt.mul(fam.eval_family("Mcal", m, q, pq), sphere_inverse_power(q, pq, m + 1))
    return -2.0 * qt.mul(fam.eval_family("R2", m, q, pq), sphere_inverse_power(q, pq, m + 1))


def _block_sums(p, q, n):
    """Divided-difference sums for ``w(z) = (z - p0)^2 + p1^2`` raised to ``n``.

    With ``Q = Q_p(q)`` and ``Qb = Q_p(conj(q))`` (both in the plane of ``q``,
    so they commute) the first divided difference of ``w^n`` at ``(q, conj q)``
    is ``(q + conj(q) - 2 p0) * sign * sum Q^a Qb^b`` over ``a + b = n - 1``,
    with ``a, b >= 0`` for ``n > 0`` and ``n <= a, b <= -1`` (sign ``-1``) for
    ``n < 0``. Returns ``(sum Q^a Qb^b, sum a Q^(a-1) Qb^b)`` with the sign applied.
    """
    base = spherical_block(p, q, 1)
    base_bar = qt.conj(base)
    if n > 0:
        pairs, sign = [(a, n - 1 - a) for a in range(n)], 1.0
    else:
        pairs, sign = [(a, n - 1 - a) for a in range(n, 0)], -1.0
    if n < 0 and np.any(qt.norm(base) <= 1e-12 * (1.0 + qt.norm2(q))):
        raise SingularityError("q lies on the sphere [p]", float(np.min(qt.norm(base))))
    lo = min([b for _, b in pairs] + [a - 1 for a, _ in pairs if a != 0])
    hi = max(max(a, b) for a, b in pairs)
    up = _power_table(base, lo, hi)
    down = _power_table(base_bar, lo, hi)
    plain = np.zeros(q.shape)
    lowered = np.zeros(q.shape)
    for a, b in pairs:
        right = down[b]
        plain = plain + qt.mul(up[a], right)
        if a != 0:
            lowered = lowered + a * qt.mul(up[a - 1], right)
    return sign * plain, sign * lowered


def _power_table(x, lo: int, hi: int):
    """``{k: x^k}`` for ``lo <= k <= hi`` built by repeated multiplication."""
    table = {}
    current = qt.power(x, lo)
    for k in range(lo, hi + 1):
        table[k] = current
        current = qt.mul(current, x)
    return table


def _block_action(op, n, p, q):
    """Exact action on ``Q_p^n(q)`` for integer ``n``.

    Writes ``Delta f = -4 F[q, q, conj q]``, ``D f = -2 F[q, conj q]`` and
    ``Dbar f = 2 d0 f + 2 F[q, conj q]`` for the holomorphic restriction ``F``.
    """
    if n == 0:
        return np.zeros(q.shape)
    shift = q - p.p0 * qt.ONE
    t = q[..., 0] - p.p0
    plain, lowered = _block_sums(p, q, n)
    first = qt.scale(plain, 2.0 * t)
    if op == "D":
        return -2.0 * first
    if op == "Dbar":
        d0 = 2.0 * n * qt.mul(shift, spherical_block(p, q, n - 1))
        return 2.0 * d0 + 2.0 * first
    second = plain + qt.scale(qt.mul(lowered, 2.0 * shift), 2.0 * t)
    return -4.0 * second


def _block_linear_action(op, n, p, q):
    """Exact action on ``Q_p^n(q) (q - p)`` for integer ``n``."""
    shift = q - p.p0 * qt.ONE
    lin = q - p.p
    lin_bar = qt.conj(q) - p.p
    block = spherical_block(p, q, n)
    prev = spherical_block(p, q, n - 1) if n != 0 else np.zeros(q.shape)
    if op == "D":
        return qt.mul(_block_action("D", n, p, q), lin_bar) - 2.0 * block
    if op == "Dbar":
        return 4.0 * block + 4.0 * n * qt.mul(qt.mul(shift, prev), lin) - qt.mul(_block_action("D", n, p, q), lin_bar)
    return qt.mul(_block_action("Delta", n, p, q), lin_bar) - 8.0 * n * qt.mul(shift, prev)


def apply_exact(op: str, target: str, n: int, p, q) -> np.ndarray:
    """Closed-form action of ``D``, ``Dbar`` or ``Delta`` on a building block.

    ``target`` is ``star_power`` for ``(q - p)^{*n}``, ``spherical_block`` for
    ``Q_p^n(q)`` or ``spherical_linear`` for ``Q_p^n(q) (q - p)``; ``n`` may be
    negative.
    """
    if op not in EXACT_OPS:
        raise ValueError(f"no exact action for operator {op!r}")
    p = StarCenter.of(p)
    q = qt.as_quat(q)
    n = int(n)
    if target == "star_power":
        return _star_power_action(op, n, p, q)
    if target == "spherical_block":
        return _block_action(op, n, p, q)
    if target == "spherical_linear":
        return _block_linear_action(op, n, p, q)
    raise ValueError(f"unknown target {target!r}")


def target_function(target: str, n: int, p) -> QFunc:
    """The building block named by ``target`` as a function of ``q``."""
    p = StarCenter.of(p)
    if target == "star_power":
        return lambda x: star_power(p, x, n)
    if target == "spherical_block":
        return lambda x: spherical_block(p, x, n)
    if target == "spherical_linear":
        return lambda x: qt.mul(spherical_block(p, x, n), x - p.p)
    raise ValueError(f"unknown target {target!r}")


def global_power_on_block(m: int, n: int, p, q, with_linear_factor: bool = False) -> np.ndarray:
    """``V_p^m`` applied to ``Q_p^n(q)``, or to ``Q_p^n(q) (q - p)`` when requested.

    The result is ``2^m n(n-1)...(n-m+1) Q_p^(n-m)(q) (p - q)^{*m}``; with the
    linear factor it is minus the same expression with ``(p - q)^{*(m+1)}``.
    """
    if m < 0 or m > n:
        raise ValueError("global_power_on_block needs 0 <= m <= n")
    p = StarCenter.of(p)
    q = qt.as_quat(q)
    factor = 2.0**m * prod(range(n - m + 1, n + 1))
    block = spherical_block(p, q, n - m)
    k = m + 1 if with_linear_factor else m
    # (p - q)^{*k} = (-1)^k (q - p)^{*k}
    power = (-1.0) ** k * star_power(p, q, k)
    sign = -1.0 if with_linear_factor else 1.0
    return sign * factor * qt.mul(block, power)


def global_numeric_on_block(n: int, p, q, with_linear_factor: bool = False, h=None) -> np.ndarray:
    """Finite-difference ``V_p`` (right global operator in ``p``) on a spherical block."""
    q = qt.as_quat(q)
    p = qt.as_quat(p)

    def in_p(x):
        block = spherical_block(x, q, n)
        return qt.mul(block, q - x) if with_linear_factor else block

    return apply_numeric("V_right", in_p, p, h)


def _u_derivative(f: QFunc, x, h=None, order: int = 1):
    """Derivative along the real direction, the ``d/du`` of a slice function."""
    x = qt.as_quat(x)
    if order == 1:
        return partials(f, x, h)[0]
    _, sec = partials(f, x, h, second=True)
    return sec[0]


def rep_formula(op: str, q, unit, f_plus, f_minus, df_plus=None, df_minus=None, d2f=None) -> np.ndarray:
    """Operator value at ``q`` from data on the slice of ``unit``.

    ``f_plus``/``f_minus`` are ``f(u + I v)`` and ``f(u - I v)``; ``df_*`` the
    ``u``-derivatives there. On the real axis the formulas reduce to
    ``-2 f'``, ``4 f'`` and ``-2 f''`` and take ``df_plus``/``d2f``.
    """
    if op not in EXACT_OPS:
        raise ValueError(f"unknown operator {op!r}")
    q = qt.as_quat(q)
    unit = qt.as_quat(unit)
    if np.all(qt.is_real(q)):
        if op == "D":
            return -2.0 * np.asarray(df_plus)
        if op == "Dbar":
            return 4.0 * np.asarray(df_plus)
        return -2.0 * np.asarray(d2f)
    _require_nonreal(q)
    vinv = qt.inv(qt.vector_part(q))
    rot = qt.mul(qt.imaginary_unit(q), unit)
    jump = qt.mul(rot, np.asarray(f_minus) - np.asarray(f_plus))
    if op == "D":
        return -qt.mul(vinv, jump)
    slope = np.asarray(df_plus) + np.asarray(df_minus) + qt.mul(rot, np.asarray(df_minus) - np.asarray(df_plus))
    if op == "Dbar":
        return slope + qt.mul(vinv, jump)
    return -qt.mul(vinv, slope) + qt.mul(qt.mul(vinv, vinv), jump)


def rep_formula_eval(op: str, f: QFunc, q, unit=qt.E1, h=None) -> np.ndarray:
    """Evaluate :func:`rep_formula` for a slice function, supplying the data it needs."""
    q = qt.as_quat(q)
    unit = qt.as_quat(unit)
    u, v, _ = qt.slice_split(q)
    plus = qt.from_slice(u, v, unit)
    minus = qt.from_slice(u, -v, unit)
    if np.all(qt.is_real(q)):
        x = qt.real(u)
        return rep_formula(op, q, unit, f(x), f(x), _u_derivative(f, x, h), _u_derivative(f, x, h), _u_derivative(f, x, h, 2))
    return rep_formula(op, q, unit, f(plus), f(minus), _u_derivative(f, plus, h), _u_derivative(f, minus, h))
