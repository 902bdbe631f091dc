"""Polynomial families built from ``q``, ``conj(q)`` and star powers.

One-variable tags: ``H``, ``CA``, ``P2``, ``Pneg``, ``S``, ``R``.
Two-variable tags (need a center ``p``): ``Ht``, ``Qt``, ``P2t``, ``Hcal``,
``Mcal``, ``R2``. ``Fueter`` takes a multi-index instead of ``n``.

Every tag is evaluated from its defining finite sum; :func:`closed_form`
gives the alternative expressions valid off the real axis.
"""

from __future__ import annotations

from math import factorial

import numpy as np

from . import quaternion as qt
from .errors import RealAxisError
from .star import StarPoly, binomial_power, on_images, sphere_value, star_power, star_power_bar

ONE_VARIABLE = ("H", "CA", "P2", "Pneg", "S", "R")
TWO_VARIABLE = ("Ht", "Qt", "P2t", "Hcal", "Mcal", "R2")
TAGS = ONE_VARIABLE + TWO_VARIABLE + ("Fueter",)
ALIASES = {"Hq̃": "Ht", "H̃": "Ht", "Q̃": "Qt", "P̃2": "P2t", "ℋ": "Hcal", "ℳ": "Mcal", "ℛ2": "R2", "Q": "CA"}
MAX_FUETER_DEGREE = 8


def _powers(x, n):
    out = [np.broadcast_to(qt.ONE, x.shape).copy()]
    for _ in range(n):
        out.append(qt.mul(out[-1], x))
    return out


def _zero(q):
    return np.zeros(np.shape(q))


def harmonic(n: int, q) -> np.ndarray:
    """``H_n(q) = (1/(n+1)) sum_{k=1}^{n+1} conj(q)^(k-1) q^(n+1-k)``."""
    q = qt.as_quat(q)
    qp, cp = _powers(q, n), _powers(qt.conj(q), n)
    acc = _zero(q)
    for k in range(1, n + 2):
        acc = acc + qt.mul(cp[k - 1], qp[n + 1 - k])
    return acc / (n + 1)


def clifford_appell(n: int, q) -> np.ndarray:
    """``Q_n(q) = (2/((n+1)(n+2))) sum_j (n-j+1) q^(n-j) conj(q)^j``."""
    q = qt.as_quat(q)
    qp, cp = _powers(q, n), _powers(qt.conj(q), n)
    acc = _zero(q)
    for j in range(n + 1):
        acc = acc + (n - j + 1) * qt.mul(qp[n - j], cp[j])
    return acc * (2.0 / ((n + 1) * (n + 2)))


def polyanalytic(n: int, q) -> np.ndarray:
    """``P2_n(q) = q^n + H_n(q)``."""
    q = qt.as_quat(q)
    return qt.power(q, n) + harmonic(n, q)


def harmonic_negative(n: int, q) -> np.ndarray:
    """``P_n(q) = sum_{i=1}^n conj(q)^(n-i) q^(i-1)``; zero for ``n = 0``."""
    q = qt.as_quat(q)
    if n == 0:
        return _zero(q)
    qp, cp = _powers(q, n), _powers(qt.conj(q), n)
    acc = _zero(q)
    for i in range(1, n + 1):
        acc = acc + qt.mul(cp[n - i], qp[i - 1])
    return acc


def fueter_negative(n: int, q) -> np.ndarray:
    """``S_n(q) = sum_j (n-j) conj(q)^(n-j) q^j``."""
    q = qt.as_quat(q)
    qp, cp = _powers(q, n), _powers(qt.conj(q), n)
    acc = _zero(q)
    for j in range(n + 1):
        acc = acc + (n - j) * qt.mul(cp[n - j], qp[j])
    return acc


def polyanalytic_negative(n: int, q) -> np.ndarray:
    """``R_n(q) = n conj(q)^(n+1) + sum_{i=0}^{n-1} conj(q)^(n-i) q^(i+1)``."""
    q = qt.as_quat(q)
    qp, cp = _powers(q, n + 1), _powers(qt.conj(q), n + 1)
    acc = n * cp[n + 1]
    for i in range(n):
        acc = acc + qt.mul(cp[n - i], qp[i + 1])
    return acc


def _image_powers(a, b, n):
    return _powers(a, n), _powers(b, n)


def _harmonic_two(a, b, n):
    up, down = _image_powers(a, b, n + 1)
    acc = _zero(a)
    for k in range(1, n + 2):
        acc = acc + qt.mul(up[n + 1 - k], down[k - 1])
    return acc / (n + 1)


def _appell_two(a, b, n):
    up, down = _image_powers(a, b, n)
    acc = _zero(a)
    for j in range(n + 1):
        acc = acc + (2.0 * (n - j + 1) / ((n + 1) * (n + 2))) * qt.mul(up[n - j], down[j])
    return acc


def _polyanalytic_two(a, b, n):
    return qt.power(a, n) + _harmonic_two(a, b, n)


def _harmonic_cal(a, b, n):
    if n == 0:
        return _zero(a)
    up, down = _image_powers(a, b, n)
    acc = _zero(a)
    for k in range(1, n + 1):
        acc = acc + qt.mul(down[n - k], up[k - 1])
    return acc


def _fueter_cal(a, b, n):
    up, down = _image_powers(a, b, n)
    acc = _zero(a)
    for j in range(n + 1):
        acc = acc + (n - j) * qt.mul(down[n - j], up[j])
    return acc


def _polyanalytic_cal(a, b, n):
    up, down = _image_powers(a, b, n + 1)
    acc = n * down[n + 1]
    for k in range(n):
        acc = acc + qt.mul(down[n - k], up[k + 1])
    return acc


def _pair_powers(q, n):
    """Star powers ``(q-p)^{*k}`` and ``(conj(q)-p)^{*k}`` for ``k = 0..n`` as polynomials in ``p``."""
    lin = StarPoly.linear(q)
    lin_bar = StarPoly.linear(qt.conj(q))
    up, down = [StarPoly.one(q.shape[:-1])], [StarPoly.one(q.shape[:-1])]
    for _ in range(n):
        up.append(up[-1].star(lin))
        down.append(down[-1].star(lin_bar))
    return up, down


def _zero_poly(q):
    return StarPoly([_zero(q)])


def harmonic_two_poly(n: int, q) -> StarPoly:
    up, down = _pair_powers(q, n + 1)
    acc = _zero_poly(q)
    for k in range(1, n + 2):
        acc = acc + up[n + 1 - k].star(down[k - 1])
    return acc.scaled(1.0 / (n + 1))


def appell_two_poly(n: int, q) -> StarPoly:
    up, down = _pair_powers(q, n)
    acc = _zero_poly(q)
    for j in range(n + 1):
        acc = acc + up[n - j].star(down[j]).scaled(2.0 * (n - j + 1) / ((n + 1) * (n + 2)))
    return acc


def polyanalytic_two_poly(n: int, q) -> StarPoly:
    return binomial_power(q, n) + harmonic_two_poly(n, q)


def harmonic_cal_poly(n: int, q) -> StarPoly:
    if n == 0:
        return _zero_poly(q)
    up, down = _pair_powers(q, n)
    acc = _zero_poly(q)
    for k in range(1, n + 1):
        acc = acc + down[n - k].star(up[k - 1])
    return acc


def fueter_cal_poly(n: int, q) -> StarPoly:
    up, down = _pair_powers(q, n)
    acc = _zero_poly(q)
    for j in range(n + 1):
        acc = acc + down[n - j].star(up[j]).scaled(float(n - j))
    return acc


def polyanalytic_cal_poly(n: int, q) -> StarPoly:
    up, down = _pair_powers(q, n + 1)
    acc = down[n + 1].scaled(float(n))
    for k in range(n):
        acc = acc + down[n - k].star(up[k + 1])
    return acc


_ONE_VAR = {
    "H": harmonic,
    "CA": clifford_appell,
    "P2": polyanalytic,
    "Pneg": harmonic_negative,
    "S": fueter_negative,
    "R": polyanalytic_negative,
}

_TWO_VAR = {
    "Ht": _harmonic_two,
    "Qt": _appell_two,
    "P2t": _polyanalytic_two,
    "Hcal": _harmonic_cal,
    "Mcal": _fueter_cal,
    "R2": _polyanalytic_cal,
}

# the same sums expanded as polynomials in p, used as an independent reference
TWO_VARIABLE_POLYS = {
    "Ht": harmonic_two_poly,
    "Qt": appell_two_poly,
    "P2t": polyanalytic_two_poly,
    "Hcal": harmonic_cal_poly,
    "Mcal": fueter_cal_poly,
    "R2": polyanalytic_cal_poly,
}


def canonical_tag(tag: str) -> str:
    tag = ALIASES.get(tag, tag)
    if tag not in TAGS:
        raise ValueError(f"unknown family tag {tag!r}; expected one of {', '.join(TAGS)}")
    return tag


def eval_family(tag: str, n, q, p=None) -> np.ndarray:
    """Evaluate family ``tag`` of index ``n`` at ``q`` (and center ``p`` when two-variable)."""
    tag = canonical_tag(tag)
    q = qt.as_quat(q)
    if tag == "Fueter":
        return eval_fueter_polynomial(n, q)
    n = int(n)
    if n < 0:
        raise ValueError("family index must be non-negative")
    if tag in _ONE_VAR:
        if p is not None:
            raise ValueError(f"family {tag} takes no center")
        return _ONE_VAR[tag](n, q)
    if p is None:
        raise ValueError(f"family {tag} needs a center p")
    pq = p.p if hasattr(p, "p") else qt.as_quat(p)
    return on_images(lambda a, b: _TWO_VAR[tag](a, b, n), q, pq)


def eval_family_expanded(tag: str, n: int, q, p) -> np.ndarray:
    """Two-variable family from its coefficient expansion in powers of ``p``."""
    tag = canonical_tag(tag)
    pq = p.p if hasattr(p, "p") else qt.as_quat(p)
    return TWO_VARIABLE_POLYS[tag](int(n), qt.as_quat(q)).value(pq)


def _require_nonreal(q):
    if np.any(qt.is_real(q)):
        raise RealAxisError("closed forms divide by the vector part of q")


def closed_form(tag: str, n: int, q, p=None) -> np.ndarray:
    """Closed expression of a family for non-real ``q``.

    These divide by the vector part ``vq`` of ``q`` and exist as an
    independent cross-check of :func:`eval_family`.
    """
    tag = canonical_tag(tag)
    q = qt.as_quat(q)
    _require_nonreal(q)
    vinv = qt.inv(qt.vector_part(q))
    qb = qt.conj(q)
    if tag in _ONE_VAR:
        up = lambda k: qt.power(q, k)  # noqa: E731
        down = lambda k: qt.power(qb, k)  # noqa: E731
        modsq = qt.norm2(q)[..., None]
        if tag == "H":
            return qt.mul(vinv, down(n + 1) - up(n + 1)) * (-1.0 / (2 * (n + 1)))
        if tag == "CA":
            inner = 2 * (n + 2) * up(n + 1) + qt.mul(vinv, down(n + 2) - up(n + 2))
            return qt.mul(vinv, inner) / (2 * (n + 1) * (n + 2))
        if tag == "P2":
            return up(n) - qt.mul(vinv, down(n + 1) - up(n + 1)) / (2 * (n + 1))
        if tag == "Pneg":
            return 0.5 * qt.mul(vinv, up(n) - down(n))
        if tag == "S":
            inner = -2 * n * down(n + 1) + modsq * qt.mul(vinv, up(n) - down(n))
            return 0.25 * qt.mul(vinv, inner)
        if tag == "R":
            return n * down(n + 1) + 0.5 * modsq * qt.mul(vinv, up(n) - down(n))
    if p is None:
        raise ValueError(f"family {tag} needs a center p")
    pq = p.p if hasattr(p, "p") else qt.as_quat(p)
    up = lambda k: star_power(pq, q, k)  # noqa: E731
    down = lambda k: star_power_bar(pq, q, k)  # noqa: E731
    sph = sphere_value(q, pq)
    if tag == "Ht":
        return qt.mul(vinv, down(n + 1) - up(n + 1)) * (-1.0 / (2 * (n + 1)))
    if tag == "Qt":
        inner = 2 * (n + 2) * up(n + 1) + qt.mul(vinv, down(n + 2) - up(n + 2))
        return qt.mul(vinv, inner) / (2 * (n + 1) * (n + 2))
    if tag == "P2t":
        return up(n) - qt.mul(vinv, down(n + 1) - up(n + 1)) / (2 * (n + 1))
    if tag == "Hcal":
        return 0.5 * qt.mul(vinv, up(n) - down(n))
    if tag == "Mcal":
        inner = -2 * n * down(n + 1) + qt.mul(qt.mul(vinv, up(n) - down(n)), sph)
        return 0.25 * qt.mul(vinv, inner)
    if tag == "R2":
        return n * down(n + 1) + 0.5 * qt.mul(qt.mul(vinv, up(n) - down(n)), sph)
    raise ValueError(f"no closed form for {tag}")


def fueter_variables(q):
    """``(xi_1, xi_2, xi_3)`` with ``xi_i = q_i - e_i q_0``."""
    q = qt.as_quat(q)
    out = []
    for i, e in enumerate((qt.E1, qt.E2, qt.E3), start=1):
        out.append(qt.real(q[..., i]) - qt.scale(e, q[..., 0]))
    return tuple(out)


def multiset_permutations(items):
    """Distinct orderings of a multiset, in lexicographic order."""
    items = sorted(items)
    n = len(items)
    while True:
        yield tuple(items)
        i = n - 2
        while i >= 0 and items[i] >= items[i + 1]:
            i -= 1
        if i < 0:
            return
        j = n - 1
        while items[j] <= items[i]:
            j -= 1
        items[i], items[j] = items[j], items[i]
        items[i + 1 :] = reversed(items[i + 1 :])


def eval_fueter_polynomial(nu, q) -> np.ndarray:
    """Fueter polynomial ``P_nu`` as an average over orderings of its factors.

    Each factor is ``q0 e_l - q_l``; a multiset with ``m_l`` copies of ``l``
    contributes ``|nu|! / prod(m_l!)`` distinct orderings, so averaging over
    distinct orderings equals the full symmetrized sum divided by ``|nu|!``.
    """
    nu = [int(m) for m in nu]
    if len(nu) != 3 or any(m < 0 for m in nu):
        raise ValueError("a Fueter multi-index has three non-negative entries")
    degree = sum(nu)
    if degree > MAX_FUETER_DEGREE:
        raise ValueError(f"Fueter polynomials are limited to degree {MAX_FUETER_DEGREE}")
    q = qt.as_quat(q)
    factors = [-x for x in fueter_variables(q)]
    labels = [lam for lam, m in enumerate(nu) for _ in range(m)]
    acc = _zero(q)
    count = 0
    for order in multiset_permutations(labels):
        term = np.broadcast_to(qt.ONE, q.shape).copy()
        for lam in order:
            term = qt.mul(term, factors[lam])
        acc = acc + term
        count += 1
    if degree == 0:
        return acc
    expected = factorial(degree) // np.prod([factorial(m) for m in nu])
    assert count == expected
    return acc / count

