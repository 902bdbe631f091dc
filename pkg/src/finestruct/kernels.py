"""Cauchy-type kernels and their series expansions.

Kernel names: ``S_L_inv_I``, ``S_L_inv_II``, ``S_R_inv_I``, ``S_R_inv_II``
(``S_L_inv``/``S_R_inv`` alias the second forms), ``Q_c_inv`` (with a power),
``F_L``, ``P2_L``, ``dS_L_inv`` (the ``q0`` derivative of ``S_L_inv``) and
``E`` (``conj(q)/|q|^4``, independent of ``p``).
"""

from __future__ import annotations

import numpy as np

from . import families as fam
from . import quaternion as qt
from .errors import OutsideRegionError, SingularityError
from .geometry import Region, images_within, region_contains
from .star import SINGULAR_TOL, sphere_value, star_power

KERNELS = ("S_L_inv_I", "S_L_inv_II", "S_R_inv_I", "S_R_inv_II", "Q_c_inv", "F_L", "P2_L", "dS_L_inv", "E")
ALIASES = {"S_L_inv": "S_L_inv_II", "S_R_inv": "S_R_inv_II"}
SERIES_KERNELS = ("S_L_inv", "Q_c_inv", "F_L", "P2_L", "E")


def _checked_inverse(x, scale):
    mag = qt.norm(x)
    if np.any(mag <= SINGULAR_TOL * scale):
        raise SingularityError("q lies on the sphere [p]", float(np.min(mag)))
    return qt.inv(x)


def _scale(p, q):
    return 1.0 + qt.norm2(p) + qt.norm2(q)


def sphere_inverse(p, q) -> np.ndarray:
    """``(p^2 - 2 q0 p + |q|^2)^{-1}``."""
    return _checked_inverse(sphere_value(q, p), _scale(p, q))


def _form_one_inverse(p, q):
    """``(q^2 - 2 p0 q + |p|^2)^{-1}``."""
    val = qt.mul(q, q) - qt.scale(q, 2.0 * p[..., 0]) + qt.real(qt.norm2(p))
    return _checked_inverse(val, _scale(p, q))


def canonical_kernel(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in KERNELS:
        raise ValueError(f"unknown kernel {name!r}; expected one of {', '.join(KERNELS)}")
    return name


def eval_kernel(name: str, p, q, power: int = 1) -> np.ndarray:
    """Closed-form value of a kernel at ``(p, q)``."""
    name = canonical_kernel(name)
    p = qt.as_quat(p)
    q = qt.as_quat(q)
    if name == "E":
        n2 = qt.norm2(q)
        if np.any(n2 == 0):
            raise SingularityError("E is singular at the origin", 0.0)
        return qt.conj(q) / (n2 * n2)[..., None]
    if name == "S_L_inv_I":
        return qt.mul(_form_one_inverse(p, q), qt.conj(p) - q)
    if name == "S_R_inv_I":
        return qt.mul(qt.conj(p) - q, _form_one_inverse(p, q))
    inv = sphere_inverse(p, q)
    left = p - qt.conj(q)
    if name == "S_L_inv_II":
        return qt.mul(left, inv)
    if name == "S_R_inv_II":
        return qt.mul(inv, left)
    if name == "Q_c_inv":
        if power < 1:
            raise ValueError("Q_c_inv needs power >= 1")
        return qt.power(inv, power)
    inv2 = qt.mul(inv, inv)
    if name == "F_L":
        return -4.0 * qt.mul(left, inv2)
    shifted = p - qt.real(q[..., 0])
    d_q0 = -inv + 2.0 * qt.mul(qt.mul(left, shifted), inv2)
    if name == "dS_L_inv":
        return d_q0
    return 2.0 * (d_q0 + inv)


def kernel_splitting(name: str, p, q) -> np.ndarray:
    """Kernel value rebuilt from ``S_L_inv`` at ``q`` and ``conj(q)`` (``q`` non-real).

    ``Q_c_inv`` and ``Q_c_inv_connection`` (through ``F_L``), ``P2_L`` and
    ``F_L`` are supported.
    """
    p = qt.as_quat(p)
    q = qt.as_quat(q)
    if name == "Q_c_inv_connection":
        f = eval_kernel("F_L", p, q)
        return 0.25 * (-qt.mul(f, p) + qt.mul(q, f))
    if np.any(qt.is_real(q)):
        from .errors import RealAxisError

        raise RealAxisError("kernel splittings divide by the vector part of q")
    vinv = qt.inv(qt.vector_part(q))
    jump = eval_kernel("S_L_inv", p, qt.conj(q)) - eval_kernel("S_L_inv", p, q)
    if name == "Q_c_inv":
        return -0.5 * qt.mul(vinv, jump)
    d_q0 = eval_kernel("dS_L_inv", p, q)
    if name == "P2_L":
        return 2.0 * d_q0 - qt.mul(vinv, jump)
    if name == "F_L":
        return -2.0 * qt.mul(vinv, d_q0) - qt.mul(qt.mul(vinv, vinv), jump)
    raise ValueError(f"no splitting for {name!r}")


def series_region(name: str, p, about: str) -> Region:
    """Region where :func:`kernel_series` converges."""
    p = qt.as_quat(p)
    if name == "E":
        return Region("star_dome", qt.ONE.copy(), (1.0,))
    if about == "origin":
        return Region("sigma_ball", np.zeros(4), (float(qt.norm(p)),))
    if about == "shifted":
        return Region("star_dome", p + qt.ONE, (1.0,))
    raise ValueError(f"unknown expansion point {about!r}")


def kernel_series_terms(name: str, p, q, N: int, about: str = "origin"):
    """Individual terms of a kernel expansion, ``n = 0..N``."""
    p = qt.as_quat(p)
    q = qt.as_quat(q)
    terms = []
    if name == "E":
        x = qt.ONE - q
        for n in range(N + 1):
            terms.append(0.5 * (n + 1) * (n + 2) * fam.eval_family("CA", n, x))
        return terms
    if about == "origin":
        pinv = qt.inv(p)
        for n in range(N + 1):
            if name == "S_L_inv":
                term = qt.mul(qt.power(q, n), qt.power(pinv, n + 1))
            elif name == "Q_c_inv":
                term = (n + 1) * qt.mul(fam.eval_family("H", n, q), qt.power(pinv, n + 2))
            elif name == "F_L":
                term = -2.0 * (n + 1) * (n + 2) * qt.mul(fam.eval_family("CA", n, q), qt.power(pinv, n + 3))
            elif name == "P2_L":
                term = 2.0 * (n + 1) * qt.mul(fam.eval_family("P2", n, q), qt.power(pinv, n + 2))
            else:
                raise ValueError(f"no series for {name!r}")
            terms.append(term)
        return terms
    center = p + qt.ONE
    for n in range(N + 1):
        sign = (-1.0) ** n
        if name == "S_L_inv":
            term = -sign * star_power(center, q, n)
        elif name == "Q_c_inv":
            term = sign * (n + 1) * fam.eval_family("Ht", n, q, center)
        elif name == "F_L":
            term = 2.0 * sign * (n + 1) * (n + 2) * fam.eval_family("Qt", n, q, center)
        elif name == "P2_L":
            term = 2.0 * sign * (n + 1) * fam.eval_family("P2t", n, q, center)
        else:
            raise ValueError(f"no series for {name!r}")
        terms.append(term)
    return terms


def kernel_series(name: str, p, q, N: int = 32, about: str = "origin"):
    """Partial sum of a kernel expansion and a geometric tail estimate.

    ``about="origin"`` expands in powers of ``p^{-1}`` for ``|q| < |p|``;
    ``about="shifted"`` expands around ``p + 1`` and converges on the star
    dome of radius one there. ``E`` always expands around ``1``.
    """
    from .series import geometric_tail

    if name in ("S_L_inv_I", "S_L_inv_II"):
        name = "S_L_inv"
    if name not in SERIES_KERNELS:
        raise ValueError(f"no series for kernel {name!r}")
    q = qt.as_quat(q)
    region = series_region(name, p, about)
    inside = region_contains(region, q)
    if name not in ("S_L_inv", "E") and about == "shifted":
        inside = inside & images_within(q, region.p, region.radii[0])
    if not np.all(inside):
        raise OutsideRegionError(f"q is outside the convergence region {region.to_json()}")
    terms = kernel_series_terms(name, p, q, N, about)
    value = np.sum(terms, axis=0)
    return value, geometric_tail([qt.norm(t) for t in terms])


def dbar_power_fueter_kernel(n: int, p, q) -> np.ndarray:
    """``Dbar^n F_L(p, q) = 2^(n+2) n! (-1)^n M_{n+1}(q, p) Q_{c,p}(q)^{-n-2}`` for ``n >= 0``."""
    from math import factorial

    from .star import sphere_inverse_power

    if n < 0:
        raise ValueError("n must be non-negative")
    p = qt.as_quat(p)
    q = qt.as_quat(q)
    factor = 2.0 ** (n + 2) * factorial(n) * (-1.0) ** n
    return factor * qt.mul(fam.eval_family("Mcal", n + 1, q, p), sphere_inverse_power(q, p, n + 2))
