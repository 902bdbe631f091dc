"""Vectorized real quaternion arithmetic.

A quaternion is stored as a float array whose last axis has length 4,
ordered ``(q0, q1, q2, q3)`` for ``q0 + q1 e1 + q2 e2 + q3 e3`` with
``e1 e2 = e3``, ``e2 e3 = e1`` and ``e3 e1 = e2``. Every function here
broadcasts over the leading axes.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularityError

REAL_AXIS_TOL = 1e-13

ONE = np.array([1.0, 0.0, 0.0, 0.0])
E1 = np.array([0.0, 1.0, 0.0, 0.0])
E2 = np.array([0.0, 0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 0.0, 1.0])
BASIS = (ONE, E1, E2, E3)


def as_quat(x) -> np.ndarray:
    """Coerce a scalar, a length-4 sequence or an array to a quaternion array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        return np.array([float(arr), 0.0, 0.0, 0.0])
    if arr.shape[-1] != 4:
        raise ValueError(f"quaternion arrays need a trailing axis of length 4, got shape {arr.shape}")
    return arr


def real(x) -> np.ndarray:
    """Quaternion with the real part as value, promoted from a real array."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape + (4,))
    out[..., 0] = x
    return out


def scalar_part(q: np.ndarray) -> np.ndarray:
    return q[..., 0]


def vector_part(q: np.ndarray) -> np.ndarray:
    out = np.array(q, dtype=float, copy=True)
    out[..., 0] = 0.0
    return out


def mul(a, b) -> np.ndarray:
    """Hamilton product ``a b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a0, a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    b0, b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def mul_many(*factors) -> np.ndarray:
    out = factors[0]
    for f in factors[1:]:
        out = mul(out, f)
    return out


def scale(q, s) -> np.ndarray:
    """Multiply a quaternion array by a real array (broadcast on leading axes)."""
    return np.asarray(q, dtype=float) * np.asarray(s, dtype=float)[..., None]


def conj(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def norm2(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.sum(q * q, axis=-1)


def norm(q) -> np.ndarray:
    return np.sqrt(norm2(q))


def vec_norm(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.sqrt(np.sum(q[..., 1:] ** 2, axis=-1))


def inv(q, *, tol: float = 0.0) -> np.ndarray:
    """Inverse ``conj(q) / |q|^2``; raises when some entry is at most ``tol`` in modulus."""
    q = np.asarray(q, dtype=float)
    n2 = norm2(q)
    if np.any(n2 <= tol * tol):
        raise SingularityError("inverse of a zero quaternion", float(np.sqrt(np.min(n2))))
    return conj(q) / n2[..., None]


def conj_mod_inv(q):
    """Return ``(conjugate, modulus, inverse)`` of a single quaternion.

    The inverse of zero is reported as ``None`` rather than NaN.
    """
    q = as_quat(q)
    if q.shape != (4,):
        raise ValueError("conj_mod_inv takes one quaternion")
    n = float(norm(q))
    return conj(q), n, (None if n == 0.0 else conj(q) / (n * n))


def is_real(q, tol: float = REAL_AXIS_TOL) -> np.ndarray:
    """True where the vector part is negligible relative to ``1 + |q|``."""
    q = np.asarray(q, dtype=float)
    return vec_norm(q) <= tol * (1.0 + norm(q))


def slice_split(q, *, default_unit=E1):
    """Vectorized ``q = u + I v`` with ``v >= 0``.

    On the real axis ``v`` is zero and ``I`` is replaced by ``default_unit``
    so that downstream formulas stay defined. Returns ``(u, v, I)``.
    """
    q = as_quat(q)
    u = q[..., 0]
    v = vec_norm(q)
    on_axis = is_real(q)
    safe_v = np.where(on_axis, 1.0, v)
    unit = vector_part(q) / safe_v[..., None]
    unit = np.where(on_axis[..., None], np.broadcast_to(default_unit, unit.shape), unit)
    v = np.where(on_axis, 0.0, v)
    return u, v, unit


def slice_coords(q):
    """Coordinates ``(u, v, I)`` of one quaternion; ``I`` is ``None`` on the real axis."""
    q = as_quat(q)
    if q.shape != (4,):
        raise ValueError("slice_coords takes one quaternion; use slice_split for arrays")
    u, v, unit = slice_split(q)
    if is_real(q):
        return float(u), 0.0, None
    return float(u), float(v), unit


def imaginary_unit(q) -> np.ndarray:
    """Unit imaginary ``I_q`` of a non-real quaternion."""
    q = as_quat(q)
    if np.any(is_real(q)):
        raise ValueError("the imaginary unit of a real quaternion is undefined")
    return vector_part(q) / vec_norm(q)[..., None]


def unit_vector(x) -> np.ndarray:
    """Normalize a 3-vector or pure quaternion into a unit imaginary quaternion."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] == 3:
        x = np.concatenate([np.zeros(x.shape[:-1] + (1,)), x], axis=-1)
    x = vector_part(x)
    n = vec_norm(x)
    if np.any(n == 0):
        raise ValueError("cannot normalize a zero vector")
    return x / n[..., None]


def from_slice(u, v, unit) -> np.ndarray:
    """Build ``u + unit v`` from real arrays and an imaginary unit."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return real(u) + scale(unit, v)


def power(q, n: int) -> np.ndarray:
    """Integer power of a quaternion array by repeated squaring."""
    q = as_quat(q)
    if n < 0:
        return power(inv(q), -n)
    result = np.broadcast_to(ONE, q.shape).copy()
    base = q
    while n:
        if n & 1:
            result = mul(result, base)
        n >>= 1
        if n:
            base = mul(base, base)
    return result


def random_quaternions(rng: np.random.Generator, size, radius: float = 1.0) -> np.ndarray:
    """Points drawn uniformly from the 4-ball of the given radius."""
    size = (size,) if np.isscalar(size) else tuple(size)
    g = rng.standard_normal(size + (4,))
    g /= np.linalg.norm(g, axis=-1, keepdims=True)
    r = radius * rng.random(size) ** 0.25
    return g * r[..., None]


def random_units(rng: np.random.Generator, size) -> np.ndarray:
    """Uniform unit imaginary quaternions."""
    size = (size,) if np.isscalar(size) else tuple(size)
    g = rng.standard_normal(size + (3,))
    return unit_vector(g)


def to_list(q) -> list:
    return [float(x) for x in np.asarray(q, dtype=float).reshape(-1)]
