"""Distances, convergence regions and radius estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quaternion as qt

SAME_PLANE_TOL = 1e-10
REGION_TAGS = ("sigma_ball", "star_dome", "star_shell", "cassini_ball", "cassini_shell")
# a tail of |a_n|^(1/n) that halves across the window is treated as decaying to zero
SUPERGEOMETRIC_DROP = 0.75


def same_plane(q, p) -> np.ndarray:
    """True where ``q`` and ``p`` lie in a common complex plane."""
    q = qt.as_quat(q)
    p = qt.as_quat(p)
    real_q = qt.is_real(q)
    real_p = qt.is_real(p)
    _, _, iq = qt.slice_split(q)
    _, _, ip = qt.slice_split(p)
    close = np.minimum(qt.norm(iq - ip), qt.norm(iq + ip)) < SAME_PLANE_TOL
    return real_q | real_p | close


def distance(kind: str, q, p) -> np.ndarray:
    """``sigma``, ``tau`` or ``cassini`` distance between ``q`` and ``p``."""
    q = qt.as_quat(q)
    p = qt.as_quat(p)
    if kind == "cassini":
        p0 = p[..., 0]
        p1sq = np.sum(p[..., 1:] ** 2, axis=-1)
        x = q - qt.real(p0)
        return np.sqrt(qt.norm(qt.mul(x, x) + qt.real(p1sq)))
    coplanar = same_plane(q, p)
    direct = qt.norm(q - p)
    dq0 = q[..., 0] - p[..., 0]
    if kind == "sigma":
        other = np.sqrt(dq0**2 + (qt.vec_norm(q) + qt.vec_norm(p)) ** 2)
    elif kind == "tau":
        other = np.sqrt(dq0**2 + (qt.vec_norm(q) - qt.vec_norm(p)) ** 2)
    else:
        raise ValueError(f"unknown distance {kind!r}")
    return np.where(coplanar, direct, other)


@dataclass(frozen=True)
class Region:
    """Convergence set descriptor; radii may be ``inf`` (or ``0`` for inner radii)."""

    tag: str
    p: np.ndarray
    radii: tuple = field(default=())

    def __post_init__(self):
        if self.tag not in REGION_TAGS:
            raise ValueError(f"unknown region tag {self.tag!r}")
        expected = 2 if self.tag in ("star_shell", "cassini_shell") else 1
        if len(self.radii) != expected:
            raise ValueError(f"{self.tag} needs {expected} radii")
        if expected == 2 and not self.radii[0] < self.radii[1]:
            raise ValueError("shell radii must satisfy R1 < R2")
        if self.radii[-1] <= 0:
            raise ValueError("radii must be positive")

    def to_json(self) -> dict:
        out = {"tag": self.tag, "p": qt.to_list(self.p)}
        if len(self.radii) == 1:
            out["R"] = self.radii[0]
        else:
            out["R1"], out["R2"] = self.radii
        return out

    @classmethod
    def from_json(cls, d: dict) -> "Region":
        if "R" in d:
            radii = (float(d["R"]),)
        else:
            radii = (float(d["R1"]), float(d["R2"]))
        return cls(d["tag"], qt.as_quat(d["p"]), radii)


def _slice_images(q, p):
    """Distances from ``x + yI`` and ``x - yI`` to ``p`` inside the plane of ``p``."""
    q = qt.as_quat(q)
    p = qt.as_quat(p)
    x = q[..., 0]
    y = qt.vec_norm(q)
    p0 = p[..., 0]
    p1 = qt.vec_norm(p)
    plus = np.hypot(x - p0, y - p1)
    minus = np.hypot(x - p0, -y - p1)
    return plus, minus


def images_within(q, p, r) -> np.ndarray:
    """True where both slice images of ``q`` lie within ``r`` of ``p``.

    Series in the two-variable families involve ``conj(q)`` and converge only
    on this part of the star dome, not on the extra disc in the plane of ``p``.
    """
    plus, minus = _slice_images(q, p)
    return (plus < r) & (minus < r)


def region_contains(r: Region, q) -> np.ndarray:
    """Membership of ``q`` in an (open) region."""
    q = qt.as_quat(q)
    if r.tag == "sigma_ball":
        return distance("sigma", q, r.p) < r.radii[0]
    if r.tag in ("star_dome", "star_shell"):
        # both slice images inside, or q in the plane of p with the direct distance inside
        plus, minus = _slice_images(q, r.p)
        direct = qt.norm(q - r.p)
        coplanar = same_plane(q, r.p)
        if r.tag == "star_dome":
            return ((plus < r.radii[0]) & (minus < r.radii[0])) | (coplanar & (direct < r.radii[0]))
        lo, hi = r.radii
        both = (plus > lo) & (plus < hi) & (minus > lo) & (minus < hi)
        return both | (coplanar & (direct > lo) & (direct < hi))
    value = distance("cassini", q, r.p) ** 2
    if r.tag == "cassini_ball":
        return value < r.radii[0] ** 2
    lo, hi = r.radii
    return (value > lo**2) & (value < hi**2)


def radius_estimate(coeffs, side: str = "taylor") -> float:
    """Estimate a radius of convergence from a finite coefficient window.

    ``coeffs[n]`` is ``a_n`` (taylor) or ``a_{-n}`` for ``n >= 1``
    (laurent_inner, where ``coeffs[0]`` is ignored). The limsup of
    ``|a_n|^(1/n)`` is estimated as the maximum over the tail half of the
    window. When that sequence still falls steeply across the tail it is
    read as tending to zero, which gives an infinite radius (or an inner
    radius of zero).
    """
    coeffs = np.asarray(coeffs, dtype=float).reshape(len(coeffs), -1)
    if len(coeffs) < 8:
        raise ValueError("radius_estimate needs at least 8 coefficients")
    mags = np.linalg.norm(coeffs, axis=-1)
    n_total = len(mags) - 1
    idx = np.arange(max(1, n_total // 2), n_total + 1)
    tail = mags[idx]
    roots = np.where(tail > 0, tail ** (1.0 / idx), 0.0)
    limsup = float(np.max(roots))
    nonzero = roots[roots > 0]
    if len(nonzero) >= 2 and nonzero[-1] < SUPERGEOMETRIC_DROP * nonzero[0]:
        limsup = 0.0
    if side == "taylor":
        return math.inf if limsup == 0.0 else 1.0 / limsup
    if side == "laurent_inner":
        return limsup
    raise ValueError(f"unknown side {side!r}")


def sample_grid(region: Region, unit, u_range, v_range, shape):
    """Membership of ``u + unit v`` over a rectangular grid; returns ``(u, v, inside)`` arrays."""
    u = np.linspace(u_range[0], u_range[1], shape[0])
    v = np.linspace(v_range[0], v_range[1], shape[1])
    uu, vv = np.meshgrid(u, v, indexing="ij")
    pts = qt.from_slice(uu, vv, qt.unit_vector(unit))
    return uu, vv, region_contains(region, pts)
