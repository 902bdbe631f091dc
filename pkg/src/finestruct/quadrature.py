"""Contour integrals over circles in a complex plane of the quaternions.

A :class:`Contour` is a positively oriented circle in the plane of a unit
``I``. With ``dp_I = dp (-I)`` a node ``p = c + r e^{I theta}`` carries the
weight ``dp_I = r e^{I theta} d theta``, so the periodic trapezoid rule with
``M`` nodes approximates

* ``f(q) = (1/2pi) int S_L^{-1}(p, q) dp_I f(p)`` (:func:`cauchy_eval`),
* ``Df(q) = -(1/pi) int Q_{c,p}^{-1}(q) dp_I f(p)``,
* ``Dbar f(q) = (1/2pi) int P2_L(p, q) dp_I f(p)``,
* ``Delta f(q) = (1/2pi) int F_L(p, q) dp_I f(p)`` (:func:`fine_integral`).

The circle encloses a disc in the plane of ``I``; a point ``q = u + J v``
is handled through its images ``u +- I v``, which must both lie inside the
disc (the integral reproduces the function) or both outside (it vanishes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import quaternion as qt
from .errors import IllConditionedError, OutsideRegionError
from .kernels import eval_kernel

# prefactor and kernel for each integral representation
_REPRESENTATIONS = {
    "id": (1.0 / (2.0 * math.pi), "S_L_inv"),
    "D": (-1.0 / math.pi, "Q_c_inv"),
    "Dbar": (1.0 / (2.0 * math.pi), "P2_L"),
    "Delta": (1.0 / (2.0 * math.pi), "F_L"),
}
INTEGRAL_OPS = tuple(_REPRESENTATIONS)
# points closer to the circle than this many node spacings are rejected
CONDITIONING_SPACINGS = 2.0


@dataclass(frozen=True)
class Contour:
    """Circle ``center + radius e^{I theta}`` in the plane of ``plane``.

    ``center`` is a complex number ``x + i y`` standing for ``x + I y``.
    """

    plane: np.ndarray
    center: complex = 0.0
    radius: float = 1.0
    nodes: int = 256

    def __post_init__(self):
        object.__setattr__(self, "plane", qt.unit_vector(self.plane))
        object.__setattr__(self, "center", complex(self.center))
        if not self.radius > 0:
            raise ValueError("contour radius must be positive")
        if self.nodes < 8:
            raise ValueError("contour needs at least 8 nodes")

    @property
    def spacing(self) -> float:
        return 2.0 * math.pi * self.radius / self.nodes

    def points(self):
        """Nodes ``p_k`` and weights ``dp_I`` (including ``d theta``)."""
        theta = 2.0 * math.pi * np.arange(self.nodes) / self.nodes
        z = self.radius * np.exp(1j * theta)
        weights = qt.from_slice(z.real, z.imag, self.plane) * (2.0 * math.pi / self.nodes)
        w = self.center + z
        return qt.from_slice(w.real, w.imag, self.plane), weights

    def image_distances(self, q):
        """Signed distances of the images ``u +- I v`` of ``q`` to the circle (negative inside)."""
        q = qt.as_quat(q)
        u = q[..., 0]
        v = qt.vec_norm(q)
        plus = abs(complex(u, v) - self.center) - self.radius
        minus = abs(complex(u, -v) - self.center) - self.radius
        return plus, minus


def _check_point(q, contour: Contour) -> bool:
    """Return whether ``q`` is enclosed; raise when the quadrature cannot be trusted."""
    plus, minus = contour.image_distances(q)
    guard = CONDITIONING_SPACINGS * contour.spacing
    if min(abs(plus), abs(minus)) < guard:
        raise IllConditionedError(f"q is within {guard:.3g} of the contour")
    if (plus < 0) != (minus < 0):
        raise OutsideRegionError("the contour separates the two slice images of q")
    return plus < 0


def _compensated(terms: np.ndarray) -> np.ndarray:
    return np.array([math.fsum(terms[:, i]) for i in range(4)])


def fine_integral(op: str, f, q, contour: Contour) -> np.ndarray:
    """Integral representation of ``f`` (``op="id"``) or of ``D f``, ``Dbar f``, ``Delta f`` at ``q``.

    ``f`` maps an ``(M, 4)`` array of nodes to their values.
    """
    if op not in _REPRESENTATIONS:
        raise ValueError(f"unknown integral operator {op!r}; expected one of {', '.join(INTEGRAL_OPS)}")
    q = qt.as_quat(q)
    if q.shape != (4,):
        raise ValueError("fine_integral evaluates one point at a time")
    _check_point(q, contour)
    prefactor, kernel = _REPRESENTATIONS[op]
    nodes, weights = contour.points()
    values = np.asarray(f(nodes), dtype=float)
    k = eval_kernel(kernel, nodes, np.broadcast_to(q, nodes.shape))
    terms = qt.mul(qt.mul(k, weights), values)
    return prefactor * _compensated(terms)


def cauchy_eval(f, q, contour: Contour) -> np.ndarray:
    """Cauchy formula ``(1/2pi) int S_L^{-1}(p, q) dp_I f(p)``."""
    return fine_integral("id", f, q, contour)


def slice_independence_check(f, q, planes, *, op: str = "id", center: float = 0.0, radii=(1.0,), nodes: int = 512) -> float:
    """Largest pairwise deviation of an integral across planes and radii.

    Every combination of plane and radius is evaluated with the same real
    center; all must enclose ``q``.
    """
    results = [
        fine_integral(op, f, q, Contour(plane, center, r, nodes)) for plane in planes for r in radii
    ]
    if len(results) < 2:
        return 0.0
    return float(max(np.linalg.norm(a - b) for a, b in combinations(results, 2)))


def harmonic_residue_form(f, q, plane) -> np.ndarray:
    """``-vq^{-1} I_q I [f(u - I v) - f(u + I v)]`` for non-real ``q``; equals ``Df(q)``."""
    q = qt.as_quat(q)
    plane = qt.unit_vector(plane)
    u, v, iq = qt.slice_split(q)
    jump = f(qt.from_slice(u, -v, plane)) - f(qt.from_slice(u, v, plane))
    return -qt.mul(qt.mul(qt.inv(qt.vector_part(q)), qt.mul(iq, plane)), jump)
