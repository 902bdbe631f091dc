"""Series expansions and the coefficient transforms of D, Dbar and Delta.

Four kinds are supported, all centered at ``p``:

* ``star_taylor``: ``sum_{n>=0} (q - p)^{*n} a_n``
* ``star_laurent``: the same with ``n`` ranging over the integers
* ``spherical``: ``sum_{n>=0} Q_p^n(q) [a_{2n} + (q - p) a_{2n+1}]``
* ``spherical_laurent``: the same with ``n`` ranging over the integers

Coefficients multiply on the right. Spherical coefficient ``k`` belongs to
block ``k // 2`` and carries the ``(q - p)`` factor when ``k`` is odd.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np

from . import families as fam
from . import quaternion as qt
from .errors import OutsideRegionError, OutsideRegionWarning, RealAxisError
from .geometry import Region, radius_estimate, region_contains
from .operators import EXACT_OPS, apply_exact
from .star import StarCenter, sphere_inverse_power, spherical_term, star_power

KINDS = ("star_taylor", "star_laurent", "spherical", "spherical_laurent")
DEFAULT_N = 32

# basis of the transformed series: (non-negative part, negative part, power shift of Q_{c,p}^{-1})
FINE_BASES = {
    "D": ("Ht", "Hcal", 0),
    "Delta": ("Qt", "Mcal", 1),
    "Dbar": ("P2t", "R2", 1),
}


def geometric_tail(norms) -> np.ndarray:
    """Tail estimate ``|t_N| rho / (1 - rho)`` from the last terms of a series.

    ``rho`` is the square root of the ratio between the larger of the last two
    term norms and the larger of the two before them, which tolerates terms
    that oscillate in size. A ratio of at least one gives ``inf``.
    """
    norms = [np.asarray(n, dtype=float) for n in norms]
    if len(norms) < 4:
        return np.full(np.shape(norms[-1]) if norms else (), math.inf)
    last = np.maximum(norms[-1], norms[-2])
    before = np.maximum(norms[-3], norms[-4])
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.sqrt(np.where(before > 0, last / before, 0.0))
        tail = np.where(rho < 1.0, last * rho / (1.0 - rho), math.inf)
    return np.where(last == 0.0, 0.0, tail)


@dataclass
class SeriesSpec:
    """An expansion kind, a center, right coefficients and a truncation order."""

    kind: str
    center: np.ndarray
    coeffs: dict = field(default_factory=dict)
    N: int = DEFAULT_N

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown series kind {self.kind!r}")
        self.center = qt.as_quat(self.center)
        self.coeffs = {int(k): qt.as_quat(v) for k, v in self.coeffs.items()}
        if not self.is_laurent and any(k < 0 for k in self.coeffs):
            raise ValueError(f"{self.kind} series take no negative indices")

    @property
    def is_laurent(self) -> bool:
        return self.kind.endswith("laurent")

    @property
    def is_spherical(self) -> bool:
        return self.kind.startswith("spherical")

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "center": qt.to_list(self.center),
            "coeffs": {str(k): qt.to_list(v) for k, v in sorted(self.coeffs.items())},
            "N": self.N,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, d: dict) -> "SeriesSpec":
        return cls(d["kind"], d["center"], d.get("coeffs", {}), int(d.get("N", DEFAULT_N)))

    @classmethod
    def loads(cls, text: str) -> "SeriesSpec":
        return cls.from_json(json.loads(text))

    def block_index(self, k: int) -> int:
        return k // 2 if self.is_spherical else k

    def active(self):
        """Coefficient indices inside the truncation, in ascending order."""
        return sorted(k for k in self.coeffs if abs(self.block_index(k)) <= self.N)

    def basis(self, k: int, q) -> np.ndarray:
        if self.is_spherical:
            return spherical_term(self.center, q, k)
        return star_power(self.center, q, k)

    def region(self) -> Region:
        """Convergence region estimated from the coefficients.

        Fewer than eight coefficients on a side is read as a finite sum on that
        side, with an infinite outer radius or a zero inner radius.
        """
        pos = [k for k in self.coeffs if k >= 0]
        neg = [k for k in self.coeffs if k < 0]
        outer = math.inf
        inner = 0.0
        if pos and max(pos) >= 7:
            window = [self.coeffs.get(k, np.zeros(4)) for k in range(max(pos) + 1)]
            outer = radius_estimate(window, "taylor")
        if neg and -min(neg) >= 7:
            window = [np.zeros(4)] + [self.coeffs.get(-k, np.zeros(4)) for k in range(1, -min(neg) + 1)]
            inner = radius_estimate(window, "laurent_inner")
        if self.is_laurent and not inner < outer:
            raise OutsideRegionError(f"the coefficients give an empty shell (inner {inner:.3g} >= outer {outer:.3g})")
        if self.is_spherical:
            # block n carries a_{2n}, so |Q_p|^n R^{-2n} decays iff sqrt|Q_p| < R
            if self.is_laurent:
                return Region("cassini_shell", self.center, (inner, outer))
            return Region("cassini_ball", self.center, (outer,))
        if self.is_laurent:
            return Region("star_shell", self.center, (inner, outer))
        return Region("star_dome", self.center, (outer,))


def _terms(spec: SeriesSpec, q):
    pos, neg = [], []
    for k in spec.active():
        term = qt.mul(spec.basis(k, q), spec.coeffs[k])
        (pos if k >= 0 else neg).append((k, term))
    neg.sort(key=lambda kt: -kt[0])
    return pos, neg


def _side_tail(spec: SeriesSpec, terms, sign: int, q_shape):
    if not terms:
        return np.zeros(q_shape)
    limit = (2 * spec.N + 1) if spec.is_spherical else spec.N
    reach = max(abs(k) for k, _ in terms)
    if reach < limit - 1:
        # the coefficient list stops before the truncation, so the sum is exact
        return np.zeros(q_shape)
    return geometric_tail([qt.norm(t) for _, t in terms])


def eval_series(spec: SeriesSpec, q, *, check_region: bool = True):
    """Partial sum of a series at ``q`` and its estimated truncation error."""
    q = qt.as_quat(q)
    if check_region:
        try:
            inside = region_contains(spec.region(), q)
        except OutsideRegionError:
            inside = np.zeros(q.shape[:-1], dtype=bool)
        if not np.all(inside):
            warnings.warn("series evaluated outside its estimated convergence region", OutsideRegionWarning, stacklevel=2)
    pos, neg = _terms(spec, q)
    value = np.zeros(q.shape)
    for _, t in pos + neg:
        value = value + t
    tail = _side_tail(spec, pos, 1, q.shape[:-1]) + _side_tail(spec, neg, -1, q.shape[:-1])
    return value, tail


def derivative_q0_series(spec: SeriesSpec, q) -> np.ndarray:
    """Exact ``d/dq0`` of the truncated series."""
    q = qt.as_quat(q)
    c = StarCenter.of(spec.center)
    acc = np.zeros(q.shape)
    for k in spec.active():
        a = spec.coeffs[k]
        if not spec.is_spherical:
            if k != 0:
                acc = acc + k * qt.mul(star_power(c, q, k - 1), a)
            continue
        n, linear = divmod(k, 2)
        shift = q - c.p0 * qt.ONE
        from .star import spherical_block

        d_block = 2.0 * n * qt.mul(shift, spherical_block(c, q, n - 1)) if n != 0 else np.zeros(q.shape)
        if linear:
            d_block = qt.mul(d_block, q - c.p) + spherical_block(c, q, n)
        acc = acc + qt.mul(d_block, a)
    return acc


@dataclass
class FineSeries:
    """The image of a series under D, Dbar or Delta, in a family basis."""

    op: str
    source: SeriesSpec
    basis: tuple
    coeffs: dict

    def evaluate(self, q) -> np.ndarray:
        q = qt.as_quat(q)
        if self.source.is_spherical:
            return eval_fine_spherical(self.source, self.op, q)
        pos_tag, neg_tag, shift = self.basis
        p = self.source.center
        acc = np.zeros(q.shape)
        for n, b in sorted(self.coeffs.items()):
            if n >= 0:
                term = fam.eval_family(pos_tag, n, q, p)
            else:
                m = -n
                term = qt.mul(fam.eval_family(neg_tag, m, q, p), sphere_inverse_power(q, p, m + shift))
            acc = acc + qt.mul(term, b)
        return acc

    def to_json(self) -> dict:
        return {
            "op": self.op,
            "basis": list(self.basis),
            "coeffs": {str(k): qt.to_list(v) for k, v in sorted(self.coeffs.items())},
            "source": self.source.to_json(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())


    @classmethod
    def from_json(cls, d: dict) -> "FineSeries":
        source = SeriesSpec.from_json(d["source"])
        coeffs = {int(k): qt.as_quat(v) for k, v in d["coeffs"].items()}
        return cls(d["op"], source, tuple(d["basis"]), coeffs)

    def scaled(self, factor: float) -> "FineSeries":
        return FineSeries(self.op, self.source, self.basis, {k: factor * v for k, v in self.coeffs.items()})


def fine_transform(spec: SeriesSpec, op: str) -> FineSeries:
    """Coefficients of ``op`` applied to a series, in the matching family basis.

    Star kinds: ``D`` gives ``b_n = -2(n+1) a_{n+1}`` on ``Ht`` and
    ``b_{-n} = 2 a_{-n}`` on ``Hcal Q_{c,p}^{-n}``; ``Delta`` gives
    ``-2(n+2)(n+1) a_{n+2}`` on ``Qt`` and ``-4 a_{-n}`` on
    ``Mcal Q_{c,p}^{-n-1}``; ``Dbar`` gives ``2(n+1) a_{n+1}`` on ``P2t`` and
    ``-2 a_{-n}`` on ``R2 Q_{c,p}^{-n-1}``. Spherical kinds keep their
    coefficients and are evaluated block by block.
    """
    if op not in EXACT_OPS:
        raise ValueError(f"unknown operator {op!r}")
    if spec.is_spherical:
        return FineSeries(op, spec, ("spherical",), dict(spec.coeffs))
    out = {}
    for k in spec.active():
        a = spec.coeffs[k]
        if k < 0:
            factor = {"D": 2.0, "Delta": -4.0, "Dbar": -2.0}[op]
            out[k] = factor * a
        elif op in ("D", "Dbar") and k >= 1:
            n = k - 1
            out[n] = (-2.0 if op == "D" else 2.0) * (n + 1) * a
        elif op == "Delta" and k >= 2:
            n = k - 2
            out[n] = -2.0 * (n + 2) * (n + 1) * a
    return FineSeries(op, spec, FINE_BASES[op], out)


def eval_fine_spherical(spec: SeriesSpec, op: str, q) -> np.ndarray:
    """Termwise ``op`` of a spherical (or spherical Laurent) series at ``q``."""
    if not spec.is_spherical:
        raise ValueError("eval_fine_spherical needs a spherical series")
    q = qt.as_quat(q)
    acc = np.zeros(q.shape)
    for k in spec.active():
        n, linear = divmod(k, 2)
        target = "spherical_linear" if linear else "spherical_block"
        acc = acc + qt.mul(apply_exact(op, target, n, spec.center, q), spec.coeffs[k])
    return acc


def closed_fine_eval(spec: SeriesSpec, op: str, q) -> np.ndarray:
    """Operator applied to a series through its values at ``q`` and ``conj(q)``.

    Valid off the real axis: ``Df = vq^{-1} [f(conj q) - f(q)]``,
    ``Dbar f = 2 d0 f - Df`` and ``Delta f = -2 vq^{-1} d0 f - vq^{-2} [f(conj q) - f(q)]``.
    """
    q = qt.as_quat(q)
    if np.any(qt.is_real(q)):
        raise RealAxisError("closed fine forms divide by the vector part of q")
    vinv = qt.inv(qt.vector_part(q))
    f_q, _ = eval_series(spec, q, check_region=False)
    f_bar, _ = eval_series(spec, qt.conj(q), check_region=False)
    jump = f_bar - f_q
    if op == "D":
        return qt.mul(vinv, jump)
    d0 = derivative_q0_series(spec, q)
    if op == "Dbar":
        return 2.0 * d0 - qt.mul(vinv, jump)
    if op == "Delta":
        return -2.0 * qt.mul(vinv, d0) - qt.mul(qt.mul(vinv, vinv), jump)
    raise ValueError(f"unknown operator {op!r}")


def _relation_factor(n: int) -> float:
    return 2.0**n * factorial(n) * (-1.0) ** n


def taylor_spherical_relation(a, q, p, N: int):
    """Both sides of the identity linking spherical and star Taylor coefficients.

    ``lhs = sum_{n<=N} (q-p)^{*n} b_n`` with ``b_0 = c_0 a_0`` and
    ``b_n = c_n a_{2n} + c_{n-1} a_{2n-1}``, ``c_n = 2^n n! (-1)^n``;
    ``rhs`` applies ``V_p^n`` to each spherical block. Both use
    ``a_0..a_{2N}``.
    """
    from .operators import global_power_on_block

    q = qt.as_quat(q)
    p = qt.as_quat(p)
    coeff = a if isinstance(a, dict) else dict(enumerate(a))
    get = lambda k: qt.as_quat(coeff.get(k, np.zeros(4)))  # noqa: E731
    lhs = np.zeros(q.shape)
    rhs = np.zeros(q.shape)
    for n in range(N + 1):
        b = _relation_factor(n) * get(2 * n)
        if n >= 1:
            b = b + _relation_factor(n - 1) * get(2 * n - 1)
        lhs = lhs + qt.mul(star_power(p, q, n), b)
        rhs = rhs + qt.mul(global_power_on_block(n, n, p, q), get(2 * n))
        if n < N:
            rhs = rhs + qt.mul(global_power_on_block(n, n, p, q, with_linear_factor=True), get(2 * n + 1))
    return lhs, rhs


def _monomial_action(op: str, j: int, x) -> np.ndarray:
    """``op`` applied to ``x^j`` for integer ``j`` via the one-variable families."""
    if op == "id":
        return qt.power(x, j)
    if j == 0:
        return np.zeros(x.shape)
    if j > 0:
        if op == "D":
            return -2.0 * j * fam.eval_family("H", j - 1, x)
        if op == "Dbar":
            return 2.0 * j * fam.eval_family("P2", j - 1, x)
        if j < 2:
            return np.zeros(x.shape)
        return -2.0 * j * (j - 1) * fam.eval_family("CA", j - 2, x)
    m = -j
    r2 = qt.norm2(x)
    if op == "D":
        return 2.0 * qt.scale(fam.eval_family("Pneg", m, x), r2 ** (-m))
    if op == "Dbar":
        return -2.0 * qt.scale(fam.eval_family("R", m, x), r2 ** (-(m + 1)))
    return -4.0 * qt.scale(fam.eval_family("S", m, x), r2 ** (-(m + 1)))


def _add(table, j, c):
    table[j] = table[j] + c if j in table else c


def rebased_tables(spec: SeriesSpec, K: int = 128):
    """Re-expand a series as ``sum_j x^j c_j`` in ``x = q - shift``.

    Returns ``(shift, inner_table, outer_table)``; positive powers of ``Q_p``
    or star powers give finite binomial sums, negative ones give binomial
    series truncated after ``K`` terms, valid near the shift (inner) or far
    from it (outer). Spherical kinds shift by ``p0``, star kinds by zero.
    """
    c = StarCenter.of(spec.center)
    inner, outer = {}, {}
    for k in spec.active():
        a = spec.coeffs[k]
        if spec.is_spherical:
            n, linear = divmod(k, 2)
            p1sq = c.p1 * c.p1
            if n >= 0:
                block = {2 * i: comb(n, i) * p1sq ** (n - i) for i in range(n + 1)}
                near = far = block
            else:
                m = -n
                far = {-2 * (m + i): (-1.0) ** i * comb(m + i - 1, i) * p1sq**i for i in range(K)}
                near = (
                    {2 * i: (-1.0) ** i * comb(m + i - 1, i) * p1sq ** (-(m + i)) for i in range(K)} if p1sq > 0 else {}
                )
            lin_const = qt.mul(-qt.vector_part(c.p), a)
            for table, block in ((inner, near), (outer, far)):
                for j, w in block.items():
                    if linear:
                        _add(table, j + 1, w * a)
                        _add(table, j, w * lin_const)
                    else:
                        _add(table, j, w * a)
            continue
        if k >= 0:
            for j in range(k + 1):
                coef = comb(k, j) * qt.mul(qt.power(-c.p, k - j), a)
                _add(inner, j, coef)
                _add(outer, j, coef)
            continue
        m = -k
        pinv = qt.inv(c.p) if np.any(c.p) else None
        for i in range(K):
            _add(outer, -(m + i), comb(m + i - 1, i) * qt.mul(qt.power(c.p, i), a))
            if pinv is not None:
                _add(inner, i, (-1.0) ** m * comb(m + i - 1, i) * qt.mul(qt.power(pinv, m + i), a))
    shift = c.p0 if spec.is_spherical else 0.0
    return shift, inner, outer


def rebased_eval(spec: SeriesSpec, op: str, q, K: int = 128) -> np.ndarray:
    """Evaluate ``op`` (or ``id``) of a series through monomials in ``q - shift``.

    Each point uses the inner table when ``|q - shift|`` is below the switch
    radius (``p1`` for spherical kinds, ``|p|`` for star kinds), else the
    outer one.
    """
    q = qt.as_quat(q)
    shift, inner, outer = rebased_tables(spec, K)
    x = q - shift * qt.ONE
    c = StarCenter.of(spec.center)
    switch = c.p1 if spec.is_spherical else float(qt.norm(c.p))
    use_inner = qt.norm(x) < switch
    out = np.zeros(q.shape)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for table, mask in ((inner, use_inner), (outer, ~use_inner)):
            if not np.any(mask) or not table:
                continue
            xs = x[mask]
            acc = np.zeros(xs.shape)
            for j in sorted(table):
                acc = acc + qt.mul(_monomial_action(op, j, xs), table[j])
            out[mask] = acc
    return out


# kernel -> (operator applied to the S_L^{-1} expansion, scale of the result)
_KERNEL_IMAGES = {"S_L_inv": (None, 1.0), "Q_c_inv": ("D", -0.5), "P2_L": ("Dbar", 1.0), "F_L": ("Delta", 1.0)}


def kernel_expansion(name: str, p, about: str = "origin", N: int = DEFAULT_N):
    """Series of a kernel as a :class:`SeriesSpec` (``S_L_inv``) or :class:`FineSeries`.

    ``S_L^{-1}(p, q)`` is ``sum q^n p^{-1-n}`` about the origin and
    ``-sum (-1)^n (q - p - 1)^{*n}`` about ``p + 1``; the other kernels are
    its images under ``D`` (scaled by ``-1/2``), ``Dbar`` and ``Delta``.
    ``E`` is ``-Delta(q^{-1})/4`` expanded about ``1``.
    """
    p = qt.as_quat(p)
    if name in ("S_L_inv_I", "S_L_inv_II"):
        name = "S_L_inv"
    if name == "E":
        coeffs = {k: -0.25 * (-1.0) ** k * qt.ONE for k in range(N + 1)}
        return fine_transform(SeriesSpec("star_taylor", qt.ONE, coeffs, N), "Delta")
    if name not in _KERNEL_IMAGES:
        raise ValueError(f"no expansion for kernel {name!r}")
    if about == "origin":
        pinv = qt.inv(p)
        coeffs = {n: qt.power(pinv, n + 1) for n in range(N + 1)}
        source = SeriesSpec("star_taylor", np.zeros(4), coeffs, N)
    elif about == "shifted":
        coeffs = {n: -((-1.0) ** n) * qt.ONE for n in range(N + 1)}
        source = SeriesSpec("star_taylor", p + qt.ONE, coeffs, N)
    else:
        raise ValueError(f"unknown expansion point {about!r}")
    op, factor = _KERNEL_IMAGES[name]
    if op is None:
        return source
    return fine_transform(source, op).scaled(factor)
