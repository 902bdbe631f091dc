"""Command-line front end: ``finestruct {eval,expand,transform,region,integrate,verify}``.

Quaternions are written ``q0,q1,q2,q3``. Functions are given either as a
real polynomial in ``q`` such as ``"q^3 - 2q + 1"`` or as a JSON descriptor
(``{"kind": "monomial_sum", "coeffs": [[...], ...]}`` or
``{"kind": "kernel", "name": "S_L_inv", "p": [...]}``).

Exit codes: 0 on success, 1 when a verification group fails, 2 for invalid
flags or inputs (including points where the requested value is undefined).
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys

import numpy as np

from . import families as fam
from . import kernels as ker
from . import operators as ops
from . import quadrature as quad
from . import quaternion as qt
from . import series as ser
from . import verify
from .errors import FinestructError, OutsideRegionError, RealAxisError
from .geometry import Region, sample_grid
from .star import SliceFunction, slice_function_from_json

_TERM = re.compile(r"^([+-]?)(\d+(?:\.\d*)?|\.\d+)?\*?(q(?:\^(\d+))?)?$")


class InputError(ValueError):
    """A flag value that parses but cannot be used."""


def parse_quaternion(text: str) -> np.ndarray:
    parts = [s for s in text.replace(" ", "").split(",") if s]
    if len(parts) != 4:
        raise InputError(f"expected four comma-separated numbers, got {text!r}")
    try:
        return np.array([float(s) for s in parts])
    except ValueError as exc:
        raise InputError(f"not a quaternion: {text!r}") from exc


def parse_vector(text: str, size: int) -> np.ndarray:
    parts = [s for s in text.replace(" ", "").split(",") if s]
    if len(parts) != size:
        raise InputError(f"expected {size} comma-separated numbers, got {text!r}")
    try:
        return np.array([float(s) for s in parts])
    except ValueError as exc:
        raise InputError(f"not a list of numbers: {text!r}") from exc


def parse_polynomial(text: str) -> list:
    """Real coefficients (ascending) of an expression like ``"2q^3 - q + 0.5"``."""
    compact = text.replace(" ", "")
    terms = re.findall(r"[+-]?[^+-]+", compact)
    if not terms or "".join(terms) != compact:
        raise InputError(f"cannot parse polynomial {text!r}")
    coeffs = {}
    for term in terms:
        m = _TERM.match(term)
        if not m or (m.group(2) is None and m.group(3) is None):
            raise InputError(f"cannot parse polynomial term {term!r} in {text!r}")
        value = float(m.group(2)) if m.group(2) is not None else 1.0
        if m.group(1) == "-":
            value = -value
        degree = 0 if m.group(3) is None else int(m.group(4) or 1)
        coeffs[degree] = coeffs.get(degree, 0.0) + value
    return [coeffs.get(k, 0.0) for k in range(max(coeffs) + 1)]


def parse_function(text: str) -> SliceFunction:
    text = text.strip()
    if text.startswith("{"):
        try:
            return slice_function_from_json(json.loads(text))
        except (json.JSONDecodeError, KeyError) as exc:
            raise InputError(f"bad function descriptor: {exc}") from exc
    coeffs = parse_polynomial(text)
    return SliceFunction.monomials([[c, 0.0, 0.0, 0.0] for c in coeffs], name=text)


def _load_json(path: str) -> dict:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {path!r}: {exc}") from exc


def _load_series(path: str):
    d = _load_json(path)
    return ser.FineSeries.from_json(d) if "op" in d else ser.SeriesSpec.from_json(d)


def _emit(value) -> None:
    print(json.dumps(qt.to_list(value)))


# ---------------------------------------------------------------- commands


def cmd_eval(args) -> int:
    q = parse_quaternion(args.q)
    if args.family:
        p = parse_quaternion(args.p) if args.p else None
        index = [int(v) for v in parse_vector(args.nu, 3)] if args.nu else args.n
        if index is None:
            raise InputError("--family needs --n (or --nu for Fueter)")
        _emit(fam.eval_family(args.family, index, q, p))
    elif args.kernel:
        if not args.p and args.kernel != "E":
            raise InputError("--kernel needs --p")
        p = parse_quaternion(args.p) if args.p else np.zeros(4)
        _emit(ker.eval_kernel(args.kernel, p, q, power=args.power))
    elif args.f:
        f = parse_function(args.f)
        _emit(f(q) if args.op is None else ops.apply_numeric(args.op, f, q))
    elif args.series:
        spec = _load_series(args.series)
        if isinstance(spec, ser.FineSeries):
            _emit(spec.evaluate(q))
        else:
            value, tail = ser.eval_series(spec, q)
            _emit(value)
            print(f"tail estimate {float(tail):.3e}", file=sys.stderr)
    else:
        raise InputError("eval needs one of --family, --kernel, --f or --series")
    return 0


def cmd_expand(args) -> int:
    p = parse_quaternion(args.p) if args.p else qt.ONE.copy()
    out = ser.kernel_expansion(args.kernel, p, args.about, args.N)
    print(out.dumps())
    return 0


def cmd_transform(args) -> int:
    spec = _load_series(args.series)
    if isinstance(spec, ser.FineSeries):
        raise InputError("transform needs a SeriesSpec, not a transformed series")
    fine = ser.fine_transform(spec, args.op)
    if args.at:
        _emit(fine.evaluate(parse_quaternion(args.at)))
    else:
        print(fine.dumps())
    return 0


def cmd_region(args) -> int:
    if args.series:
        region = _load_series(args.series)
        if isinstance(region, ser.FineSeries):
            region = region.source
        region = region.region()
    elif args.region:
        region = Region.from_json(_load_json(args.region) if not args.region.lstrip().startswith("{") else json.loads(args.region))
    elif args.kernel:
        p = parse_quaternion(args.p) if args.p else qt.ONE.copy()
        region = ker.series_region(args.kernel, p, args.about)
    else:
        raise InputError("region needs one of --series, --region or --kernel")
    unit = parse_vector(args.plane, 3)
    shape = tuple(int(v) for v in parse_vector(args.shape, 2))
    uu, vv, inside = sample_grid(region, unit, parse_vector(args.u_range, 2), parse_vector(args.v_range, 2), shape)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["u", "v", "inside"])
    for u, v, flag in zip(uu.ravel(), vv.ravel(), inside.ravel()):
        writer.writerow([repr(float(u)), repr(float(v)), int(bool(flag))])
    print(f"region {json.dumps(region.to_json())}", file=sys.stderr)
    return 0


def cmd_integrate(args) -> int:
    f = parse_function(args.f)
    center = parse_vector(args.center, 2) if "," in args.center else np.array([float(args.center), 0.0])
    contour = quad.Contour(parse_vector(args.plane, 3), complex(center[0], center[1]), args.radius, args.nodes)
    _emit(quad.fine_integral(args.op, f, parse_quaternion(args.at), contour))
    return 0


def cmd_verify(args) -> int:
    names = list(verify.GROUPS) if args.all else [args.group]
    if names == [None]:
        raise InputError("verify needs --group or --all")
    results = verify.run_groups(names, seed=args.seed)
    for r in results:
        print(r.summary())
        for c in r.failures():
            print(f"    failed: {c.label} residual {c.residual:.3e} > tol {c.tol:.1e}")
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="finestruct", description="Quaternionic fine-structure calculus.")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized verification")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate a family, kernel, function or series at a point")
    p_eval.add_argument("--q", required=True, help="point q0,q1,q2,q3")
    group = p_eval.add_mutually_exclusive_group()
    group.add_argument("--family", help=f"family tag: {', '.join(fam.TAGS)}")
    group.add_argument("--kernel", help=f"kernel name: {', '.join(ker.KERNELS)}")
    group.add_argument("--f", help='function, e.g. "q^2" or a JSON descriptor')
    group.add_argument("--series", help="SeriesSpec or transformed series JSON file ('-' for stdin)")
    p_eval.add_argument("--n", type=int, help="family index")
    p_eval.add_argument("--nu", help="Fueter multi-index m1,m2,m3")
    p_eval.add_argument("--p", help="center / kernel parameter p0,p1,p2,p3")
    p_eval.add_argument("--power", type=int, default=1, help="power of Q_c_inv")
    p_eval.add_argument("--op", choices=ops.NUMERIC_OPS, help="apply an operator numerically to --f")
    p_eval.set_defaults(run=cmd_eval)

    p_exp = sub.add_parser("expand", help="emit the series of a named kernel as JSON")
    p_exp.add_argument("--kernel", required=True, choices=ker.SERIES_KERNELS)
    p_exp.add_argument("--p", help="kernel parameter p0,p1,p2,p3")
    p_exp.add_argument("--about", choices=("origin", "shifted"), default="origin")
    p_exp.add_argument("--N", type=int, default=ser.DEFAULT_N, help="truncation order")
    p_exp.set_defaults(run=cmd_expand)

    p_tr = sub.add_parser("transform", help="apply D, Dbar or Delta to a SeriesSpec file")
    p_tr.add_argument("--series", required=True, help="SeriesSpec JSON file ('-' for stdin)")
    p_tr.add_argument("--op", required=True, choices=ops.EXACT_OPS)
    p_tr.add_argument("--at", help="evaluate the transformed series at this point instead of printing it")
    p_tr.set_defaults(run=cmd_transform)

    p_reg = sub.add_parser("region", help="CSV membership grid of a convergence region")
    p_reg.add_argument("region_action", choices=("sample",), nargs="?", default="sample")
    p_reg.add_argument("--series", help="SeriesSpec JSON file; its estimated region is sampled")
    p_reg.add_argument("--region", help="region JSON (file or inline)")
    p_reg.add_argument("--kernel", choices=ker.SERIES_KERNELS, help="sample the region of a kernel series")
    p_reg.add_argument("--p", help="kernel parameter for --kernel")
    p_reg.add_argument("--about", choices=("origin", "shifted"), default="origin")
    p_reg.add_argument("--plane", default="1,0,0", help="imaginary unit i1,i2,i3 of the sampled plane")
    p_reg.add_argument("--u-range", default="-2,2")
    p_reg.add_argument("--v-range", default="-2,2")
    p_reg.add_argument("--shape", default="41,41")
    p_reg.set_defaults(run=cmd_region)

    p_int = sub.add_parser("integrate", help="contour integral representation at a point")
    p_int.add_argument("--op", choices=quad.INTEGRAL_OPS, default="id")
    p_int.add_argument("--f", required=True, help='function, e.g. "q^2" or a JSON descriptor')
    p_int.add_argument("--plane", default="1,0,0", help="imaginary unit i1,i2,i3 of the contour plane")
    p_int.add_argument("--center", default="0", help="circle center x or x,y (meaning x + I y)")
    p_int.add_argument("--radius", type=float, default=2.0)
    p_int.add_argument("--nodes", type=int, default=1024)
    p_int.add_argument("--at", required=True, help="point q0,q1,q2,q3")
    p_int.set_defaults(run=cmd_integrate)

    p_ver = sub.add_parser("verify", help="run invariant groups")
    p_ver.add_argument("--group", choices=tuple(verify.GROUPS))
    p_ver.add_argument("--all", action="store_true", help="run every group")
    p_ver.set_defaults(run=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with np.errstate(all="ignore"):
            return args.run(args)
    except (InputError, FinestructError, RealAxisError, OutsideRegionError, ZeroDivisionError, ValueError, KeyError) as exc:
        print(f"finestruct {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
