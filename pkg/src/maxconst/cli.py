"""Command-line front end: compute, verify, sweep, spectrum, check-ops.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 solver failure.  Reports are JSON (numbers rendered to 12 significant
digits, so identical configurations produce byte-identical output); sweeps
emit CSV.  MAXCONST_THREADS caps the numeric libraries' internal threading
and must therefore be applied before they load.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _apply_thread_cap():
    cap = os.environ.get("MAXCONST_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, cap)


def _parse_floats(text, what):
    from .errors import InvalidArgument

    items = [part for part in text.split(",") if part.strip()]
    if not items:
        raise InvalidArgument(f"{what} is empty")
    try:
        return [float(part) for part in items]
    except ValueError as exc:
        raise InvalidArgument(f"bad {what}: {exc}") from None


def _parse_domain(text, h):
    from . import domain
    from .errors import InvalidArgument

    if text.startswith("box:"):
        sides = _parse_floats(text[len("box:"):], "box sides")
        if len(sides) != 3:
            raise InvalidArgument("box domains need 3 side lengths: box:a,b,c")
        return domain.make_box(sides, h)
    if text.startswith("union:"):
        path = text[len("union:"):]
        try:
            with open(path) as fh:
                boxes = json.load(fh)
        except OSError as exc:
            raise InvalidArgument(f"cannot read union file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise InvalidArgument(f"bad union JSON: {exc}") from None
        if not isinstance(boxes, list):
            raise InvalidArgument("union JSON must be a list of {origin, sides} objects")
        pairs = []
        for entry in boxes:
            try:
                pairs.append((entry["origin"], entry["sides"]))
            except (TypeError, KeyError):
                raise InvalidArgument("each union box needs 'origin' and 'sides'") from None
        return domain.make_union_of_boxes(pairs, h)
    raise InvalidArgument(f"unknown domain {text!r}; use box:a,b,c or union:file.json")


def _round12(x):
    return float(format(x, ".12g"))


def _render(obj):
    """Round floats to 12 significant digits, make numpy types plain."""
    import numpy as np

    if isinstance(obj, dict):
        return {k: _render(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_render(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return _round12(float(obj))
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    return obj


def _emit_text(text, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(doc, out_path):
    _emit_text(json.dumps(_render(doc), indent=2) + "\n", out_path)


def cmd_compute(args):
    from .constants import compute_constants

    spec = _parse_domain(args.domain, args.h)
    report = compute_constants(spec, tol=args.tol)
    _emit_json(report.to_json_dict(), args.out)
    return EXIT_OK


def cmd_verify(args):
    from .constants import compute_constants
    from .verify import lower_bound_check, verify_chain

    spec = _parse_domain(args.domain, args.h)
    report = compute_constants(spec, tol=args.tol)
    if report.convex:
        verdict = verify_chain(report)
    else:
        verdict = lower_bound_check(report)
    doc = report.to_json_dict()
    doc["verification"] = verdict.as_dict()
    _emit_json(doc, args.out)
    return EXIT_OK if verdict.passed else EXIT_VERIFY


def _sweep_rows(args):
    from . import domain as domain_mod
    from .constants import compute_constants
    from .errors import InvalidArgument
    from .verify import convergence_study, lower_bound_check, verify_chain

    h_list = _parse_floats(args.h_list, "h list")
    aspects = _parse_floats(args.aspect_list, "aspect list") if args.aspect_list else [None]

    rows = []
    for aspect in aspects:
        text = args.domain
        if aspect is not None:
            if not text.startswith("box:"):
                raise InvalidArgument("--aspect-list requires a box domain")
            sides = _parse_floats(text[len("box:"):], "box sides")
            sides[0] *= aspect
            text = "box:" + ",".join(format(s, ".17g") for s in sides)
        reports = []
        for h in h_list:
            spec = _parse_domain(text, h)
            reports.append(compute_constants(spec, tol=args.tol))
        orders = None
        if reports[0].kind == "box3" and len(h_list) >= 3 and aspect is None:
            spec0 = _parse_domain(text, h_list[0])
            orders = convergence_study(spec0, h_list, tol=args.tol, reports=reports).orders
        for i, (h, report) in enumerate(zip(h_list, reports)):
            verdict = verify_chain(report) if report.convex else lower_bound_check(report)
            row = {
                "domain": report.label,
                "h": h,
                "cp0": report.cp0,
                "cmt": report.cmt,
                "cmn": report.cmn,
                "cp": report.cp,
                "diam_over_pi": report.diam_over_pi,
                "margin_cmt_cp0": report.margin_cmt_cp0,
                "margin_cmn_cmt": report.margin_cmn_cmt,
                "chain_pass": verdict.passed,
            }
            for name in ("lambda1", "mu2", "nu_t", "nu_n"):
                row[f"order_{name}"] = (
                    orders[name][i - 1] if orders is not None and i > 0 else ""
                )
            rows.append(row)
    return rows


def cmd_sweep(args):
    rows = _sweep_rows(args)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (format(v, ".12g") if isinstance(v, float) else v)
                         for k, v in row.items()})
    _emit_text(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_spectrum(args):
    import numpy as np

    from . import domain as domain_mod
    from .derham import assemble_operators
    from .eigensolve import smallest_eigenpairs
    from .errors import InvalidArgument

    if args.k < 1:
        raise InvalidArgument(f"k must be >= 1, got {args.k}")
    spec = _parse_domain(args.domain, args.h)
    bundle = assemble_operators(domain_mod.enumerate_dofs(spec))
    op = bundle.operator(args.op)
    deflation = [np.ones(op.rows)] if args.op == "L_N" else []
    result = smallest_eigenpairs(op, args.k, deflation=deflation, tol=args.tol)
    lines = [
        f"{i}  {format(lam, '.10g')}  residual {format(res, '.3e')}"
        for i, (lam, res) in enumerate(zip(result.eigenvalues, result.residuals), start=1)
    ]
    text = f"# {args.op} on {spec.label()} h={format(args.h, '.10g')}\n" + "\n".join(lines) + "\n"
    if args.out:
        _emit_json(
            {
                "operator": args.op,
                "domain": spec.as_dict(),
                "h": args.h,
                "eigenvalues": list(result.eigenvalues),
                "residuals": list(result.residuals),
                "solver": {"tol": args.tol, "seed": result.seed,
                           "matvecs": result.matvecs, "method": result.method},
            },
            args.out,
        )
        sys.stdout.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_check_ops(args):
    from . import domain as domain_mod
    from .derham import (assemble_operators, exactness_check,
                         export_matrix_market)
    from .errors import ExactnessViolation
    from .verify import duality_2d_check

    spec = _parse_domain(args.domain, args.h)
    dofs = domain_mod.enumerate_dofs(spec)
    bundle = assemble_operators(dofs)

    failures = []
    try:
        report = exactness_check(bundle)
        print(f"exactness: C_t G_hat max |entry| = {report.curl_grad_max}, "
              f"W_n D_act^T max |entry| = {report.weakcurl_div_max}")
    except ExactnessViolation as exc:
        failures.append(str(exc))
        print(f"exactness: FAILED ({exc})")

    for name in ("A_t", "A_n", "L_D", "L_N"):
        if not bundle.operator(name).is_symmetric():
            failures.append(f"{name} not symmetric")
            print(f"symmetry {name}: FAILED")
        else:
            print(f"symmetry {name}: exact")

    # 2D duality on the bounding rectangle of the domain at the same spacing
    extent = _bounding_extent(spec)
    rect = domain_mod.make_rect(extent, args.h)
    verdict = duality_2d_check(rect)
    print(f"2D duality on rect[{extent[0]:g}x{extent[1]:g}]: "
          f"entrywise={'exact' if verdict.entrywise_equal else 'FAILED'}, "
          f"spectra diff = {verdict.spectra_max_diff:.3e}")
    if not verdict.passed:
        failures.append("2D duality check failed")

    if args.dump_ops:
        paths = export_matrix_market(bundle, args.dump_ops)
        print(f"wrote {len(paths)} Matrix Market files to {args.dump_ops}")

    return EXIT_OK if not failures else EXIT_VERIFY


def _bounding_extent(spec):
    lo = [min(o[ax] for o, _ in spec.boxes) for ax in range(2)]
    hi = [max(o[ax] + s[ax] for o, s in spec.boxes) for ax in range(2)]
    return (hi[0] - lo[0], hi[1] - lo[1])


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="maxconst",
        description="Poincare/Friedrichs/Maxwell constants of box domains "
                    "on a staggered grid",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, h_required=True):
        p.add_argument("--domain", required=True,
                       help="box:a,b,c or union:file.json")
        if h_required:
            p.add_argument("--h", type=float, required=True, help="grid spacing")
        p.add_argument("--tol", type=float, default=1e-8,
                       help="eigensolver tolerance (default 1e-8)")
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p = sub.add_parser("compute", help="compute the constants of a domain")
    add_common(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("verify", help="compute and check the constant chain")
    add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="CSV sweep over resolutions / aspect ratios")
    add_common(p, h_required=False)
    p.add_argument("--h-list", required=True, help="comma-separated spacings")
    p.add_argument("--aspect-list", default=None,
                   help="comma-separated factors scaling the first box side")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spectrum", help="k smallest eigenvalues of one operator")
    add_common(p)
    p.add_argument("--op", required=True, choices=("L_D", "L_N", "A_t", "A_n"))
    p.add_argument("--k", type=int, default=4, help="number of eigenvalues")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("check-ops", help="exact complex identities and 2D duality")
    add_common(p)
    p.add_argument("--dump-ops", default=None,
                   help="directory for Matrix Market dumps of all operators")
    p.set_defaults(func=cmd_check_ops)

    return parser


def main(argv=None):
    _apply_thread_cap()
    parser = _build_parser()
    args = parser.parse_args(argv)

    from .errors import ConvergenceFailure, MaxconstError

    try:
        return args.func(args)
    except ConvergenceFailure as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except MaxconstError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
