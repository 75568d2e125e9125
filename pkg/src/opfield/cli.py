"""Command-line driver: ``opfield <command> [scenario] ...``.

Exit status: 0 when every check passes, 2 when a numerical check fails,
1 on malformed input.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .fieldcore import ContractError
from .io import ScenarioError, bundled_fixtures_path, complex_to_json, emit_report, load_scenario
from .kernelop import L2Basis, adjoint_kernel, kernel_to_operator, separable_approx
from .schatten import schatten_decompose, theta_array
from .traceclass import conjugate_exponent, fiber_trace, hs_inner, lp_norm, norming_element, trace
from .verify import run_suite

EXIT_OK, EXIT_INPUT, EXIT_CHECK = 0, 1, 2


def _parse_p(text):
    if text.lower() in ("inf", "infinity"):
        return np.inf
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid exponent {text!r}") from None


def _field_json(values):
    return complex_to_json(values)


def _base(sc, command):
    return {"command": command, "points": list(sc.space.points), "fields": {}, "checks": []}


def _check(report, name, violation, tolerance):
    report["checks"].append({"name": name, "max_violation": float(violation),
                             "tolerance": float(tolerance),
                             "status": "pass" if violation <= tolerance else "fail"})


def cmd_decompose(sc, args):
    u = sc.operator(args.op)
    s = schatten_decompose(u)
    rep = _base(sc, "decompose")
    rep["operator"] = args.op
    rep["theta"] = s.theta_values.tolist()
    rep["e"] = s.e_values.tolist()
    rep["xi"] = complex_to_json(s.xi_values)
    rep["eta"] = complex_to_json(s.eta_values)
    rep["reanchor_events"] = [ev.as_dict() for ev in s.events]
    scale = max(u.op_norm(), np.finfo(float).tiny)
    rep["residual"] = s.residual(u) / scale
    rep["orthonormality_defect"] = s.orthonormality_defect()
    for n, th in enumerate(s.theta_values, start=1):
        rep["fields"][f"theta_{n}"] = _field_json(th)
    tol = args.tol or sc.tolerances["reconstruction"]
    _check(rep, "reconstruction", rep["residual"], tol)
    _check(rep, "u_orthonormality", rep["orthonormality_defect"], tol)
    return rep


def cmd_norm(sc, args):
    u = sc.operator(args.op)
    r = lp_norm(u, args.p)
    rep = _base(sc, "norm")
    rep.update(r.as_dict())
    rep["operator"] = args.op
    tr = trace(u)
    rep["trace_field"] = complex_to_json(tr.values)
    rep["fields"]["trace"] = _field_json(tr.values)
    if r.power_sum_field is not None:
        rep["fields"]["power_sum"] = _field_json(r.power_sum_field.values)
    rep["holder_checks"] = []
    if args.p == 0 or 1 <= args.p < np.inf:
        v = norming_element(u, schatten_decompose(u), args.p)
        q = conjugate_exponent(args.p)
        rhs = r.norm * lp_norm(v, q).norm
        for label, prod in (("uv", u @ v), ("vu", v @ u)):
            lhs = lp_norm(prod, 1).norm
            rep["holder_checks"].append({"product": label, "q": "inf" if np.isinf(q) else q,
                                         "lhs": lhs, "rhs": rhs})
            _check(rep, f"holder_{label}", max(lhs - rhs, 0.0), sc.tolerances["inequality"])
    return rep


def cmd_trace(sc, args):
    u = sc.operator(args.op)
    tr = trace(u)
    rep = _base(sc, "trace")
    rep["operator"] = args.op
    rep["trace_field"] = complex_to_json(tr.values)
    rep["norm"] = tr.sup_norm()
    rep["fields"]["trace"] = _field_json(tr.values)
    scale = max(u.op_norm(), 1.0) * u.dim
    err = float(np.max(np.abs(tr.values - fiber_trace(u).values))) / scale
    _check(rep, "matrix_trace_agreement", err, args.tol or sc.tolerances["identity"])
    return rep


def cmd_hs(sc, args):
    u, v = sc.operator(args.op1), sc.operator(args.op2)
    h = hs_inner(u, v)
    rep = _base(sc, "hs")
    rep["operators"] = [args.op1, args.op2]
    rep["hs_field"] = complex_to_json(h.values)
    rep["fields"]["hs"] = _field_json(h.values)
    return rep


def _cells(n, count):
    return [c for c in np.array_split(np.arange(n), count) if c.size]


def cmd_kernel(sc, args):
    w = sc.kernel(args.kernel)
    basis = L2Basis.nodal(w.quad)
    op = kernel_to_operator(w, basis)
    th = theta_array(op)
    mu = w.quad.weights
    rep = _base(sc, "kernel")
    rep["kernel"] = args.kernel
    rep["theta"] = th.tolist()
    hs = np.einsum("rst,r,s->t", np.abs(w.values) ** 2, mu, mu)
    rep["hs_norm_squared"] = hs.tolist()
    for n, t in enumerate(th, start=1):
        rep["fields"][f"theta_{n}"] = _field_json(t)
    tol = args.tol or sc.tolerances["reconstruction"]
    err = float(np.max(np.abs(np.sum(th ** 2, axis=0) - hs) / np.maximum(hs, 1e-300)))
    _check(rep, "hs_identity", err, tol)
    if args.adjoint:
        adj = kernel_to_operator(adjoint_kernel(w), basis)
        rep["adjoint_residual"] = (adj - op.H).op_norm()
        _check(rep, "adjoint_kernel", rep["adjoint_residual"], sc.tolerances["identity"] * max(op.op_norm(), 1.0))
    if args.approx is not None:
        approx = separable_approx(w, _cells(len(w.quad), args.approx))
        rep["approx"] = {"cells": args.approx, "terms": int(approx.u_terms.shape[0]),
                         "error_bound": approx.error_bound,
                         "sample_deviation": approx.sample_deviation, "error": approx.error}
        _check(rep, "approx_error_bound", max(approx.error - approx.error_bound, 0.0), 0.0)
    return rep


def cmd_dual(sc, args):
    u = sc.operator(args.op)
    p = args.p
    if not (p == 0 or 1 <= p < np.inf):
        raise ContractError("dual needs p in {0} U [1, inf)")
    s = schatten_decompose(u)
    v = norming_element(u, s, p)
    q = conjugate_exponent(p)
    up, vq = lp_norm(u, p).norm, lp_norm(v, q).norm
    uv, vu = lp_norm(u @ v, 1).norm, lp_norm(v @ u, 1).norm
    rep = _base(sc, "dual")
    rep.update({"operator": args.op, "p": p, "q": "inf" if np.isinf(q) else q,
                "norming_element": complex_to_json(v.matrices),
                "norm_u_p": up, "norm_v_q": vq, "norm_uv_1": uv, "norm_vu_1": vu})
    rhs = up * vq
    rel = max(abs(uv - rhs), abs(vu - rhs)) / rhs if rhs > 0 else max(uv, vu)
    _check(rep, "norming_attainment", rel, args.tol or 1e-8)
    return rep


def cmd_verify(sc, args):
    rep = run_suite(seed=args.seed, trials=args.trials, scenario=sc,
                    tolerances=sc.tolerances if sc is not None else None,
                    timings=args.timings)
    return rep.as_dict()


def build_parser():
    parser = argparse.ArgumentParser(prog="opfield", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report to this path")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--tol", type=float, default=None, help="override the check tolerance")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", parents=[common], help="Schatten decomposition report")
    p.add_argument("scenario")
    p.add_argument("op")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("norm", parents=[common], help="Schatten p-norm report")
    p.add_argument("scenario")
    p.add_argument("op")
    p.add_argument("--p", type=_parse_p, default=1.0)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("trace", parents=[common], help="C(T)-valued trace")
    p.add_argument("scenario")
    p.add_argument("op")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("hs", parents=[common], help="Hilbert-Schmidt inner product")
    p.add_argument("scenario")
    p.add_argument("op1")
    p.add_argument("op2")
    p.set_defaults(func=cmd_hs)

    p = sub.add_parser("kernel", parents=[common], help="integral operator of a kernel")
    p.add_argument("scenario")
    p.add_argument("kernel")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--adjoint", action="store_true")
    g.add_argument("--approx", type=int, metavar="CELLS")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("dual", parents=[common], help="norming element and Hoelder attainment")
    p.add_argument("scenario")
    p.add_argument("op")
    p.add_argument("--p", type=_parse_p, default=2.0)
    p.set_defaults(func=cmd_dual)

    p = sub.add_parser("verify", parents=[common], help="randomised invariant suite")
    p.add_argument("scenario", nargs="?", default=None,
                   help="scenario whose operators and kernels are checked too (default: bundled fixtures)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--timings", action="store_true", help="record runtimes (breaks byte-identity)")
    p.set_defaults(func=cmd_verify)
    return parser


def _report_failed(rep):
    return any(c.get("status") == "fail" for c in rep.get("checks", []))


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        path = args.scenario
        if path is None and args.command == "verify":
            path = bundled_fixtures_path()
        sc = load_scenario(path)
        rep = args.func(sc, args)
        text = emit_report(rep, args.format, args.out)
    except (ScenarioError, ContractError) as exc:
        print(f"opfield: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"opfield: error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_CHECK if _report_failed(rep) else EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
