"""Command-line front end: ``schurweyl <command> [options]``.

Every command prints one report (JSON by default, or flattened CSV) and
exits 0 only when all checks in the report came out as expected; otherwise
the report's ``failures`` list says which did not.  Bad input is a usage
error (exit 2).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import algebra as alg_mod
from . import duality, estimation
from .matcore import Tolerance, matrix_to_json

EXPECTED_COUNTEREXAMPLE = {"nongauge": "lhs_strictly_larger", "lambda2": "rhs_strictly_larger"}


class UsageError(Exception):
    pass


def _plain(obj):
    """Convert numpy scalars and arrays so json can serialize them."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else k)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def render(report: dict, fmt: str) -> str:
    report = _plain(report)
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    for key, value in _flatten(report):
        writer.writerow([key, json.dumps(value) if not isinstance(value, str) else value])
    return buf.getvalue()


def write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".schurweyl-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_json(path: str):
    try:
        if path == "-":
            text, name = sys.stdin.read(), "<stdin>"
        else:
            with open(path, encoding="utf-8") as fh:
                text, name = fh.read(), path
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror}") from err
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        lines = text.splitlines()
        line = lines[err.lineno - 1] if 0 < err.lineno <= len(lines) else ""
        raise UsageError(f"{name}:{err.lineno}:{err.colno}: {err.msg}\n    {line}") from err


def _example_algebra(name: str, dim: int):
    if name == "scalars":
        return alg_mod.scalars(dim)
    if name == "diagonal":
        return alg_mod.diagonal_algebra(dim)
    if name == "full":
        return alg_mod.full_algebra(dim)
    if name == "left-right":
        return duality.left_right_algebras()[1]
    if name == "spin1-collective":
        eye = np.eye(3)
        gens = [np.kron(j, eye) + np.kron(eye, j) for j in duality.spin1_generators()]
        return gens
    raise UsageError(f"unknown example algebra {name!r}")


def read_algebra(args, tol: Tolerance, closed: bool = True):
    if args.input is None and args.example is None:
        raise UsageError("give --input FILE or --example NAME")
    if args.input is not None:
        try:
            return alg_mod.algebra_from_json(load_json(args.input), tol, args.seed, closed)
        except ValueError as err:
            raise UsageError(str(err)) from err
    ex = _example_algebra(args.example, args.dim)
    if isinstance(ex, list):
        d = ex[0].shape[0]
        if closed:
            return alg_mod.generate_algebra(ex, d, tol, args.seed)
        return alg_mod.algebra_from_basis([np.eye(d)] + ex, d, (), tol)
    return ex


def cmd_commutant(args, tol):
    alg = read_algebra(args, tol)
    comm = alg_mod.commutant(alg, tol, args.seed)
    check = alg_mod.check_algebra(comm, tol, args.seed)
    report = {"ambient_dim": alg.ambient_dim, "algebra_dim": alg.dim, "commutant_dim": comm.dim,
              "commutant_check": check}
    if args.emit_basis:
        report["commutant"] = alg_mod.algebra_to_json(comm)
    failures = [f"commutant {k} residual {v:.3g}" for k, v in check.items() if v > tol.match_eps]
    return report, failures


def cmd_gauge_check(args, tol):
    span = read_algebra(args, tol, closed=False)
    gauge = alg_mod.is_gauge_pair(span, tol, args.seed)
    report = {"span_dim": gauge.dim, "bicommutant_dim": gauge.bicommutant_dim,
              "is_gauge": gauge.is_gauge, "residual": gauge.residual}
    return report, []


def cmd_decompose(args, tol):
    alg = read_algebra(args, tol)
    bs = alg_mod.block_decompose(alg, tol, args.seed)
    resid = alg_mod.block_residual(alg, bs)
    report = {"ambient_dim": alg.ambient_dim, "algebra_dim": alg.dim,
              "blocks": [{"block_dim": m, "multiplicity": n} for m, n in bs.blocks],
              "center_dim": len(bs.central_projectors), "residual": resid}
    if args.emit_basis:
        report["basis_change"] = matrix_to_json(bs.basis_change)
    return report, ([f"block residual {resid:.3g}"] if resid > tol.match_eps else [])


def _counterexample(name: str, tol, seed):
    rep = duality.nongauge_counterexample(tol, seed) if name == "nongauge" else duality.lambda2_counterexample(tol, seed)
    failures = []
    if rep.verdict != EXPECTED_COUNTEREXAMPLE[name]:
        failures.append(f"verdict {rep.verdict}, expected {EXPECTED_COUNTEREXAMPLE[name]}")
    sym = rep.details.get("symmetric_component")
    if sym is not None and sym["verdict"] != "equal":
        failures.append(f"symmetric component verdict {sym['verdict']}, expected equal")
    return dict(rep.to_dict(), counterexample=name), failures


def cmd_duality(args, tol):
    if args.counterexample:
        return _counterexample(args.counterexample, tol, args.seed)
    alg = read_algebra(args, tol)
    try:
        if args.sign is None:
            rep = duality.verify_duality(alg, args.copies, tol, args.seed)
        else:
            rep = duality.verify_restricted_duality(alg, args.copies, args.sign, tol, args.seed)
    except ValueError as err:
        raise UsageError(str(err)) from err
    report = dict(rep.to_dict(), copies=args.copies, sign=args.sign)
    return report, ([] if rep.verdict == "equal" else [f"verdict {rep.verdict}, expected equal"])


def cmd_counterexample(args, tol):
    return _counterexample(args.name, tol, args.seed)


def cmd_lpm(args, tol):
    alg = read_algebra(args, tol)
    try:
        lpm = duality.build_lpm(alg, args.copies, args.sign, tol, args.seed, with_choi=not args.no_choi)
    except ValueError as err:
        raise UsageError(str(err)) from err
    report = {"copies": args.copies, "sign": args.sign, "coefficients": list(lpm.coefficients),
              "included": list(lpm.included), "details": lpm.details}
    failures = []
    if lpm.details["unitality_residual"] > tol.match_eps:
        failures.append(f"unitality residual {lpm.details['unitality_residual']:.3g}")
    return report, failures


def _close(value, target, eps):
    return abs(value - target) <= eps


def cmd_estimate(args, tol):
    if args.input is not None:
        return _estimate_problem(args, tol)
    if args.example is None:
        raise UsageError("give --example NAME or --input FILE")
    if args.example == "qubit-decision":
        rep = estimation.example_qubit_decision(args.alpha0, args.alpha1, args.n, args.theta_points, args.r)
        failures = [f"{k} {rep[k]:.3g}" for k in ("difference", "difference_exact") if rep[k] > tol.match_eps]
        if rep["pipeline_difference"] > 1e-6:
            failures.append(f"pipeline_difference {rep['pipeline_difference']:.3g}")
    elif args.example == "leftright":
        rep = estimation.example_leftright(args.n)
        failures = [] if rep["difference"] <= tol.match_eps else [f"difference {rep['difference']:.3g}"]
    elif args.example == "unambiguous":
        problem = estimation.unambiguous_problem(args.alpha0, args.alpha1, args.r, args.n, args.theta_points)
        rep = estimation.symmetric_subspace_witness(problem, tol)
        rep.update(alpha0=args.alpha0, alpha1=args.alpha1, r=args.r, copies=args.n)
        failures = [] if rep["advantage"] else ["no unambiguous advantage from the symmetric-subspace test"]
    else:
        raise UsageError(f"unknown example {args.example!r}")
    return dict(rep, example=args.example), failures


def _estimate_problem(args, tol):
    try:
        problem = estimation.problem_from_json(load_json(args.input))
    except ValueError as err:
        raise UsageError(str(err)) from err
    d, n = problem.site_dim, problem.copies
    post = estimation.count_post_process if args.strategy == "count" else None
    povm = estimation.local_observable_strategy(np.diag(np.arange(d, 0, -1)).astype(float), n, post, tol)
    table = estimation.conditionals(problem, povm)
    report = {"strategy": args.strategy, "labels": list(povm.labels), "conditionals": table,
              "mutual_information": {name: estimation.mutual_information(problem, povm, name)
                                     for name in problem.parameter_names}}
    row_err = float(np.abs(table.sum(axis=1) - 1).max())
    return report, ([] if row_err <= tol.match_eps else [f"conditionals rows off by {row_err:.3g}"])


COMMANDS = {
    "commutant": cmd_commutant,
    "gauge-check": cmd_gauge_check,
    "decompose": cmd_decompose,
    "duality": cmd_duality,
    "lpm": cmd_lpm,
    "estimate": cmd_estimate,
    "counterexample": cmd_counterexample,
}


def _sign(text: str) -> int:
    if text in ("+", "+1", "1"):
        return 1
    if text in ("-", "-1"):
        return -1
    raise argparse.ArgumentTypeError("sign must be + or -")


def _unit_interval(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("tolerance must lie in (0, 1)")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=_unit_interval, default=1e-8, help="match_eps (default 1e-8)")
    common.add_argument("--rank-eps", type=_unit_interval, default=1e-9, help="rank cutoff (default 1e-9)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", help="write the report here instead of stdout")

    algebra_in = argparse.ArgumentParser(add_help=False)
    algebra_in.add_argument("--input", help="algebra JSON {ambient_dim, generators}; '-' for stdin")
    algebra_in.add_argument("--example", choices=("scalars", "diagonal", "full", "left-right", "spin1-collective"))
    algebra_in.add_argument("--dim", type=int, default=2, help="site dimension for --example")

    parser = argparse.ArgumentParser(prog="schurweyl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("commutant", parents=[common, algebra_in], help="commutant of an algebra")
    p.add_argument("--emit-basis", action="store_true")
    sub.add_parser("gauge-check", parents=[common, algebra_in], help="is span(generators) a gauge pair")
    p = sub.add_parser("decompose", parents=[common, algebra_in], help="block structure of an algebra")
    p.add_argument("--emit-basis", action="store_true")

    p = sub.add_parser("duality", parents=[common, algebra_in], help="compare Comm{Q(G_A)} with Alg{A^n, P(S_n)}")
    p.add_argument("--copies", type=int, default=2)
    p.add_argument("--sign", type=_sign, help="restrict to the symmetric (+) or antisymmetric (-) subspace")
    p.add_argument("--counterexample", choices=sorted(EXPECTED_COUNTEREXAMPLE))

    p = sub.add_parser("lpm", parents=[common, algebra_in], help="build the L+ or L- channel")
    p.add_argument("--copies", type=int, default=2)
    p.add_argument("--sign", type=_sign, default=1)
    p.add_argument("--no-choi", action="store_true", help="skip the complete-positivity check")

    p = sub.add_parser("estimate", parents=[common], help="estimation examples and problem files")
    p.add_argument("--example", choices=("qubit-decision", "leftright", "unambiguous"))
    p.add_argument("--input", help="problem JSON; measured site by site in the computational basis")
    p.add_argument("--strategy", choices=("string", "count"), default="string")
    p.add_argument("--alpha0", type=float, default=math.pi / 4)
    p.add_argument("--alpha1", type=float, default=math.pi / 4)
    p.add_argument("--r", type=float, default=0.25, help="dephasing strength")
    p.add_argument("--n", "--copies", dest="n", type=int, default=2)
    p.add_argument("--theta-points", type=int, default=64)

    p = sub.add_parser("counterexample", parents=[common], help="run a built-in counterexample")
    p.add_argument("name", choices=sorted(EXPECTED_COUNTEREXAMPLE))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    tol = Tolerance(rank_eps=args.rank_eps, match_eps=args.tolerance)
    try:
        report, failures = COMMANDS[args.command](args, tol)
    except UsageError as err:
        parser.error(str(err))
    report = dict(report, command=args.command, seed=args.seed, failures=failures, ok=not failures)
    text = render(report, args.format)
    if args.output:
        write_atomic(args.output, text)
    else:
        sys.stdout.write(text)
    return 0 if not failures else 1


if __name__ == "__main__":
    sys.exit(main())
