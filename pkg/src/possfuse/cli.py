"""Command-line front end.

Every subcommand writes a JSON report (to ``--out`` or stdout). Exit codes:
0 success, 1 a ``check`` failed, 2 unreadable input or invalid config,
3 space mismatch or non-total map, 4 incompatible constraints.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import os
import sys
from pathlib import Path

import numpy as np

from . import docs, sampling
from .assimilation import run_scenario
from .constraint import (
    MAX_EXHAUSTIVE,
    Constraint,
    as_mass_function,
    axiom_violations,
    canonicalize,
    dominates,
    from_mass_function,
    norm,
    outer_measure,
)
from .errors import (
    DocError,
    IncompatibleConstraints,
    KernelNotAssociative,
    NonTotalMap,
    SpaceMismatch,
    SpaceTooLarge,
    ZeroConstraint,
)
from .funcspace import TOL, SubsetMask
from .fusion import dempster_combine, fuse, general_fuse
from .transport import marginalize, pullback, pushforward

ENV_TOL = "POSSFUSE_TOLERANCE"

EXIT_FAILED_CHECK = 1
EXIT_PARSE = 2
EXIT_SPACE = 3
EXIT_INCOMPATIBLE = 4


def _digest(*blobs: bytes) -> str:
    h = hashlib.sha256()
    for b in blobs:
        h.update(hashlib.sha256(b).digest())
    return h.hexdigest()


def _result(M: Constraint) -> dict:
    c = canonicalize(M)
    return {"space": docs.space_doc(c.space), "norm": norm(c), "constraint": docs.components_doc(c)}


def _emit(args, report: dict) -> None:
    text = docs.dumps(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands --------------------------------------------------------------


def cmd_fuse(args) -> int:
    a, ra = docs.load(args.first)
    b, rb = docs.load(args.second)
    P = docs.parse_constraint(a)
    Q = docs.parse_constraint(b)
    blobs = [ra, rb]
    if args.kernel:
        k, rk = docs.load(args.kernel)
        blobs.append(rk)
        K = docs.parse_kernel(k, P.space)
        R, diag = general_fuse(P, Q, K, verify=not args.no_verify_kernel, tol=args.tolerance)
        op = "general_fuse"
    else:
        R, diag = fuse(P, Q, tol=args.tolerance)
        op = "fuse"
    _emit(args, {
        "operation": op,
        "inputs_digest": _digest(*blobs),
        "result": _result(R),
        "diagnostics": {
            "normalizer": diag.normalizer,
            "conflict": diag.conflict,
            "components_before_prune": diag.component_count_before_prune,
            "components_after": len(R),
        },
    })
    return 0


def _transport(args, op: str) -> int:
    d, rd = docs.load(args.doc)
    m, rm = docs.load(args.map)
    M = docs.parse_constraint(d)
    if op == "push":
        xi = docs.parse_map(m, domain=M.space)
        R = pushforward(M, xi)
    else:
        xi = docs.parse_map(m, codomain=M.space)
        R = pullback(M, xi)
    _emit(args, {
        "operation": op,
        "inputs_digest": _digest(rd, rm),
        "result": _result(R),
        "diagnostics": {"surjective": xi.is_surjective, "components_after": len(R)},
    })
    return 0


def cmd_push(args) -> int:
    return _transport(args, "push")


def cmd_pull(args) -> int:
    return _transport(args, "pull")


def cmd_marginalize(args) -> int:
    d, rd = docs.load(args.doc)
    M = docs.parse_constraint(d)
    try:
        R = marginalize(M, args.side)
    except ValueError as exc:
        raise SpaceMismatch(str(exc)) from exc
    _emit(args, {"operation": "marginalize", "inputs_digest": _digest(rd), "side": args.side, "result": _result(R)})
    return 0


def _bridge(m1, m2, tol: float) -> dict:
    combined, conflict = dempster_combine(m1, m2, tol=tol)
    R, diag = fuse(from_mass_function(m1), from_mass_function(m2), tol=tol)
    via_fusion = as_mass_function(R)
    a, b = combined.as_dict(), via_fusion.as_dict()
    err = max(abs(a.get(s, 0.0) - b.get(s, 0.0)) for s in set(a) | set(b))
    err = max(err, abs(diag.normalizer - (1.0 - conflict)))
    return {
        "dempster": {"masses": docs.mass_doc(combined), "conflict": conflict},
        "fusion": {"masses": docs.mass_doc(via_fusion), "normalizer": diag.normalizer},
        "max_abs_diff": err,
        "verdict": "equal" if err <= tol else "different",
    }


def cmd_dempster(args) -> int:
    if args.random:
        rng = np.random.default_rng(args.seed)
        cases = []
        for i in range(args.random):
            sp = sampling.space(int(rng.integers(1, 7)))
            m1 = sampling.mass_function(rng, sp, 5)
            m2 = sampling.mass_function(rng, sp, 5)
            try:
                case = _bridge(m1, m2, args.tolerance)
            except IncompatibleConstraints:
                # both sides must refuse the pair
                try:
                    fuse(from_mass_function(m1), from_mass_function(m2), tol=args.tolerance)
                    agree = False
                except IncompatibleConstraints:
                    agree = True
                case = {"verdict": "equal" if agree else "different", "total_conflict": True}
            case = {"case": i, "frame": docs.space_doc(sp), **case}
            cases.append(case)
        _emit(args, {
            "operation": "dempster",
            "seed": args.seed,
            "cases": cases,
            "verdict": "equal" if all(c["verdict"] == "equal" for c in cases) else "different",
        })
        return 0
    if not (args.first and args.second):
        raise DocError("dempster needs two mass-function files or --random N")
    a, ra = docs.load(args.first)
    b, rb = docs.load(args.second)
    m1 = docs.parse_mass(a)
    m2 = docs.parse_mass(b, m1.space)
    if "space" in b and docs.parse_space(b["space"]) != m1.space:
        raise SpaceMismatch("mass functions are on different frames")
    _emit(args, {"operation": "dempster", "inputs_digest": _digest(ra, rb), **_bridge(m1, m2, args.tolerance)})
    return 0


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def cmd_filter(args) -> int:
    d, rd = docs.load(args.scenario)
    cfg = docs.parse_scenario(d)
    if args.seed is not None:
        cfg.seed = args.seed
    records = run_scenario(cfg, oracle=args.oracle)

    cols = ["step", "prior_mean", "prior_var", "obs", "post_mean", "post_var", "weight"]
    if args.oracle:
        cols += ["oracle_weight", "abs_err"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    steps = []
    for r in records:
        row = {
            "step": r.step,
            "prior_mean": r.prior.mean,
            "prior_var": r.prior.var,
            "obs": r.bound.z,
            "post_mean": r.result.posterior.mean,
            "post_var": r.result.posterior.var,
            "weight": r.result.weight,
        }
        if args.oracle:
            row["oracle_weight"] = r.oracle_weight
            row["abs_err"] = abs(r.oracle_weight - r.result.weight)
        writer.writerow([str(r.step)] + [_fmt(row[c]) for c in cols[1:]])
        steps.append(row | {"cell": list(r.cell) if r.cell else None})
    report = {
        "operation": "filter",
        "inputs_digest": _digest(rd),
        "seed": cfg.seed,
        "steps": steps,
    }
    if args.oracle:
        report["max_abs_err"] = max(s["abs_err"] for s in steps)
    csv_path = args.csv or (str(Path(args.out).with_suffix(".csv")) if args.out else None)
    if csv_path:
        Path(csv_path).write_text(buf.getvalue())
        report["csv"] = os.path.basename(csv_path)
    _emit(args, report)
    return 0


def cmd_check(args) -> int:
    d, rd = docs.load(args.doc)
    M = docs.parse_constraint(d)
    tol = args.tolerance
    report: dict = {"operation": "check", "inputs_digest": _digest(rd), "norm": norm(M)}
    report["canonical"] = M.is_canonical(tol)
    full = SubsetMask.full(M.space)
    report["outer_measure_full"] = outer_measure(M, full)
    ok = True
    if M.space.size <= 10:
        violations = axiom_violations(M, tol)
        report["axioms"] = violations
        ok = ok and not any(violations.values())
    else:
        report["axioms"] = None
    blobs = [rd]
    if args.prob:
        p_doc, rp = docs.load(args.prob)
        blobs.append(rp)
        p = docs.parse_probability(p_doc, M.space)
        if M.space.size <= MAX_EXHAUSTIVE:
            dom = dominates(M, p, tol)
            report["dominance"] = {"dominates": dom, "mode": "exhaustive"}
        else:
            dom = dominates(M, p, tol, samples=args.samples, seed=args.seed)
            report["dominance"] = {"dominates": dom, "mode": "sampled", "samples": args.samples, "complete": False}
        ok = ok and dom
        report["inputs_digest"] = _digest(*blobs)
    report["ok"] = ok
    _emit(args, report)
    return 0 if ok else EXIT_FAILED_CHECK


# -- entry point --------------------------------------------------------------


def default_tolerance() -> float:
    env = os.environ.get(ENV_TOL)
    if env:
        try:
            return float(env)
        except ValueError:
            raise DocError(f"{ENV_TOL}={env!r} is not a number") from None
    return TOL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--tolerance", type=float, default=None,
                        help=f"absolute float tolerance (default 1e-9, or ${ENV_TOL})")

    parser = argparse.ArgumentParser(prog="possfuse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fuse", parents=[common], help="fuse two constraint documents")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--kernel", help="kernel document: fuse over a general (ell, theta) kernel")
    p.add_argument("--no-verify-kernel", action="store_true")
    p.set_defaults(func=cmd_fuse)

    for name, func in (("push", cmd_push), ("pull", cmd_pull)):
        p = sub.add_parser(name, parents=[common], help=f"{name} a constraint along a map")
        p.add_argument("doc")
        p.add_argument("map")
        p.set_defaults(func=func)

    p = sub.add_parser("marginalize", parents=[common], help="marginal of a product-space constraint")
    p.add_argument("doc")
    p.add_argument("--side", choices=["left", "right"], default="left", help="factor to keep")
    p.set_defaults(func=cmd_marginalize)

    p = sub.add_parser("dempster", parents=[common], help="Dempster's rule vs fusion of mass functions")
    p.add_argument("first", nargs="?")
    p.add_argument("second", nargs="?")
    p.add_argument("--random", type=int, default=0, metavar="N", help="check N seeded random pairs instead")
    p.set_defaults(func=cmd_dempster)

    p = sub.add_parser("filter", parents=[common], help="run a scalar assimilation scenario")
    p.add_argument("scenario")
    p.add_argument("--oracle", action="store_true", help="add a per-step quadrature check")
    p.add_argument("--csv", help="CSV output path (default: next to --out)")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("check", parents=[common], help="outer-measure axioms and dominance checks")
    p.add_argument("doc")
    p.add_argument("--prob", help="probability document to test for dominance")
    p.add_argument("--samples", type=int, default=10000, help="random subsets when the space is too large")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tolerance is None:
            args.tolerance = default_tolerance()
        if args.command == "dempster" and args.seed is None:
            args.seed = 0
        return args.func(args)
    except (DocError, OSError, KernelNotAssociative, ZeroConstraint) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SpaceMismatch, NonTotalMap, SpaceTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPACE
    except IncompatibleConstraints as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPATIBLE


if __name__ == "__main__":
    sys.exit(main())
