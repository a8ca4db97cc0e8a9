"""Command line: analyze, solve, classify-cibs, verify-paper.

Exit codes: 0 success or sat, 1 unsat, 2 invalid input, 3 failed verification.
"""

from __future__ import annotations

import argparse
import json
import sys

from .algebra import algebra_to_json, all_subuniverses, is_isomorphic, load_algebra
from .catalog import cibs_up_to, simple4
from .congruence import congruence_lattice, is_simple
from .csp import load_instance, normalize, validate
from .errors import InstanceError, WitnessError
from .solvers import STRATEGIES, SolveOutcome, backtracking_solve, dispatch_solve
from .structure import detect_ec, has_ctb_cib, is_abelian, mass_report
from .verify import SUITES, classify_cibs_report, run_suites, simple_with_affine_subalgebra

EXIT_OK, EXIT_UNSAT, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2, 3


def _emit(args, payload: dict, text: str):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _fmt_sets(sets) -> str:
    return ", ".join("{" + ",".join(map(str, s)) + "}" for s in sets)


def analyze(args) -> int:
    A = load_algebra(args.file)
    subs = all_subuniverses(A, bound=max(A.size, 8))
    lat = congruence_lattice(A)
    abelian = is_abelian(A, bound=max(A.size, 6))
    masses = mass_report(A, max_arity=args.bound_arity, max_depth=args.bound_depth)
    out = {
        "algebra": algebra_to_json(A),
        "subuniverses": [list(S.elements) for S in subs],
        "congruences": [str(t) for t in lat.elements],
        "simple": is_simple(A),
        "abelian": abelian,
        "masses": [list(B.elements) for B in masses.masses],
        "absorption": {",".join(map(str, k)): c.to_json() for k, c in masses.verdicts.items()},
    }
    lines = [f"size: {A.size}",
             f"subuniverses: {_fmt_sets(S.elements for S in subs)}",
             f"congruences: {' '.join(out['congruences'])}",
             f"simple: {str(out['simple']).lower()}",
             f"abelian: {str(abelian).lower()}",
             f"masses: [{_fmt_sets(out['masses'])}]"]
    for k, c in masses.verdicts.items():
        lines.append(f"  {{{','.join(map(str, k))}}}: {c}")
    if A.is_cib():
        ctb = has_ctb_cib(A)
        out["cube_term_blocker"] = None if ctb is None else [list(ctb[0].elements), list(ctb[1].elements)]
        lines.append("cube-term blocker: " + ("none" if ctb is None else _fmt_sets([ctb[0].elements, ctb[1].elements])))
        ec = detect_ec(A)
        if ec is not None:
            out["ec"] = {"congruence": str(ec.theta), "term": str(ec.t),
                         "classes": [list(c) for c in ec.class_order]}
            lines.append(f"edge-by-chain: {ec.theta} via t = {ec.t}, classes {_fmt_sets(ec.class_order)}")
        else:
            out["ec"] = None
            lines.append("edge-by-chain: no")
    _emit(args, out, "\n".join(lines))
    return EXIT_OK


def _solve_permissive(I, strategy):
    """Normalize a subpower instance; if the result is no longer a proper
    subdirect instance over subuniverses, search it directly."""
    J = normalize(I)
    if any(not d for d in J.domains):
        return SolveOutcome("unsat", None, "normalize")
    if validate(J):
        out = backtracking_solve(J)
        out.strategy = "fallback"
        return out
    return dispatch_solve(J, strategy)


def solve(args) -> int:
    I = load_instance(args.file)
    issues = validate(I, allow_subpower=args.allow_subpower)
    if issues:
        raise InstanceError("; ".join(issues))
    if args.allow_subpower:
        outcome = _solve_permissive(I, args.strategy)
    else:
        outcome = dispatch_solve(I, args.strategy)
    payload = dict(outcome.to_json(), seed=args.seed)
    text = outcome.decision
    if outcome.witness is not None:
        text += " " + " ".join(map(str, outcome.witness))
    text += f"\nstrategy: {outcome.strategy}"
    _emit(args, payload, text)
    return EXIT_OK if outcome.sat else EXIT_UNSAT


def _report_text(rep) -> str:
    lines = [rep.summary()]
    for c in rep.cases:
        lines.append(f"  [{'PASS' if c.passed else 'FAIL'}] {c.description}")
        if not c.passed:
            lines.append(f"      expected {c.expected!r}")
            lines.append(f"      actual   {c.actual!r}")
    for n in rep.notes:
        lines.append(f"  note: {n}")
    return "\n".join(lines)


def _reports(args, reports) -> int:
    _emit(args, {"reports": [r.to_json() for r in reports], "ok": all(r.ok for r in reports)},
          "\n".join(_report_text(r) for r in reports))
    return EXIT_OK if all(r.ok for r in reports) else EXIT_VERIFY


def classify(args) -> int:
    if not 1 <= args.max_size <= 4:
        raise InstanceError("--max-size must be between 1 and 4")
    rep = classify_cibs_report(args.max_size)
    if not args.json:
        n = args.max_size
        found = [A for A in cibs_up_to(n) if A.size == n and is_simple(A)]
        print(f"CIBs of size {n}: {sum(1 for A in cibs_up_to(n) if A.size == n)}")
        print(f"simple CIBs of size {n}: {len(found)}")
        if n == 4:
            found = simple_with_affine_subalgebra(4)
            print(f"simple CIBs of size 4 with an affine 3-element subalgebra: {len(found)}")
        for A in found:
            twin = next((f"a{i}" for i in range(7) if n == 4 and is_isomorphic(A, simple4(i))), None)
            print(f"  {A.name}: {A.rows}" + (f"  (isomorphic to {twin})" if twin else ""))
    return _reports(args, [rep])


def verify(args) -> int:
    names = []
    for s in args.suite or ["all"]:
        names.extend(x for x in s.split(",") if x)
    try:
        reports = run_suites(names)
    except KeyError as exc:
        raise InstanceError(str(exc)) from exc
    return _reports(args, reports)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0, help="seed recorded with the output (default 0)")

    p = argparse.ArgumentParser(prog="algcsp", description="Finite algebras and their constraint problems.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="structural report for an algebra file")
    a.add_argument("file")
    a.add_argument("--bound-arity", type=int, default=4, help="largest term arity in absorption search")
    a.add_argument("--bound-depth", type=int, default=3, help="term depth hint for absorption search")
    a.set_defaults(func=analyze)

    s = sub.add_parser("solve", parents=[common], help="solve an instance file")
    s.add_argument("file")
    s.add_argument("--strategy", choices=STRATEGIES, default="auto")
    s.add_argument("--allow-subpower", action="store_true",
                   help="accept constraints that are not subdirect on their domains")
    s.set_defaults(func=solve)

    c = sub.add_parser("classify-cibs", parents=[common], help="classification of small CIBs")
    c.add_argument("--max-size", type=int, default=4)
    c.set_defaults(func=classify)

    v = sub.add_parser("verify-paper", parents=[common], help="run verification suites")
    v.add_argument("--suite", action="append",
                   help=f"suite name (repeatable or comma separated): {', '.join(SUITES)}, all")
    v.set_defaults(func=verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except WitnessError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (ValueError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
