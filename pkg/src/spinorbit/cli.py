"""Command-line front end.

Exit status is 0 when every asserted residual vanishes, 1 when some does
not, and 2 for usage errors, parse errors and unknown catalog keys.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

from . import catalog as C
from . import determining as D
from .parser import ParseError, parse

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

VERBS = ("list", "verify", "commute", "simplify", "determine", "relations", "oracle")


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spinorbit",
                                 description="Exact verification of spin-orbit integrals of motion.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--no-timing", action="store_true",
                        help="report timing_ms as 0 so output is byte-for-byte reproducible")
    sub = ap.add_subparsers(dest="verb", required=True, metavar="verb")

    p = sub.add_parser("list", parents=[common], help="list catalog keys")
    p.add_argument("what", nargs="?", default="integrals",
                   choices=("cases", "integrals", "solutions", "relations", "determining"))
    p.add_argument("--family", default=None)
    p.add_argument("--case", default=None, help="only integrals attached to this case")

    p = sub.add_parser("verify", parents=[common], help="commute a catalog integral with H(case)")
    p.add_argument("--case")
    p.add_argument("--integral")
    p.add_argument("--all", action="store_true", help="every attached (case, integral) pair")
    p.add_argument("--printed-only", action="store_true",
                   help="with --all, skip the corrected readings")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("commute", parents=[common], help="commutator of two expressions")
    p.add_argument("--lhs", required=True)
    p.add_argument("--rhs", required=True)

    p = sub.add_parser("simplify", parents=[common], help="normal-order an expression")
    p.add_argument("--expr", required=True)

    p = sub.add_parser("determine", parents=[common], help="check a solution branch")
    p.add_argument("--branch", required=True)
    p.add_argument("--family", default=None)
    p.add_argument("--corrected", action="store_true", help="use the corrected equations")
    p.add_argument("--extracted", action="store_true",
                   help="check against the system generated from the symmetrized ansatz")

    p = sub.add_parser("relations", parents=[common], help="check generator relations")
    p.add_argument("--family", required=True)
    p.add_argument("--corrected", action="store_true")
    p.add_argument("--quantum", action="store_true", help="add quantum ordering diagnostics")

    p = sub.add_parser("oracle", parents=[common], help="randomized cross-check against direct application")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--case")
    p.add_argument("--integral")
    return ap


# -- output --------------------------------------------------------------------

def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _report_json(args, rep: D.ResidualReport) -> dict:
    out = rep.to_json()
    if args.no_timing:
        out["timing_ms"] = 0
    return out


def _report_text(rep_json: dict) -> str:
    lines = [f"{rep_json['query']}: {rep_json['status']}"]
    for comp in rep_json["components"]:
        if comp["residual_terms"]:
            idx = ",".join(map(str, comp["indices"])) or "-"
            lines.append(f"  [{idx}] {len(comp['residual_terms'])} residual term(s)")
            for t in comp["residual_terms"][:4]:
                lines.append(f"      pauli={t['pauli']} p={t['p']} coeff={t['coeff']}")
    return "\n".join(lines)


def _finish(args, rep: D.ResidualReport) -> int:
    js = _report_json(args, rep)
    _emit(args, js, _report_text(js))
    return EXIT_OK if rep.ok else EXIT_FAIL


# -- verbs ---------------------------------------------------------------------

def _cmd_list(args) -> int:
    if args.what == "cases":
        rows = [{"id": c, "V1": C.get_case(c).v1_text, "V0": C.get_case(c).v0_text}
                for c in C.list_cases()]
        text = "\n".join(f"{r['id']:>9}  V1 = {r['V1']}   V0 = {r['V0']}" for r in rows)
    elif args.what == "integrals":
        rows = []
        for k in C.list_integrals():
            e = C.get_integral(k)
            if args.case and not (args.case in e.cases):
                continue
            if args.family and e.family != args.family:
                continue
            rows.append({"id": k, "family": e.family, "cases": list(e.cases),
                         "reading": e.reading, "corrects": e.corrects})
        text = "\n".join(f"{r['id']:>9}  {r['family']:<14} cases {','.join(r['cases'])}"
                         + (f"  (corrects {r['corrects']})" if r["corrects"] else "") for r in rows)
    elif args.what == "solutions":
        rows = [{"id": s, "family": C.get_solution(s).family, "rejected": C.get_solution(s).rejected}
                for s in C.list_solutions()]
        text = "\n".join(f"{r['id']:<24} {r['family']}" + ("  rejected" if r["rejected"] else "")
                         for r in rows)
    elif args.what == "relations":
        fams = [args.family] if args.family else ["tensor", "pseudo"]
        rows = [{"id": r.id, "family": r.family, "kind": r.kind, "valid": r.valid,
                 "corrected": r.corrected_rhs is not None} for f in fams for r in C.get_relations(f)]
        text = "\n".join(f"{r['id']:<5} {r['family']:<7} {r['kind']}" for r in rows)
    else:
        fams = [args.family] if args.family else ["tensor", "pseudo"]
        rows = [{"id": e.id, "family": e.family, "block": e.block,
                 "corrected": e.corrected_text is not None} for f in fams for e in C.get_determining(f)]
        text = "\n".join(f"{r['id']:<8} {r['family']:<7} {r['block']}" for r in rows)
    _emit(args, {"query": f"list {args.what}", "items": rows}, text)
    return EXIT_OK


def _verify_one(case: str, ident: str, no_timing: bool) -> dict:
    out = D.check_commutation(case, ident, diagnostics=False).to_json()
    if no_timing:
        out["timing_ms"] = 0
    return out


def attached_pairs(printed_only: bool = False) -> list[tuple[str, str]]:
    pairs = []
    for ident in C.list_integrals(printed_only=printed_only):
        for case in C.get_integral(ident).cases:
            pairs.append((case, ident))
    return pairs


def _cmd_verify(args) -> int:
    if args.all:
        pairs = attached_pairs(args.printed_only)
    else:
        if not (args.case and args.integral):
            raise UsageError("verify needs --case and --integral, or --all")
        pairs = [(args.case, args.integral)]
    if len(pairs) == 1:
        case, ident = pairs[0]
        return _finish(args, D.check_commutation(case, ident))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_verify_one, *zip(*pairs), [args.no_timing] * len(pairs)))
    else:
        results = [_verify_one(c, i, args.no_timing) for c, i in pairs]
    ok = all(r["status"] == "zero" for r in results)
    text = "\n".join(f"{r['status']:>8}  {r['query']}" for r in results)
    zero = sum(r["status"] == "zero" for r in results)
    text += f"\n{zero}/{len(results)} pairs commute"
    _emit(args, {"query": "verify --all", "status": "zero" if ok else "nonzero",
                 "reports": results}, text)
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_commute(args) -> int:
    return _finish(args, D.commute(args.lhs, args.rhs))


def _cmd_simplify(args) -> int:
    v = parse(args.expr)
    from .builders import Vec

    if isinstance(v, Vec):
        comps = [c.quantum() for c in v]
        payload = {"query": args.expr, "components": [{"indices": [k], "terms": c.triples()}
                                                      for k, c in enumerate(comps, start=1)]}
        text = "\n".join(f"[{k}] {c.render()}" for k, c in enumerate(comps, start=1))
    else:
        q = v.quantum()
        payload = {"query": args.expr, "components": [{"indices": [], "terms": q.triples()}]}
        text = q.render()
    _emit(args, payload, text)
    return EXIT_OK


def _cmd_determine(args) -> int:
    sol = C.get_solution(args.branch)
    family = args.family or sol.family
    if args.extracted:
        rep = D.check_extracted(args.branch)
    else:
        rep = D.check_solution(family, args.branch, corrected=args.corrected)
    return _finish(args, rep)


def _cmd_relations(args) -> int:
    return _finish(args, D.check_relations(args.family, corrected=args.corrected,
                                           quantum=args.quantum))


def _cmd_oracle(args) -> int:
    from . import oracle as O

    if args.case or args.integral:
        if not (args.case and args.integral):
            raise UsageError("oracle needs both --case and --integral")
        res = O.catalog_campaign([(args.case, args.integral)])
        query = f"oracle H(case={args.case}) vs {args.integral}"
    else:
        res = O.campaign(args.count, args.seed)
        query = f"oracle campaign seed={args.seed} count={args.count}"
    payload = {"query": query, "status": "zero" if res.ok else "nonzero",
               "checked": res.checked, "discrepancies": [list(map(str, d)) for d in res.discrepancies]}
    text = f"{query}: {res.checked} checks, {len(res.discrepancies)} discrepancies"
    _emit(args, payload, text)
    return EXIT_OK if res.ok else EXIT_FAIL


_DISPATCH = {"list": _cmd_list, "verify": _cmd_verify, "commute": _cmd_commute,
             "simplify": _cmd_simplify, "determine": _cmd_determine,
             "relations": _cmd_relations, "oracle": _cmd_oracle}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _DISPATCH[args.verb](args)
    except (ParseError, UsageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except KeyError as e:
        print(f"error: {e.args[0] if e.args else e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
