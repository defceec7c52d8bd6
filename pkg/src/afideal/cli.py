"""Command line entry point: ``afideal <command> ...``.

Exit codes: 0 success, 1 domain error from a module, 2 usage error.
Exact values are printed exactly (big integers as decimal strings in JSON);
decimal renderings are labelled with their precision.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import acceptance
from .bratteli import BratteliDiagram, DiagramError, diagram_from_matrices, effros_shen_diagram, farey_diagram
from .cf import ContinuedFraction, DepthError, DomainError, IndeterminateError, cf_from_rational, convergents, parse_cf
from .farey import MultiplicityMatrix, farey_level
from .ideals import IdealError, enumerate_coherent_ideals, ideal_metric
from .qmetric import ChainError, SolverConfig, chain_from_json, mk_distance, state_from_json
from .theta import (
    beta_sequence,
    theta_ideal,
    theta_ideal_diagram,
    theta_quotient_diagram,
    trace_coefficients,
)

DOMAIN_ERRORS = (DomainError, DepthError, IndeterminateError, DiagramError, IdealError, ChainError, ArithmeticError)


def _emit(obj, as_json: bool, text: str, out) -> None:
    out.write(json.dumps(obj, indent=2) + "\n" if as_json else text)


def _read_json_arg(value: str):
    """Inline JSON or a path to a JSON file."""
    if value.lstrip().startswith(("{", "[")):
        return json.loads(value)
    return json.loads(Path(value).read_text())


# -- cf -----------------------------------------------------------------------


def cmd_cf(args, out) -> int:
    given = [x for x in (args.rational, args.periodic, args.terms) if x is not None]
    if len(given) != 1:
        raise DomainError("give exactly one of --rational, --periodic, --terms")
    if args.rational is not None:
        num, den = args.rational.split("/")
        cf = cf_from_rational(int(num), int(den))
    elif args.periodic is not None:
        cf = parse_cf(args.periodic)
        if not cf.is_periodic:
            raise DomainError("--periodic needs a parenthesised period")
    else:
        cf = parse_cf(args.terms, truncated=not args.exact)
    depth = args.depth
    if depth is None:
        if cf.known_terms is None:
            raise DomainError("--depth is required for a periodic expansion")
        depth = cf.known_terms - 1
    pairs = convergents(cf, depth)
    obj = {
        "input": str(cf),
        "terms": [str(a) for a in cf.terms(depth + 1)],
        "convergents": [{"n": c.n, "p": str(c.p), "q": str(c.q)} for c in pairs],
    }
    lines = [f"cf = {cf}", f"terms a_0..a_{depth}: {', '.join(obj['terms'])}", "n\tp_n\tq_n"]
    lines += [f"{c.n}\t{c.p}\t{c.q}" for c in pairs]
    _emit(obj, args.json, "\n".join(lines) + "\n", out)
    return 0


# -- farey --------------------------------------------------------------------


def cmd_farey(args, out) -> int:
    lv = farey_level(args.n)
    fmt = "json" if args.json else args.format
    rows = [(k, q, p, r.numerator, r.denominator) for k, (q, p, r) in enumerate(zip(lv.q, lv.p, lv.r))]
    if fmt == "json":
        obj = {"n": lv.n, "entries": [dict(zip(("k", "q", "p", "r_num", "r_den"), map(str, r))) for r in rows]}
        out.write(json.dumps(obj, indent=2) + "\n")
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "q", "p", "r_num", "r_den"])
        w.writerows(rows)
        out.write(buf.getvalue())
    else:
        out.write("k\tq\tp\tr\n" + "".join(f"{k}\t{q}\t{p}\t{a}/{b}\n" for k, q, p, a, b in rows))
    return 0


# -- diagram ------------------------------------------------------------------


def _render_diagram(d: BratteliDiagram, args, out) -> int:
    if args.dot:
        out.write(d.to_dot())
    elif args.json:
        out.write(json.dumps(d.to_dict(), indent=2) + "\n")
    else:
        lines = []
        for n, lv in enumerate(d.labels):
            lines.append(f"level {n}: labels {list(lv)}")
            if n < d.depth:
                lines.append(f"  matrix {n}: {d.matrices[n].to_list()}")
        out.write("\n".join(lines) + "\n")
    return 0


def cmd_diagram(args, out) -> int:
    if args.kind == "farey":
        d = farey_diagram(args.depth)
    elif args.kind == "effros-shen":
        d = effros_shen_diagram(parse_cf(args.cf), args.depth)
    else:
        d = theta_quotient_diagram(parse_cf(args.theta), args.depth)
    return _render_diagram(d, args, out)


def diagram_from_json(obj) -> BratteliDiagram:
    try:
        labels = [tuple(int(x) for x in lv["labels"]) for lv in obj["levels"]]
        mats = [MultiplicityMatrix.of(m) for m in obj["matrices"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise DiagramError(f"malformed diagram JSON: {exc}") from exc
    return diagram_from_matrices(labels[0], mats, labels=labels, name=obj.get("name"))


# -- ideal --------------------------------------------------------------------


def cmd_ideal(args, out) -> int:
    if args.action == "metric":
        t1, t2 = parse_cf(args.theta1), parse_cf(args.theta2)
        dist = ideal_metric(theta_ideal(t1, args.depth), theta_ideal(t2, args.depth))
        obj = {
            "theta1": str(t1),
            "theta2": str(t2),
            "depth": args.depth,
            "exponent": dist.exponent,
            "value": None if dist.value is None else str(dist.value),
            "upper_bound": str(dist.upper_bound()),
            "text": str(dist),
        }
        _emit(obj, args.json, str(dist) + "\n", out)
        return 0
    src = args.diagram
    if src.startswith("farey:"):
        base = farey_diagram(int(src.split(":", 1)[1]))
    else:
        base = diagram_from_json(_read_json_arg(src))
    ideals = enumerate_coherent_ideals(base, args.depth)
    obj = [i.to_dict() for i in ideals]
    text = "".join(json.dumps(o) + "\n" for o in obj)
    _emit({"count": len(obj), "ideals": obj}, args.json, text, out)
    return 0


# -- theta --------------------------------------------------------------------


def _convergent_point(cf: ContinuedFraction, k: int = 20) -> tuple[int, Fraction]:
    k = k if cf.has_term(k) else cf.known_terms - 1
    c = convergents(cf, k)[-1]
    return k, c.value


def cmd_theta(args, out) -> int:
    cf = parse_cf(args.cf)
    n = args.depth
    what = args.show or "blocks"
    if what == "blocks":
        ti = theta_ideal(cf, n)
        rows = [{"n": m, "j": ti.j_at(m), "q_left": str(ti.labels(m)[0]), "q_right": str(ti.labels(m)[1])} for m in range(1, n + 1)]
        text = "n\tj_n\tq(n,j_n)\tq(n,j_n+1)\n" + "".join(f"{r['n']}\t{r['j']}\t{r['q_left']}\t{r['q_right']}\n" for r in rows)
        _emit({"theta": str(cf), "levels": rows}, args.json, text, out)
    elif what == "diagram":
        if args.dot:
            return _render_diagram(theta_quotient_diagram(cf, n), args, out)
        ideal = theta_ideal_diagram(cf, n)
        text = "".join(f"level {m}: {sorted(s)}\n" for m, s in enumerate(ideal.levels))
        _emit(ideal.to_dict(), args.json, text, out)
    elif what == "beta":
        bs = beta_sequence(cf, n)
        text = "n\tbeta(n)\n" + "".join(f"{m}\t{b}\n" for m, b in enumerate(bs))
        _emit({"theta": str(cf), "beta": [str(b) for b in bs]}, args.json, text, out)
    else:
        k, point = _convergent_point(cf)
        cs = trace_coefficients(cf, n)
        rows = [
            {"n": m, "a": str(c.a), "b": str(c.b), "text": str(c), "decimal_at_convergent": f"{float(c(point)):.12f}"}
            for m, c in enumerate(cs, start=1)
        ]
        text = f"decimals evaluated at theta ~ p_{k}/q_{k}, 12 digits\n" + "".join(
            f"c({r['n']}) = {r['text']}  ~ {r['decimal_at_convergent']}\n" for r in rows
        )
        _emit({"theta": str(cf), "convergent_index": k, "coefficients": rows}, args.json, text, out)
    return 0


# -- qmetric ------------------------------------------------------------------


def cmd_qmetric(args, out) -> int:
    chain = chain_from_json(_read_json_arg(args.chain))
    phi = state_from_json(chain, _read_json_arg(args.phi))
    psi = state_from_json(chain, _read_json_arg(args.psi))
    cfg = SolverConfig(iters=args.iters, restarts=args.restarts, seed=args.seed, tol=args.tol)
    res = mk_distance(phi, psi, chain, cfg)
    obj = {
        "lower_bound": f"{res.value:.12g}",
        "witness_lip": f"{res.witness_lip:.12g}",
        "iterations": res.iterations,
        "stalled": res.stalled,
    }
    text = (
        f"mk distance >= {res.value:.12g} (certified by a witness with L = {res.witness_lip:.12g})\n"
        f"iterations {res.iterations}, stalled {res.stalled}\n"
    )
    _emit(obj, args.json, text, out)
    return 0


# -- verify -------------------------------------------------------------------


def cmd_verify(args, out) -> int:
    numbers = args.criteria or [num for num, _, _ in acceptance.CRITERIA]
    results = [acceptance.run_criterion(k) for k in numbers]
    ok = all(r.passed for r in results)
    if args.json:
        obj = {
            "passed": ok,
            "criteria": [{"number": r.number, "name": r.name, "passed": r.passed, "detail": r.detail} for r in results],
        }
        out.write(json.dumps(obj, indent=2) + "\n")
    else:
        out.write("".join(r.line() + "\n" for r in results))
        out.write(f"{sum(r.passed for r in results)}/{len(results)} criteria passed\n")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="afideal", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def with_json(sp):
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        return sp

    s = with_json(sub.add_parser("cf", help="continued fraction terms and convergents"))
    s.add_argument("--rational", metavar="P/Q")
    s.add_argument("--periodic", metavar='"0;a1,(p1,p2)"')
    s.add_argument("--terms", metavar='"0;a1,a2,..."', help="prefix of an irrational unless --exact")
    s.add_argument("--exact", action="store_true", help="read --terms as an exact rational")
    s.add_argument("--depth", type=int)
    s.set_defaults(func=cmd_cf)

    s = sub.add_parser("farey", help="Farey rows")
    fs = s.add_subparsers(dest="action", required=True)
    lv = with_json(fs.add_parser("level"))
    lv.add_argument("n", type=int)
    lv.add_argument("--format", choices=["table", "json", "csv"], default="table")
    lv.set_defaults(func=cmd_farey)

    s = sub.add_parser("diagram", help="Bratteli diagrams")
    ds = s.add_subparsers(dest="kind", required=True)
    for kind in ("farey", "effros-shen", "quotient"):
        d = with_json(ds.add_parser(kind))
        d.add_argument("--dot", action="store_true")
        if kind == "effros-shen":
            d.add_argument("cf")
        if kind == "quotient":
            d.add_argument("--theta", required=True)
        d.add_argument("depth", type=int)
        d.set_defaults(func=cmd_diagram)

    s = sub.add_parser("ideal", help="ideal metric and enumeration")
    isub = s.add_subparsers(dest="action", required=True)
    m = with_json(isub.add_parser("metric"))
    m.add_argument("--theta1", required=True)
    m.add_argument("--theta2", required=True)
    m.add_argument("--depth", type=int, required=True)
    m.set_defaults(func=cmd_ideal)
    e = with_json(isub.add_parser("enumerate"))
    e.add_argument("--diagram", required=True, help="diagram JSON (file or inline) or farey:N")
    e.add_argument("--depth", type=int, required=True)
    e.set_defaults(func=cmd_ideal)

    s = sub.add_parser("theta", help="the ideal I_theta and its invariants")
    ts = s.add_subparsers(dest="action", required=True)
    t = with_json(ts.add_parser("ideal"))
    t.add_argument("--cf", required=True)
    t.add_argument("--depth", type=int, required=True)
    t.add_argument("--dot", action="store_true", help="with --diagram: DOT of the quotient diagram")
    show = t.add_mutually_exclusive_group()
    for flag, dest in (("--blocks", "blocks"), ("--diagram", "diagram"), ("--beta", "beta"), ("--trace-coeffs", "trace")):
        show.add_argument(flag, dest="show", action="store_const", const=dest)
    t.set_defaults(func=cmd_theta)

    s = sub.add_parser("qmetric", help="Monge-Kantorovich distances")
    qs = s.add_subparsers(dest="action", required=True)
    q = with_json(qs.add_parser("mk"))
    q.add_argument("--chain", required=True, help="chain JSON (file or inline)")
    q.add_argument("--phi", required=True)
    q.add_argument("--psi", required=True)
    q.add_argument("--iters", type=int, default=SolverConfig.iters)
    q.add_argument("--restarts", type=int, default=SolverConfig.restarts)
    q.add_argument("--seed", type=int, default=SolverConfig.seed)
    q.add_argument("--tol", type=float, default=SolverConfig.tol)
    q.set_defaults(func=cmd_qmetric)

    s = with_json(sub.add_parser("verify", help="run the acceptance suite"))
    s.add_argument("--criteria", type=int, nargs="+", choices=range(1, 10))
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
