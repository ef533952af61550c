"""Command-line interface: ``quantum3d <command> [options] [definition.json]``.

Exit codes: 0 when every requested check behaves as expected, 1 when a check
fails or a computation breaks down, 2 for input errors.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import BACKEND, __version__
from .algebra import NonTerminatingTableError
from .catalog import CASE_IDS, FAMILY_IDS, CatalogError, case_ids, catalog_table, describe, evaluate
from .classification import (Bivector, LieAlgebra3, TransformSpec, apply_transformation, cambio11,
                             coboundary_solve, cocycle_check, jacobson_type, schouten_classify)
from .definition import CaseDefinition, DefinitionError, parse_definition, parse_params
from .hopf import AntipodeError, HopfData, all_checks, extract_cocommutator
from .kernel import TruncationError, rational
from .quantizer import (BialgebraSpec, QuantizationError, compare_tables, first_order_constraints,
                        quantize)
from .report import ERROR, FAIL, PASS, ReportDocument, check_record

COMMANDS = ("verify", "quantize", "classify", "rmatrix", "transform", "catalog")
DEFAULT_ORDER = 6
_COMPUTATION_ERRORS = (QuantizationError, AntipodeError, NonTerminatingTableError, ArithmeticError)


class InputError(ValueError):
    pass


@dataclass
class Target:
    """One unit of work: a preset or a parsed definition, at a truncation order."""

    name: str
    order: int
    preset: str | None = None
    params: dict = field(default_factory=dict)
    definition: CaseDefinition | None = None
    options: dict = field(default_factory=dict)


@dataclass
class Built:
    table: object
    hopf: HopfData
    spec: BialgebraSpec
    case: object = None


def _build(tg: Target) -> Built:
    d = tg.definition
    coproduct = d.coproduct if d else None
    if tg.preset is not None:
        case = catalog_table(tg.preset, tg.params, tg.order)
        hopf = HopfData.primitive(tg.order) if coproduct == "primitive" else case.hopf
        return Built(case.table, hopf, case.spec(), case)
    spec = BialgebraSpec(d.constants, d.rho)
    if tg.params:
        spec = spec.substitute(tg.params)
    if not spec.is_concrete():
        raise InputError(f"{tg.name}: symbolic structure constants; bind them with --params or 'params'")
    rho = spec.rho.constant_value()
    hopf = HopfData.primitive(tg.order) if coproduct == "primitive" else HopfData.standard(rho, tg.order)
    return Built(spec.classical_table(tg.order), hopf, spec)


def _base(kind: str, tg: Target) -> dict:
    return {"kind": kind, "name": tg.name, "N": tg.order, "params": dict(sorted(tg.params.items()))}


def _verify(tg: Target) -> dict:
    b = _build(tg)
    checks = all_checks(b.hopf, b.table)
    rec = _base("verify", tg)
    rec["checks"] = [check_record(c) for c in checks]
    rec["status"] = PASS if all(c.passed for c in checks) else FAIL
    return rec


def _quantize(tg: Target) -> dict:
    rec = _base("quantize", tg)
    d = tg.definition
    if tg.preset is None:
        spec = BialgebraSpec(d.constants, d.rho).substitute(tg.params)
        if not spec.is_concrete():
            cs = first_order_constraints(spec)
            rec["constraints"] = [str(e) for e in cs]
            rec["status"] = FAIL if cs.is_inconsistent() else PASS
            if cs.is_inconsistent():
                rec["message"] = "the first-order constraints have no solution"
            return rec
        result = quantize(spec, tg.order)
        rec["table"] = _table_wire(result.table)
    else:
        case = catalog_table(tg.preset, tg.params, tg.order)
        result = quantize(case.spec(), tg.order)
        diff = compare_tables(result.table, case.table)
        lows = {k: v.lowest_order() for k, v in diff.items() if not v.is_zero()}
        rec["catalog_match"] = not lows
        if lows:
            rec["catalog_mismatch_lowest_order"] = min(lows.values())
            rec["catalog_mismatch"] = sorted(lows)
    rec["checks"] = [check_record(c) for c in result.checks]
    rec["freedom"] = {str(k): v for k, v in sorted(result.freedom.items())}
    if result.escalations:
        rec["escalations"] = result.escalations
    ok = result.passed and rec.get("catalog_match", True)
    rec["status"] = PASS if ok else FAIL
    return rec


def _expected_jacobson(case, found) -> tuple[bool, str]:
    meta = case.jacobson if case else None
    if not meta:
        return True, ""
    if meta["label"] != found.label:
        return False, f"expected Jacobson type {meta['label']}"
    if meta.get("alpha") is not None and found.alpha is not None:
        a = evaluate(meta["alpha"], case.params)
        if found.alpha not in (a, 1 / a):
            return False, f"expected alpha {a}"
    return True, ""


def _classify(tg: Target) -> dict:
    b = _build(tg)
    g = LieAlgebra3.from_table(b.table.classical_limit())
    jt = jacobson_type(g)
    eta = extract_cocommutator(b.hopf)
    coc = cocycle_check(g, eta)
    cob = coboundary_solve(g, eta)
    rec = _base("classify", tg)
    rec["jacobson"] = str(jt)
    rec["cocycle"] = coc.passed
    rec["cocommutator"] = str(eta)
    rec["coboundary"] = str(cob)
    ok, why = _expected_jacobson(b.case, jt)
    rec["status"] = PASS if ok and coc.passed else FAIL
    if not ok:
        rec["message"] = why
    elif not coc.passed:
        rec["message"] = "the cocommutator is not a 1-cocycle"
    return rec


def _rmatrix(tg: Target) -> dict:
    b = _build(tg)
    g = LieAlgebra3.from_table(b.table.classical_limit())
    rec = _base("rmatrix", tg)
    if b.case is not None:
        r_data, schouten_claim, claim = b.case.r_matrix, b.case.schouten, b.case.coboundary_claim
        note = b.case.coboundary_note
    else:
        r_data, schouten_claim, claim, note = tg.definition.r_matrix, None, None, None
    ok = True
    if r_data:
        r = Bivector(*(rational(r_data.get(k, 0)) for k in ("AB", "AC", "BC")))
        label, tri = schouten_classify(r, g)
        rec["r"] = str(r)
        rec["schouten"] = label
        rec["schouten_trivector"] = tri.coefficient
        if schouten_claim is not None and label != schouten_claim:
            ok = False
            rec["message"] = f"expected Schouten class {schouten_claim}"
    cob = coboundary_solve(g, extract_cocommutator(b.hopf))
    rec["coboundary"] = str(cob)
    if cob.feasible:
        rec["coboundary_nullity"] = cob.nullity
    else:
        rec["certificate"] = {f"{gen}:{pair}": v for (gen, pair), v in sorted(cob.certificate.items())}
    if claim is not None:
        rec["expected_coboundary"] = claim
        if cob.feasible != claim:
            ok = False
            rec["message"] = "coboundary status differs from the catalog claim"
            if note:
                rec["note"] = note
    rec["status"] = PASS if ok else FAIL
    return rec


def _table_wire(t) -> dict:
    return {name: str(e) for name, e in zip(("[A,B]", "[A,C]", "[B,C]"), t.entries())}


def _transform(tg: Target) -> dict:
    b = _build(tg)
    opts = tg.options
    table, hopf = b.table, b.hopf
    if opts.get("limit"):
        table, hopf = table.classical_limit(), HopfData.primitive(tg.order)
    if opts.get("cambio11"):
        env = b.case.params if b.case else {k: v.constant_value() for k, v in b.spec.as_dict().items()}
        spec = cambio11(env["c1"], env["c2"], env["a2"])
    else:
        spec = TransformSpec(opts["family"], **opts.get("coefficients", {}))
    res = apply_transformation(table, hopf, spec)
    rec = _base("transform", tg)
    rec["transformation"] = {k: getattr(spec, k) for k in ("family", "alpha", "beta", "gamma_c", "delta",
                                                            "mu", "nu", "eta_c")}
    rec["table"] = _table_wire(res.table)
    rec["coproduct"] = hopf.label
    rec["coproduct_invariant"] = res.coproduct_invariant
    ok = res.coproduct_invariant
    if not ok:
        lows = [r.lowest_order() for r in res.coproduct_residuals.values() if not r.is_zero()]
        rec["coproduct_lowest_order"] = min(lows)
    expect = opts.get("expect")
    if expect:
        entry = describe(expect)
        eparams = {}
        if entry["rho"] == "rho" and b.case is not None:
            eparams["rho"] = b.case.rho
        target = catalog_table(expect, eparams, tg.order).table
        if opts.get("limit"):
            target = target.classical_limit()
        diff = compare_tables(res.table, target)
        lows = {k: v.lowest_order() for k, v in diff.items() if not v.is_zero()}
        rec["expected"] = expect
        rec["expected_match"] = not lows
        if lows:
            rec["expected_mismatch_lowest_order"] = min(lows.values())
        ok = ok and not lows
    rec["status"] = PASS if ok else FAIL
    return rec


_RUNNERS = {"verify": _verify, "quantize": _quantize, "classify": _classify, "rmatrix": _rmatrix,
            "transform": _transform}


def run_target(command: str, tg: Target) -> dict:
    """Run one command on one target; computation failures become error records."""
    try:
        return _RUNNERS[command](tg)
    except _COMPUTATION_ERRORS as exc:
        rec = _base(command, tg)
        rec["status"] = ERROR
        rec["message"] = f"{type(exc).__name__}: {exc}"
        order = getattr(exc, "order", None)
        if order is not None:
            rec["lowest_order"] = order
        return rec


def _catalog(args) -> ReportDocument:
    doc = ReportDocument("catalog")
    wanted = _expand_presets(args.preset, case_ids()) if args.preset else case_ids()
    for cid in wanted:
        entry = describe(cid)
        if args.preset:
            doc.add({"kind": "catalog", "name": cid, "status": PASS, "entry": entry})
        else:
            doc.add({"kind": "catalog", "name": cid, "status": PASS, "type": entry["kind"],
                     "title": entry.get("title", "")})
    return doc


def _expand_presets(names, default_all) -> list[str]:
    out = []
    for n in names:
        out.extend(default_all if n == "all" else [n])
    known = set(case_ids())
    for n in out:
        if n not in known:
            raise InputError(f"unknown preset {n!r}; run 'quantum3d catalog' for the list")
    return sorted(set(out))


def _targets(args) -> list[Target]:
    params = parse_params(args.params)
    options = {}
    if args.command == "transform":
        options = {"limit": args.limit, "cambio11": args.cambio11, "family": args.family,
                   "coefficients": parse_params(args.coefficients), "expect": args.expect}
        if not args.cambio11 and not args.family:
            raise InputError("transform needs --family or --cambio11")
        if args.expect:
            describe(args.expect)
    targets = []
    if args.definition:
        text = sys.stdin.read() if args.definition == "-" else _read(args.definition)
        d = parse_definition(text, order_override=args.order)
        merged = {**d.params, **params}
        if d.preset is not None:
            targets.append(Target(d.name, d.order, d.preset, merged, d, options))
        else:
            bad = set(merged) - {k for k in d.constants} - {"rho"}
            if bad:
                raise InputError(f"unknown parameter(s) {', '.join(sorted(bad))} for definition {d.name}")
            targets.append(Target(d.name, d.order, None, merged, d, options))
    order = args.order if args.order is not None else DEFAULT_ORDER
    if order < 2:
        raise InputError("--order must be at least 2")
    if args.preset:
        default_all = list(FAMILY_IDS) if args.command == "quantize" else list(CASE_IDS)
        for p in _expand_presets(args.preset, default_all):
            targets.append(Target(p, order, p, dict(params), None, options))
    if not targets:
        raise InputError(f"{args.command} needs --preset NAME or a definition file")
    if args.command == "transform" and len(targets) != 1:
        raise InputError("transform takes exactly one source")
    for tg in targets:
        if tg.preset is not None:
            catalog_table(tg.preset, tg.params, 2)  # validates names and conditions up front
    return targets


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("definition", nargs="?", help="definition file (JSON), or - for stdin")
    common.add_argument("--order", "-N", type=int, default=None, help=f"truncation order (default {DEFAULT_ORDER})")
    common.add_argument("--params", default=None, help="parameter bindings k=v,... with exact rationals")
    common.add_argument("--preset", action="append", default=[], help="catalog case id, repeatable; 'all'")
    common.add_argument("--jobs", "-j", type=int, default=1, help="worker processes for several presets")
    common.add_argument("--format", choices=("human", "machine"), default="human")

    parser = argparse.ArgumentParser(prog="quantum3d", description="Quantum deformations of 3D Lie bialgebras.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    sub.add_parser("verify", parents=[common], help="run all Hopf axiom checks")
    sub.add_parser("quantize", parents=[common], help="reconstruct the deformed brackets order by order")
    sub.add_parser("classify", parents=[common], help="Jacobson type, cocycle and coboundary status")
    sub.add_parser("rmatrix", parents=[common], help="Schouten class of the r-matrix and coboundary check")
    tr = sub.add_parser("transform", parents=[common], help="apply a change of generators")
    tr.add_argument("--family", choices=("cambio1", "cambio2", "cambio3"))
    tr.add_argument("--coefficients", default=None,
                    help="alpha,beta,gamma_c,delta,mu,nu,eta_c as k=v,...")
    tr.add_argument("--cambio11", action="store_true", help="the family 1.1 normalisation from its parameters")
    tr.add_argument("--limit", action="store_true", help="act on the classical limit with primitive coproduct")
    tr.add_argument("--expect", default=None, help="preset whose table the result must equal")
    sub.add_parser("catalog", parents=[common], help="list presets, or print those named by --preset")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "catalog":
            doc = _catalog(args)
        else:
            if args.jobs < 1:
                raise InputError("--jobs must be positive")
            targets = _targets(args)
            doc = ReportDocument(args.command)
            if args.jobs > 1 and len(targets) > 1:
                with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                    records = list(pool.map(run_target, [args.command] * len(targets), targets))
            else:
                records = [run_target(args.command, tg) for tg in targets]
            for rec in records:
                doc.add(rec)
    except (InputError, DefinitionError, CatalogError, TruncationError, ValueError, TypeError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"quantum3d: error: {msg}", file=sys.stderr)
        return 2
    sys.stdout.write(doc.render(args.format))
    return doc.exit_code


__all__ = ["COMMANDS", "Target", "build_parser", "main", "run_target"]

if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
