"""Preset quantum algebras loaded from ``data/catalog.json``.

Bracket terms are described declaratively (see ``term_kinds`` in the data
file); coefficients are small arithmetic expressions in the case parameters,
evaluated exactly.
"""

from __future__ import annotations

import ast
import json
import operator
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from gmpy2 import mpq

from .algebra import AlgElement, CommutatorTable, generator_series, table_from_sym
from .hopf import HopfData, all_checks
from .kernel import rational
from .quantizer import BialgebraSpec

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_CMPOPS = {ast.Eq: operator.eq, ast.NotEq: operator.ne}
_UNIT = {"A": (1, 0, 0), "B": (0, 1, 0), "C": (0, 0, 1)}


class CatalogError(ValueError):
    pass


def evaluate(expr: str, env: dict):
    """Exact value of an arithmetic or (in)equality expression over rationals."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise CatalogError(f"bad expression {expr!r}") from exc
    return _eval(tree.body, env, expr)


def _eval(node, env, expr):
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return mpq(node.value)
    if isinstance(node, ast.Name):
        if node.id not in env:
            raise CatalogError(f"unknown parameter {node.id!r} in {expr!r}")
        return env[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand, env, expr)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        left, right = _eval(node.left, env, expr), _eval(node.right, env, expr)
        if isinstance(node.op, ast.Div) and right == 0:
            raise CatalogError(f"division by zero in {expr!r}")
        return _BINOPS[type(node.op)](left, right)
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
        exp = _eval(node.right, env, expr)
        if exp.denominator != 1:
            raise CatalogError(f"non-integer power in {expr!r}")
        return _eval(node.left, env, expr) ** int(exp)
    if isinstance(node, ast.Compare) and len(node.ops) == 1 and type(node.ops[0]) in _CMPOPS:
        return _CMPOPS[type(node.ops[0])](_eval(node.left, env, expr), _eval(node.comparators[0], env, expr))
    raise CatalogError(f"unsupported syntax in {expr!r}")


@lru_cache(maxsize=1)
def _data() -> dict:
    text = resources.files("quantum3d").joinpath("data/catalog.json").read_text(encoding="utf-8")
    raw = json.loads(text)
    return {e["id"]: e for e in raw["entries"]}


def case_ids(kind: str | None = None) -> list[str]:
    """Identifiers in file order; ``kind`` is "case", "family" or None for both."""
    return [k for k, e in _data().items() if kind is None or e["kind"] == kind]


CASE_IDS = tuple(k for k, e in _data().items() if e["kind"] == "case")
FAMILY_IDS = tuple(k for k, e in _data().items() if e["kind"] == "family")


def describe(case_id: str) -> dict:
    if case_id not in _data():
        raise CatalogError(f"unknown case {case_id!r}; known: {', '.join(case_ids())}")
    return json.loads(json.dumps(_data()[case_id]))


@dataclass
class CatalogCase:
    case_id: str
    kind: str
    title: str
    params: dict
    rho: object
    table: CommutatorTable
    hopf: HopfData
    order: int
    r_matrix: dict | None = None
    schouten: str | None = None
    coboundary_claim: bool | None = None
    coboundary_note: str | None = None
    jacobson: dict | None = None
    gomez: str | None = None
    checks: list = field(default_factory=list)

    def spec(self) -> BialgebraSpec:
        """Structure constants of the classical limit, with the case's rho."""
        return BialgebraSpec.from_table(self.table, self.rho)


def _term_element(term: dict, env: dict, order: int) -> AlgElement:
    kind = term["kind"]
    coeff = evaluate(term["coeff"], env)
    if kind == "gen":
        return AlgElement({_UNIT[term["gen"]]: coeff}, order)
    scale = evaluate(term.get("scale", "1"), env)
    if kind == "sinh":
        return generator_series("A", "sinh_over_z", scale, order).scale(coeff)
    if kind == "sinh_scaled":
        if scale == 0:
            raise CatalogError("sinh_scaled needs a nonzero scale")
        return generator_series("A", "sinh_over_scaled_z", scale, order).scale(coeff)
    if kind == "sym_cosh":
        # Sym-basis coefficients: X A^p carries coeff * scale^p / p! at z^p
        cosh = generator_series("A", "cosh", scale, order)
        g = term["gen"]
        terms = {}
        for (p, _, _), s in cosh.terms():
            m = (p, 1 if g == "B" else 0, 1 if g == "C" else 0) if g != "A" else (p + 1, 0, 0)
            terms[m] = s.scale(coeff)
        return AlgElement(terms, order)
    raise CatalogError(f"unknown term kind {kind!r}")


def _bind(entry: dict, params: dict | None) -> dict:
    env = {k: rational(v) for k, v in entry.get("defaults", {}).items()}
    for k, v in (params or {}).items():
        if k not in env and k != "rho":
            raise CatalogError(f"case {entry['id']} has no parameter {k!r}; parameters: {', '.join(sorted(env)) or 'none'}")
        if k == "rho" and entry["rho"] != "rho":
            if rational(v) != evaluate(entry["rho"], {}):
                raise CatalogError(f"case {entry['id']} fixes rho = {entry['rho']}")
            continue
        env[k] = rational(v)
    env.setdefault("rho", evaluate(entry["rho"], env))
    for cond in entry.get("conditions", []):
        if not evaluate(cond, env):
            raise CatalogError(f"parameters violate the condition {cond} of case {entry['id']}")
    return env


def catalog_table(case_id: str, params: dict | None = None, order: int = 6, verify: bool = False) -> CatalogCase:
    """Instantiate a preset at concrete parameters and truncation order.

    With ``verify=True`` every Hopf check is run and a failure raises.
    """
    entry = describe(case_id)
    if order < 2:
        raise CatalogError("truncation order must be at least 2")
    env = _bind(entry, params)
    sym = []
    for name in ("AB", "AC", "BC"):
        e = AlgElement.zero(order)
        for term in entry["brackets"][name]:
            e = e + _term_element(term, env, order)
        sym.append(e)
    public = dict(env)
    table = table_from_sym(*sym, params=public)
    hopf = HopfData.standard(env["rho"], order)
    case = CatalogCase(
        case_id=case_id, kind=entry["kind"], title=entry.get("title", ""), params=public, rho=env["rho"],
        table=table, hopf=hopf, order=order, r_matrix=entry.get("r_matrix"), schouten=entry.get("schouten"),
        coboundary_claim=entry.get("coboundary_claim"),
        coboundary_note=entry.get("coboundary_note"), jacobson=entry.get("jacobson"), gomez=entry.get("gomez"),
    )
    if verify:
        case.checks = all_checks(hopf, table)
        failed = [c.name for c in case.checks if not c.passed]
        if failed:
            raise CatalogError(f"case {case_id} fails {', '.join(failed)} at N={order}")
    return case


def r_matrix_bivector(case: CatalogCase):
    """The case's r-matrix as a classification Bivector, or None."""
    from .classification import Bivector

    if not case.r_matrix:
        return None
    return Bivector(*(rational(case.r_matrix.get(k, "0")) for k in ("AB", "AC", "BC")))


__all__ = ["CASE_IDS", "FAMILY_IDS", "CatalogCase", "CatalogError", "catalog_table", "case_ids",
           "describe", "evaluate", "r_matrix_bivector"]
