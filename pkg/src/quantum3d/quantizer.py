"""First-order constraints and order-by-order reconstruction of deformed brackets.

The coproduct is fixed to the standard form (Delta(A) primitive, Delta(B) and
Delta(C) twisted by exp(zA) and exp(rho z A)).  Brackets are deformed by even
powers of z; at each order the unknown correction is a combination of
symmetrized monomials and is fixed by an exact linear solve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping

from gmpy2 import mpq

from ._backend import FIELD_BITS
from .algebra import (
    AlgElement,
    CommutatorTable,
    jacobi_residuals,
    linear_table,
    table_from_sym,
)
from .hopf import HopfData, all_checks, check_homomorphism
from .kernel import ParamPoly, TruncationError, ZSeries, rational, unknown_key
from .linalg import solve_linear

log = logging.getLogger(__name__)

STRUCTURE_CONSTANTS = ("a1", "a2", "a3", "b1", "b2", "b3", "c1", "c2", "c3")
_BRACKETS = ("AB", "AC", "BC")
_SHAPES = {"A": lambda p: (p, 0, 0), "B": lambda p: (p, 1, 0), "C": lambda p: (p, 0, 1)}

# Variables that the first-order homomorphism equations solve for, in the
# order they are preferred when several qualify.
_DEPENDENT_FIRST = ("b1", "a3", "b3", "b2", "c3", "a1", "a2", "c1", "c2", "rho")


class QuantizationError(ArithmeticError):
    """The ansatz admits no solution, or the input violates the constraints."""

    def __init__(self, message: str, order: int | None = None, certificate=None):
        super().__init__(message)
        self.order = order
        self.certificate = certificate


def _poly(v) -> ParamPoly:
    return v if isinstance(v, ParamPoly) else ParamPoly.const(v)


@dataclass(frozen=True)
class BialgebraSpec:
    """Classical brackets [A,B]=c.(A,B,C), [A,C]=b.(A,B,C), [B,C]=a.(A,B,C) and rho.

    The cocommutator is always eta(A)=0, eta(B)=z A^B, eta(C)=rho z A^C.
    """

    constants: Mapping[str, ParamPoly]
    rho: ParamPoly

    @classmethod
    def symbolic(cls, rho=None) -> "BialgebraSpec":
        consts = {k: ParamPoly.var(k) for k in STRUCTURE_CONSTANTS}
        if rho is None:
            rho = ParamPoly.var("rho")
        return cls(consts, rho if isinstance(rho, ParamPoly) else ParamPoly.const(rational(rho)))

    @classmethod
    def from_values(cls, values: Mapping[str, object], rho=None) -> "BialgebraSpec":
        unknown = set(values) - set(STRUCTURE_CONSTANTS) - {"rho"}
        if unknown:
            raise ValueError(f"unknown structure constants: {', '.join(sorted(unknown))}")
        if rho is None:
            rho = values.get("rho", 1)
        consts = {k: _poly(values[k] if isinstance(values.get(k), ParamPoly) else rational(values.get(k, 0)))
                  for k in STRUCTURE_CONSTANTS}
        return cls(consts, _poly(rho if isinstance(rho, ParamPoly) else rational(rho)))

    @classmethod
    def from_table(cls, t: CommutatorTable, rho) -> "BialgebraSpec":
        """Read the structure constants off the z^0 layer of a table."""
        values = {}
        for prefix, entry in (("c", t.ab), ("b", t.ac), ("a", t.bc)):
            layer = entry.z_layer(0)
            for i, m in enumerate(((1, 0, 0), (0, 1, 0), (0, 0, 1))):
                values[f"{prefix}{i + 1}"] = layer.get(m, ParamPoly.zero())
        return cls({k: _poly(v) for k, v in values.items()}, _poly(rho if isinstance(rho, ParamPoly) else rational(rho)))

    def value(self, name: str) -> ParamPoly:
        if name == "rho":
            return self.rho
        return self.constants[name]

    def is_concrete(self) -> bool:
        return self.rho.is_constant() and all(v.is_constant() for v in self.constants.values())

    def substitute(self, bindings) -> "BialgebraSpec":
        return BialgebraSpec({k: v.substitute(bindings) for k, v in self.constants.items()},
                             self.rho.substitute(bindings))

    def classical_table(self, order: int) -> CommutatorTable:
        return linear_table(self.constants, order)

    def as_dict(self) -> dict[str, ParamPoly]:
        d = dict(self.constants)
        d["rho"] = self.rho
        return d


@dataclass(frozen=True)
class ConstraintSet:
    """Polynomial equations (each required to vanish), canonicalized.

    Every equation is made monic with respect to its graded-lex leading term,
    zero equations are dropped and duplicates merged.
    """

    equations: tuple

    @classmethod
    def of(cls, eqs) -> "ConstraintSet":
        seen = []
        for e in eqs:
            e = _poly(e)
            if e.is_zero():
                continue
            e = e.monic()
            if e not in seen:
                seen.append(e)
        seen.sort(key=lambda p: (p.degree(), str(p)))
        return cls(tuple(seen))

    def __len__(self):
        return len(self.equations)

    def __iter__(self):
        return iter(self.equations)

    def __eq__(self, other):
        if not isinstance(other, ConstraintSet):
            return NotImplemented
        return set(self.equations) == set(other.equations)

    def __hash__(self):
        return hash(frozenset(self.equations))

    def substitute(self, bindings) -> "ConstraintSet":
        return ConstraintSet.of(e.substitute(bindings) for e in self.equations)

    def violations(self, spec: BialgebraSpec) -> list[ParamPoly]:
        b = {k: v for k, v in spec.as_dict().items() if v.is_constant()}
        return [e for e in self.equations if not e.substitute({k: v.constant_value() for k, v in b.items()}).is_zero()]

    def is_inconsistent(self) -> bool:
        return any(e.is_constant() for e in self.equations)

    def __str__(self):
        return "{" + ", ".join(str(e) for e in self.equations) + "}"


def _first_order_equations(spec: BialgebraSpec):
    t = spec.classical_table(1)
    h = HopfData.standard(spec.rho, 1)
    hom = []
    for r in check_homomorphism(h, t).residuals.values():
        for s in r._t.values():
            hom.extend(ParamPoly._raw(c) for c in s if c)
    t0 = t.truncate(0)
    jac = []
    for r in jacobi_residuals(t0):
        jac.extend(ParamPoly._raw(s[0]) for s in r._t.values() if s[0])
    return hom, jac


def _eliminable(eq: ParamPoly, name: str):
    """If eq = +-name + rest with name absent from rest, return the value of name."""
    var = ParamPoly.var(name)
    key = next(iter(var._t))
    hits = [(k, c) for k, c in eq._t.items() if _shares(k, key)]
    if len(hits) != 1:
        return None
    k, c = hits[0]
    if k != key or c not in (1, -1):
        return None
    rest = eq - var * c
    return rest * (-c)


def _shares(k: int, var_key: int) -> bool:
    shift = (var_key.bit_length() - 1) // FIELD_BITS * FIELD_BITS
    return (k >> shift) & ((1 << FIELD_BITS) - 1) != 0


def first_order_constraints(spec: BialgebraSpec) -> ConstraintSet:
    """Homomorphism of the coproduct at order z against the classical brackets, plus Jacobi.

    Jacobi equations are reduced with the linear homomorphism equations and
    dropped when a homomorphism equation divides them.
    """
    hom, jac = _first_order_equations(spec)
    hom_set = ConstraintSet.of(hom)
    bindings = {}
    for name in _DEPENDENT_FIRST:
        for eq in hom_set.equations:
            if name in bindings:
                break
            val = _eliminable(eq, name)
            if val is not None and not (val.variables() & set(bindings)):
                bindings[name] = val
    reduced = []
    for eq in jac:
        for name, val in bindings.items():
            eq = _substitute_poly(eq, name, val)
        if not eq.is_zero():
            reduced.append(eq)
    reduced = ConstraintSet.of(reduced).equations
    divisors = [e for e in hom_set.equations if not e.is_constant()]
    kept = []
    for eq in reduced:
        if any(eq.divide_exact(d) is not None for d in divisors):
            continue
        kept.append(eq)
    final = []
    for i, eq in enumerate(kept):
        others = [e for j, e in enumerate(kept) if j != i and e.degree() < eq.degree()]
        if any(eq.divide_exact(o) is not None for o in others):
            continue
        final.append(eq)
    return ConstraintSet.of(list(hom_set.equations) + final)


def _substitute_poly(eq: ParamPoly, name: str, value: ParamPoly) -> ParamPoly:
    """Replace a parameter by a polynomial."""
    var = ParamPoly.var(name)
    vkey = next(iter(var._t))
    shift = (vkey.bit_length() - 1)
    out = ParamPoly.zero()
    for k, c in eq._t.items():
        e = (k >> shift) & ((1 << FIELD_BITS) - 1)
        rest = ParamPoly._raw({k - e * vkey: c})
        out = out + rest * (value ** e)
    return out


@dataclass
class QuantizationResult:
    table: CommutatorTable
    hopf: HopfData
    solved_orders: list
    freedom: dict
    checks: list = field(default_factory=list)
    sym_entries: tuple = ()
    escalations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _extract_linear(poly: ParamPoly, columns: dict):
    row = {}
    rhs = mpq(0)
    for k, c in poly._t.items():
        if k == 0:
            rhs = -c
        else:
            col = columns.get(k)
            if col is None:
                raise QuantizationError("nonlinear condition on the correction terms")
            row[col] = c
    return row, rhs


def quantize(spec: BialgebraSpec, order: int = 6, bound_cap: int = 4) -> QuantizationResult:
    """Reconstruct the deformed brackets to z^order for concrete parameters.

    At each even order d the corrections to the three brackets are sums of
    unknowns times Sym(A^p), Sym(B A^p), Sym(C A^p) for p <= d+1.  The
    homomorphism residual at orders d and d+1 and the Jacobi residual at
    order d give linear equations.  Unknowns with higher degree are pivoted
    first; the remaining free ones are set to zero and counted.  An
    inconsistent system widens the degree bound by two, at most
    ``bound_cap`` extra degrees.
    """
    if order < 2:
        raise ValueError("truncation order must be at least 2")
    if not spec.is_concrete():
        raise ValueError("quantize needs concrete rational structure constants and rho")
    # with concrete values every surviving equation is a nonzero constant
    if first_order_constraints(spec).equations:
        generic = first_order_constraints(BialgebraSpec.symbolic(spec.rho))
        bad = ", ".join(f"{e} = 0" for e in generic.violations(spec)) or "Jacobi identity"
        raise QuantizationError(f"structure constants violate the first-order constraints: {bad}")
    rho = spec.rho
    base = spec.classical_table(order)
    sym = list(base.entries())
    freedom: dict = {}
    escalations: list = []
    solved = []
    for d in range(2, order + 1, 2):
        top = min(d + 1, order)
        extra = 0
        while True:
            pmax = d + 1 + extra
            sol, columns, labels = _solve_order(sym, rho, d, top, pmax)
            if sol.consistent:
                break
            if extra >= bound_cap:
                raise QuantizationError(f"no solution at order z^{d} within degree bound {pmax}",
                                        order=d, certificate=sol.certificate)
            extra += 2
            msg = f"order z^{d}: inconsistent with degree bound {pmax}; widening to {d + 1 + extra}"
            log.info(msg)
            escalations.append(msg)
        for idx, entry in enumerate(sym):
            add = {}
            for col, (b, m) in labels.items():
                if b == idx and sol.values[col]:
                    add[m] = ZSeries.monomial(sol.values[col], d, order)
            if add:
                sym[idx] = entry + AlgElement(add, order)
        freedom[d] = len(sol.free)
        solved.append(d)
    table = table_from_sym(*sym, params=spec.as_dict())
    hopf = HopfData.standard(rho, order)
    checks = all_checks(hopf, table)
    return QuantizationResult(table, hopf, solved, freedom, checks, tuple(sym), escalations)


def _solve_order(sym, rho, d, top, pmax):
    labels = {}
    cols_by_key = {}
    order_cols = []
    unknown = 0
    entries = [e.truncate(top) for e in sym]
    extras = [dict() for _ in entries]
    cands = []
    for b in range(3):
        for shape, mk in _SHAPES.items():
            for p in range(pmax + 1):
                cands.append((b, mk(p)))
    # higher total degree first, so low-degree unknowns end up free
    cands.sort(key=lambda bm: (-sum(bm[1]), bm[0], bm[1]))
    for b, m in cands:
        u = ParamPoly._unknown(unknown)
        cols_by_key[unknown_key(unknown)] = unknown
        labels[unknown] = (b, m)
        order_cols.append(unknown)
        extras[b][m] = ZSeries.monomial(u, d, top)
        unknown += 1
    entries = [e + AlgElement(x, top) for e, x in zip(entries, extras)]
    t = table_from_sym(*entries)
    h = HopfData.standard(rho, top)
    residuals = list(check_homomorphism(h, t).residuals.values()) + list(jacobi_residuals(t))
    rows = []
    seen = set()
    for r in residuals:
        for key, s in r._t.items():
            for k, c in enumerate(s):
                if not c:
                    continue
                if k < d:
                    raise QuantizationError(f"residual at order z^{k} below the solved order", order=k)
                if k <= d + 1:
                    row, rhs = _extract_linear(ParamPoly._raw(c), cols_by_key)
                    sig = (frozenset(row.items()), rhs)
                    if sig in seen:
                        continue
                    seen.add(sig)
                    rows.append((row, rhs))
    sol = solve_linear(rows, order_cols)
    return sol, order_cols, labels


def compare_tables(t1: CommutatorTable, t2: CommutatorTable) -> dict[str, AlgElement]:
    """Entrywise differences; all zero iff the tables agree to the truncation order."""
    if t1.order != t2.order:
        raise TruncationError(f"tables truncated at {t1.order} and {t2.order}")
    return {name: a - b for name, a, b in zip(("[A,B]", "[A,C]", "[B,C]"), t1.entries(), t2.entries())}


def tables_agree(t1: CommutatorTable, t2: CommutatorTable) -> bool:
    return all(r.is_zero() for r in compare_tables(t1, t2).values())


__all__ = [
    "BialgebraSpec", "ConstraintSet", "QuantizationResult", "QuantizationError",
    "first_order_constraints", "quantize", "compare_tables", "tables_agree", "STRUCTURE_CONSTANTS",
]
