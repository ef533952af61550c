"""The deformed enveloping algebra on generators A, B, C.

Elements are stored on the ordered basis ``A^i B^j C^k`` with truncated
z-series coefficients.  Products are reduced by rewriting the leftmost
inversion ``YX -> XY - [X, Y]_z`` with a per-table memo.  The symmetrized
basis is reached through :func:`sym_convert`.
"""

from __future__ import annotations

import math
from typing import Mapping

from gmpy2 import mpq

from ._backend import (
    EMPTY,
    accumulate,
    poly_mul,
    series_add,
    series_is_zero,
    series_low,
    series_mul,
    series_neg,
    series_sub,
)
from .kernel import ParamPoly, TruncationError, ZSeries, rational

GENERATORS = ("A", "B", "C")
ONE = (0, 0, 0)
Monomial = tuple  # (i, j, k) meaning A^i B^j C^k

_ONE_SERIES: dict[int, tuple] = {}


class NonTerminatingTableError(ValueError):
    """The table's classical layer is not linear, so rewriting may not stop."""


def _one(n: int) -> tuple:
    s = _ONE_SERIES.get(n)
    if s is None:
        s = ({0: mpq(1)},) + (EMPTY,) * n
        _ONE_SERIES[n] = s
    return s


def _coeff_series(c, n: int) -> tuple:
    if isinstance(c, ZSeries):
        if c.order != n:
            raise TruncationError(f"coefficient has order {c.order}, expected {n}")
        return c._c
    if isinstance(c, ParamPoly):
        return (c._t,) + (EMPTY,) * n
    q = rational(c)
    return ({0: q} if q else EMPTY,) + (EMPTY,) * n


def word_of(m: Monomial) -> str:
    return "A" * m[0] + "B" * m[1] + "C" * m[2]


def monomial_of(word: str) -> Monomial:
    if list(word) != sorted(word):
        raise ValueError(f"{word!r} is not an ordered word")
    return (word.count("A"), word.count("B"), word.count("C"))


def format_monomial(m: Monomial) -> str:
    parts = []
    for g, e in zip(GENERATORS, m):
        if e == 1:
            parts.append(g)
        elif e > 1:
            parts.append(f"{g}^{e}")
    return "*".join(parts) or "1"


class AlgElement:
    """Finite combination of ordered monomials with z-series coefficients."""

    __slots__ = ("_n", "_t")

    def __init__(self, terms: Mapping | None = None, order: int = 6):
        self._n = order
        t = {}
        for m, c in (terms or {}).items():
            m = tuple(m)
            if len(m) != 3 or min(m) < 0:
                raise ValueError(f"bad monomial {m!r}")
            s = _coeff_series(c, order)
            if m in t:
                s = series_add(t[m], s)
            if series_is_zero(s):
                t.pop(m, None)
            else:
                t[m] = s
        self._t = t

    @classmethod
    def _raw(cls, terms: dict, order: int) -> "AlgElement":
        e = object.__new__(cls)
        e._n = order
        e._t = terms
        return e

    @classmethod
    def zero(cls, order: int) -> "AlgElement":
        return cls._raw({}, order)

    @classmethod
    def one(cls, order: int) -> "AlgElement":
        return cls._raw({ONE: _one(order)}, order)

    @classmethod
    def generator(cls, g: str, order: int) -> "AlgElement":
        m = [0, 0, 0]
        m[GENERATORS.index(g)] = 1
        return cls._raw({tuple(m): _one(order)}, order)

    @classmethod
    def monomial(cls, m: Monomial, order: int, coeff=1) -> "AlgElement":
        return cls({tuple(m): coeff}, order)

    @property
    def order(self) -> int:
        return self._n

    def terms(self) -> list[tuple[Monomial, ZSeries]]:
        return [(m, ZSeries._raw(self._t[m])) for m in sorted(self._t, key=lambda m: (sum(m), m))]

    def coeff(self, m: Monomial) -> ZSeries:
        s = self._t.get(tuple(m))
        return ZSeries._raw(s) if s is not None else ZSeries.zero(self._n)

    def z_layer(self, d: int) -> dict[Monomial, ParamPoly]:
        """Coefficients of z^d as a map monomial -> parameter polynomial."""
        return {m: ParamPoly._raw(s[d]) for m, s in self._t.items() if d < len(s) and s[d]}

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self) -> bool:
        return bool(self._t)

    def lowest_order(self) -> int | None:
        lows = [series_low(s) for s in self._t.values()]
        return min(lows) if lows else None

    def degree(self) -> int:
        return max((sum(m) for m in self._t), default=-1)

    def bc_degree(self) -> int:
        return max((m[1] + m[2] for m in self._t), default=-1)

    def _check(self, other: "AlgElement"):
        if other._n != self._n:
            raise TruncationError(f"truncation orders differ: {self._n} vs {other._n}")

    def __add__(self, other):
        if not isinstance(other, AlgElement):
            return NotImplemented
        self._check(other)
        t = dict(self._t)
        for m, s in other._t.items():
            cur = t.get(m)
            s = s if cur is None else series_add(cur, s)
            if series_is_zero(s):
                t.pop(m, None)
            else:
                t[m] = s
        return AlgElement._raw(t, self._n)

    def __neg__(self):
        return AlgElement._raw({m: series_neg(s) for m, s in self._t.items()}, self._n)

    def __sub__(self, other):
        if not isinstance(other, AlgElement):
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> "AlgElement":
        """Multiply every coefficient by a series, polynomial or rational."""
        f = _coeff_series(c, self._n)
        t = {}
        for m, s in self._t.items():
            p = series_mul(f, s, self._n)
            if not series_is_zero(p):
                t[m] = p
        return AlgElement._raw(t, self._n)

    def __mul__(self, other):
        if isinstance(other, AlgElement):
            raise TypeError("use multiply(x, y, table): products need a commutator table")
        return self.scale(other)

    __rmul__ = __mul__

    def truncate(self, order: int) -> "AlgElement":
        if order > self._n:
            raise TruncationError("cannot extend a truncated element")
        t = {}
        for m, s in self._t.items():
            s = s[: order + 1]
            if not series_is_zero(s):
                t[m] = s
        return AlgElement._raw(t, order)

    def negate_z(self) -> "AlgElement":
        return AlgElement._raw({m: ZSeries._raw(s).negate_z()._c for m, s in self._t.items()}, self._n)

    def rescale_z(self, factor) -> "AlgElement":
        return AlgElement._raw({m: ZSeries._raw(s).rescale_z(factor)._c for m, s in self._t.items()}, self._n)

    def substitute(self, bindings) -> "AlgElement":
        t = {}
        for m, s in self._t.items():
            s = ZSeries._raw(s).substitute(bindings)._c
            if not series_is_zero(s):
                t[m] = s
        return AlgElement._raw(t, self._n)

    def map_coefficients(self, fn) -> "AlgElement":
        """Apply ``fn`` to every coefficient polynomial (fn(ParamPoly) -> ParamPoly)."""
        t = {}
        for m, s in self._t.items():
            s = tuple(fn(ParamPoly._raw(c))._t for c in s)
            if not series_is_zero(s):
                t[m] = s
        return AlgElement._raw(t, self._n)

    def is_even(self) -> bool:
        return all(ZSeries._raw(s).is_even() for s in self._t.values())

    def __eq__(self, other):
        if not isinstance(other, AlgElement):
            return NotImplemented
        return self._n == other._n and self._t == other._t

    def __hash__(self):
        return hash((self._n, frozenset((m, ZSeries._raw(s)) for m, s in self._t.items())))

    def __str__(self):
        if not self._t:
            return "0"
        parts = []
        for m, s in self.terms():
            parts.append(f"[{_series_body(s)}]*{format_monomial(m)}")
        return " + ".join(parts)

    def __repr__(self):
        return f"AlgElement({self})"


def _series_body(s: ZSeries) -> str:
    text = str(s)
    return text.rsplit(" + O(", 1)[0]


def _check_linear_classical(entry: AlgElement, name: str):
    for m, s in entry._t.items():
        if s[0] and sum(m) > 1:
            raise NonTerminatingTableError(
                f"{name} has a z^0 term of degree {sum(m)}; the classical layer must be linear"
            )


class CommutatorTable:
    """The brackets [A,B]_z, [A,C]_z, [B,C]_z on the ordered basis.

    The table owns the memo used by normal ordering.  Tables are immutable,
    so the memo never goes stale; concurrent readers may at worst recompute
    an entry.
    """

    def __init__(self, ab: AlgElement, ac: AlgElement, bc: AlgElement, params=None, sym_entries=None):
        n = ab.order
        if ac.order != n or bc.order != n:
            raise TruncationError("table entries have different truncation orders")
        for name, e in (("[A,B]", ab), ("[A,C]", ac), ("[B,C]", bc)):
            _check_linear_classical(e, name)
        self.ab, self.ac, self.bc = ab, ac, bc
        self.params = dict(params or {})
        self.sym_entries = sym_entries
        self._n = n
        self._brackets = {}
        for (x, y), e in ((("A", "B"), ab), (("A", "C"), ac), (("B", "C"), bc)):
            self._brackets[(x, y)] = [(word_of(m), s, series_low(s)) for m, s in e._t.items()]
        self._wcache: dict = {}
        self._scache: dict = {}

    @property
    def order(self) -> int:
        return self._n

    def entries(self) -> tuple[AlgElement, AlgElement, AlgElement]:
        return (self.ab, self.ac, self.bc)

    def bracket(self, x: str, y: str) -> AlgElement:
        if x == y:
            return AlgElement.zero(self._n)
        if (x, y) == ("A", "B"):
            return self.ab
        if (x, y) == ("A", "C"):
            return self.ac
        if (x, y) == ("B", "C"):
            return self.bc
        return -self.bracket(y, x)

    def truncate(self, order: int) -> "CommutatorTable":
        sym = None
        if self.sym_entries is not None:
            sym = tuple(e.truncate(order) for e in self.sym_entries)
        return CommutatorTable(*(e.truncate(order) for e in self.entries()), params=self.params, sym_entries=sym)

    def classical_limit(self) -> "CommutatorTable":
        return CommutatorTable(*(_z0_only(e) for e in self.entries()), params=self.params)

    def is_even(self) -> bool:
        return all(e.is_even() for e in self.entries())

    def substitute(self, bindings) -> "CommutatorTable":
        return CommutatorTable(*(e.substitute(bindings) for e in self.entries()), params=self.params)

    def __eq__(self, other):
        if not isinstance(other, CommutatorTable):
            return NotImplemented
        return self.entries() == other.entries()

    __hash__ = object.__hash__

    def __str__(self):
        return f"[A,B] = {self.ab}\n[A,C] = {self.ac}\n[B,C] = {self.bc}"

    # -- rewriting -------------------------------------------------------
    def _reduce(self, w: str, budget: int) -> dict:
        key = (w, budget)
        hit = self._wcache.get(key)
        if hit is not None:
            return hit
        i = -1
        for k in range(len(w) - 1):
            if w[k] > w[k + 1]:
                i = k
                break
        if i < 0:
            res = {(w.count("A"), w.count("B"), w.count("C")): _one(budget)}
        else:
            y, x = w[i], w[i + 1]
            u, v = w[:i], w[i + 2:]
            res = dict(self._reduce(u + x + y + v, budget))
            for mw, s, lo in self._brackets[(x, y)]:
                if lo > budget:
                    continue
                sub = self._reduce(u + mw + v, budget - lo)
                accumulate(res, sub, s, budget, True)
        self._wcache[key] = res
        return res

    def reduce_word(self, w: str, budget: int | None = None) -> dict:
        """Raw normal form of a word: monomial -> coefficient tuple."""
        if budget is None:
            budget = self._n
        if any(ch not in "ABC" for ch in w):
            raise ValueError(f"word {w!r} uses letters outside A, B, C")
        try:
            return self._reduce(w, budget)
        except RecursionError as exc:  # pragma: no cover - guarded by the linear-classical check
            raise NonTerminatingTableError(f"rewriting of {w!r} did not terminate") from exc

    def _sym(self, m: Monomial, budget: int) -> dict:
        key = (m, budget)
        hit = self._scache.get(key)
        if hit is not None:
            return hit
        words = arrangements(m)
        acc: dict = {}
        for w in words:
            for mm, s in self.reduce_word(w, budget).items():
                cur = acc.get(mm)
                acc[mm] = s if cur is None else series_add(cur, s)
        inv = {0: mpq(1, len(words))}
        res = {}
        for mm, s in acc.items():
            s = tuple(poly_mul(c, inv) for c in s)
            if not series_is_zero(s):
                res[mm] = s
        self._scache[key] = res
        return res


def _z0_only(e: AlgElement) -> AlgElement:
    t = {}
    for m, s in e._t.items():
        if s[0]:
            t[m] = (s[0],) + (EMPTY,) * e.order
    return AlgElement._raw(t, e.order)


def arrangements(m: Monomial) -> list[str]:
    """All distinct words with letter counts (i, j, k), built by interleaving."""
    out: list[str] = []

    def rec(prefix: str, counts: list[int]):
        if not any(counts):
            out.append(prefix)
            return
        for idx, g in enumerate(GENERATORS):
            if counts[idx]:
                counts[idx] -= 1
                rec(prefix + g, counts)
                counts[idx] += 1

    rec("", list(m))
    return out


# -- public operations ---------------------------------------------------

def normal_order(w: str, t: CommutatorTable) -> AlgElement:
    return AlgElement._raw(dict(t.reduce_word(w)), t.order)


def multiply(x: AlgElement, y: AlgElement, t: CommutatorTable) -> AlgElement:
    n = x.order
    if y.order != n or t.order != n:
        raise TruncationError("multiply needs equal truncation orders")
    acc: dict = {}
    for m1, s1 in x._t.items():
        lo1 = series_low(s1)
        w1 = word_of(m1)
        for m2, s2 in y._t.items():
            budget = n - lo1 - series_low(s2)
            if budget < 0:
                continue
            f = series_mul(s1, s2, n)
            if series_is_zero(f):
                continue
            accumulate(acc, t.reduce_word(w1 + word_of(m2), budget), f, n, False)
    return AlgElement._raw(acc, n)


def commutator(x: AlgElement, y: AlgElement, t: CommutatorTable) -> AlgElement:
    return multiply(x, y, t) - multiply(y, x, t)


def power(x: AlgElement, k: int, t: CommutatorTable) -> AlgElement:
    out = AlgElement.one(x.order)
    for _ in range(k):
        out = multiply(out, x, t)
    return out


def sym_to_ordered(x: AlgElement, t: CommutatorTable) -> AlgElement:
    """Read ``x`` as a combination of Sym(monomials) and expand it."""
    n = x.order
    acc: dict = {}
    for m, s in x._t.items():
        lo = series_low(s)
        if sum(m) <= 1:
            accumulate(acc, {m: _one(n)}, s, n, False)
            continue
        accumulate(acc, t._sym(m, n - lo), s, n, False)
    return AlgElement._raw(acc, n)


def ordered_to_sym(x: AlgElement, t: CommutatorTable) -> AlgElement:
    """Coefficients of ``x`` on the symmetrized basis."""
    n = x.order
    result: dict = {}
    residual = dict(x._t)
    limit = x.degree() + n + 3
    for _ in range(limit):
        if not residual:
            break
        for m, s in residual.items():
            cur = result.get(m)
            s2 = s if cur is None else series_add(cur, s)
            if series_is_zero(s2):
                result.pop(m, None)
            else:
                result[m] = s2
        nxt: dict = {}
        for m, s in residual.items():
            if sum(m) <= 1:
                continue
            lo = series_low(s)
            expansion = dict(t._sym(m, n - lo))
            # Sym(m) = m + lower terms; only the lower terms feed back.
            top = expansion.pop(m)
            rest = series_sub(top, _one(n - lo))
            if not series_is_zero(rest):
                expansion[m] = rest
            accumulate(nxt, expansion, s, n, True)
        residual = nxt
    else:
        if residual:
            raise RuntimeError("ordered_to_sym did not converge")
    return AlgElement._raw(result, n)


def sym_convert(x: AlgElement, direction: str, t: CommutatorTable) -> AlgElement:
    if direction == "sym_to_ordered":
        return sym_to_ordered(x, t)
    if direction == "ordered_to_sym":
        return ordered_to_sym(x, t)
    raise ValueError(f"unknown direction {direction!r}")


SERIES_KINDS = ("exp", "sinh_over_z", "cosh", "sinh_over_scaled_z")


def generator_series(g: str, kind: str, c, order: int) -> AlgElement:
    """Truncated Taylor expansion of a function of ``c*z*g``.

    ``exp`` is exp(c z g), ``sinh_over_z`` is sinh(c z g)/z, ``cosh`` is
    cosh(c z g) and ``sinh_over_scaled_z`` is sinh(c z g)/(c z).
    """
    if kind not in SERIES_KINDS:
        raise ValueError(f"unknown series kind {kind!r}")
    c = c if isinstance(c, ParamPoly) else ParamPoly.const(c)
    idx = GENERATORS.index(g)
    terms = {}
    for p in range(order + 2):
        if kind == "exp":
            zdeg, cpow = p, p
        elif kind == "cosh":
            if p % 2:
                continue
            zdeg, cpow = p, p
        else:
            if p % 2 == 0:
                continue
            zdeg = p - 1
            cpow = p if kind == "sinh_over_z" else p - 1
        if zdeg > order:
            continue
        coeff = (c ** cpow) * mpq(1, math.factorial(p))
        if coeff.is_zero():
            continue
        m = [0, 0, 0]
        m[idx] = p
        terms[tuple(m)] = ZSeries.monomial(coeff, zdeg, order)
    return AlgElement(terms, order)


def jacobi_residuals(t: CommutatorTable) -> tuple[AlgElement, AlgElement, AlgElement]:
    """Jacobi sums started from A, B and C, each evaluated independently."""
    n = t.order
    g = {x: AlgElement.generator(x, n) for x in GENERATORS}

    def jac(x, y, z):
        return (commutator(g[x], t.bracket(y, z), t)
                + commutator(g[y], t.bracket(z, x), t)
                + commutator(g[z], t.bracket(x, y), t))

    return (jac("A", "B", "C"), jac("B", "C", "A"), jac("C", "A", "B"))


class PoissonTable:
    """Brackets {a,b}, {a,c}, {b,c}; monomials here are commutative."""

    def __init__(self, ab: AlgElement, ac: AlgElement, bc: AlgElement):
        self.ab, self.ac, self.bc = ab, ac, bc

    def entries(self):
        return (self.ab, self.ac, self.bc)

    def __eq__(self, other):
        if not isinstance(other, PoissonTable):
            return NotImplemented
        return self.entries() == other.entries()

    def __str__(self):
        return f"{{a,b}} = {self.ab}\n{{a,c}} = {self.ac}\n{{b,c}} = {self.bc}"


def poisson_table(t: CommutatorTable) -> PoissonTable:
    return PoissonTable(*(ordered_to_sym(e, t) for e in t.entries()))


def table_from_sym(ab: AlgElement, ac: AlgElement, bc: AlgElement, params=None) -> CommutatorTable:
    """Build the ordered-basis table whose entries, read in the Sym basis, are given.

    The ordered form of a Sym monomial depends on the table itself, so the
    table is found by fixed-point iteration; each sweep fixes at least one
    more z-order.
    """
    n = ab.order
    sym = (ab, ac, bc)
    t = CommutatorTable(*sym, params=params, sym_entries=sym)
    for _ in range(n + 2):
        nxt = CommutatorTable(*(sym_to_ordered(e, t) for e in sym), params=params, sym_entries=sym)
        if nxt == t:
            return nxt
        t = nxt
    raise RuntimeError("Sym-basis table did not converge")


def abelian_table(order: int) -> CommutatorTable:
    z = AlgElement.zero(order)
    return CommutatorTable(z, z, z)


def linear_table(constants: Mapping[str, object], order: int) -> CommutatorTable:
    """Undeformed table [A,B]=c1A+c2B+c3C, [A,C]=b1A+..., [B,C]=a1A+...."""

    def entry(prefix):
        terms = {}
        for idx, g in enumerate(GENERATORS):
            v = constants.get(f"{prefix}{idx + 1}", 0)
            v = v if isinstance(v, ParamPoly) else ParamPoly.const(v)
            if not v.is_zero():
                m = [0, 0, 0]
                m[idx] = 1
                terms[tuple(m)] = v
        return AlgElement(terms, order)

    return CommutatorTable(entry("c"), entry("b"), entry("a"), params=constants)


def cosh_symmetrization_defect(g: str, t: CommutatorTable, scale=1) -> AlgElement:
    """Sym[g cosh(scale z A)] minus the two-sided average (g cosh + cosh g)/2."""
    n = t.order
    cosh = generator_series("A", "cosh", scale, n)
    x = AlgElement.generator(g, n)
    idx = GENERATORS.index(g)
    sym_terms = {}
    for (p, _, _), s in cosh.terms():
        m = [p, 0, 0]
        m[idx] += 1
        sym_terms[tuple(m)] = s
    symmetrized = sym_to_ordered(AlgElement(sym_terms, n), t)
    average = (multiply(x, cosh, t) + multiply(cosh, x, t)).scale(mpq(1, 2))
    return symmetrized - average
