"""Tensor products, coproducts and the Hopf axioms, checked to a fixed z-order."""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field

from gmpy2 import mpq

from ._backend import (
    EMPTY,
    accumulate,
    poly_add,
    poly_mul,
    series_add,
    series_is_zero,
    series_low,
    series_mul,
    series_neg,
)
from .algebra import (
    GENERATORS,
    ONE,
    AlgElement,
    CommutatorTable,
    _coeff_series,
    _one,
    format_monomial,
    generator_series,
    multiply,
    word_of,
)
from .kernel import ParamPoly, TruncationError, ZSeries, rational

_UNIT = {"A": (1, 0, 0), "B": (0, 1, 0), "C": (0, 0, 1)}


class _Tensor:
    """Shared storage for tensors: key tuple of monomials -> raw series."""

    __slots__ = ("_n", "_t")
    arity = 0

    def __init__(self, terms=None, order: int = 6):
        self._n = order
        t = {}
        for key, c in (terms or {}).items():
            key = tuple(tuple(m) for m in key)
            if len(key) != self.arity:
                raise ValueError(f"expected {self.arity} tensor slots, got {len(key)}")
            s = _coeff_series(c, order)
            if key in t:
                s = series_add(t[key], s)
            if series_is_zero(s):
                t.pop(key, None)
            else:
                t[key] = s
        self._t = t

    @classmethod
    def _raw(cls, terms: dict, order: int):
        e = object.__new__(cls)
        e._n = order
        e._t = terms
        return e

    @classmethod
    def zero(cls, order: int):
        return cls._raw({}, order)

    @classmethod
    def outer(cls, *factors: AlgElement):
        """x1 (x) x2 (x) ... for AlgElements sharing one truncation order."""
        if len(factors) != cls.arity:
            raise ValueError(f"need {cls.arity} factors")
        n = factors[0].order
        acc = {(): _one(n)}
        for f in factors:
            if f.order != n:
                raise TruncationError("factors have different truncation orders")
            nxt: dict = {}
            for key, s in acc.items():
                accumulate(nxt, {key + (m,): fs for m, fs in f._t.items()}, s, n, False)
            acc = nxt
        return cls._raw(acc, n)

    @property
    def order(self) -> int:
        return self._n

    def terms(self):
        keys = sorted(self._t, key=lambda k: tuple((sum(m), m) for m in k))
        return [(k, ZSeries._raw(self._t[k])) for k in keys]

    def coeff(self, key) -> ZSeries:
        s = self._t.get(tuple(tuple(m) for m in key))
        return ZSeries._raw(s) if s is not None else ZSeries.zero(self._n)

    def z_layer(self, d: int) -> dict:
        return {k: ParamPoly._raw(s[d]) for k, s in self._t.items() if s[d]}

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self):
        return bool(self._t)

    def lowest_order(self):
        lows = [series_low(s) for s in self._t.values()]
        return min(lows) if lows else None

    def __add__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        if other._n != self._n:
            raise TruncationError("truncation orders differ")
        t = dict(self._t)
        for k, s in other._t.items():
            cur = t.get(k)
            s = s if cur is None else series_add(cur, s)
            if series_is_zero(s):
                t.pop(k, None)
            else:
                t[k] = s
        return type(self)._raw(t, self._n)

    def __neg__(self):
        return type(self)._raw({k: series_neg(s) for k, s in self._t.items()}, self._n)

    def __sub__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self + (-other)

    def scale(self, c):
        f = _coeff_series(c, self._n)
        t = {}
        for k, s in self._t.items():
            p = series_mul(f, s, self._n)
            if not series_is_zero(p):
                t[k] = p
        return type(self)._raw(t, self._n)

    def negate_z(self):
        return type(self)._raw({k: ZSeries._raw(s).negate_z()._c for k, s in self._t.items()}, self._n)

    def substitute(self, bindings):
        t = {}
        for k, s in self._t.items():
            s = ZSeries._raw(s).substitute(bindings)._c
            if not series_is_zero(s):
                t[k] = s
        return type(self)._raw(t, self._n)

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self._n == other._n and self._t == other._t

    def __hash__(self):
        return hash((self.arity, self._n, frozenset((k, ZSeries._raw(s)) for k, s in self._t.items())))

    def __str__(self):
        if not self._t:
            return "0"
        parts = []
        for k, s in self.terms():
            body = str(s).rsplit(" + O(", 1)[0]
            parts.append(f"[{body}]*" + "(x)".join(format_monomial(m) for m in k))
        return " + ".join(parts)

    def __repr__(self):
        return f"{type(self).__name__}({self})"


class TensorElement(_Tensor):
    __slots__ = ()
    arity = 2

    def swap(self) -> "TensorElement":
        return TensorElement._raw({(b, a): s for (a, b), s in self._t.items()}, self._n)


class Tensor3Element(_Tensor):
    __slots__ = ()
    arity = 3


def tensor_multiply(x: TensorElement, y: TensorElement, t: CommutatorTable) -> TensorElement:
    """Slotwise product (a (x) b)(c (x) d) = ac (x) bd."""
    n = x.order
    if y.order != n or t.order != n:
        raise TruncationError("tensor_multiply needs equal truncation orders")
    acc: dict = {}
    for (a, b), s1 in x._t.items():
        wa, wb = word_of(a), word_of(b)
        lo1 = series_low(s1)
        for (c, d), s2 in y._t.items():
            budget = n - lo1 - series_low(s2)
            if budget < 0:
                continue
            f = series_mul(s1, s2, n)
            if series_is_zero(f):
                continue
            left = t.reduce_word(wa + word_of(c), budget)
            right = t.reduce_word(wb + word_of(d), budget)
            src: dict = {}
            for ml, sl in left.items():
                for mr, sr in right.items():
                    p = series_mul(sl, sr, budget)
                    if not series_is_zero(p):
                        src[(ml, mr)] = p
            accumulate(acc, src, f, n, False)
    return TensorElement._raw(acc, n)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one axiom check: residuals keyed by label, and where they start."""

    name: str
    residuals: dict
    lowest_order: int | None
    passed: bool

    @classmethod
    def from_residuals(cls, name: str, residuals: dict) -> "CheckResult":
        lows = [r.lowest_order() for r in residuals.values() if not r.is_zero()]
        low = min(lows) if lows else None
        return cls(name, residuals, low, low is None)


class HopfData:
    """Coproduct images of A, B, C, the counit values and an optional antipode."""

    def __init__(self, delta_A: TensorElement, delta_B: TensorElement, delta_C: TensorElement,
                 counit=None, antipode=None, label: str = "custom"):
        n = delta_A.order
        if delta_B.order != n or delta_C.order != n:
            raise TruncationError("coproduct images have different truncation orders")
        self.deltas = {"A": delta_A, "B": delta_B, "C": delta_C}
        for g, d in self.deltas.items():
            expected = {(_UNIT[g], ONE): mpq(1), (ONE, _UNIT[g]): mpq(1)}
            got = {k: v for k, v in ((k, s[0]) for k, s in d._t.items()) if v}
            if {k: ParamPoly._raw(v) for k, v in got.items()} != {k: ParamPoly.const(v) for k, v in expected.items()}:
                raise ValueError(f"z^0 part of the coproduct of {g} is not primitive")
        self.counit = {g: rational((counit or {}).get(g, 0)) for g in GENERATORS}
        self.antipode = dict(antipode) if antipode else None
        self.label = label
        self._n = n
        self._ext = weakref.WeakKeyDictionary()

    @property
    def order(self) -> int:
        return self._n

    @property
    def delta_A(self):
        return self.deltas["A"]

    @property
    def delta_B(self):
        return self.deltas["B"]

    @property
    def delta_C(self):
        return self.deltas["C"]

    @classmethod
    def primitive(cls, order: int) -> "HopfData":
        d = {g: TensorElement({(_UNIT[g], ONE): 1, (ONE, _UNIT[g]): 1}, order) for g in GENERATORS}
        return cls(d["A"], d["B"], d["C"], label="primitive")

    @classmethod
    def standard(cls, rho, order: int, scale=1) -> "HopfData":
        """Delta(A) primitive, Delta(B) = e^{zA}(x)B + B(x)e^{-zA}, Delta(C) likewise with rho*z."""
        rho = rho if isinstance(rho, ParamPoly) else ParamPoly.const(rho)
        scale = scale if isinstance(scale, ParamPoly) else ParamPoly.const(scale)
        one = AlgElement.one(order)
        gA = AlgElement.generator("A", order)
        dA = TensorElement.outer(gA, one) + TensorElement.outer(one, gA)

        def twisted(g, c):
            x = AlgElement.generator(g, order)
            return (TensorElement.outer(generator_series("A", "exp", c, order), x)
                    + TensorElement.outer(x, generator_series("A", "exp", -c, order)))

        return cls(dA, twisted("B", scale), twisted("C", rho * scale), label="standard")

    def __eq__(self, other):
        if not isinstance(other, HopfData):
            return NotImplemented
        return self.deltas == other.deltas and self.counit == other.counit

    def __hash__(self):
        return hash((tuple(self.deltas.values()), tuple(self.counit.values())))

    def with_antipode(self, antipode) -> "HopfData":
        return HopfData(self.delta_A, self.delta_B, self.delta_C, counit=self.counit,
                        antipode=antipode, label=self.label)

    def with_counit(self, counit) -> "HopfData":
        return HopfData(self.delta_A, self.delta_B, self.delta_C, counit=counit,
                        antipode=self.antipode, label=self.label)

    def _cache(self, t: CommutatorTable) -> dict:
        c = self._ext.get(t)
        if c is None:
            c = {ONE: TensorElement._raw({(ONE, ONE): _one(self._n)}, self._n)}
            for g in GENERATORS:
                c[_UNIT[g]] = self.deltas[g]
            self._ext[t] = c
        return c


def _delta_monomial(m, h: HopfData, t: CommutatorTable) -> TensorElement:
    cache = h._cache(t)
    hit = cache.get(m)
    if hit is not None:
        return hit
    # peel the last letter: m = m' * g with g the largest generator present
    i, j, k = m
    if k:
        prev, g = (i, j, k - 1), "C"
    elif j:
        prev, g = (i, j - 1, 0), "B"
    else:
        prev, g = (i - 1, 0, 0), "A"
    res = tensor_multiply(_delta_monomial(prev, h, t), h.deltas[g], t)
    cache[m] = res
    return res


def coproduct_extend(x: AlgElement, h: HopfData, t: CommutatorTable) -> TensorElement:
    n = x.order
    if h.order != n or t.order != n:
        raise TruncationError("coproduct_extend needs equal truncation orders")
    acc: dict = {}
    for m, s in x._t.items():
        accumulate(acc, _delta_monomial(m, h, t)._t, s, n, False)
    return TensorElement._raw(acc, n)


def _extend_left(d: TensorElement, h, t) -> Tensor3Element:
    # (Delta (x) id) d
    n = d.order
    acc: dict = {}
    for (a, b), s in d._t.items():
        src = {(k1, k2, b): v for (k1, k2), v in _delta_monomial(a, h, t)._t.items()}
        accumulate(acc, src, s, n, False)
    return Tensor3Element._raw(acc, n)


def _extend_right(d: TensorElement, h, t) -> Tensor3Element:
    n = d.order
    acc: dict = {}
    for (a, b), s in d._t.items():
        src = {(a, k1, k2): v for (k1, k2), v in _delta_monomial(b, h, t)._t.items()}
        accumulate(acc, src, s, n, False)
    return Tensor3Element._raw(acc, n)


def check_coassociativity(h: HopfData, t: CommutatorTable) -> CheckResult:
    res = {}
    for g in GENERATORS:
        d = h.deltas[g]
        res[g] = _extend_left(d, h, t) - _extend_right(d, h, t)
    return CheckResult.from_residuals("coassociativity", res)


def check_homomorphism(h: HopfData, t: CommutatorTable) -> CheckResult:
    res = {}
    for x, y in (("A", "B"), ("A", "C"), ("B", "C")):
        dx, dy = h.deltas[x], h.deltas[y]
        bracket = tensor_multiply(dx, dy, t) - tensor_multiply(dy, dx, t)
        res[f"[{x},{y}]"] = coproduct_extend(t.bracket(x, y), h, t) - bracket
    return CheckResult.from_residuals("homomorphism", res)


def check_sigma_tilde(h: HopfData) -> dict[str, bool]:
    """Whether each coproduct is fixed by slot swap combined with z -> -z."""
    return {g: h.deltas[g].swap().negate_z() == h.deltas[g] for g in GENERATORS}


def sigma_tilde_result(h: HopfData) -> CheckResult:
    res = {g: h.deltas[g].swap().negate_z() - h.deltas[g] for g in GENERATORS}
    return CheckResult.from_residuals("sigma_tilde", res)


def _counit_monomial(m, counit) -> object:
    v = mpq(1)
    for g, e in zip(GENERATORS, m):
        if e:
            v *= counit[g] ** e
    return v


def check_counit(h: HopfData, t: CommutatorTable | None = None) -> CheckResult:
    n = h.order
    res = {}
    for g in GENERATORS:
        left: dict = {}
        right: dict = {}
        for (a, b), s in h.deltas[g]._t.items():
            ea = _counit_monomial(a, h.counit)
            if ea:
                accumulate(left, {b: _one(n)}, tuple({k: v * ea for k, v in c.items()} for c in s), n, False)
            eb = _counit_monomial(b, h.counit)
            if eb:
                accumulate(right, {a: _one(n)}, tuple({k: v * eb for k, v in c.items()} for c in s), n, False)
        gen = AlgElement.generator(g, n)
        res[f"(eps x id){g}"] = AlgElement._raw(left, n) - gen
        res[f"(id x eps){g}"] = AlgElement._raw(right, n) - gen
    return CheckResult.from_residuals("counit", res)


@dataclass(frozen=True)
class Cocommutator3:
    """First-order skew part of the coproduct.

    ``images[g]`` maps ordered pairs (X, Y) with X < Y to the coefficient of
    z * X^Y, where X^Y = X(x)Y - Y(x)X.
    """

    images: dict = field(default_factory=dict)

    def coefficient(self, g: str, x: str, y: str) -> ParamPoly:
        if x == y:
            return ParamPoly.zero()
        if x > y:
            return -self.coefficient(g, y, x)
        return self.images.get(g, {}).get((x, y), ParamPoly.zero())

    def is_zero(self) -> bool:
        return all(not v for img in self.images.values() for v in img.values())

    def __str__(self):
        parts = []
        for g in GENERATORS:
            terms = [f"({c})*{x}^{y}" for (x, y), c in sorted(self.images.get(g, {}).items()) if c]
            parts.append(f"eta({g}) = z*(" + (" + ".join(terms) or "0") + ")")
        return "; ".join(parts)


def extract_cocommutator(h: HopfData) -> Cocommutator3:
    inv = {v: k for k, v in _UNIT.items()}
    images = {}
    for g in GENERATORS:
        d = h.deltas[g]
        skew = (d - d.swap()).scale(mpq(1, 2))
        layer = skew.z_layer(1) if h.order >= 1 else {}
        img = {}
        for (a, b), c in layer.items():
            if a not in inv or b not in inv:
                raise ValueError(f"first-order skew part of Delta({g}) is not linear in the generators")
            x, y = inv[a], inv[b]
            if x < y:
                img[(x, y)] = c
        images[g] = img
    return Cocommutator3(images)


# -- antipode --------------------------------------------------------------

class AntipodeError(ArithmeticError):
    pass


def _series_inverse(s: tuple, n: int) -> tuple:
    c0 = s[0]
    if not c0 or len(c0) != 1 or 0 not in c0:
        raise AntipodeError("leading coefficient is not an invertible constant")
    inv0 = 1 / c0[0]
    out = [{0: inv0}] + [EMPTY] * n
    for d in range(1, n + 1):
        acc = EMPTY
        for j in range(1, d + 1):
            if j < len(s) and s[j] and out[d - j]:
                acc = poly_add(acc, poly_mul(s[j], out[d - j]))
        out[d] = {k: -v * inv0 for k, v in acc.items()}
    return tuple(out)


def apply_antipode(x: AlgElement, gammas: dict, t: CommutatorTable, _cache=None) -> AlgElement:
    """Extend generator images as an anti-homomorphism."""
    n = x.order
    cache = {} if _cache is None else _cache
    acc: dict = {}
    for m, s in x._t.items():
        img = cache.get(m)
        if img is None:
            img = AlgElement.one(n)
            for ch in reversed(word_of(m)):
                img = multiply(img, gammas[ch], t)
            cache[m] = img
        accumulate(acc, img._t, s, n, False)
    return AlgElement._raw(acc, n)


def _axiom_side(d: TensorElement, gammas, t, side: str, cache) -> AlgElement:
    n = d.order
    acc: dict = {}
    for (a, b), s in d._t.items():
        if side == "left":
            x = multiply(apply_antipode(AlgElement._raw({a: _one(n)}, n), gammas, t, cache),
                         AlgElement._raw({b: _one(n)}, n), t)
        else:
            x = multiply(AlgElement._raw({a: _one(n)}, n),
                         apply_antipode(AlgElement._raw({b: _one(n)}, n), gammas, t, cache), t)
        accumulate(acc, x._t, s, n, False)
    return AlgElement._raw(acc, n)


def antipode_residual(x: AlgElement, h: HopfData, t: CommutatorTable, gammas=None, side="left") -> AlgElement:
    """m(S (x) id)Delta(x) - eps(x)1 (side="left") or its mirror (side="right")."""
    gammas = gammas or h.antipode
    if gammas is None:
        raise ValueError("no antipode available")
    n = x.order
    lhs = _axiom_side(coproduct_extend(x, h, t), gammas, t, side, {})
    eps = AlgElement.zero(n)
    for m, s in x._t.items():
        v = _counit_monomial(m, h.counit)
        if v:
            eps = eps + AlgElement._raw({ONE: s}, n).scale(v)
    return lhs - eps


def check_antipode(h: HopfData, t: CommutatorTable, gammas=None) -> CheckResult:
    gammas = gammas or h.antipode
    if gammas is None:
        gammas = solve_antipode(h, t, verify=False)
    res = {}
    cache_l: dict = {}
    cache_r: dict = {}
    n = h.order
    for g in GENERATORS:
        d = h.deltas[g]
        target = AlgElement.one(n).scale(h.counit[g]) if h.counit[g] else AlgElement.zero(n)
        res[f"m(S x id)Delta({g})"] = _axiom_side(d, gammas, t, "left", cache_l) - target
        res[f"m(id x S)Delta({g})"] = _axiom_side(d, gammas, t, "right", cache_r) - target
    return CheckResult.from_residuals("antipode", res)


def solve_antipode(h: HopfData, t: CommutatorTable, verify: bool = True) -> dict[str, AlgElement]:
    """Antipode images of A, B, C, found order by order in z.

    With Delta(g) = g(x)1 * s + rest, the left axiom gives
    S(g) = -(sum over rest of S(a) b) / s; S(a) only involves images already
    correct to lower order, so each sweep fixes one more power of z.
    """
    n = h.order
    if t.order != n:
        raise TruncationError("solve_antipode needs equal truncation orders")
    gammas = {g: -AlgElement.generator(g, n) for g in GENERATORS}
    head = {}
    for g in GENERATORS:
        s = h.deltas[g]._t.get((_UNIT[g], ONE))
        if s is None:
            raise AntipodeError(f"Delta({g}) has no {g}(x)1 term")
        head[g] = _series_inverse(s, n)
    for sweep in range(n + 2):
        cache: dict = {}
        new = {}
        for g in GENERATORS:
            acc: dict = {}
            for (a, b), s in h.deltas[g]._t.items():
                if (a, b) == (_UNIT[g], ONE):
                    continue
                x = multiply(apply_antipode(AlgElement._raw({a: _one(n)}, n), gammas, t, cache),
                             AlgElement._raw({b: _one(n)}, n), t)
                accumulate(acc, x._t, s, n, True)
            if h.counit[g]:
                accumulate(acc, {ONE: _one(n)}, ({0: h.counit[g]},) + (EMPTY,) * n, n, False)
            new[g] = AlgElement._raw(acc, n).scale(ZSeries._raw(head[g]))
        if new == gammas:
            break
        gammas = new
    else:
        raise AntipodeError("antipode iteration did not stabilise")
    if verify:
        result = check_antipode(h, t, gammas)
        if not result.passed:
            raise AntipodeError(f"antipode axioms fail from order z^{result.lowest_order}")
    return gammas


def all_checks(h: HopfData, t: CommutatorTable) -> list[CheckResult]:
    """Coassociativity, counit, homomorphism, sigma-tilde and antipode."""
    out = [check_coassociativity(h, t), check_counit(h, t), check_homomorphism(h, t), sigma_tilde_result(h)]
    try:
        gammas = h.antipode or solve_antipode(h, t, verify=False)
        out.append(check_antipode(h, t, gammas))
    except AntipodeError as exc:
        out.append(CheckResult("antipode", {"error": str(exc)}, 0, False))
    return out


__all__ = [
    "TensorElement", "Tensor3Element", "HopfData", "Cocommutator3", "CheckResult", "AntipodeError",
    "tensor_multiply", "coproduct_extend", "check_coassociativity", "check_homomorphism",
    "check_sigma_tilde", "sigma_tilde_result", "check_counit", "extract_cocommutator",
    "solve_antipode", "check_antipode", "apply_antipode", "antipode_residual", "all_checks",
]
