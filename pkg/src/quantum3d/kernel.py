"""Exact scalars: rationals, parameter polynomials and truncated z-series.

Rationals are ``gmpy2.mpq`` values (always in lowest terms).  Parameter
polynomials live over the closed name set :data:`PARAMETERS`; the quantizer
additionally uses private solver unknowns ``u0, u1, ...`` that cannot be
created through the public constructors.

Exponent vectors are packed into one integer, 16 bits per variable, so that
multiplying monomials is integer addition.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping

from gmpy2 import mpq

from ._backend import (
    EMPTY,
    FIELD_BITS,
    MAX_VARS,
    poly_add,
    poly_mul,
    poly_neg,
    poly_scale,
    poly_sub,
    series_add,
    series_low,
    series_mul,
    series_neg,
    series_scale,
    series_sub,
)

PARAMETERS = ("a1", "a2", "a3", "b1", "b2", "b3", "c1", "c2", "c3", "rho")
_INDEX = {name: i for i, name in enumerate(PARAMETERS)}
_MASK = (1 << FIELD_BITS) - 1
MAX_UNKNOWNS = MAX_VARS - len(PARAMETERS)

Rational = type(mpq(0))
_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


class TruncationError(ValueError):
    """Operands carry different truncation orders."""


def rational(value) -> Rational:
    """Coerce ints, rationals and ``"p/q"`` strings to an exact rational.

    Floats are rejected: nothing in this package is approximate.
    """
    if isinstance(value, Rational):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        m = _RATIONAL_RE.match(value)
        if not m:
            raise ValueError(f"malformed rational {value!r}")
        num, den = m.group(1), m.group(2)
        if den is not None and int(den) == 0:
            raise ZeroDivisionError(f"zero denominator in {value!r}")
        return mpq(int(num), int(den) if den else 1)
    if hasattr(value, "numerator") and hasattr(value, "denominator") and not isinstance(value, float):
        return mpq(int(value.numerator), int(value.denominator))
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def format_rational(q) -> str:
    return str(rational(q))


def _var_name(i: int) -> str:
    return PARAMETERS[i] if i < len(PARAMETERS) else f"u{i - len(PARAMETERS)}"


def unpack(key: int) -> tuple[int, ...]:
    """Exponent vector of a packed monomial, without trailing zeros."""
    out = []
    while key:
        out.append(key & _MASK)
        key >>= FIELD_BITS
    return tuple(out)


def pack(exps: Iterable[int]) -> int:
    key = 0
    for i, e in enumerate(exps):
        if e < 0 or e >= 1 << (FIELD_BITS - 1):
            raise ValueError(f"exponent {e} out of range")
        key |= e << (FIELD_BITS * i)
    return key


def _order_key(key: int):
    exps = unpack(key)
    return (sum(exps), exps)


def _as_poly_dict(x) -> dict:
    if isinstance(x, ParamPoly):
        return x._t
    q = rational(x)
    return {0: q} if q else EMPTY


class ParamPoly:
    """Sparse polynomial with exact rational coefficients.

    Terms are iterated in graded lexicographic order (a1 > a2 > ... > rho),
    highest first.  Instances are immutable and hashable.
    """

    __slots__ = ("_t", "_h")

    def __init__(self, terms: Mapping | None = None):
        # ``terms`` maps exponent tuples (or packed ints) to coefficients.
        t = {}
        if terms:
            for k, v in terms.items():
                key = k if isinstance(k, int) else pack(k)
                if key >> (FIELD_BITS * len(PARAMETERS)):
                    raise ValueError("only the fixed parameter names are allowed")
                q = rational(v)
                if q:
                    t[key] = t.get(key, 0) + q
            t = {k: v for k, v in t.items() if v}
        self._t = t
        self._h = None

    @classmethod
    def _raw(cls, d: dict) -> "ParamPoly":
        p = object.__new__(cls)
        p._t = d
        p._h = None
        return p

    @classmethod
    def zero(cls) -> "ParamPoly":
        return cls._raw(EMPTY)

    @classmethod
    def const(cls, q) -> "ParamPoly":
        return cls._raw(_as_poly_dict(q))

    @classmethod
    def var(cls, name: str) -> "ParamPoly":
        if name not in _INDEX:
            raise ValueError(f"unknown parameter {name!r}; allowed: {', '.join(PARAMETERS)}")
        return cls._raw({1 << (FIELD_BITS * _INDEX[name]): mpq(1)})

    @classmethod
    def _unknown(cls, i: int) -> "ParamPoly":
        if not 0 <= i < MAX_UNKNOWNS:
            raise ValueError("solver unknown index out of range")
        return cls._raw({unknown_key(i): mpq(1)})

    @classmethod
    def parse(cls, text: str) -> "ParamPoly":
        """Parse a rational or a bare parameter name."""
        text = text.strip()
        if text in _INDEX:
            return cls.var(text)
        return cls.const(rational(text))

    # -- queries ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self) -> bool:
        return bool(self._t)

    def is_constant(self) -> bool:
        return not self._t or (len(self._t) == 1 and 0 in self._t)

    def constant_value(self) -> Rational:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self._t.get(0, mpq(0))

    def terms(self) -> list[tuple[tuple[int, ...], Rational]]:
        keys = sorted(self._t, key=_order_key, reverse=True)
        return [(unpack(k), self._t[k]) for k in keys]

    def variables(self) -> set[str]:
        out = set()
        for k in self._t:
            for i, e in enumerate(unpack(k)):
                if e:
                    out.add(_var_name(i))
        return out

    def degree(self) -> int:
        return max((sum(unpack(k)) for k in self._t), default=-1)

    def leading(self) -> tuple[int, Rational]:
        if not self._t:
            raise ValueError("zero polynomial has no leading term")
        k = max(self._t, key=_order_key)
        return k, self._t[k]

    def monic(self) -> "ParamPoly":
        if not self._t:
            return self
        _, c = self.leading()
        return ParamPoly._raw(poly_scale(self._t, 1 / c))

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        try:
            return ParamPoly._raw(poly_add(self._t, _as_poly_dict(other)))
        except TypeError:
            return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        try:
            return ParamPoly._raw(poly_sub(self._t, _as_poly_dict(other)))
        except TypeError:
            return NotImplemented

    def __rsub__(self, other):
        try:
            return ParamPoly._raw(poly_sub(_as_poly_dict(other), self._t))
        except TypeError:
            return NotImplemented

    def __neg__(self):
        return ParamPoly._raw(poly_neg(self._t))

    def __mul__(self, other):
        if isinstance(other, ParamPoly):
            return ParamPoly._raw(poly_mul(self._t, other._t))
        try:
            return ParamPoly._raw(poly_scale(self._t, rational(other)))
        except TypeError:
            return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        out = ParamPoly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __truediv__(self, other):
        q = rational(other.constant_value() if isinstance(other, ParamPoly) else other)
        return ParamPoly._raw(poly_scale(self._t, 1 / q))

    def divide_exact(self, other: "ParamPoly") -> "ParamPoly | None":
        """Quotient if ``other`` divides ``self`` exactly, else ``None``."""
        if not other._t:
            raise ZeroDivisionError("division by the zero polynomial")
        lk, lc = other.leading()
        lexp = unpack(lk)
        rem = dict(self._t)
        quot: dict = {}
        while rem:
            k = max(rem, key=_order_key)
            exps = unpack(k)
            if len(exps) < len(lexp):
                return None
            diff = [a - (lexp[i] if i < len(lexp) else 0) for i, a in enumerate(exps)]
            if min(diff) < 0:
                return None
            qk = pack(diff)
            qc = rem[k] / lc
            quot[qk] = qc
            rem = poly_sub(rem, poly_mul({qk: qc}, other._t))
        return ParamPoly._raw(quot)

    # -- substitution ----------------------------------------------------
    def substitute(self, bindings: Mapping[str, object]) -> "ParamPoly":
        """Replace named parameters by rationals (or polynomials)."""
        if not bindings or not self._t:
            return self
        values = {}
        for name, val in bindings.items():
            if name in _INDEX:
                idx = _INDEX[name]
            elif name.startswith("u") and name[1:].isdigit():
                idx = len(PARAMETERS) + int(name[1:])
            else:
                raise ValueError(f"unknown parameter {name!r}")
            values[idx] = _as_poly_dict(val)
        out: dict = {}
        for key, coeff in self._t.items():
            exps = unpack(key)
            keep = []
            factor = {0: coeff}
            for i, e in enumerate(exps):
                if e and i in values:
                    keep.append(0)
                    v = values[i]
                    for _ in range(e):
                        factor = poly_mul(factor, v)
                else:
                    keep.append(e)
            if factor:
                out = poly_add(out, poly_mul(factor, {pack(keep): mpq(1)}))
        return ParamPoly._raw(out)

    # -- comparison / display -------------------------------------------
    def __eq__(self, other):
        if isinstance(other, ParamPoly):
            return self._t == other._t
        try:
            return self._t == _as_poly_dict(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        if self._h is None:
            self._h = hash(frozenset(self._t.items()))
        return self._h

    def __str__(self):
        if not self._t:
            return "0"
        parts = []
        for exps, c in self.terms():
            names = []
            for i, e in enumerate(exps):
                if e:
                    names.append(_var_name(i) if e == 1 else f"{_var_name(i)}^{e}")
            mono = "*".join(names)
            if not mono:
                s = str(abs(c))
            elif abs(c) == 1:
                s = mono
            else:
                s = f"{abs(c)}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, s))
        head_sign, head = parts[0]
        text = ("-" if head_sign == "-" else "") + head
        for sign, s in parts[1:]:
            text += f" {sign} {s}"
        return text

    def __repr__(self):
        return f"ParamPoly({self})"


def unknown_key(i: int) -> int:
    return 1 << (FIELD_BITS * (len(PARAMETERS) + i))


def _coeff_dict(c) -> dict:
    return _as_poly_dict(c)


class ZSeries:
    """Power series in z truncated after degree ``order``.

    Coefficients are :class:`ParamPoly` values.  All arithmetic drops degrees
    above the truncation order; mixing orders raises :class:`TruncationError`.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable, order: int | None = None):
        c = [_coeff_dict(x) for x in coeffs]
        if order is not None:
            if order < 0:
                raise ValueError("truncation order must be nonnegative")
            c = (c + [EMPTY] * (order + 1))[: order + 1]
        if not c:
            raise ValueError("a series needs a truncation order")
        self._c = tuple(c)

    @classmethod
    def _raw(cls, c: tuple) -> "ZSeries":
        s = object.__new__(cls)
        s._c = c
        return s

    @classmethod
    def zero(cls, order: int) -> "ZSeries":
        return cls._raw((EMPTY,) * (order + 1))

    @classmethod
    def const(cls, value, order: int) -> "ZSeries":
        return cls._raw((_coeff_dict(value),) + (EMPTY,) * order)

    @classmethod
    def monomial(cls, value, degree: int, order: int) -> "ZSeries":
        c = [EMPTY] * (order + 1)
        if degree <= order:
            c[degree] = _coeff_dict(value)
        return cls._raw(tuple(c))

    @property
    def order(self) -> int:
        return len(self._c) - 1

    def coeff(self, d: int) -> ParamPoly:
        if d < 0 or d > self.order:
            return ParamPoly.zero()
        return ParamPoly._raw(self._c[d])

    def coeffs(self) -> list[ParamPoly]:
        return [ParamPoly._raw(c) for c in self._c]

    def is_zero(self) -> bool:
        return series_low(self._c) < 0

    def lowest_order(self) -> int | None:
        lo = series_low(self._c)
        return None if lo < 0 else lo

    def _check(self, other: "ZSeries"):
        if len(other._c) != len(self._c):
            raise TruncationError(f"truncation orders differ: {self.order} vs {other.order}")

    def __add__(self, other):
        if not isinstance(other, ZSeries):
            return NotImplemented
        self._check(other)
        return ZSeries._raw(series_add(self._c, other._c))

    def __sub__(self, other):
        if not isinstance(other, ZSeries):
            return NotImplemented
        self._check(other)
        return ZSeries._raw(series_sub(self._c, other._c))

    def __neg__(self):
        return ZSeries._raw(series_neg(self._c))

    def __mul__(self, other):
        if isinstance(other, ZSeries):
            self._check(other)
            return ZSeries._raw(series_mul(self._c, other._c, self.order))
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    __rmul__ = __mul__

    def scale(self, c) -> "ZSeries":
        return ZSeries._raw(series_scale(self._c, _coeff_dict(c)))

    def negate_z(self) -> "ZSeries":
        return ZSeries._raw(tuple(poly_neg(c) if i % 2 else c for i, c in enumerate(self._c)))

    def rescale_z(self, factor) -> "ZSeries":
        """Substitute z -> factor * z."""
        f = rational(factor)
        return ZSeries._raw(tuple(poly_scale(c, f ** i) for i, c in enumerate(self._c)))

    def div_z(self) -> "ZSeries":
        """Divide by z; the result has truncation order one lower."""
        if self._c[0]:
            raise ValueError("div_z needs a vanishing constant term")
        if len(self._c) == 1:
            raise ValueError("div_z of an order-0 series leaves nothing")
        return ZSeries._raw(self._c[1:])

    def mul_z(self) -> "ZSeries":
        """Multiply by z; the result has truncation order one higher."""
        return ZSeries._raw((EMPTY,) + self._c)

    def truncate(self, order: int) -> "ZSeries":
        if order > self.order:
            raise TruncationError("cannot extend a truncated series")
        return ZSeries._raw(self._c[: order + 1])

    def parity_check(self, parity: str) -> bool:
        if parity not in ("even", "odd"):
            raise ValueError("parity must be 'even' or 'odd'")
        skip = 1 if parity == "even" else 0
        return all(not c for i, c in enumerate(self._c) if i % 2 == skip)

    def is_even(self) -> bool:
        return self.parity_check("even")

    def is_odd(self) -> bool:
        return self.parity_check("odd")

    def substitute(self, bindings) -> "ZSeries":
        return ZSeries._raw(tuple(ParamPoly._raw(c).substitute(bindings)._t for c in self._c))

    def __eq__(self, other):
        if not isinstance(other, ZSeries):
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(tuple(frozenset(c.items()) for c in self._c))

    def __str__(self):
        parts = []
        for i, c in enumerate(self._c):
            if not c:
                continue
            p = str(ParamPoly._raw(c))
            zs = "" if i == 0 else ("z" if i == 1 else f"z^{i}")
            if not zs:
                parts.append(p)
            elif p == "1":
                parts.append(zs)
            elif len(c) == 1 and "+" not in p[1:] and " - " not in p:
                parts.append(f"{p}*{zs}" if p != "-1" else f"-{zs}")
            else:
                parts.append(f"({p})*{zs}")
        if not parts:
            return f"0 + O(z^{self.order + 1})"
        return " + ".join(parts) + f" + O(z^{self.order + 1})"

    def __repr__(self):
        return f"ZSeries({self})"


def poly_arith(lhs: ParamPoly, rhs: ParamPoly, op: str) -> ParamPoly:
    if op == "add":
        return lhs + rhs
    if op == "sub":
        return lhs - rhs
    if op == "mul":
        return lhs * rhs
    raise ValueError(f"unknown op {op!r}")


def poly_substitute(p: ParamPoly, bindings: Mapping[str, object]) -> ParamPoly:
    return p.substitute(bindings)


def series_arith(lhs: ZSeries, rhs, op: str) -> ZSeries:
    if op == "add":
        return lhs + rhs
    if op == "mul":
        return lhs * rhs
    if op == "scale":
        return lhs.scale(rhs)
    raise ValueError(f"unknown op {op!r}")


def series_transform(s: ZSeries, op: str, parity: str | None = None):
    if op == "negate_z":
        return s.negate_z()
    if op == "div_z":
        return s.div_z()
    if op == "parity_check":
        return s.parity_check(parity or "even")
    raise ValueError(f"unknown op {op!r}")
