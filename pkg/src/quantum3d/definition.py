"""Parsing of case definition files (JSON objects; schema in docs/definition-schema.md)."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .kernel import PARAMETERS, ParamPoly, rational
from .quantizer import STRUCTURE_CONSTANTS

FIELDS = {"name", "preset", "N", "rho", "coproduct", "r_matrix", "params", *STRUCTURE_CONSTANTS}
COPRODUCTS = ("standard", "primitive")
_R_KEYS = ("AB", "AC", "BC")


class DefinitionError(ValueError):
    """Invalid definition; the message names the offending field and line."""


@dataclass
class CaseDefinition:
    name: str
    preset: str | None = None
    order: int = 6
    constants: dict = field(default_factory=dict)
    rho: ParamPoly | None = None
    coproduct: str | None = None
    r_matrix: dict | None = None
    params: dict = field(default_factory=dict)

    def is_concrete(self) -> bool:
        vals = list(self.constants.values()) + ([self.rho] if self.rho is not None else [])
        return all(v.is_constant() for v in vals)


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _where(text: str, key: str) -> str:
    line = _line_of(text, key)
    return f"field {key!r}" + (f" (line {line})" if line else "")


def _value(text: str, key: str, raw, allow_symbol: bool = True) -> ParamPoly:
    if isinstance(raw, bool) or not isinstance(raw, (int, str)):
        raise DefinitionError(f"{_where(text, key)}: expected a rational string like \"2/3\", got {raw!r}")
    if isinstance(raw, int):
        return ParamPoly.const(raw)
    s = raw.strip()
    if allow_symbol and s in PARAMETERS:
        return ParamPoly.var(s)
    try:
        return ParamPoly.const(rational(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise DefinitionError(f"{_where(text, key)}: malformed rational {raw!r} ({exc})") from None


def _rational_value(text: str, key: str, raw):
    p = _value(text, key, raw, allow_symbol=False)
    return p.constant_value()


def parse_definition(text: str, order_override: int | None = None) -> CaseDefinition:
    """Validate a definition document; every problem raises DefinitionError."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DefinitionError(f"line {exc.lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(doc, dict):
        raise DefinitionError("line 1: a definition must be a JSON object")
    unknown = sorted(set(doc) - FIELDS)
    if unknown:
        raise DefinitionError(f"{_where(text, unknown[0])}: unknown field; allowed fields: {', '.join(sorted(FIELDS))}")
    if "N" not in doc and order_override is None:
        raise DefinitionError("missing required field 'N'")
    n = order_override if order_override is not None else doc["N"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise DefinitionError(f"{_where(text, 'N')}: truncation order must be an integer")
    if n < 2:
        raise DefinitionError(f"{_where(text, 'N')}: truncation order must be at least 2, got {n}")
    preset = doc.get("preset")
    if preset is not None and not isinstance(preset, str):
        raise DefinitionError(f"{_where(text, 'preset')}: expected a case identifier string")
    if preset is None and "rho" not in doc:
        raise DefinitionError("missing required field 'rho' (or name a 'preset')")
    name = doc.get("name", preset or "custom")
    if not isinstance(name, str):
        raise DefinitionError(f"{_where(text, 'name')}: expected a string")
    constants = {}
    for k in STRUCTURE_CONSTANTS:
        if k in doc:
            constants[k] = _value(text, k, doc[k])
        elif preset is None:
            constants[k] = ParamPoly.zero()
    if preset is not None and constants:
        raise DefinitionError(f"{_where(text, next(iter(constants)))}: structure constants come from the preset; use 'params'")
    rho = _value(text, "rho", doc["rho"]) if "rho" in doc else None
    cop = doc.get("coproduct")
    if cop is not None and cop not in COPRODUCTS:
        raise DefinitionError(f"{_where(text, 'coproduct')}: expected one of {', '.join(COPRODUCTS)}")
    r = doc.get("r_matrix")
    if r is not None:
        if not isinstance(r, dict) or set(r) - set(_R_KEYS):
            raise DefinitionError(f"{_where(text, 'r_matrix')}: expected an object with keys among AB, AC, BC")
        r = {k: _rational_value(text, k, v) for k, v in r.items()}
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise DefinitionError(f"{_where(text, 'params')}: expected an object of name: rational")
    params = {k: _rational_value(text, k, v) for k, v in params.items()}
    return CaseDefinition(name=name, preset=preset, order=n, constants=constants, rho=rho, coproduct=cop,
                          r_matrix=r, params=params)


def parse_params(text: str | None) -> dict:
    """Parse ``k=v,k=v`` with exact rational values."""
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise DefinitionError(f"--params: expected key=value, got {item!r}")
        k, v = (s.strip() for s in item.split("=", 1))
        try:
            out[k] = rational(v)
        except (ValueError, ZeroDivisionError) as exc:
            raise DefinitionError(f"--params: malformed rational for {k!r}: {v!r} ({exc})") from None
    return out
