"""Deterministic report documents: JSON-lines machine output plus a human rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .algebra import AlgElement
from .kernel import ParamPoly, ZSeries, format_rational

FORMAT = "quantum3d-report"
VERSION = 1

PASS, FAIL, ERROR = "pass", "fail", "error"


def to_wire(value):
    """JSON-safe form: rationals and symbolic values become strings, never floats."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, (ParamPoly, ZSeries, AlgElement)):
        return str(value)
    if isinstance(value, dict):
        return {str(k): to_wire(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_wire(v) for v in value]
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        return format_rational(value)
    return str(value)


def check_record(check) -> dict:
    """Wire form of a CheckResult; failures carry the lowest failing z-order."""
    rec = {"name": check.name, "passed": check.passed, "lowest_order": check.lowest_order}
    if not check.passed:
        rec["failing"] = sorted(k if isinstance(k, str) else str(k)
                                for k, r in check.residuals.items() if not r.is_zero())
    return rec


@dataclass
class ReportDocument:
    command: str
    records: list = field(default_factory=list)

    def add(self, record: dict) -> None:
        self.records.append(to_wire(record))

    @property
    def status(self) -> str:
        states = {r.get("status", PASS) for r in self.records}
        if ERROR in states:
            return ERROR
        return FAIL if FAIL in states else PASS

    @property
    def exit_code(self) -> int:
        return {PASS: 0, FAIL: 1, ERROR: 1}[self.status]

    def sorted_records(self) -> list:
        return sorted(self.records, key=lambda r: (str(r.get("name", "")), json.dumps(r, sort_keys=True)))

    def machine(self) -> str:
        lines = [{"format": FORMAT, "version": VERSION, "command": self.command}]
        lines += self.sorted_records()
        counts = {s: sum(r.get("status") == s for r in self.records) for s in (PASS, FAIL, ERROR)}
        lines.append({"kind": "summary", "status": self.status, "exit_code": self.exit_code, **counts})
        return "".join(json.dumps(x, sort_keys=True, separators=(",", ":")) + "\n" for x in lines)

    def human(self) -> str:
        out = []
        for r in self.sorted_records():
            out.append(_human_record(r))
        n_fail = sum(r.get("status") != PASS for r in self.records)
        out.append(f"{self.command}: {len(self.records) - n_fail}/{len(self.records)} passed")
        return "\n".join(out) + "\n"

    def render(self, fmt: str) -> str:
        return self.machine() if fmt == "machine" else self.human()


_SKIP = {"kind", "name", "status", "checks", "N", "message", "table", "constraints", "note"}


def _human_record(r: dict) -> str:
    head = f"[{r.get('status', PASS).upper()}] {r.get('kind', '')} {r.get('name', '')}"
    if "N" in r:
        head += f" (N={r['N']})"
    lines = [head]
    if r.get("message"):
        lines.append(f"  {r['message']}")
    for c in r.get("checks", []):
        if c["passed"]:
            lines.append(f"  {c['name']}: ok")
        else:
            where = ", ".join(c.get("failing", []))
            lines.append(f"  {c['name']}: FAILED from z^{c['lowest_order']} ({where})")
    for k in sorted(set(r) - _SKIP):
        if r[k] in ({}, []):
            continue
        lines.append(f"  {k}: {_flat(r[k])}")
    if "table" in r:
        for k, v in sorted(r["table"].items()):
            lines.append(f"  {k} = {v}")
    if "constraints" in r:
        lines.append("  constraints:")
        lines.extend(f"    {c} = 0" for c in r["constraints"])
    if r.get("note"):
        lines.append(f"  note: {r['note']}")
    return "\n".join(lines)


def _flat(v) -> str:
    if isinstance(v, dict):
        return ", ".join(f"{k}={_flat(x)}" for k, x in sorted(v.items()))
    if isinstance(v, list):
        return "[" + ", ".join(_flat(x) for x in v) + "]"
    return str(v)
