"""Exact Gauss-Jordan elimination over the rationals.

Rows are sparse: a dict column -> coefficient plus a right-hand side.  Every
working row remembers which input rows it came from, so an inconsistent
system yields a certificate: a rational combination of the input equations
that reads ``0 = nonzero``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

from gmpy2 import mpq


@dataclass
class LinearSolution:
    """Outcome of :func:`solve_linear`.

    On success ``values`` holds every column (free columns set to zero) and
    ``free`` lists the columns left without a pivot.  On failure
    ``certificate`` maps input row indices to multipliers.
    """

    consistent: bool
    values: dict = field(default_factory=dict)
    free: list = field(default_factory=list)
    rank: int = 0
    certificate: dict | None = None


def solve_linear(rows: Sequence[tuple[dict, object]], columns: Sequence[Hashable]) -> LinearSolution:
    """Solve ``sum(row[c] * x[c]) = rhs`` for every row.

    ``columns`` fixes the pivot preference: earlier columns become pivots
    first, so trailing columns are the ones left free.
    """
    rank_of = {c: i for i, c in enumerate(columns)}
    work = []
    for idx, (coeffs, rhs) in enumerate(rows):
        r = {c: mpq(v) for c, v in coeffs.items() if v}
        for c in r:
            if c not in rank_of:
                raise KeyError(f"row {idx} uses unknown column {c!r}")
        work.append([r, mpq(rhs), {idx: mpq(1)}])

    pivots: dict = {}  # column -> pivot row
    for col in columns:
        pick = None
        for i, row in enumerate(work):
            if col in row[0]:
                pick = i
                break
        if pick is None:
            continue
        row = work.pop(pick)
        inv = 1 / row[0][col]
        row[0] = {c: v * inv for c, v in row[0].items()}
        row[1] *= inv
        row[2] = {k: v * inv for k, v in row[2].items()}
        for other in work:
            f = other[0].get(col)
            if f:
                _axpy(other, row, -f)
        for other in pivots.values():
            f = other[0].get(col)
            if f:
                _axpy(other, row, -f)
        pivots[col] = row

    for row in work:
        if not row[0] and row[1]:
            return LinearSolution(False, rank=len(pivots), certificate=dict(row[2]))

    # free columns are zero, so each pivot row reads x_col = rhs
    values = {c: mpq(0) for c in columns}
    for col, row in pivots.items():
        values[col] = row[1]
    free = [c for c in columns if c not in pivots]
    return LinearSolution(True, values=values, free=free, rank=len(pivots))


def _axpy(target, source, f):
    """target += f * source, on all three row parts."""
    tc = dict(target[0])
    for c, v in source[0].items():
        w = tc.get(c, 0) + f * v
        if w:
            tc[c] = w
        else:
            tc.pop(c, None)
    target[0] = tc
    target[1] = target[1] + f * source[1]
    to = dict(target[2])
    for k, v in source[2].items():
        w = to.get(k, 0) + f * v
        if w:
            to[k] = w
        else:
            to.pop(k, None)
    target[2] = to


def check_certificate(rows: Sequence[tuple[dict, object]], certificate: dict) -> bool:
    """True iff the combination annihilates every column but not the rhs."""
    acc: dict = {}
    rhs = mpq(0)
    for idx, f in certificate.items():
        coeffs, r = rows[idx]
        for c, v in coeffs.items():
            acc[c] = acc.get(c, 0) + f * v
        rhs += f * mpq(r)
    return all(v == 0 for v in acc.values()) and rhs != 0
