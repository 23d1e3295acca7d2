"""CSV rendering for solve, sweep and verify results.

Reals are written with 17 significant digits so binary64 values survive a
round trip; lines end in LF.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields
from typing import Optional, Sequence

from .equilibrium import Equilibrium
from .game import GameInstance

SOLVE_HEADER = ["battlefield", "value", "r_b_star", "r_a_star", "z_star"]
FOOTER_HEADER = ["value_a", "value_b", "root_residual", "Dk_required", "Dk_actual"]


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def _writer(buf):
    return csv.writer(buf, lineterminator="\n")


def solve_csv(inst: GameInstance, eq: Equilibrium) -> str:
    """Per-battlefield table (canonical order; ``battlefield`` is the 1-based
    index in the caller's ordering) followed by a blank line and a footer."""
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(SOLVE_HEADER)
    for i in range(inst.n):
        w.writerow([inst.permutation[i] + 1, fmt(inst.values[i]),
                    fmt(eq.alloc_b.amounts[i]), fmt(eq.alloc_a.amounts[i]),
                    fmt(eq.gap.gaps[i])])
    w.writerow([])
    w.writerow(FOOTER_HEADER)
    w.writerow([fmt(eq.value_a), fmt(eq.value_b), fmt(eq.root_residual),
                fmt(eq.threshold.required_Dk), fmt(eq.threshold.actual_Dk)])
    return buf.getvalue()


@dataclass
class SolveTable:
    battlefield: list[int]
    values: list[float]
    r_b: list[float]
    r_a: list[float]
    z: list[float]
    footer: dict[str, float]


def read_solve_csv(text: str) -> SolveTable:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != SOLVE_HEADER:
        raise ValueError("not a solve CSV: header mismatch")
    try:
        split = rows.index(FOOTER_HEADER)
    except ValueError:
        raise ValueError("solve CSV has no footer") from None
    body = [r for r in rows[1:split] if r]
    table = SolveTable([], [], [], [], [], {})
    for r in body:
        table.battlefield.append(int(r[0]))
        table.values.append(float(r[1]))
        table.r_b.append(float(r[2]))
        table.r_a.append(float(r[3]))
        table.z.append(float(r[4]))
    table.footer = {k: float(x) for k, x in zip(FOOTER_HEADER, rows[split + 1])}
    return table


@dataclass(frozen=True)
class SweepRow:
    swept_value: float
    z_star: Optional[tuple[float, ...]]
    value_a: Optional[float]
    value_b: Optional[float]
    root_residual: Optional[float]
    threshold_satisfied: bool


def sweep_header(parameter: str, n: int) -> list[str]:
    return ([parameter] + [f"z_star_{i}" for i in range(1, n + 1)]
            + ["value_a", "value_b", "root_residual", "threshold_satisfied"])


def sweep_csv(parameter: str, n: int, rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(sweep_header(parameter, n))
    for row in sorted(rows, key=lambda r: r.swept_value):
        if row.threshold_satisfied:
            solution = ([fmt(z) for z in row.z_star]
                        + [fmt(row.value_a), fmt(row.value_b),
                           fmt(row.root_residual)])
        else:
            solution = [""] * (n + 3)
        w.writerow([fmt(row.swept_value)] + solution
                   + [fmt(row.threshold_satisfied)])
    return buf.getvalue()


def read_sweep_csv(text: str) -> list[SweepRow]:
    rows = list(csv.reader(io.StringIO(text)))
    n = len(rows[0]) - 5
    out = []
    for r in rows[1:]:
        ok = r[-1] == "true"
        out.append(SweepRow(
            swept_value=float(r[0]),
            z_star=tuple(float(x) for x in r[1:n + 1]) if ok else None,
            value_a=float(r[n + 1]) if ok else None,
            value_b=float(r[n + 2]) if ok else None,
            root_residual=float(r[n + 3]) if ok else None,
            threshold_satisfied=ok,
        ))
    return out


def report_csv(report) -> str:
    names = [f.name for f in fields(report)] + ["passed"]
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(names)
    w.writerow([fmt(getattr(report, name)) for name in names])
    return buf.getvalue()
