"""JSON and CSV rendering of outcomes, reports and sweep grids."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from typing import Any

from cspmkt.core import (
    Condition,
    ConditionReport,
    Diagnostics,
    EquilibriumOutcome,
    LossLeader,
    MonopolyParticipation,
    Participation,
    PricePair,
    PriceQuad,
)
from cspmkt.sweep import SweepGrid

CSV_COLUMNS = ("x_key", "x_value", "y_key", "y_value", "p_wb", "p_nb", "p_wc", "p_nc", "q_wb", "q_wc",
               "q_nb", "q_nc", "r_w", "r_n", "gap", "feasible", "cond_flags", "error")


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def report_to_dict(report: ConditionReport) -> list[dict]:
    return [{"id": c.id, "margin": c.margin, "pass": c.passed, "note": c.note} for c in report]


def report_from_dict(data: list[dict]) -> ConditionReport:
    return ConditionReport(tuple(Condition(d["id"], d["margin"], d["pass"], d["note"]) for d in data))


def outcome_to_dict(outcome: EquilibriumOutcome) -> dict[str, Any]:
    o = outcome
    if isinstance(o.prices, PricePair):
        prices = {"p_b": o.prices.p_b, "p_c": o.prices.p_c}
    else:
        prices = dict(zip(("p_wb", "p_nb", "p_wc", "p_nc"), o.prices.as_tuple()))
    pt = o.participation
    if isinstance(pt, MonopolyParticipation):
        part = {"q_b": pt.q_b, "q_c": pt.q_c, "valid": pt.valid}
    else:
        part = {"q_wb": pt.q_wb, "q_wc": pt.q_wc, "q_nb": pt.q_nb, "q_nc": pt.q_nc,
                "Q_b": pt.Q_b, "Q_c": pt.Q_c, "valid": pt.valid}
    d = o.diagnostics
    return {
        "model": o.model,
        "prices": prices,
        "participation": part,
        "profits": list(o.profits),
        "conditions": report_to_dict(o.conditions),
        "loss_leaders": [{"platform": l.platform, "side": l.side, "flagged": l.flagged, "margin": l.margin}
                         for l in o.loss_leaders],
        "diagnostics": {
            "foc_residual": d.foc_residual,
            "iterations": d.iterations,
            "deviation_gain": d.deviation_gain,
            "hessian_negdef": list(d.hessian_negdef),
            "br_converged": d.br_converged,
            "cycle": d.cycle,
            "achieved_gap": d.achieved_gap,
            "active_bounds": list(d.active_bounds),
        },
        "notes": list(o.notes),
    }


def outcome_from_dict(data: dict[str, Any]) -> EquilibriumOutcome:
    pr = data["prices"]
    prices = PricePair(pr["p_b"], pr["p_c"]) if "p_b" in pr else PriceQuad(pr["p_wb"], pr["p_nb"], pr["p_wc"], pr["p_nc"])
    pt = data["participation"]
    if "q_b" in pt:
        part = MonopolyParticipation(pt["q_b"], pt["q_c"], pt["valid"])
    else:
        part = Participation(pt["q_wb"], pt["q_wc"], pt["q_nb"], pt["q_nc"], pt["Q_b"], pt["Q_c"], pt["valid"])
    dg = data["diagnostics"]
    diag = Diagnostics(
        foc_residual=dg["foc_residual"], iterations=dg["iterations"], deviation_gain=dg["deviation_gain"],
        hessian_negdef=tuple(dg["hessian_negdef"]), br_converged=dg["br_converged"], cycle=dg["cycle"],
        achieved_gap=dg["achieved_gap"], active_bounds=tuple(dg["active_bounds"]),
    )
    return EquilibriumOutcome(
        model=data["model"],
        prices=prices,
        participation=part,
        profits=tuple(data["profits"]),
        conditions=report_from_dict(data["conditions"]),
        loss_leaders=tuple(LossLeader(l["platform"], l["side"], l["flagged"], l["margin"]) for l in data["loss_leaders"]),
        diagnostics=diag,
        notes=tuple(data["notes"]),
    )


def grid_to_dict(grid: SweepGrid) -> dict[str, Any]:
    def axis(a):
        return None if a is None else {"key": a.key, "min": a.lo, "max": a.hi, "count": a.count}

    return {
        "model": grid.model,
        "x": axis(grid.x),
        "y": axis(grid.y),
        "cells": [{"x_value": c.x_value, "y_value": c.y_value, "error": c.error, "feasible": c.feasible,
                   "outcome": None if c.outcome is None else outcome_to_dict(c.outcome)} for c in grid.cells],
    }


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _num(v: float | None) -> str:
    if v is None:
        return ""
    return repr(float(v))


def _flags(report: ConditionReport) -> str:
    return ";".join(f"{c.id}:{'P' if c.passed else 'F'}" for c in report)


def _row(outcome: EquilibriumOutcome | None, feasible: bool | None = None, error: str | None = None) -> dict:
    row = dict.fromkeys(CSV_COLUMNS, "")
    if outcome is not None:
        pr, pt = outcome.prices, outcome.participation
        if isinstance(pr, PricePair):
            row.update(p_wb=_num(pr.p_b), p_wc=_num(pr.p_c), q_wb=_num(pt.q_b), q_wc=_num(pt.q_c),
                       r_w=_num(outcome.profits[0]), gap=_num(pt.q_c - pt.q_b))
        else:
            row.update(p_wb=_num(pr.p_wb), p_nb=_num(pr.p_nb), p_wc=_num(pr.p_wc), p_nc=_num(pr.p_nc),
                       q_wb=_num(pt.q_wb), q_wc=_num(pt.q_wc), q_nb=_num(pt.q_nb), q_nc=_num(pt.q_nc),
                       r_w=_num(outcome.profits[0]), r_n=_num(outcome.profits[1]), gap=_num(pt.q_wc - pt.q_wb))
        row["cond_flags"] = _flags(outcome.conditions)
    if feasible is not None:
        row["feasible"] = "true" if feasible else "false"
    if error:
        row["error"] = error
    return row


def _write_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def outcome_to_csv(outcome: EquilibriumOutcome, feasible: bool | None = None) -> str:
    return _write_csv([_row(outcome, feasible)])


def grid_to_csv(grid: SweepGrid) -> str:
    rows = []
    for c in grid.cells:
        row = _row(c.outcome, c.feasible, c.error)
        row.update(x_key=grid.x.key, x_value=_num(c.x_value))
        if grid.y is not None:
            row.update(y_key=grid.y.key, y_value=_num(c.y_value))
        rows.append(row)
    return _write_csv(rows)


def report_to_csv(report: ConditionReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("id", "margin", "pass", "note"))
    for c in report:
        w.writerow((c.id, _num(c.margin), "true" if c.passed else "false", c.note))
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------

def atomic_write(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".cspmkt-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
