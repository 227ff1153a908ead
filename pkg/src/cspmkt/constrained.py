"""Duopoly with a cap on the commuter/worksite share gap.

A price quad is feasible when ``|q_wc - q_wb| <= eta``.  Under single-homing
the gap on platform n is the exact negative of the gap on w, so a single
check covers both platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from cspmkt.core import (
    CSPError,
    Diagnostics,
    DuopolyParams,
    EquilibriumOutcome,
    InfeasibleError,
    InvalidParameterError,
    NonConvergenceError,
    NonPositiveDemandDenominatorError,
    Participation,
    PriceQuad,
    loss_leader_flags,
    validate_duopoly,
)
from cspmkt.duopoly import _OWN, clamped_shares, duopoly_demand, duopoly_profits, nash_equilibrium

GAP_NOTE = "n-platform gap is the negative of the w-platform gap; one check covers both"


@dataclass(frozen=True)
class GridSpec:
    """Evenly spaced values ``lo, lo + step, ...`` ending exactly at ``hi``."""

    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and math.isfinite(self.step)):
            raise InvalidParameterError("grid bounds must be finite", where="constrained.GridSpec")
        if self.step <= 0 or self.lo > self.hi:
            raise InvalidParameterError(f"need step > 0 and lo <= hi, got {self}", where="constrained.GridSpec")

    @property
    def count(self) -> int:
        return int(round((self.hi - self.lo) / self.step)) + 1

    def values(self) -> np.ndarray:
        n = self.count
        v = self.lo + self.step * np.arange(n)
        v[-1] = self.hi
        return v


@dataclass(frozen=True)
class ConstraintSpec:
    """Gap cap and the grids used by the filter and the grid equilibrium.

    ``eta`` may be ``math.inf`` (no constraint) or 0 (exact balance).
    """

    eta: float
    price_grid: GridSpec = field(default_factory=lambda: GridSpec(0.0, 3.0, 0.01))
    diff_grid: GridSpec = field(default_factory=lambda: GridSpec(-1.0, 1.0, 0.02))

    def __post_init__(self):
        if math.isnan(self.eta) or self.eta < 0:
            raise InvalidParameterError(f"eta must be >= 0, got {self.eta!r}", where="constrained.ConstraintSpec")


@dataclass(frozen=True)
class FeasibleCell:
    prices: PriceQuad
    participation: Participation
    profits: tuple[float, float]
    feasible: bool
    gap: float
    note: str = GAP_NOTE


def feasible(params: DuopolyParams, prices: PriceQuad, eta: float) -> FeasibleCell:
    q = duopoly_demand(params, prices)
    gap = q.q_wc - q.q_wb
    return FeasibleCell(prices, q, duopoly_profits(params, prices), bool(abs(gap) <= eta), gap)


def feasible_region(params: DuopolyParams, spec: ConstraintSpec) -> list[FeasibleCell]:
    """Filter over the grid of (p_nb - p_wb, p_nc - p_wc).

    Platform w prices sit at cost; shares depend only on the differences.
    Cells are ordered with the worksite difference as the outer loop.
    """
    d = spec.diff_grid.values()
    cells = []
    for db in d:
        for dc in d:
            quad = PriceQuad(params.f_wb, params.f_wb + float(db), params.f_wc, params.f_wc + float(dc))
            cells.append(feasible(params, quad, spec.eta))
    return cells


def _own_response(params: DuopolyParams, platform: str, state: np.ndarray, grid: np.ndarray,
                  eta: float) -> np.ndarray | None:
    """Grid best response of one platform; None if no own cell is feasible."""
    i, j = _OWN[platform]
    pi, pj = np.meshgrid(grid, grid, indexing="ij")
    cand = np.broadcast_to(state, pi.shape + (4,)).copy()
    cand[..., i] = pi
    cand[..., j] = pj
    q_wb, q_wc = clamped_shares(params, cand)
    ok = np.abs(q_wc - q_wb) <= eta
    if not ok.any():
        return None
    if platform == "w":
        r = q_wb * (pi - params.f_wb) + q_wc * (pj - params.f_wc)
    else:
        r = (1 - q_wb) * (pi - params.f_nb) + (1 - q_wc) * (pj - params.f_nc)
    r = np.where(ok, r, -np.inf)
    k = int(np.argmax(r))  # first maximum = smallest (p_b, p_c)
    out = state.copy()
    out[i] = pi.flat[k]
    out[j] = pj.flat[k]
    return out


def _snap(x: np.ndarray, grid: np.ndarray) -> np.ndarray:
    idx = np.clip(np.searchsorted(grid, x), 1, len(grid) - 1)
    lower = grid[idx - 1]
    upper = grid[idx]
    return np.where(np.abs(x - lower) <= np.abs(upper - x), lower, upper)


def constrained_nash(params: DuopolyParams, spec: ConstraintSpec, *, max_rounds: int = 1000) -> EquilibriumOutcome:
    """Alternating grid best response under the gap cap.

    Platform w moves first in each round, then n; each picks the feasible
    grid pair maximising its own profit with the rival held fixed.  Profits
    and the gap use shares clamped to [0, 1].  A two-round cycle ends the
    search with the lexicographically smaller member and ``cycle=True``.
    """
    where = "constrained.constrained_nash"
    report = validate_duopoly(params)
    if not report["B3-proof"].passed:
        raise NonPositiveDemandDenominatorError("B3-proof failed: demand is undefined", report, where=where)
    grid = spec.price_grid.values()
    try:
        start = np.array(nash_equilibrium(params, verify=False).prices.as_tuple())
    except CSPError:
        start = np.array([params.f_wb, params.f_nb, params.f_wc, params.f_nc])
    state = _snap(start, grid)

    history = [state]
    cycle = False
    for rounds in range(1, max_rounds + 1):
        nxt = state
        for plat in ("w", "n"):
            nxt = _own_response(params, plat, nxt, grid, spec.eta)
            if nxt is None:
                raise InfeasibleError(f"no feasible grid price for platform {plat} at eta={spec.eta}", where=where)
        if np.array_equal(nxt, state):
            break
        if len(history) >= 2 and np.array_equal(nxt, history[-2]):
            cycle = True
            state = min(state, nxt, key=lambda v: tuple(v))
            break
        history.append(nxt)
        state = nxt
    else:
        raise NonConvergenceError(f"no fixed point after {max_rounds} rounds", where=where,
                                  payload=[tuple(map(float, h)) for h in history[-10:]])

    quad = PriceQuad(*map(float, state))
    part = duopoly_demand(params, quad)
    gap = part.q_wc - part.q_wb
    costs = (("w", "b", params.f_wb), ("n", "b", params.f_nb), ("w", "c", params.f_wc), ("n", "c", params.f_nc))
    notes = (GAP_NOTE,) + (("best response cycles between two grid points",) if cycle else ())
    return EquilibriumOutcome(
        model="constrained",
        prices=quad,
        participation=part,
        profits=duopoly_profits(params, quad),
        conditions=validate_duopoly(params, part),
        loss_leaders=loss_leader_flags(quad, costs),
        diagnostics=Diagnostics(iterations=rounds, cycle=cycle, achieved_gap=gap),
        notes=notes,
    )
