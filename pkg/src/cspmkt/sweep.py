"""Parameter grids evaluated through any of the solvers.

A sweep varies one or two parameters around a base parameter set and records
one cell per grid point.  Cells whose solve fails keep their error code, so
a grid is always complete.
"""

from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from cspmkt.constrained import ConstraintSpec, constrained_nash, feasible
from cspmkt.core import (
    CSPError,
    DuopolyParams,
    EquilibriumOutcome,
    InvalidParameterError,
    MonopolyParams,
    PriceQuad,
    SolverError,
    validate_duopoly,
)
from cspmkt.duopoly import nash_equilibrium
from cspmkt.monopoly import monopoly_equilibrium
from cspmkt.multihome import onesided_equilibrium

MODELS = ("monopoly", "duopoly", "constrained", "multihome")

MONOPOLY_KEYS = ("u0_b", "u0_c", "b_b", "b_c", "t_b", "t_c", "f_b", "f_c")
DUOPOLY_KEYS = ("alpha_n", "alpha_w", "beta_n", "beta_w", "t_b", "t_c", "f_wb", "f_nb", "f_wc", "f_nc", "u0_b", "u0_c")
AGGREGATE_KEYS = ("alpha_plus", "alpha_minus", "beta_plus", "beta_minus")
PRICE_DIFF_KEYS = ("p_nb_minus_p_wb", "p_nc_minus_p_wc")

# Inferred default ranges for the cross-side benefit sweeps.
DEFAULT_ALPHA_PLUS = (0.9, 2.7)
DEFAULT_ALPHA_MINUS = (-1.5, 1.5)


class SweepFailedError(SolverError):
    code = "all_cells_failed"


def axis_keys(model: str) -> tuple[str, ...]:
    if model == "monopoly":
        return MONOPOLY_KEYS
    if model in ("duopoly", "multihome"):
        return DUOPOLY_KEYS + AGGREGATE_KEYS + PRICE_DIFF_KEYS
    if model == "constrained":
        return DUOPOLY_KEYS + AGGREGATE_KEYS + PRICE_DIFF_KEYS + ("eta",)
    raise InvalidParameterError(f"unknown model {model!r}", where="sweep.axis_keys")


@dataclass(frozen=True)
class AxisSpec:
    key: str
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        where = "sweep.AxisSpec"
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise InvalidParameterError("axis bounds must be finite", where=where)
        if int(self.count) != self.count or self.count < 2:
            raise InvalidParameterError(f"count must be an integer >= 2, got {self.count!r}", where=where)
        if not self.lo < self.hi:
            raise InvalidParameterError(f"need min < max, got {self.lo!r} >= {self.hi!r}", where=where)

    @classmethod
    def parse(cls, text: str) -> "AxisSpec":
        """Parse ``key:min:max:count``."""
        parts = text.split(":")
        if len(parts) != 4:
            raise InvalidParameterError(f"axis must be key:min:max:count, got {text!r}", where="sweep.AxisSpec.parse")
        key, lo, hi, n = parts
        try:
            return cls(key, float(lo), float(hi), int(n))
        except ValueError as exc:
            raise InvalidParameterError(f"bad axis {text!r}: {exc}", where="sweep.AxisSpec.parse") from None

    def values(self) -> np.ndarray:
        step = (self.hi - self.lo) / (self.count - 1)
        v = self.lo + np.arange(self.count) * step
        v[-1] = self.hi
        return v


@dataclass(frozen=True)
class SweepOptions:
    """Per-sweep solver settings.

    ``verify`` turns on the duopoly deviation-grid and best-response checks
    in every cell; they are off by default because they dominate runtime.
    """

    eta: float | None = None
    constraint: ConstraintSpec | None = None
    verify: bool = False
    seed: int = 0
    threads: int | None = None


@dataclass(frozen=True)
class SweepCell:
    x_value: float
    y_value: float | None
    params: Union[MonopolyParams, DuopolyParams, None]
    outcome: EquilibriumOutcome | None
    error: str | None = None
    feasible: bool | None = None


@dataclass(frozen=True)
class SweepGrid:
    """Cells ordered with x as the outer index and y as the inner index."""

    model: str
    x: AxisSpec
    y: AxisSpec | None
    cells: tuple[SweepCell, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.x.count, self.y.count if self.y else 1)

    def cell(self, i: int, j: int = 0) -> SweepCell:
        return self.cells[i * self.shape[1] + j]

    def values_of(self, fn: Callable[[SweepCell], float]) -> np.ndarray:
        """Apply ``fn`` to every successful cell; failed cells become NaN."""
        out = np.full(self.shape, np.nan)
        for k, c in enumerate(self.cells):
            if c.outcome is not None:
                out[divmod(k, self.shape[1])] = fn(c)
        return out


def apply_overrides(model: str, base, values: dict[str, float]):
    """Return a copy of ``base`` with axis values applied.

    Aggregate keys are converted to per-platform rates using the base's
    other aggregate when only one of a pair is swept.  Price-difference and
    eta keys are not parameters and are ignored here.
    """
    prim = {k: v for k, v in values.items() if k not in AGGREGATE_KEYS + PRICE_DIFF_KEYS + ("eta",)}
    if model == "monopoly":
        return dataclasses.replace(base, **prim)
    out = dataclasses.replace(base, **prim) if prim else base
    for side, (n_key, w_key) in (("alpha", ("alpha_n", "alpha_w")), ("beta", ("beta_n", "beta_w"))):
        pk, mk = f"{side}_plus", f"{side}_minus"
        if pk in values or mk in values:
            plus = values.get(pk, getattr(out, pk))
            minus = values.get(mk, getattr(out, mk))
            out = dataclasses.replace(out, **{n_key: (plus + minus) / 2, w_key: (plus - minus) / 2})
    return out


def _price_point(params: DuopolyParams, values: dict[str, float], eta: float | None):
    """Outcome at w prices equal to cost and the given price differences."""
    d_b = values.get("p_nb_minus_p_wb", params.f_nb - params.f_wb)
    d_c = values.get("p_nc_minus_p_wc", params.f_nc - params.f_wc)
    quad = PriceQuad(params.f_wb, params.f_wb + d_b, params.f_wc, params.f_wc + d_c)
    cell = feasible(params, quad, math.inf if eta is None else eta)
    outcome = EquilibriumOutcome(model="price-point", prices=quad, participation=cell.participation,
                                 profits=cell.profits, conditions=validate_duopoly(params, cell.participation))
    return outcome, (cell.feasible if eta is not None else None)


def _evaluate(model: str, base, values: dict[str, float], options: SweepOptions):
    try:
        params = apply_overrides(model, base, values)
    except CSPError as exc:
        return None, None, exc.code, None
    try:
        if any(k in values for k in PRICE_DIFF_KEYS):
            eta = values.get("eta", options.eta)
            out, feas = _price_point(params, values, eta)
            return params, out, None, feas
        if model == "monopoly":
            return params, monopoly_equilibrium(params), None, None
        if model == "duopoly":
            return params, nash_equilibrium(params, seed=options.seed, verify=options.verify), None, None
        if model == "multihome":
            return params, onesided_equilibrium(params).to_outcome(params), None, None
        spec = options.constraint or ConstraintSpec(options.eta if options.eta is not None else math.inf)
        if "eta" in values:
            spec = dataclasses.replace(spec, eta=values["eta"])
        out = constrained_nash(params, spec)
        gap = out.participation.q_wc - out.participation.q_wb
        return params, out, None, bool(abs(gap) <= spec.eta)
    except CSPError as exc:
        return params, None, exc.code, None


def _threads(requested: int | None) -> int:
    env = os.environ.get("CSPMKT_THREADS")
    n = requested or os.cpu_count() or 1
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            pass
    return max(1, n)


def run_sweep(model: str, base, x: AxisSpec, y: AxisSpec | None = None,
              options: SweepOptions | None = None) -> SweepGrid:
    """Evaluate ``model`` on every grid point.

    A ``y`` axis with a single value, or no ``y`` at all, gives a 1-D sweep.
    Condition failures and solver errors mark the cell and never abort.
    """
    where = "sweep.run_sweep"
    if model not in MODELS:
        raise InvalidParameterError(f"unknown model {model!r}; expected one of {MODELS}", where=where)
    options = options or SweepOptions()
    allowed = axis_keys(model)
    for ax in (x, y):
        if ax is not None and ax.key not in allowed:
            raise InvalidParameterError(f"axis key {ax.key!r} is not valid for model {model!r}", where=where)
    if y is not None and y.key == x.key:
        raise InvalidParameterError("x and y axes must differ", where=where)

    xs = x.values()
    ys = y.values() if y is not None else [None]
    points = [(float(xv), None if yv is None else float(yv)) for xv in xs for yv in ys]

    def task(pt):
        vals = {x.key: pt[0]}
        if y is not None:
            vals[y.key] = pt[1]
        params, out, err, feas = _evaluate(model, base, vals, options)
        return SweepCell(pt[0], pt[1], params, out, err, feas)

    n = _threads(options.threads)
    if n == 1:
        cells = [task(pt) for pt in points]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            cells = list(pool.map(task, points))
    if all(c.outcome is None for c in cells):
        codes = sorted({c.error for c in cells if c.error})
        raise SweepFailedError(f"every cell failed ({', '.join(codes)})", where=where)
    return SweepGrid(model, x, y, tuple(cells))


# ---------------------------------------------------------------------------
# Thresholds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PriceBelowCost:
    """Price minus cost for one side of one platform (w for monopoly)."""

    side: str
    platform: str = "w"

    def quantity(self, cell: SweepCell) -> float:
        o = cell.outcome
        for ll in o.loss_leaders:
            if ll.platform == self.platform and ll.side == self.side:
                return ll.margin
        raise KeyError((self.platform, self.side))


@dataclass(frozen=True)
class ProfitLevel:
    value: float
    platform: str = "w"

    def quantity(self, cell: SweepCell) -> float:
        idx = 0 if self.platform == "w" else 1
        return cell.outcome.profits[idx] - self.value


@dataclass(frozen=True)
class Crossing:
    """Predicate flip between adjacent cells along ``axis``.

    ``at`` is the interpolated axis value; ``fixed`` is the other axis value
    (None for 1-D sweeps).
    """

    axis: str
    at: float
    fixed: float | None
    direction: str


def _crossings_1d(coords, qs):
    out = []
    for k in range(len(coords) - 1):
        q0, q1 = qs[k], qs[k + 1]
        if q0 is None or q1 is None:
            continue
        if (q0 < 0) != (q1 < 0):
            at = coords[k] + (coords[k + 1] - coords[k]) * (0 - q0) / (q1 - q0)
            out.append((at, "down" if q1 < 0 else "up"))
    return out


def find_threshold(grid: SweepGrid, predicate, along: str = "x") -> list[Crossing]:
    """Locate where ``predicate.quantity`` changes sign between neighbours.

    The predicate is taken to hold where the quantity is negative (price
    strictly below cost, profit strictly below the level).  Positions are
    linearly interpolated on the quantity.
    """
    nx, ny = grid.shape
    q = [[None] * ny for _ in range(nx)]
    for i in range(nx):
        for j in range(ny):
            c = grid.cell(i, j)
            if c.outcome is not None:
                q[i][j] = float(predicate.quantity(c))
    xs = grid.x.values()
    ys = grid.y.values() if grid.y is not None else [None]
    out = []
    if along == "x":
        for j in range(ny):
            for at, d in _crossings_1d(xs, [q[i][j] for i in range(nx)]):
                out.append(Crossing(grid.x.key, float(at), None if ys[j] is None else float(ys[j]), d))
    elif along == "y" and grid.y is not None:
        for i in range(nx):
            for at, d in _crossings_1d(ys, q[i]):
                out.append(Crossing(grid.y.key, float(at), float(xs[i]), d))
    else:
        raise InvalidParameterError(f"cannot search along {along!r}", where="sweep.find_threshold")
    return out
