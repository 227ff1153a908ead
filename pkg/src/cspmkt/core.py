"""Shared domain types, errors and condition reporting.

Every solver in the package consumes the parameter records defined here and
returns an :class:`EquilibriumOutcome`.  All records are frozen dataclasses;
operations never mutate their inputs.

Naming follows the usual platform notation: side ``b`` is worksites, side
``c`` is commuters, platform ``w`` is the work-flex operator and ``n`` the
non-work-flex operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Iterable, Iterator

#: Slack allowed before a participation fraction is declared out of range.
SHARE_TOL = 1e-9


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class CSPError(Exception):
    """Base class for all solver errors.

    ``code`` is the short identifier written to sweep cells and CSV output;
    ``where`` names the module and operation that raised.
    """

    code = "error"

    def __init__(self, message: str, *, where: str = "", payload: object = None):
        self.where = where
        self.payload = payload
        super().__init__(f"[{where}] {message}" if where else message)


class InvalidParameterError(CSPError, ValueError):
    code = "invalid_parameter"


class DegenerateDemandError(CSPError):
    code = "degenerate_demand"


class UndefinedElasticityError(CSPError):
    code = "undefined_elasticity"


class ConditionError(CSPError):
    """A gating condition failed; ``report`` carries the full ConditionReport."""

    code = "condition_failed"

    def __init__(self, message: str, report: "ConditionReport", *, where: str = ""):
        super().__init__(message, where=where, payload=report)
        self.report = report


class NonConcaveProfitError(ConditionError):
    code = "non_concave_profit"


class NonPositiveDemandDenominatorError(ConditionError):
    code = "b3_proof_failed"


class PreconditionError(ConditionError):
    code = "precondition_failed"


class SolverError(CSPError):
    code = "solver_failure"


class FixedPointDivergedError(SolverError):
    code = "fixed_point_diverged"


class DegenerateBestResponseError(SolverError):
    code = "degenerate_best_response"


class NotAnEquilibriumError(SolverError):
    code = "not_an_equilibrium"


class NegativePriceRegimeError(SolverError):
    code = "negative_price_regime"


class InfeasibleError(SolverError):
    code = "infeasible"


class NonConvergenceError(SolverError):
    code = "non_convergence"


class AmbiguousRegimeError(SolverError):
    code = "ambiguous_regime"


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------

def _check_finite(obj, where: str) -> None:
    for f in fields(obj):
        v = getattr(obj, f.name)
        if v is None:
            continue
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise InvalidParameterError(f"{f.name} must be a finite number, got {v!r}", where=where)


@dataclass(frozen=True)
class MonopolyParams:
    """Single platform serving worksites (b) and commuters (c).

    Attributes:
        u0_b, u0_c: intrinsic benefit of joining.
        b_b, b_c: cross-side benefit rates.
        t_b, t_c: same-side inconvenience (Hotelling transport) rates.
        f_b, f_c: per-agent service cost.
    """

    u0_b: float
    u0_c: float
    b_b: float
    b_c: float
    t_b: float
    t_c: float
    f_b: float
    f_c: float

    def __post_init__(self):
        _check_finite(self, "core.MonopolyParams")


@dataclass(frozen=True)
class DuopolyParams:
    """Two platforms (w, n) competing for worksites and commuters.

    Rates must be nonnegative and costs nonnegative; strict positivity is a
    solver-level condition because the multi-homing model sets ``t_b = 0``
    and the one-sided case sets the commuter rates to zero.  ``u0_b`` and
    ``u0_c`` are optional: single-homing results do not depend on them.
    """

    alpha_n: float
    alpha_w: float
    beta_n: float
    beta_w: float
    t_b: float
    t_c: float
    f_wb: float
    f_nb: float
    f_wc: float
    f_nc: float
    u0_b: float | None = None
    u0_c: float | None = None

    def __post_init__(self):
        where = "core.DuopolyParams"
        _check_finite(self, where)
        for name in ("alpha_n", "alpha_w", "beta_n", "beta_w", "t_b", "t_c"):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be >= 0, got {getattr(self, name)!r}", where=where)
        for name in ("f_wb", "f_nb", "f_wc", "f_nc"):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be >= 0, got {getattr(self, name)!r}", where=where)

    @property
    def alpha_plus(self) -> float:
        return self.alpha_n + self.alpha_w

    @property
    def alpha_minus(self) -> float:
        return self.alpha_n - self.alpha_w

    @property
    def beta_plus(self) -> float:
        return self.beta_n + self.beta_w

    @property
    def beta_minus(self) -> float:
        return self.beta_n - self.beta_w

    @property
    def demand_denominator(self) -> float:
        """``4 t_b t_c - alpha_plus * beta_plus``; positive under B3-proof."""
        return 4.0 * self.t_b * self.t_c - self.alpha_plus * self.beta_plus

    @classmethod
    def from_aggregates(cls, alpha_plus: float, alpha_minus: float, beta_plus: float,
                        beta_minus: float, **rest) -> "DuopolyParams":
        """Build from sum/difference rates (``x_n = (plus + minus) / 2``)."""
        return cls(alpha_n=(alpha_plus + alpha_minus) / 2, alpha_w=(alpha_plus - alpha_minus) / 2,
                   beta_n=(beta_plus + beta_minus) / 2, beta_w=(beta_plus - beta_minus) / 2, **rest)


# ---------------------------------------------------------------------------
# Prices and participation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PricePair:
    p_b: float
    p_c: float

    @property
    def nonnegative(self) -> bool:
        return self.p_b >= 0 and self.p_c >= 0


@dataclass(frozen=True)
class PriceQuad:
    p_wb: float
    p_nb: float
    p_wc: float
    p_nc: float

    @property
    def nonnegative(self) -> bool:
        return min(self.p_wb, self.p_nb, self.p_wc, self.p_nc) >= 0

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p_wb, self.p_nb, self.p_wc, self.p_nc)

    def platform(self, which: str) -> PricePair:
        if which == "w":
            return PricePair(self.p_wb, self.p_wc)
        if which == "n":
            return PricePair(self.p_nb, self.p_nc)
        raise ValueError(f"unknown platform {which!r}")

    @classmethod
    def from_pairs(cls, w: PricePair, n: PricePair) -> "PriceQuad":
        return cls(p_wb=w.p_b, p_nb=n.p_b, p_wc=w.p_c, p_nc=n.p_c)


def _in_unit(*values: float) -> bool:
    return all(-SHARE_TOL <= v <= 1 + SHARE_TOL for v in values)


@dataclass(frozen=True)
class MonopolyParticipation:
    q_b: float
    q_c: float
    valid: bool = True

    @classmethod
    def checked(cls, q_b: float, q_c: float) -> "MonopolyParticipation":
        return cls(q_b, q_c, _in_unit(q_b, q_c))


@dataclass(frozen=True)
class Participation:
    """Duopoly shares: single-homing on w or n, plus multi-homing mass Q."""

    q_wb: float
    q_wc: float
    q_nb: float
    q_nc: float
    Q_b: float = 0.0
    Q_c: float = 0.0
    valid: bool = True

    @classmethod
    def single_homing(cls, q_wb: float, q_wc: float) -> "Participation":
        return cls(q_wb, q_wc, 1.0 - q_wb, 1.0 - q_wc, 0.0, 0.0, _in_unit(q_wb, q_wc))

    @property
    def gap(self) -> float:
        """Commuter minus worksite share on the w platform."""
        return self.q_wc - self.q_wb


# ---------------------------------------------------------------------------
# Conditions
# ---------------------------------------------------------------------------

CONDITION_IDS = ("A0", "A1", "A2", "B2-sufficient", "B2-exact", "B3-proof", "B3-stated",
                 "C1", "C2i", "C2ii", "C3")


@dataclass(frozen=True)
class Condition:
    id: str
    margin: float
    passed: bool
    note: str = ""

    @classmethod
    def strict(cls, id: str, margin: float, note: str = "") -> "Condition":
        return cls(id, float(margin), bool(margin > 0), note)


@dataclass(frozen=True)
class ConditionReport:
    entries: tuple[Condition, ...] = ()

    def __iter__(self) -> Iterator[Condition]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, cid: str) -> bool:
        return any(c.id == cid for c in self.entries)

    def __getitem__(self, cid: str) -> Condition:
        for c in self.entries:
            if c.id == cid:
                return c
        raise KeyError(cid)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.entries)

    def failed(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.entries if not c.passed)

    def merged(self, other: "ConditionReport") -> "ConditionReport":
        seen = {c.id for c in other.entries}
        return ConditionReport(tuple(c for c in self.entries if c.id not in seen) + other.entries)


# ---------------------------------------------------------------------------
# Outcomes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LossLeader:
    """Side ``side`` on ``platform`` is a loss leader iff ``price < cost``."""

    platform: str
    side: str
    flagged: bool
    margin: float


@dataclass(frozen=True)
class Diagnostics:
    """Solver bookkeeping attached to an outcome.

    Fields that do not apply to a given solver stay ``None``.  For the
    duopoly Nash solver ``deviation_gain`` is the best unilateral profit
    improvement found on the deviation grid and ``hessian_negdef`` holds one
    flag per platform.
    """

    foc_residual: float | None = None
    iterations: int | None = None
    deviation_gain: float | None = None
    hessian_negdef: tuple[bool, ...] = ()
    br_converged: bool | None = None
    cycle: bool = False
    achieved_gap: float | None = None
    active_bounds: tuple[str, ...] = ()


# Alias kept for readers looking for the Nash-specific name.
NashDiagnostics = Diagnostics


@dataclass(frozen=True)
class EquilibriumOutcome:
    model: str
    prices: PricePair | PriceQuad
    participation: MonopolyParticipation | Participation
    profits: tuple[float, ...]
    conditions: ConditionReport = field(default_factory=ConditionReport)
    loss_leaders: tuple[LossLeader, ...] = ()
    diagnostics: Diagnostics = field(default_factory=Diagnostics)
    notes: tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return self.participation.valid

    def loss_leader(self, platform: str, side: str) -> LossLeader:
        for ll in self.loss_leaders:
            if ll.platform == platform and ll.side == side:
                return ll
        raise KeyError((platform, side))


def loss_leader_flags(prices: PricePair | PriceQuad, costs: Iterable[tuple[str, str, float]]) -> tuple[LossLeader, ...]:
    """Flag every (platform, side) whose price is strictly below cost."""
    out = []
    for platform, side, cost in costs:
        if isinstance(prices, PricePair):
            p = prices.p_b if side == "b" else prices.p_c
        else:
            p = getattr(prices, f"p_{platform}{side}")
        out.append(LossLeader(platform, side, bool(p < cost), float(p - cost)))
    return tuple(out)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_monopoly(params: MonopolyParams) -> ConditionReport:
    """Report A0 (network effects present), A1 (concavity) and A2 (shares <= 1)."""
    p = params
    s = p.b_b + p.b_c
    a1 = 4 * p.t_b * p.t_c - s * s
    a2_rhs = max((p.u0_c - p.f_c) * s + 2 * p.t_c * (p.u0_b - p.f_b),
                 s * (p.u0_b - p.f_b) + 2 * p.t_b * (p.u0_c - p.f_c))
    return ConditionReport((
        Condition.strict("A0", min(p.b_b, p.b_c, p.t_b, p.t_c), "cross-side and same-side rates strictly positive"),
        Condition.strict("A1", a1, "4 t_b t_c > (b_b + b_c)^2"),
        Condition.strict("A2", a1 - a2_rhs, "closed-form shares stay <= 1"),
    ))


def validate_duopoly(params: DuopolyParams, demands: Participation | None = None) -> ConditionReport:
    p = params
    entries = [
        Condition.strict("B2-sufficient", min(p.t_b - max(p.alpha_w, p.alpha_n), p.t_c - max(p.beta_w, p.beta_n)),
                         "t_b > max alpha and t_c > max beta"),
    ]
    if demands is not None:
        entries.append(Condition.strict(
            "B2-exact",
            min(p.t_b - (p.alpha_w * demands.q_wc + p.alpha_n * demands.q_nc),
                p.t_c - (p.beta_w * demands.q_wb + p.beta_n * demands.q_nb)),
            "same-side rates exceed share-weighted cross-side benefit"))
    entries.append(Condition.strict("B3-proof", p.demand_denominator,
                                    "4 t_b t_c > alpha_plus * beta_plus (gates the solvers)"))
    entries.append(Condition.strict("B3-stated", 4 * p.t_b * p.t_c - (p.alpha_plus + p.beta_plus) ** 2,
                                    "4 t_b t_c > (alpha_plus + beta_plus)^2 (informational)"))
    return ConditionReport(tuple(entries))
