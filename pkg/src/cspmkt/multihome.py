"""Worksites free to join both platforms, commuters single-homing.

Worksites face no location cost (``t_b = 0``), so each worksite either joins
both platforms, one of them, or neither.  With no commuter-side benefit from
worksites (``beta_w = beta_n = 0``) the price equilibrium has a closed form in
two regimes depending on whether commuter prices hit zero.
"""

from __future__ import annotations

from dataclasses import dataclass

from cspmkt.core import (
    AmbiguousRegimeError,
    Condition,
    ConditionReport,
    DuopolyParams,
    EquilibriumOutcome,
    Participation,
    PreconditionError,
    PriceQuad,
    SHARE_TOL,
    loss_leader_flags,
)

ZERO_TOL = 1e-12

CONFIG_NAMES = {1: "multihome", 2: "single-home-w", 3: "single-home-n", 4: "join-neither"}


def _config1_share(params: DuopolyParams, prices: PriceQuad) -> float:
    p = params
    return 0.5 + (prices.p_nc - prices.p_wc + p.beta_w - p.beta_n) / (2 * p.t_c)


def validate_appendix(params: DuopolyParams, participation: Participation | None = None) -> ConditionReport:
    """C1-C3 for the multi-homing model.

    C1 and C2i are equalities (zero worksite benefit, zero worksite location
    cost) and pass when the value is zero within 1e-12.  C2ii uses the
    supplied shares, or the all-multihome configuration where no worksite
    single-homes.  C3 reports the smallest of its component margins.
    """
    p = params
    u0 = 0.0 if p.u0_b is None else p.u0_b
    q_wb, q_nb = (0.0, 0.0) if participation is None else (participation.q_wb, participation.q_nb)
    c3_parts = (p.alpha_w / 3 - p.f_wb, 3 * p.alpha_w / 4 - p.f_wc, 3 * p.alpha_w / 4 - p.f_nc)
    return ConditionReport((
        Condition("C1", -abs(u0), abs(u0) <= ZERO_TOL, "worksite intrinsic benefit is zero"),
        Condition("C2i", -abs(p.t_b), abs(p.t_b) <= ZERO_TOL, "worksite location cost is zero"),
        Condition.strict("C2ii", p.t_c - (p.beta_n * q_nb + p.beta_w * q_wb), "commuters single-home"),
        Condition.strict("C3", min(c3_parts),
                         "f_wb < alpha_w/3 and f_wc, f_nc < 3 alpha_w/4; bounds use alpha_w only"),
    ))


def commuter_share_config1(params: DuopolyParams, prices: PriceQuad) -> tuple[float, bool]:
    """Commuter share on w when every worksite is on both platforms.

    Returns ``(share, clamped)`` with the share confined to [0, 1].
    """
    raw = _config1_share(params, prices)
    q = min(max(raw, 0.0), 1.0)
    return q, not (-SHARE_TOL <= raw <= 1 + SHARE_TOL)


def config_consistency(params: DuopolyParams, prices: PriceQuad) -> frozenset[int]:
    """Worksite configurations whose defining inequalities hold at ``prices``.

    Weak inequalities throughout, except that joining neither platform must
    be strictly preferred: an indifferent worksite joins.
    """
    p, pr = params, prices
    two_t = 2 * p.t_c
    d = pr.p_nc - pr.p_wc
    w1 = (0.5 + (d + p.beta_w - p.beta_n) / two_t) * p.alpha_w
    n1 = (0.5 + (-d + p.beta_n - p.beta_w) / two_t) * p.alpha_n
    out = set()
    if pr.p_wb <= w1 and pr.p_nb <= n1:
        out.add(1)
    if pr.p_wb <= (0.5 + (d + p.beta_w) / two_t) * p.alpha_w and pr.p_nb >= (0.5 + (-d - p.beta_w) / two_t) * p.alpha_n:
        out.add(2)
    if pr.p_wb >= (0.5 + (d - p.beta_n) / two_t) * p.alpha_w and pr.p_nb <= (0.5 + (-d + p.beta_n) / two_t) * p.alpha_n:
        out.add(3)
    if pr.p_wb > w1 and pr.p_nb > n1:
        out.add(4)
    return frozenset(out)


@dataclass(frozen=True)
class Overlap:
    """Where a common worksite price sits relative to the two overlap ranges.

    Range ``a`` is where configurations 1, 2 and 3 coexist; range ``b`` is
    where 2, 3 and 4 coexist.  An empty range has ``lo > hi``.
    """

    a: tuple[float, float]
    b: tuple[float, float]
    in_a: bool
    in_b: bool

    @property
    def a_empty(self) -> bool:
        return self.a[0] > self.a[1]

    @property
    def b_empty(self) -> bool:
        return self.b[0] > self.b[1]

    @property
    def label(self) -> str:
        if self.in_a and self.in_b:
            return "both"
        return "a" if self.in_a else "b" if self.in_b else "neither"


def overlap_symmetric(params: DuopolyParams, p_b: float, p_c: float) -> Overlap:
    p = params
    two_t = 2 * p.t_c
    a_lo = max((0.5 - p.beta_n / two_t) * p.alpha_n, (0.5 - p.beta_n / two_t) * p.alpha_w)
    a_hi = min((0.5 + (p.beta_w - p.beta_n) / two_t) * p.alpha_w, (0.5 + (p.beta_n - p.beta_w) / two_t) * p.alpha_n)
    b_lo = max((0.5 + (p.beta_w - p.beta_n) / two_t) * p.alpha_w, (0.5 + (p.beta_n - p.beta_w) / two_t) * p.alpha_n)
    b_hi = min((0.5 + p.beta_w / two_t) * p.alpha_w, (0.5 + p.beta_n / two_t) * p.alpha_n)
    return Overlap((a_lo, a_hi), (b_lo, b_hi), a_lo <= p_b <= a_hi, b_lo <= p_b <= b_hi)


# ---------------------------------------------------------------------------
# One-sided benefits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OneSidedEquilibrium:
    """Equilibrium with worksites on both platforms and commuters split.

    Attributes:
        regime: ``"interior"`` or ``"zero-commuter-price"``.
        prices: posted prices.
        profits: ``(r_w, r_n)``.
        regime_margins: slack of the two regime inequalities; both are
            nonnegative in the interior regime and both negative otherwise.
        q_wc: commuter share on w implied by the commuter prices.
        conditions: C1-C3 report.
    """

    regime: str
    prices: PriceQuad
    profits: tuple[float, float]
    regime_margins: tuple[float, float]
    q_wc: float
    conditions: ConditionReport

    def to_outcome(self, params: DuopolyParams) -> EquilibriumOutcome:
        q = self.q_wc
        part = Participation(0.0, q, 0.0, 1.0 - q, 1.0, 0.0, -SHARE_TOL <= q <= 1 + SHARE_TOL)
        p = params
        costs = (("w", "b", p.f_wb), ("n", "b", p.f_nb), ("w", "c", p.f_wc), ("n", "c", p.f_nc))
        return EquilibriumOutcome(
            model="multihome",
            prices=self.prices,
            participation=part,
            profits=self.profits,
            conditions=self.conditions,
            loss_leaders=loss_leader_flags(self.prices, costs),
            notes=(f"regime={self.regime}",),
        )


def _share_term(params: DuopolyParams) -> float:
    p = params
    return (p.f_nc - p.f_wc - p.alpha_minus) / (6 * p.t_c)


def _require_onesided(params: DuopolyParams, where: str) -> ConditionReport:
    report = validate_appendix(params)
    if params.beta_w != 0 or params.beta_n != 0:
        raise PreconditionError("commuter cross-side rates must be exactly zero", report, where=where)
    if not report.all_passed:
        raise PreconditionError(f"conditions failed: {', '.join(report.failed())}", report, where=where)
    return report


def onesided_equilibrium(params: DuopolyParams) -> OneSidedEquilibrium:
    where = "multihome.onesided_equilibrium"
    report = _require_onesided(params, where)
    p = params
    h = _share_term(p)
    q_w, q_n = 0.5 + h, 0.5 - h
    p_wb = q_w * p.alpha_w
    p_nb = q_n * p.alpha_n
    m1 = p.f_nc / 3 + 2 * p.f_wc / 3 + p.t_c - (p.alpha_n / 3 + 2 * p.alpha_w / 3)
    m2 = 2 * p.f_nc / 3 + p.f_wc / 3 + p.t_c - (2 * p.alpha_n / 3 + p.alpha_w / 3)
    if m1 >= 0 and m2 >= 0:
        regime = "interior"
        p_wc = (p.f_nc - p.alpha_n) / 3 + 2 * (p.f_wc - p.alpha_w) / 3 + p.t_c
        p_nc = 2 * (p.f_nc - p.alpha_n) / 3 + (p.f_wc - p.alpha_w) / 3 + p.t_c
        d = (p.f_nc - p.f_wc - p.alpha_minus) / 3
        r_w = -p.f_wb + q_w * (d + p.t_c)
        r_n = -p.f_nb + q_n * (-d + p.t_c)
    elif m1 < 0 and m2 < 0:
        regime = "zero-commuter-price"
        p_wc = p_nc = 0.0
        r_w = -p.f_wb + q_w * (p.alpha_w - p.f_wc)
        r_n = -p.f_nb + q_n * (p.alpha_n - p.f_nc)
    else:
        raise AmbiguousRegimeError(f"regime inequalities disagree (margins {m1:.6g}, {m2:.6g})", where=where,
                                   payload=(m1, m2))
    prices = PriceQuad(p_wb, p_nb, p_wc, p_nc)
    q_wc, _ = commuter_share_config1(p, prices)
    return OneSidedEquilibrium(regime, prices, (r_w, r_n), (m1, m2), q_wc, report)


@dataclass(frozen=True)
class DeviationCheck:
    """Best profit of w if it stopped serving worksites, against its
    equilibrium profit.  ``margin = r_w - deviation``."""

    deviation: float
    r_w: float
    dominated: bool
    margin: float
    guard_ok: bool
    note: str = ""


def deviation_profit(params: DuopolyParams) -> DeviationCheck:
    where = "multihome.deviation_profit"
    p = params
    eq = onesided_equilibrium(p)
    if eq.regime != "interior":
        raise PreconditionError("deviation check needs the interior regime", eq.conditions, where=where)
    dev = (2 * p.alpha_n + p.alpha_w - 2 * p.f_nc + 2 * p.f_wc - 6 * p.t_c) ** 2 / (72 * p.t_c)
    guard = p.t_c > (p.f_wc - p.f_nc) / 3 + p.alpha_w / 6 + p.alpha_n / 3
    note = "" if guard else "deviator would earn nothing on commuters; deviation unprofitable anyway"
    r_w = eq.profits[0]
    return DeviationCheck(dev, r_w, bool(dev < r_w), r_w - dev, guard, note)
