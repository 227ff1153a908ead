"""Single-platform pricing with cross-side effects.

Two views of the same market live here:

* the general benchmark, where participation is an increasing function of
  net utility and prices solve a markup fixed point, and
* the Hotelling specialisation, where demand is affine in prices and the
  profit-maximising prices have a closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cspmkt.core import (
    Diagnostics,
    EquilibriumOutcome,
    FixedPointDivergedError,
    LossLeader,
    MonopolyParams,
    MonopolyParticipation,
    NonConcaveProfitError,
    PreconditionError,
    PricePair,
    DegenerateDemandError,
    InvalidParameterError,
    UndefinedElasticityError,
    loss_leader_flags,
    validate_monopoly,
)


@dataclass(frozen=True)
class LinearDemandCurve:
    """Participation as a function of net utility, ``clamp(slope * U, 0, 1)``.

    The Hotelling line with inconvenience rate ``t`` gives ``slope = 1 / t``.
    """

    slope: float

    def __post_init__(self):
        if not np.isfinite(self.slope) or self.slope <= 0:
            raise InvalidParameterError(f"slope must be positive, got {self.slope!r}",
                                        where="monopoly.LinearDemandCurve")

    @classmethod
    def hotelling(cls, t: float) -> "LinearDemandCurve":
        return cls(1.0 / t)

    def __call__(self, u: float) -> float:
        return min(max(self.slope * u, 0.0), 1.0)

    def raw(self, u: float) -> float:
        return self.slope * u

    def derivative(self, u: float) -> float:
        return self.slope

    def markup(self, u: float) -> float:
        """``phi / phi'`` on the affine extension (equals ``u``)."""
        return self.raw(u) / self.slope


@dataclass(frozen=True)
class BenchmarkSolution:
    u_b: float
    u_c: float
    p_b: float
    p_c: float
    q_b: float
    q_c: float
    residual: float
    iterations: int


def _denominator(p: MonopolyParams, where: str) -> float:
    den = p.t_b * p.t_c - p.b_b * p.b_c
    if not den > 0:
        raise DegenerateDemandError(f"t_b*t_c - b_b*b_c = {den!r} must be positive", where=where)
    return den


def monopoly_demand(params: MonopolyParams, prices: PricePair) -> MonopolyParticipation:
    """Raw affine participation of both sides at the given prices."""
    p = params
    den = _denominator(p, "monopoly.monopoly_demand")
    s_b = p.u0_b - prices.p_b
    s_c = p.u0_c - prices.p_c
    q_b = (p.b_b * s_c + p.t_c * s_b) / den
    q_c = (p.b_c * s_b + p.t_b * s_c) / den
    return MonopolyParticipation.checked(q_b, q_c)


def monopoly_profit(params: MonopolyParams, prices: PricePair) -> float:
    q = monopoly_demand(params, prices)
    return (prices.p_b - params.f_b) * q.q_b + (prices.p_c - params.f_c) * q.q_c


def profit_gradient(params: MonopolyParams, prices: PricePair) -> tuple[float, float]:
    """Analytic gradient of profit with respect to (p_b, p_c)."""
    p = params
    den = _denominator(p, "monopoly.profit_gradient")
    q = monopoly_demand(p, prices)
    m_b = prices.p_b - p.f_b
    m_c = prices.p_c - p.f_c
    g_b = q.q_b - (p.t_c * m_b + p.b_c * m_c) / den
    g_c = q.q_c - (p.b_b * m_b + p.t_b * m_c) / den
    return g_b, g_c


def closed_form_prices(params: MonopolyParams) -> PricePair:
    p = params
    d = 4 * p.t_b * p.t_c - (p.b_b + p.b_c) ** 2
    k = 2 * p.t_b * p.t_c - p.b_b * p.b_c
    p_b = (-p.b_b ** 2 * p.f_b - p.b_c ** 2 * p.u0_b + k * (p.f_b + p.u0_b)
           + p.t_b * (p.b_b - p.b_c) * (p.u0_c - p.f_c)) / d
    p_c = (-p.b_c ** 2 * p.f_c - p.b_b ** 2 * p.u0_c + k * (p.f_c + p.u0_c)
           + p.t_c * (p.b_b - p.b_c) * (p.f_b - p.u0_b)) / d
    return PricePair(p_b, p_c)


def monopoly_equilibrium(params: MonopolyParams) -> EquilibriumOutcome:
    """Profit-maximising prices of the Hotelling monopoly.

    A0 and A1 gate the solve.  A2 is only reported: when it fails the raw
    shares leave [0, 1] and the outcome comes back with ``valid=False``.
    """
    where = "monopoly.monopoly_equilibrium"
    p = params
    report = validate_monopoly(p)
    if not report["A0"].passed:
        raise PreconditionError("A0 failed: all cross-side and same-side rates must be positive", report, where=where)
    if not report["A1"].passed:
        raise NonConcaveProfitError(f"A1 failed (margin {report['A1'].margin:.6g}): profit is not concave",
                                    report, where=where)

    s = p.b_b + p.b_c
    d = 4 * p.t_b * p.t_c - s * s
    m_b = p.u0_b - p.f_b
    m_c = p.u0_c - p.f_c
    q_b = (m_c * s + 2 * p.t_c * m_b) / d
    q_c = (s * m_b + 2 * p.t_b * m_c) / d
    r = (s * m_b * m_c + p.t_c * m_b ** 2 + p.t_b * m_c ** 2) / d

    prices = closed_form_prices(p)
    g = profit_gradient(p, prices)
    costs = (("w", "b", p.f_b), ("w", "c", p.f_c))
    return EquilibriumOutcome(
        model="monopoly",
        prices=prices,
        participation=MonopolyParticipation.checked(q_b, q_c),
        profits=(r,),
        conditions=report,
        loss_leaders=loss_leader_flags(prices, costs),
        diagnostics=Diagnostics(foc_residual=float(np.hypot(*g))),
    )


def loss_leader(outcome: EquilibriumOutcome, params: MonopolyParams) -> tuple[LossLeader, ...]:
    return loss_leader_flags(outcome.prices, (("w", "b", params.f_b), ("w", "c", params.f_c)))


# ---------------------------------------------------------------------------
# Benchmark fixed point
# ---------------------------------------------------------------------------

def _default_curves(params: MonopolyParams) -> tuple[LinearDemandCurve, LinearDemandCurve]:
    return LinearDemandCurve.hotelling(params.t_b), LinearDemandCurve.hotelling(params.t_c)


def markup_prices(params: MonopolyParams, u: np.ndarray, curves) -> tuple[np.ndarray, np.ndarray]:
    """Prices implied by the markup rule at utilities ``u``, plus participations."""
    p = params
    cb, cc = curves
    q = np.array([cb.raw(u[0]), cc.raw(u[1])])
    price = np.array([
        p.f_b - p.u0_b - p.b_c * q[1] + cb.markup(u[0]),
        p.f_c - p.u0_c - p.b_b * q[0] + cc.markup(u[1]),
    ])
    return price, q


def markup_residual(params: MonopolyParams, p_b: float, p_c: float, q_b: float, q_c: float, curves=None) -> float:
    """Largest violation of the markup rule at a price/participation point."""
    p = params
    cb, cc = curves or _default_curves(p)
    u_b = p.u0_b + p.b_b * q_c - p_b
    u_c = p.u0_c + p.b_c * q_b - p_c
    r_b = p_b - (p.f_b - p.u0_b - p.b_c * q_c + cb.markup(u_b))
    r_c = p_c - (p.f_c - p.u0_c - p.b_b * q_b + cc.markup(u_c))
    return float(max(abs(r_b), abs(r_c)))


def benchmark_solve(params: MonopolyParams, curves=None, *, damping: float = 0.5,
                    tol: float = 1e-12, max_iter: int = 100_000) -> BenchmarkSolution:
    """Solve the benchmark markup fixed point by damped iteration on utilities.

    Participation uses the affine extension of each curve, so the fixed
    point exists and is unique whenever the iteration map contracts.
    """
    where = "monopoly.benchmark_solve"
    p = params
    curves = curves or _default_curves(p)
    u = np.array([p.u0_b - p.f_b, p.u0_c - p.f_c], dtype=float)
    for it in range(1, max_iter + 1):
        price, q = markup_prices(p, u, curves)
        target = np.array([p.u0_b + p.b_b * q[1] - price[0], p.u0_c + p.b_c * q[0] - price[1]])
        new = (1 - damping) * u + damping * target
        if not np.all(np.abs(new) < 1e150):
            raise FixedPointDivergedError("iterate ran off to infinity", where=where, payload=u)
        step = float(np.max(np.abs(new - u)))
        u = new
        if step <= tol:
            break
    else:
        raise FixedPointDivergedError(f"no convergence after {max_iter} iterations (last step {step:.3g})",
                                      where=where, payload=u)

    price, q = markup_prices(p, u, curves)
    res = markup_residual(p, price[0], price[1], q[0], q[1], curves)
    return BenchmarkSolution(u_b=float(u[0]), u_c=float(u[1]), p_b=float(price[0]), p_c=float(price[1]),
                             q_b=float(q[0]), q_c=float(q[1]), residual=res, iterations=it)


def lerner_residuals(params: MonopolyParams, solution: BenchmarkSolution, curves=None) -> tuple[float, float]:
    """Lerner identity gaps ``(p - effective cost) / p - 1 / elasticity`` per side.

    The effective cost of side b subtracts the value side b generates for
    side c (``b_c * q_c``) and vice versa.  Positive means over-pricing.
    """
    where = "monopoly.lerner_residuals"
    p = params
    cb, cc = curves or _default_curves(p)
    s = solution
    u_b = p.u0_b + p.b_b * s.q_c - s.p_b
    u_c = p.u0_c + p.b_c * s.q_b - s.p_c
    out = []
    for price, cost, curve, u in ((s.p_b, p.f_b - p.u0_b - p.b_c * s.q_c, cb, u_b),
                                  (s.p_c, p.f_c - p.u0_c - p.b_b * s.q_b, cc, u_c)):
        phi = curve.raw(u)
        if price == 0 or phi == 0:
            raise UndefinedElasticityError(f"price {price!r} or participation {phi!r} is zero", where=where)
        out.append((price - cost) / price - phi / (price * curve.derivative(u)))
    return out[0], out[1]
