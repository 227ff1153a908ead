"""Single-homing duopoly on a Hotelling line.

Platform w sits at location 0 and platform n at location 1 for both sides.
Shares on w are affine in the four posted prices, so each platform's profit
is quadratic in its own prices and the price game has a linear first-order
system.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from cspmkt.core import (
    DegenerateBestResponseError,
    DegenerateDemandError,
    Diagnostics,
    DuopolyParams,
    EquilibriumOutcome,
    NegativePriceRegimeError,
    NonPositiveDemandDenominatorError,
    NotAnEquilibriumError,
    Participation,
    PricePair,
    PriceQuad,
    loss_leader_flags,
    validate_duopoly,
)

# Price vector layout used throughout: [p_wb, p_nb, p_wc, p_nc].
_OWN = {"w": (0, 2), "n": (1, 3)}


@dataclass(frozen=True)
class DemandSystem:
    """``q_wb = const[0] + slope[0] @ p`` and ``q_wc = const[1] + slope[1] @ p``."""

    const: np.ndarray
    slope: np.ndarray


def demand_system(params: DuopolyParams, where: str = "duopoly.demand_system") -> DemandSystem:
    p = params
    d = p.demand_denominator
    if not d > 0:
        raise DegenerateDemandError(f"4 t_b t_c - alpha_plus beta_plus = {d!r} must be positive", where=where)
    ap, am, bp, bm = p.alpha_plus, p.alpha_minus, p.beta_plus, p.beta_minus
    const = np.array([0.5 - (p.t_c * am + ap * bm / 2) / d,
                      0.5 - (p.t_b * bm + am * bp / 2) / d])
    slope = np.array([[-2 * p.t_c, 2 * p.t_c, -ap, ap],
                      [-bp, bp, -2 * p.t_b, 2 * p.t_b]]) / d
    return DemandSystem(const, slope)


def _vec(prices: PriceQuad) -> np.ndarray:
    return np.array(prices.as_tuple(), dtype=float)


def _costs(params: DuopolyParams) -> np.ndarray:
    return np.array([params.f_wb, params.f_nb, params.f_wc, params.f_nc])


def duopoly_demand(params: DuopolyParams, prices: PriceQuad) -> Participation:
    """Raw single-homing shares; ``valid`` is False when a share leaves [0, 1]."""
    ds = demand_system(params, "duopoly.duopoly_demand")
    q = ds.const + ds.slope @ _vec(prices)
    return Participation.single_homing(float(q[0]), float(q[1]))


def _profits_from_shares(prices: np.ndarray, costs: np.ndarray, q_wb, q_wc):
    m = prices - costs
    r_w = q_wb * m[0] + q_wc * m[2]
    r_n = (1 - q_wb) * m[1] + (1 - q_wc) * m[3]
    return r_w, r_n


def duopoly_profits(params: DuopolyParams, prices: PriceQuad) -> tuple[float, float]:
    q = duopoly_demand(params, prices)
    r_w, r_n = _profits_from_shares(_vec(prices), _costs(params), q.q_wb, q.q_wc)
    return float(r_w), float(r_n)


def clamped_shares(params: DuopolyParams, prices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Consumer shares on w with each share confined to [0, 1].

    ``prices`` has shape (..., 4).  Each side's indifference condition maps
    the other side's share to its own; the composed map is nondecreasing
    with slope below one, so its unique fixed point is one of three linear
    candidates (inner share at 0, interior, or at 1).
    """
    p = params
    prices = np.asarray(prices, dtype=float)
    a_b = (p.t_b + prices[..., 1] - prices[..., 0] - p.alpha_n) / (2 * p.t_b)
    a_c = (p.t_c + prices[..., 3] - prices[..., 2] - p.beta_n) / (2 * p.t_c)
    k_b = p.alpha_plus / (2 * p.t_b)
    k_c = p.beta_plus / (2 * p.t_c)

    def g(x):
        return np.clip(a_b + k_b * np.clip(a_c + k_c * x, 0, 1), 0, 1)

    cands = [np.clip(a_b, 0, 1), np.clip(a_b + k_b, 0, 1),
             np.clip((a_b + k_b * a_c) / (1 - k_b * k_c), 0, 1)]
    err = np.stack([np.abs(g(c) - c) for c in cands])
    best = np.argmin(err, axis=0)
    q_wb = np.choose(best, cands)
    q_wc = np.clip(a_c + k_c * q_wb, 0, 1)
    return q_wb, q_wc


def clamped_profits(params: DuopolyParams, prices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    prices = np.asarray(prices, dtype=float)
    q_wb, q_wc = clamped_shares(params, prices)
    m = prices - _costs(params)
    r_w = q_wb * m[..., 0] + q_wc * m[..., 2]
    r_n = (1 - q_wb) * m[..., 1] + (1 - q_wc) * m[..., 3]
    return r_w, r_n


# ---------------------------------------------------------------------------
# First-order conditions
# ---------------------------------------------------------------------------

def foc_system(params: DuopolyParams) -> tuple[np.ndarray, np.ndarray]:
    """Affine map ``grad(p) = A @ p + c`` of own-price profit derivatives.

    Row ``i`` is the derivative of the owning platform's profit with respect
    to price ``i``.
    """
    ds = demand_system(params, "duopoly.foc_system")
    s, c0 = ds.slope, ds.const
    f = _costs(params)
    a = np.zeros((4, 4))
    c = np.zeros(4)
    # w: d/dp_own [(p_wb - f_wb) q_wb + (p_wc - f_wc) q_wc]
    for row, j in ((0, 0), (2, 1)):
        a[row] = s[j].copy()
        a[row, 0] += s[0, row]
        a[row, 2] += s[1, row]
        c[row] = c0[j] - s[0, row] * f[0] - s[1, row] * f[2]
    # n: d/dp_own [(p_nb - f_nb)(1 - q_wb) + (p_nc - f_nc)(1 - q_wc)]
    for row, j in ((1, 0), (3, 1)):
        a[row] = -s[j]
        a[row, 1] -= s[0, row]
        a[row, 3] -= s[1, row]
        c[row] = 1 - c0[j] + s[0, row] * f[1] + s[1, row] * f[3]
    return a, c


def own_hessian(params: DuopolyParams, platform: str) -> np.ndarray:
    a, _ = foc_system(params)
    i, j = _OWN[platform]
    return a[np.ix_((i, j), (i, j))]


def _kkt_solve(a: np.ndarray, c: np.ndarray, free_vars: tuple[int, ...], fixed: dict[int, float],
               tol: float = 1e-12):
    """Solve ``a[free] @ p + c[free] = 0`` over the free variables, trying each
    zero-bound pattern and keeping the first that satisfies complementarity."""
    n = len(free_vars)
    for k in range(n + 1):
        for zeros in itertools.combinations(free_vars, k):
            active = [v for v in free_vars if v not in zeros]
            p = np.zeros(a.shape[1])
            for v, val in fixed.items():
                p[v] = val
            if active:
                sub = a[np.ix_(active, active)]
                rhs = -(c[active] + a[np.ix_(active, list(fixed))] @ p[list(fixed)]) if fixed else -c[active]
                try:
                    p[active] = np.linalg.solve(sub, rhs)
                except np.linalg.LinAlgError:
                    continue
            if np.any(p[active] < -tol):
                continue
            g = a @ p + c
            if zeros and np.any(g[list(zeros)] > tol):
                continue
            p[active] = np.maximum(p[active], 0.0)
            return p, zeros
    return None, None


def best_response(params: DuopolyParams, platform: str, rival: PricePair) -> PricePair:
    """Own prices maximising profit given the rival's prices, with prices >= 0."""
    where = "duopoly.best_response"
    if platform not in _OWN:
        raise ValueError(f"platform must be 'w' or 'n', got {platform!r}")
    a, c = foc_system(params)
    own = _OWN[platform]
    other = _OWN["n" if platform == "w" else "w"]
    h = a[np.ix_(own, own)]
    det = np.linalg.det(h)
    if abs(det) < 1e-14:
        raise DegenerateBestResponseError("own-price first-order system is singular", where=where)
    if not (h[0, 0] < 0 and det > 0):
        raise DegenerateBestResponseError("own-price profit is not concave", where=where)
    fixed = {other[0]: rival.p_b, other[1]: rival.p_c}
    p, _ = _kkt_solve(a, c, own, fixed)
    if p is None:
        raise DegenerateBestResponseError("no complementary solution on the nonnegative orthant", where=where)
    return PricePair(float(p[own[0]]), float(p[own[1]]))


def _br_map(a, c, p, lam):
    out = p.copy()
    for plat in ("w", "n"):
        own = _OWN[plat]
        other = _OWN["n" if plat == "w" else "w"]
        sol, _ = _kkt_solve(a, c, own, {other[0]: p[other[0]], other[1]: p[other[1]]})
        if sol is None:
            return None
        out[list(own)] = sol[list(own)]
    return (1 - lam) * p + lam * out


def best_response_iteration(params: DuopolyParams, start: np.ndarray, *, tol: float = 1e-13,
                            max_iter: int = 20_000) -> np.ndarray | None:
    """Simultaneous best-response iteration, halving the step on failure.

    Returns the limit point, or None when no damping level converges.
    """
    a, c = foc_system(params)
    for lam in (1.0, 0.5, 0.25, 0.125):
        p = np.array(start, dtype=float)
        for _ in range(max_iter):
            nxt = _br_map(a, c, p, lam)
            if nxt is None or not np.all(np.isfinite(nxt)) or np.max(np.abs(nxt)) > 1e8:
                break
            step = np.max(np.abs(nxt - p))
            p = nxt
            if step <= tol:
                return p
    return None


def deviation_gain(params: DuopolyParams, prices: np.ndarray, *, span: float = 1.0, n: int = 101):
    """Largest unilateral profit gain found on an own-price grid.

    Each platform's two prices move over ``[p - span, p + span]`` (kept
    nonnegative) with the rival fixed.  Profits use clamped shares.  Returns
    ``(gain, platform, deviating quad)``; ties break on lexicographic price
    order.
    """
    prices = np.asarray(prices, dtype=float)
    base_w, base_n = clamped_profits(params, prices)
    best = (-np.inf, "", prices)
    offsets = np.linspace(-span, span, n)
    for plat, base in (("w", base_w), ("n", base_n)):
        i, j = _OWN[plat]
        gi = np.unique(np.maximum(prices[i] + offsets, 0.0))
        gj = np.unique(np.maximum(prices[j] + offsets, 0.0))
        mi, mj = np.meshgrid(gi, gj, indexing="ij")
        cand = np.broadcast_to(prices, mi.shape + (4,)).copy()
        cand[..., i] = mi
        cand[..., j] = mj
        r_w, r_n = clamped_profits(params, cand)
        r = r_w if plat == "w" else r_n
        k = int(np.argmax(r))  # first max in row-major = lexicographic order
        gain = float(r.flat[k] - base)
        if gain > best[0]:
            best = (gain, plat, cand.reshape(-1, 4)[k])
    return best


def nash_equilibrium(params: DuopolyParams, *, seed: int = 0, verify: bool = True,
                     n_starts: int = 5) -> EquilibriumOutcome:
    """Simultaneous-move price equilibrium with nonnegative prices.

    The stacked first-order system is solved directly; zero-price corners are
    handled by complementarity over the active-bound patterns.  With
    ``verify`` the solution is checked for concavity, for unilateral
    deviations on a grid, and against best-response iteration from
    ``n_starts`` random starts.
    """
    where = "duopoly.nash_equilibrium"
    report = validate_duopoly(params)
    if not report["B3-proof"].passed:
        raise NonPositiveDemandDenominatorError(
            f"B3-proof failed (margin {report['B3-proof'].margin:.6g}): demand is undefined", report, where=where)
    a, c = foc_system(params)
    p, zeros = _kkt_solve(a, c, (0, 1, 2, 3), {})
    if p is None:
        raise NotAnEquilibriumError("no price quad satisfies the first-order and sign conditions", where=where)
    free = [i for i in range(4) if i not in zeros]
    g = a @ p + c
    foc_res = float(np.linalg.norm(g[free])) if free else 0.0

    negdef = tuple(bool(np.all(np.linalg.eigvalsh((h + h.T) / 2) < 0))
                   for h in (own_hessian(params, "w"), own_hessian(params, "n")))
    quad = PriceQuad(*map(float, p))
    part = duopoly_demand(params, quad)
    report = validate_duopoly(params, part)
    notes = []
    if zeros:
        notes.append("zero-price bound active at " + ",".join(("p_wb", "p_nb", "p_wc", "p_nc")[z] for z in zeros))

    gain = None
    br_ok = None
    if verify:
        if not all(negdef):
            raise NotAnEquilibriumError("own-price profit is not concave at the candidate", where=where, payload=quad)
        if foc_res > 1e-10:
            raise NotAnEquilibriumError(f"first-order residual {foc_res:.3g} exceeds 1e-10", where=where, payload=quad)
        gain, plat, dev = deviation_gain(params, p)
        if gain > 1e-6:
            if part.valid:
                raise NotAnEquilibriumError(
                    f"platform {plat} gains {gain:.3g} by deviating", where=where,
                    payload={"platform": plat, "deviation": PriceQuad(*map(float, dev)), "gain": gain})
            notes.append("shares leave [0, 1]; raw-demand equilibrium is not a clamped-demand equilibrium")
        rng = np.random.default_rng(seed)
        br_ok = True
        for _ in range(n_starts):
            lim = best_response_iteration(params, rng.uniform(0.0, 3.0, size=4))
            if lim is None:
                br_ok = False
                notes.append("best-response iteration did not converge from a random start")
                break
            if np.max(np.abs(lim - p)) > 1e-8:
                raise NotAnEquilibriumError(
                    "best-response iteration converged to a different point", where=where,
                    payload=PriceQuad(*map(float, lim)))

    r_w, r_n = _profits_from_shares(p, _costs(params), part.q_wb, part.q_wc)
    pr = params
    costs = (("w", "b", pr.f_wb), ("n", "b", pr.f_nb), ("w", "c", pr.f_wc), ("n", "c", pr.f_nc))
    return EquilibriumOutcome(
        model="duopoly",
        prices=quad,
        participation=part,
        profits=(float(r_w), float(r_n)),
        conditions=report,
        loss_leaders=loss_leader_flags(quad, costs),
        diagnostics=Diagnostics(foc_residual=foc_res, deviation_gain=gain, hessian_negdef=negdef,
                                br_converged=br_ok,
                                active_bounds=tuple(("p_wb", "p_nb", "p_wc", "p_nc")[z] for z in zeros)),
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# Symmetric pricing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymmetricDuopolyEquilibrium:
    """Common prices on both platforms with every share equal to one half.

    Attributes:
        p_b, p_c: price to each side, identical across platforms.
        psi_b, psi_c: asymmetry corrections; zero when both platforms offer
            the same cross-side rates.
        r: profit of each platform.
        asymmetric_costs: True when the platforms' costs differ, in which
            case the formulas use platform w's costs only.
    """

    p_b: float
    p_c: float
    psi_b: float
    psi_c: float
    r: float
    asymmetric_costs: bool = False


def symmetric_equilibrium(params: DuopolyParams) -> SymmetricDuopolyEquilibrium:
    where = "duopoly.symmetric_equilibrium"
    p = params
    ap, am, bp, bm = p.alpha_plus, p.alpha_minus, p.beta_plus, p.beta_minus
    den = 8 * p.t_b * p.t_c - 2 * ap * bp
    if not den > 0:
        raise DegenerateDemandError("8 t_b t_c - 2 alpha_plus beta_plus must be positive", where=where)
    psi_b = (2 * (bp - ap) * bm * p.t_b + (bp ** 2 - 4 * p.t_b * p.t_c) * am) / den
    psi_c = (2 * (ap - bp) * am * p.t_c + (ap ** 2 - 4 * p.t_b * p.t_c) * bm) / den
    p_b = p.f_wb + p.t_b - bp / 2 + psi_b
    p_c = p.f_wc + p.t_c - ap / 2 + psi_c
    if not (p_b > 0 and p_c > 0):
        raise NegativePriceRegimeError(f"symmetric prices ({p_b:.6g}, {p_c:.6g}) are not positive", where=where)
    asym = p.f_wb != p.f_nb or p.f_wc != p.f_nc
    if asym:
        warnings.warn("platform costs differ; symmetric prices use platform w costs", stacklevel=2)
    r = (p.t_b + p.t_c - (bp + ap) / 2 + psi_b + psi_c) / 2
    return SymmetricDuopolyEquilibrium(p_b, p_c, psi_b, psi_c, r, asym)


# ---------------------------------------------------------------------------
# Multi-homing incentives
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MultihomeIncrements:
    """Utility change from joining both platforms instead of one.

    ``case_i`` is measured for the agent at the far end of the line
    (location 1) relative to its better single-home option; ``case_ii`` for
    the agent indifferent between the platforms.
    """

    case_i_b: float
    case_ii_b: float
    case_i_c: float
    case_ii_c: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.case_i_b, self.case_ii_b, self.case_i_c, self.case_ii_c)


def multihome_incremental_utility(params: DuopolyParams, prices: PriceQuad,
                                  participation: Participation) -> MultihomeIncrements:
    p, pr, q = params, prices, participation
    # Benefit from the other side when on both platforms versus one.
    both_b = p.alpha_w * q.q_wc + p.alpha_n * q.q_nc
    both_c = p.beta_w * q.q_wb + p.beta_n * q.q_nb
    # At location 1: staying on w costs the full trip, staying on n costs nothing.
    case_i_b = min(-pr.p_nb + p.alpha_n * q.q_nc, -pr.p_wb - p.t_b + p.alpha_w * q.q_wc)
    case_i_c = min(-pr.p_nc + p.beta_n * q.q_nb, -pr.p_wc - p.t_c + p.beta_w * q.q_wb)
    case_ii_b = (-pr.p_wb - pr.p_nb - p.t_b + both_b) / 2
    case_ii_c = (-pr.p_wc - pr.p_nc - p.t_c + both_c) / 2
    return MultihomeIncrements(case_i_b, case_ii_b, case_i_c, case_ii_c)
