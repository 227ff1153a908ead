"""Independent numerical references used by the tests.

None of these reuse the package's closed forms: they search profit
surfaces directly or iterate the raw indifference conditions.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize, minimize_scalar


# --- monopoly ---------------------------------------------------------------

def monopoly_shares(p, pb, pc):
    """Indifference conditions ``u0 + b q_other - t q - price = 0`` solved directly."""
    a = np.array([[p.t_b, -p.b_b], [-p.b_c, p.t_c]])
    rhs = np.stack(np.broadcast_arrays(p.u0_b - pb, p.u0_c - pc))
    return np.tensordot(np.linalg.inv(a), rhs, axes=1)


def monopoly_shares_clamped(p, pb, pc):
    """Shares solving the indifference conditions with each share kept in [0, 1].

    ``x -> clip(a_b + k_b * clip(a_c + k_c * x))`` is monotone with slope
    below one, so its fixed point is whichever of the three linear
    candidates maps to itself.
    """
    a_b, a_c = (p.u0_b - pb) / p.t_b, (p.u0_c - pc) / p.t_c
    k_b, k_c = p.b_b / p.t_b, p.b_c / p.t_c

    def g(x):
        return np.clip(a_b + k_b * np.clip(a_c + k_c * x, 0, 1), 0, 1)

    cands = [np.clip(a_b, 0, 1), np.clip(a_b + k_b, 0, 1), np.clip((a_b + k_b * a_c) / (1 - k_b * k_c), 0, 1)]
    err = np.stack([np.abs(g(c) - c) for c in cands])
    qb = np.choose(np.argmin(err, axis=0), cands)
    return qb, np.clip(a_c + k_c * qb, 0, 1)


def monopoly_profit_clamped(p, pb, pc):
    qb, qc = monopoly_shares_clamped(p, pb, pc)
    return (pb - p.f_b) * qb + (pc - p.f_c) * qc


def monopoly_grid_refine(p, n: int = 301, zoom: int = 41, rounds: int = 12):
    """Grid search over a box around cost and intrinsic benefit, then
    repeated local grids shrinking tenfold around the incumbent.

    Local grids rather than a simplex method: the clamped surface has ridges
    where a share hits 0 or 1, and simplex steps stall on them.
    """
    lo_b, hi_b = min(p.f_b, p.u0_b) - 2.0, max(p.f_b, p.u0_b) + 2.0
    lo_c, hi_c = min(p.f_c, p.u0_c) - 2.0, max(p.f_c, p.u0_c) + 2.0
    gb, gc = np.meshgrid(np.linspace(lo_b, hi_b, n), np.linspace(lo_c, hi_c, n), indexing="ij")
    r = monopoly_profit_clamped(p, gb, gc)
    k = np.unravel_index(np.argmax(r), r.shape)
    x, best = np.array([gb[k], gc[k]]), r[k]
    half = np.array([hi_b - lo_b, hi_c - lo_c]) / (n - 1)
    offs = np.linspace(-1.0, 1.0, zoom)
    for _ in range(rounds):
        gb, gc = np.meshgrid(x[0] + half[0] * offs, x[1] + half[1] * offs, indexing="ij")
        r = monopoly_profit_clamped(p, gb, gc)
        k = np.unravel_index(np.argmax(r), r.shape)
        if r[k] >= best:
            x, best = np.array([gb[k], gc[k]]), r[k]
        half = half / 10
    return x, float(best)


# --- duopoly ----------------------------------------------------------------

def duopoly_shares_fixed_point(p, prices, tol: float = 1e-14, max_iter: int = 100_000):
    """Gauss-Seidel on the two indifference conditions (unclamped)."""
    p_wb, p_nb, p_wc, p_nc = prices
    q_wb = q_wc = 0.5
    for _ in range(max_iter):
        new_b = (p.t_b + p_nb - p_wb - p.alpha_n + p.alpha_plus * q_wc) / (2 * p.t_b)
        new_c = (p.t_c + p_nc - p_wc - p.beta_n + p.beta_plus * new_b) / (2 * p.t_c)
        done = abs(new_b - q_wb) < tol and abs(new_c - q_wc) < tol
        q_wb, q_wc = new_b, new_c
        if done:
            break
    return q_wb, q_wc


def duopoly_profit_oracle(p, prices):
    q_wb, q_wc = duopoly_shares_fixed_point(p, prices)
    p_wb, p_nb, p_wc, p_nc = prices
    return ((p_wb - p.f_wb) * q_wb + (p_wc - p.f_wc) * q_wc,
            (p_nb - p.f_nb) * (1 - q_wb) + (p_nc - p.f_nc) * (1 - q_wc))


def duopoly_numeric_br(p, platform: str, prices, x0=None):
    """Maximise one platform's profit numerically with the rival fixed."""
    prices = list(prices)
    own = (0, 2) if platform == "w" else (1, 3)
    idx = 0 if platform == "w" else 1

    def neg(x):
        q = list(prices)
        q[own[0]], q[own[1]] = x
        return -duopoly_profit_oracle(p, q)[idx]

    start = np.array([prices[own[0]], prices[own[1]]]) if x0 is None else x0
    res = minimize(neg, start, method="Nelder-Mead", options={"xatol": 1e-11, "fatol": 1e-15, "maxiter": 20_000})
    return res.x


def duopoly_numeric_nash(p, start=(1.0, 1.0, 1.0, 1.0), rounds: int = 200, tol: float = 1e-9):
    prices = np.array(start, dtype=float)
    for _ in range(rounds):
        old = prices.copy()
        prices[[0, 2]] = duopoly_numeric_br(p, "w", prices)
        prices[[1, 3]] = duopoly_numeric_br(p, "n", prices)
        if np.max(np.abs(prices - old)) < tol:
            break
    return prices


# --- one-sided multi-homing --------------------------------------------------

def onesided_br_oracle(p, rounds: int = 200, tol: float = 1e-12):
    """Alternating best response in commuter prices.

    Worksite prices extract the full worksite surplus, ``p_ib = q_ic * alpha_i``;
    each commuter price is found by a coarse grid then bounded scalar search.
    """

    def share_w(p_wc, p_nc):
        return np.clip(0.5 + (p_nc - p_wc) / (2 * p.t_c), 0.0, 1.0)

    def r_w(p_wc, p_nc):
        q = share_w(p_wc, p_nc)
        return q * p.alpha_w - p.f_wb + (p_wc - p.f_wc) * q

    def r_n(p_nc, p_wc):
        q = 1 - share_w(p_wc, p_nc)
        return q * p.alpha_n - p.f_nb + (p_nc - p.f_nc) * q

    def br(fn, other):
        hi = 4.0 + 4 * p.t_c
        grid = np.linspace(0.0, hi, 4001)
        vals = fn(grid, other)
        k = int(np.argmax(vals))
        lo_b, hi_b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
        res = minimize_scalar(lambda x: -fn(x, other), bounds=(lo_b, hi_b), method="bounded",
                              options={"xatol": 1e-13})
        return float(res.x) if -res.fun >= vals[k] else float(grid[k])

    p_wc = p_nc = p.t_c
    for _ in range(rounds):
        new_w = br(r_w, p_nc)
        new_n = br(r_n, new_w)
        done = abs(new_w - p_wc) < tol and abs(new_n - p_nc) < tol
        p_wc, p_nc = new_w, new_n
        if done:
            break
    q = share_w(p_wc, p_nc)
    p_wb, p_nb = q * p.alpha_w, (1 - q) * p.alpha_n
    return (float(p_wb), float(p_nb), p_wc, p_nc), (float(r_w(p_wc, p_nc)), float(r_n(p_nc, p_wc)))
