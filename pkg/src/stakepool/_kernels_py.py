"""Pure-Python kernels.  ``_kernels.pyx`` mirrors these function for function.

Family codes: 0 uniform on [0, T], 1 power ``(c/T)**alpha``.
"""
import math

import numpy as np

MAX_ITER = 200


def _cdf(family, alpha, T, c):
    if c >= T:
        return 1.0
    if family == 0:
        return c / T
    return (c / T) ** alpha


def gap(family, alpha, T, H, M, R, lam, cd, with_delegators, c):
    """Pool-minus-delegate payoff of an agent with cost c at threshold c.

    ``with_delegators=False`` drops the delegator payoff (idle outside option).
    """
    F = _cdf(family, alpha, T, c)
    denom = F * H + M
    owner = math.inf if denom == 0.0 else lam * R / denom
    deleg = 0.0
    if with_delegators and lam < 1.0:
        rest = (1.0 - F) * H
        deleg = math.inf if rest <= 0.0 else (1.0 - lam) * R / rest
    return owner - deleg + cd - c


def solve_gap(family, alpha, T, H, M, R, lam, cd, with_delegators):
    """Bisection root of the decreasing gap on [0, T].

    The caller guarantees gap(0) > 0.  Returns T when gap(T) >= 0.
    """
    if gap(family, alpha, T, H, M, R, lam, cd, with_delegators, T) >= 0.0:
        return T
    lo = 0.0
    hi = T
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g = gap(family, alpha, T, H, M, R, lam, cd, with_delegators, mid)
        if g > 0.0:
            lo = mid
        elif g < 0.0:
            hi = mid
        else:
            return mid
    return 0.5 * (lo + hi)


def mc_gaps(sorted_costs, choice_u, thresholds, m, lam, r):
    """Indifference gap of every replication at its own threshold.

    ``sorted_costs`` and ``choice_u`` are (reps, n) arrays; row j holds the
    ascending costs and the delegators' uniform pool-choice draws of
    replication j.  The owner side is the ex-post owner reward averaged over
    all k + m pools, lam*r/(k + m); the delegator side is the average ex-post
    delegator reward.  With no delegators left, a lone deviating delegator's
    reward 2(1 - lam) r/(n + m) is used instead.
    """
    reps, n = sorted_costs.shape
    total = n + m
    gaps = np.empty(reps)
    for j in range(reps):
        c = thresholds[j]
        k = int(np.searchsorted(sorted_costs[j], c, side="left"))
        pools = k + m
        owner = lam * r / (pools if pools > 0 else 1)
        nd = n - k
        if nd > 0 and pools > 0:
            idx = (choice_u[j, k:] * pools).astype(np.int64)
            np.minimum(idx, pools - 1, out=idx)
            nonempty = np.count_nonzero(np.bincount(idx, minlength=pools))
            deleg = (1.0 - lam) * r * (nd + nonempty) / (total * nd)
        else:
            deleg = (1.0 - lam) * r * 2.0 / total
        gaps[j] = owner - c - deleg
    return gaps
