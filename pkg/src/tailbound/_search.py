"""One-dimensional minimization of log-convex tail objectives."""

from __future__ import annotations

import math
from typing import Callable, Sequence

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

#: default bracket and expansion cap for the exponential-rate search
H_BRACKET_LO = 1e-6
H_BRACKET_HI = 50.0
H_BRACKET_CAP = 1e5
H_TOL = 1e-10


def golden_section_min(
    fn: Callable[[float], float], lo: float, hi: float, tol: float = H_TOL
) -> tuple[float, float]:
    """Minimize a unimodal function on [lo, hi] to within ``tol`` on x."""
    a, b = lo, hi
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = fn(x1), fn(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = fn(x2)
    x = 0.5 * (a + b)
    return x, fn(x)


def _logsumexp(terms: Sequence[float]) -> float:
    top = max(terms)
    if top == -math.inf:
        return -math.inf
    return top + math.log(math.fsum(math.exp(v - top) for v in terms))


def minimize_exp_tail(
    support: Sequence[float],
    probs: Sequence[float],
    n: int,
    t: float,
) -> tuple[float, float]:
    """Minimize ``h -> exp(-h t) * (sum_j pi_j exp(h s_j))**n`` over h > 0.

    The log-objective is convex (log-sum-exp minus a linear term), so a
    bracketed golden-section search is exact in the limit.  The upper
    bracket starts at ``H_BRACKET_HI`` and doubles until the analytic
    derivative changes sign (capped at ``H_BRACKET_CAP``).

    Returns ``(value, h_star)``.
    """
    points = [(s, q) for s, q in zip(support, probs) if q > 0.0]
    logq = [math.log(q) for _, q in points]
    svals = [s for s, _ in points]

    def log_obj(h: float) -> float:
        return -h * t + n * _logsumexp([lq + h * s for lq, s in zip(logq, svals)])

    def deriv(h: float) -> float:
        shift = max(lq + h * s for lq, s in zip(logq, svals))
        weights = [math.exp(lq + h * s - shift) for lq, s in zip(logq, svals)]
        total = math.fsum(weights)
        tilted_mean = math.fsum(w * s for w, s in zip(weights, svals)) / total
        return -t + n * tilted_mean

    lo, hi = H_BRACKET_LO, H_BRACKET_HI
    while deriv(hi) < 0.0 and hi < H_BRACKET_CAP:
        hi = min(2.0 * hi, H_BRACKET_CAP)
    h_star, log_val = golden_section_min(log_obj, lo, hi)
    return math.exp(log_val), h_star
