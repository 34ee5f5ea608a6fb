"""Bounds that exploit conditional information or a known variance.

A variable on [0,1] restricted to a cell of a partition is dominated, in
convex order, by the two-point variable on the cell endpoints with the
same mean.  Mixing those per-cell envelopes yields distributions supported
on the partition breakpoints that dominate every class member, and the
usual machinery (exponential rates, optimal piecewise-linear cuts) then
applies to the envelope instead of the worst case.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import exp, fsum, log, log1p, sqrt
from typing import Sequence

from ._search import minimize_exp_tail
from .classic_bounds import BoundReport, VarianceClassSpec, make_report
from .distributions import DiscreteDist, convolve
from .errors import DomainError


@dataclass(frozen=True)
class PartitionSpec:
    """Breakpoints 0 = r_0 < r_1 < ... < r_m = 1 splitting [0,1] into m >= 2
    cells; every cell is closed on the left, and the last also on the right."""

    breakpoints: tuple[float, ...]

    def __post_init__(self) -> None:
        r = tuple(float(v) for v in self.breakpoints)
        if len(r) < 3:
            raise DomainError("a partition needs at least two cells (three breakpoints)")
        if r[0] != 0.0 or r[-1] != 1.0:
            raise DomainError("breakpoints must start at exactly 0 and end at exactly 1")
        for a, b in zip(r, r[1:]):
            if not a < b:
                raise DomainError("breakpoints must be strictly ascending")
        object.__setattr__(self, "breakpoints", r)

    @property
    def n_cells(self) -> int:
        return len(self.breakpoints) - 1

    def cell_index(self, x: float) -> int:
        """1-based index of the cell containing x in [0, 1]."""
        r = self.breakpoints
        if not 0.0 <= x <= 1.0:
            raise DomainError(f"value {x!r} outside [0, 1]")
        for j in range(1, len(r)):
            if x < r[j]:
                return j
        return self.n_cells


def _check_cell_mean(partition: PartitionSpec, j: int, mu_j: float) -> bool:
    r = partition.breakpoints
    m = partition.n_cells
    if j < m:
        return r[j - 1] <= mu_j < r[j]
    return r[m - 1] <= mu_j <= 1.0


@dataclass(frozen=True)
class ConditionalMeansSpec:
    """One variable's description: partition, per-cell conditional means,
    and overall mean p, with mu_1 <= p <= mu_m."""

    partition: PartitionSpec
    mu: tuple[float, ...]
    p: float

    def __post_init__(self) -> None:
        mu = tuple(float(v) for v in self.mu)
        if len(mu) != self.partition.n_cells:
            raise DomainError("one conditional mean per cell is required")
        for j, mu_j in enumerate(mu, start=1):
            if not _check_cell_mean(self.partition, j, mu_j):
                raise DomainError(
                    f"conditional mean mu_{j}={mu_j!r} lies outside cell {j}"
                )
        if not 0.0 < self.p < 1.0:
            raise DomainError("p must lie in (0, 1)")
        if not mu[0] <= self.p <= mu[-1]:
            raise DomainError(
                f"overall mean p={self.p!r} must lie between mu_1 and mu_m"
            )
        object.__setattr__(self, "mu", mu)


@dataclass(frozen=True)
class ConditionalProbsSpec:
    """One variable's description: partition, per-cell probabilities q_j
    summing to one, and overall mean p achievable under those masses."""

    partition: PartitionSpec
    q: tuple[float, ...]
    p: float

    def __post_init__(self) -> None:
        q = tuple(float(v) for v in self.q)
        if len(q) != self.partition.n_cells:
            raise DomainError("one cell probability per cell is required")
        if any(v < 0.0 for v in q):
            raise DomainError("cell probabilities must be nonnegative")
        total = fsum(q)
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"cell probabilities sum to {total!r}, not 1")
        if not 0.0 < self.p < 1.0:
            raise DomainError("p must lie in (0, 1)")
        r = self.partition.breakpoints
        lo = fsum(qj * r[j] for j, qj in enumerate(q))
        hi = fsum(qj * r[j + 1] for j, qj in enumerate(q))
        if not lo - 1e-12 <= self.p <= hi + 1e-12:
            raise DomainError(
                f"mean p={self.p!r} unreachable under the cell masses: "
                f"feasible range is [{lo!r}, {hi!r}]"
            )
        object.__setattr__(self, "q", q)


def mix_envelope(x: DiscreteDist, partition: PartitionSpec) -> DiscreteDist:
    """Replace each cell's conditional distribution with its two-endpoint
    envelope and mix; the output lives on the breakpoints, keeps the mean of
    x exactly, and dominates x in convex order."""
    r = partition.breakpoints
    weights = [0.0] * len(r)
    accum: list[list[float]] = [[] for _ in r]
    for s, q in zip(x.support, x.probs):
        if q == 0.0:
            continue
        j = partition.cell_index(s)
        width = r[j] - r[j - 1]
        left_share = (r[j] - s) / width
        accum[j - 1].append(q * left_share)
        accum[j].append(q * (1.0 - left_share))
    pairs = [(rj, fsum(parts)) for rj, parts in zip(r, accum) if parts]
    pairs = [(rj, w) for rj, w in pairs if w > 0.0]
    return DiscreteDist(tuple(s for s, _ in pairs), tuple(w for _, w in pairs))


def conditional_means_bound(
    specs: Sequence[ConditionalMeansSpec], t: float
) -> BoundReport:
    """Exponential bound using only the first and last conditional means.

    Each variable is dominated by a mixture of the first cell's and the
    last cell's endpoint envelopes, weighted to reproduce its overall mean;
    the averaged mixture has mass pi_1..pi_4 on (0, r_1, r_{m-1}, 1) and
    the bound is inf over h > 0 of
    exp(-h t) (pi_1 + e^{h r_1} pi_2 + e^{h r_{m-1}} pi_3 + e^{h} pi_4)^n.
    """
    if not specs:
        raise DomainError("at least one variable spec is required")
    partition = specs[0].partition
    if any(spec.partition != partition for spec in specs):
        raise DomainError("all variables must share the same partition")
    r = partition.breakpoints
    m = partition.n_cells
    n = len(specs)
    q_list, s_list, u_list = [], [], []
    for spec in specs:
        mu1, mum = spec.mu[0], spec.mu[-1]
        if mum <= mu1:
            raise DomainError("degenerate mixture: mu_m must exceed mu_1")
        if not mu1 <= spec.p <= mum:
            raise DomainError("overall mean must lie between mu_1 and mu_m")
        q_list.append((mum - spec.p) / (mum - mu1))
        s_list.append((r[1] - mu1) / (r[1] - r[0]))
        u_list.append((r[m] - mum) / (r[m] - r[m - 1]))
    pi1 = fsum(q * s for q, s in zip(q_list, s_list)) / n
    pi2 = fsum(q * (1.0 - s) for q, s in zip(q_list, s_list)) / n
    pi3 = fsum((1.0 - q) * u for q, u in zip(q_list, u_list)) / n
    pi4 = fsum((1.0 - q) * (1.0 - u) for q, u in zip(q_list, u_list)) / n
    p_bar = fsum(spec.p for spec in specs) / n
    if not n * p_bar < t < n:
        raise DomainError(f"t must satisfy n*p < t < n, i.e. {n * p_bar!r} < t < {n}")
    envelope = DiscreteDist.from_pairs(
        [(0.0, pi1), (r[1], pi2), (r[m - 1], pi3), (1.0, pi4)]
    )
    value, h_star = minimize_exp_tail(envelope.support, envelope.probs, n, t)
    return make_report(
        "conditional_means",
        value,
        {"h": h_star, "pi1": pi1, "pi2": pi2, "pi3": pi3, "pi4": pi4},
        n=n,
        p_or_q1=p_bar,
        t=t,
    )


def _lp_extremal_means(spec: ConditionalProbsSpec) -> tuple[float, ...]:
    """Conditional means maximizing the envelope's exponential moment.

    For any rate h > 0 the objective is linear in each cell mean with
    per-unit-of-mean gain q_j * (chord slope of e^{hx} over cell j); the
    constraint sum q_j mu_j = p prices each unit of mu_j at q_j, so the
    gain per unit of budget is the chord slope alone, increasing with the
    cell for every h.
    Filling cells greedily from the top therefore reaches the optimum, a
    vertex with at most one cell mean strictly inside its box.
    """
    r = spec.partition.breakpoints
    m = spec.partition.n_cells
    mus = [r[j - 1] for j in range(1, m + 1)]
    budget = spec.p - fsum(qj * mu for qj, mu in zip(spec.q, mus))
    for j in range(m, 0, -1):
        if budget <= 0.0:
            break
        if spec.q[j - 1] == 0.0:
            continue
        capacity = spec.q[j - 1] * (r[j] - r[j - 1])
        take = min(budget, capacity)
        mus[j - 1] += take / spec.q[j - 1]
        budget -= take
    return tuple(mus)


def conditional_probs_bound(
    spec: ConditionalProbsSpec, n: int, t: float
) -> BoundReport:
    """Exponential bound for known cell probabilities.

    At the rate h with e^h = t(1-p)/(p(n-t)) -- the optimal rate for the
    mean-only exponential bound -- the worst envelope over all admissible
    conditional means solves a box-constrained linear program with one
    budget constraint; its greedy vertex solution gives the reported value
    exp(-h t) (E[e^{h xi}])^n.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise DomainError("n must be a positive integer")
    p = spec.p
    if not n * p < t < n:
        raise DomainError(f"t must satisfy n*p < t < n, i.e. {n * p!r} < t < {n}")
    h = log(t) + log1p(-p) - log(p) - log(n - t)
    mus = _lp_extremal_means(spec)
    r = spec.partition.breakpoints
    pairs = []
    for j, (qj, mu) in enumerate(zip(spec.q, mus), start=1):
        if qj == 0.0:
            continue
        width = r[j] - r[j - 1]
        left_share = (r[j] - mu) / width
        pairs.append((r[j - 1], qj * left_share))
        pairs.append((r[j], qj * (1.0 - left_share)))
    xi = DiscreteDist.from_pairs(pairs)
    mgf = fsum(q * exp(h * s) for s, q in zip(xi.support, xi.probs))
    value = exp(-h * t + n * log(mgf))
    return make_report(
        "conditional_probs",
        value,
        {"h": h, "mu": mus, "xi": xi},
        n=n,
        p_or_q1=p,
        t=t,
    )


def xi_distribution(vclass: VarianceClassSpec) -> DiscreteDist:
    """The three-point distribution on {0, p, 1} dominating, in convex
    order, every mean-p variance-sigma2 variable.

    The mass at p is minimized subject to the class constraints; the
    optimal split (l1, l2) of the deviations around p has the closed form
    below, with the case boundaries resolved to the symmetric branch when
    sigma <= min(p, 1-p).
    """
    p, s2 = vclass.p, vclass.sigma2
    sigma = sqrt(s2)
    if sigma > 1.0 - p:
        denom = (1.0 - p) ** 2 + s2
        p0 = s2 * (1.0 - p) / (p * denom)
        pp = (1.0 - p) * ((1.0 - p) * p - s2) / (p * denom)
        p1 = s2 / denom
    elif sigma > p:
        denom = p * p + s2
        p0 = s2 / denom
        pp = p * ((1.0 - p) * p - s2) / ((1.0 - p) * denom)
        p1 = p * s2 / ((1.0 - p) * denom)
    else:
        p0 = sigma / (2.0 * p)
        pp = 1.0 - sigma / (2.0 * (1.0 - p) * p)
        p1 = sigma / (2.0 - 2.0 * p)
    return DiscreteDist((0.0, p, 1.0), (p0, pp, p1))


def xi_sum_bound(vclasses: Sequence[VarianceClassSpec], t: float) -> BoundReport:
    """Optimal piecewise-linear bound against the exact convolution of the
    per-variable three-point envelopes.

    The cut candidates are 0 together with every support point of the sum
    below t; the optimum of the ratio E[max(0, S-e)]/(t-e) over e in [0, t)
    sits at such a point.  Ties break toward the largest candidate.
    """
    if not vclasses:
        raise DomainError("at least one variance class is required")
    n = len(vclasses)
    p_bar = fsum(v.p for v in vclasses) / n
    if not n * p_bar < t < n:
        raise DomainError(f"t must satisfy n*p < t < n, i.e. {n * p_bar!r} < t < {n}")
    total = convolve([xi_distribution(v) for v in vclasses])
    candidates = [0.0] + [s for s in total.support if 0.0 < s < t]
    best_value = None
    best_eps = None
    for eps in candidates:
        value = total.expected_positive_part(eps) / (t - eps)
        if best_value is None or value <= best_value:
            best_value, best_eps = value, eps
    sigma2s = {v.sigma2 for v in vclasses}
    shared_sigma2 = sigma2s.pop() if len(sigma2s) == 1 else None
    return make_report(
        "xi_sum",
        best_value,
        {"epsilon": best_eps},
        n=n,
        p_or_q1=p_bar,
        sigma2=shared_sigma2,
        t=t,
    )
