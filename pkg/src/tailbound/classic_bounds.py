"""Closed-form tail bounds that need only the mean, or mean plus variance.

Every bound function returns a :class:`BoundReport`; values above one are
clipped to one and flagged rather than rejected, since such a bound is
vacuous but not wrong.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import exp, fsum, log, log1p
from typing import Any, Mapping, Sequence

from .errors import DomainError


@dataclass(frozen=True)
class MeanInstance:
    """A sum of n independent [0,1]-valued variables with average mean p,
    queried at threshold t in the nontrivial regime n*p < t < n."""

    n: int
    p: float
    t: float

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 1:
            raise DomainError("n must be a positive integer")
        if not 0.0 < self.p < 1.0:
            raise DomainError("p must lie in (0, 1)")
        if not self.n * self.p < self.t < self.n:
            raise DomainError(
                f"t must satisfy n*p < t < n, i.e. {self.n * self.p!r} < t < {self.n}"
            )

    @classmethod
    def from_means(cls, means: Sequence[float], t: float) -> "MeanInstance":
        """Build from per-variable means; the bounds depend only on their average."""
        if not means:
            raise DomainError("means must be nonempty")
        for m in means:
            if not 0.0 < m < 1.0:
                raise DomainError(f"each mean must lie in (0, 1), got {m!r}")
        return cls(len(means), fsum(means) / len(means), t)


@dataclass(frozen=True)
class VarianceClassSpec:
    """Mean/variance pair (p, sigma2) with 0 < sigma2 <= p(1-p)."""

    p: float
    sigma2: float

    def __post_init__(self) -> None:
        if not 0.0 < self.p < 1.0:
            raise DomainError("p must lie in (0, 1)")
        cap = self.p * (1.0 - self.p)
        if not 0.0 < self.sigma2 <= cap + 1e-15:
            raise DomainError(
                f"sigma2 must satisfy 0 < sigma2 <= p(1-p) = {cap!r}, got {self.sigma2!r}"
            )


@dataclass(frozen=True)
class BoundReport:
    """A computed bound value with its method tag and optimizer witnesses.

    ``clamped`` is set exactly when the raw formula exceeded one and the
    value was clipped.  The trailing context fields carry the instance the
    bound was computed for; they exist for serialization and may be None.
    """

    method: str
    value: float
    witness: Mapping[str, Any] | None = None
    clamped: bool = False
    n: int | None = None
    p_or_q1: float | None = None
    sigma2: float | None = None
    t: float | None = None


def make_report(
    method: str,
    raw: float,
    witness: Mapping[str, Any] | None = None,
    *,
    n: int | None = None,
    p_or_q1: float | None = None,
    sigma2: float | None = None,
    t: float | None = None,
) -> BoundReport:
    """Clamp a raw bound into [0, 1] and wrap it in a report."""
    clamped = raw > 1.0
    value = 1.0 if clamped else max(0.0, raw)
    return BoundReport(method, value, witness, clamped, n, p_or_q1, sigma2, t)


def markov_bound(total_mean: float, t: float) -> BoundReport:
    """P[S >= t] <= E[S] / t for a nonnegative sum."""
    if t <= 0.0:
        raise DomainError("t must be positive")
    if total_mean < 0.0:
        raise DomainError("total_mean must be nonnegative")
    return make_report("markov", total_mean / t, t=t)


def _log_hoeffding(n: int, p: float, t: float) -> float:
    return t * (log(p) + log(n - t) - log(t) - log1p(-p)) + n * (
        log1p(-p) + log(n) - log(n - t)
    )


def optimal_exp_rate(inst: MeanInstance) -> float:
    """The minimizing rate h of exp(-h t) (1 - p + p e^h)^n, as a log."""
    n, p, t = inst.n, inst.p, inst.t
    return log(t) + log1p(-p) - log(p) - log(n - t)


def hoeffding_bound(inst: MeanInstance) -> BoundReport:
    """The optimized exponential-moment bound
    (p(n-t)/(t(1-p)))^t ((1-p)n/(n-t))^n, computed in log space."""
    value = exp(_log_hoeffding(inst.n, inst.p, inst.t))
    return make_report(
        "hoeffding",
        value,
        {"h": optimal_exp_rate(inst)},
        n=inst.n,
        p_or_q1=inst.p,
        t=inst.t,
    )


def hoeffding_exp_bound(inst: MeanInstance) -> BoundReport:
    """The looser but more common form exp(-2 n (t/n - p)^2)."""
    n, p, t = inst.n, inst.p, inst.t
    value = exp(-2.0 * n * (t / n - p) ** 2)
    return make_report("hoeffding_exp", value, n=n, p_or_q1=p, t=t)


def bennett_bound(n: int, vclass: VarianceClassSpec, t: float) -> BoundReport:
    """Variance-aware exponential bound ((a/b)^b ((1-a)/(1-b))^(1-b))^n with
    a = s2/(s2+(1-p)^2) and b = (s2 + (t/n - p)(1-p))/(s2+(1-p)^2)."""
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise DomainError("n must be a positive integer")
    p, s2 = vclass.p, vclass.sigma2
    if not n * p < t < n:
        raise DomainError(f"t must satisfy n*p < t < n, i.e. {n * p!r} < t < {n}")
    denom = s2 + (1.0 - p) ** 2
    alpha = s2 / denom
    beta = (s2 + (t / n - p) * (1.0 - p)) / denom
    if beta >= 1.0:
        raise DomainError("threshold too large: mixture parameter reached 1")
    log_value = n * (beta * log(alpha / beta) + (1.0 - beta) * log((1.0 - alpha) / (1.0 - beta)))
    return make_report(
        "bennett",
        exp(log_value),
        {"alpha": alpha, "beta": beta},
        n=n,
        p_or_q1=p,
        sigma2=s2,
        t=t,
    )
