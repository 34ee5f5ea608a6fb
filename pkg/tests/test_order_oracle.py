"""The ground-truth engine: convolution, order checks, sampling, validation."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import binom_pmf_exact, random_unit_dist
from tailbound import (
    BinomialSpec,
    ConditionalMeansSpec,
    ConditionalProbsSpec,
    DiscreteDist,
    DomainError,
    MeanInstance,
    MomentVector,
    PartitionSpec,
    ResourceLimitError,
    SamplingExhaustedError,
    VarianceClassSpec,
    binomial_dist,
    check_convex_order,
    check_stochastic_order,
    convolve,
    hoeffding_bound,
    markov_reduction_check,
    mix_envelope,
    sample_class_member,
    upper_tail,
    validate_bound,
)


def bernoulli(p):
    return DiscreteDist((0.0, 1.0), (1 - p, p))


def test_convolve_bernoullis_is_binomial():
    for n in (1, 3, 6):
        total = convolve([bernoulli(0.3)] * n)
        for k in range(n + 1):
            assert total.prob_at(float(k)) == pytest.approx(
                float(binom_pmf_exact(n, k, Fraction(3, 10))), abs=1e-12
            )


def test_convolve_with_point_mass_is_identity():
    x = DiscreteDist((0.0, 0.5, 1.0), (0.25, 0.5, 0.25))
    out = convolve([x, DiscreteDist.point_mass(0.0)])
    assert out.support == x.support
    assert out.probs == pytest.approx(x.probs, abs=1e-15)


def test_convolve_hand_example():
    x = DiscreteDist((0.0, 0.5, 1.0), (0.25, 0.5, 0.25))
    out = convolve([x, x])
    assert out.support == (0.0, 0.5, 1.0, 1.5, 2.0)
    assert out.probs == pytest.approx((1 / 16, 1 / 4, 3 / 8, 1 / 4, 1 / 16), abs=1e-14)


def test_convolve_merges_float_noise():
    x = DiscreteDist((0.1, 0.3), (0.5, 0.5))
    y = DiscreteDist((0.2, 0.4), (0.5, 0.5))
    out = convolve([x, y])
    # 0.1+0.4 and 0.3+0.2 are the same real point despite float noise
    assert out.support == pytest.approx((0.3, 0.5, 0.7))
    assert out.prob_at(0.5) == pytest.approx(0.5, abs=1e-14)


def test_convolve_support_guard():
    big = DiscreteDist(
        tuple(np.linspace(0.0, 1.0, 1001)), tuple(np.full(1001, 1.0 / 1001))
    )
    with pytest.raises(ResourceLimitError):
        convolve([big, big])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**30))
def test_convolve_mean_is_additive(seed):
    rng = np.random.default_rng(seed)
    dists = [random_unit_dist(rng) for _ in range(3)]
    total = convolve(dists)
    assert total.mean() == pytest.approx(sum(d.mean() for d in dists), abs=1e-12)


def test_convex_order_two_point_envelope():
    rng = np.random.default_rng(83)
    for _ in range(40):
        x = random_unit_dist(rng)
        assert check_convex_order(x, bernoulli(x.mean())).holds


def test_convex_order_unequal_bernoullis_below_binomial():
    mixture = convolve([bernoulli(0.3), bernoulli(0.7)])
    assert check_convex_order(mixture, binomial_dist(BinomialSpec(2, 0.5))).holds


def test_convex_order_mean_mismatch_fails_fast():
    cert = check_convex_order(bernoulli(0.5), bernoulli(0.6))
    assert not cert.holds
    assert cert.reason == "mean-mismatch"


def test_convex_order_transitive_on_sampled_chains():
    rng = np.random.default_rng(89)
    partition = PartitionSpec((0.0, 0.4, 1.0))
    for _ in range(30):
        x = random_unit_dist(rng)
        y = mix_envelope(x, partition)
        z = bernoulli(x.mean())
        assert check_convex_order(x, y).holds
        assert check_convex_order(y, z).holds
        assert check_convex_order(x, z).holds


def test_stochastic_order_examples():
    z = DiscreteDist((0.0, 0.5, 1.0), (0.3, 0.4, 0.3))  # weights of (0.5, 0.3)
    q = math.sqrt(0.3)
    xi = binomial_dist(BinomialSpec(2, q), scale=0.5)
    assert check_stochastic_order(z, xi).holds
    assert check_stochastic_order(z, z).holds
    cert = check_stochastic_order(bernoulli(0.6), bernoulli(0.5))
    assert not cert.holds
    assert cert.point == pytest.approx(1.0)


def test_mean_member_sampling():
    spec = MomentVector((0.4,))
    first = sample_class_member(spec, 11)
    second = sample_class_member(spec, 11)
    assert first == second  # reproducible under the same seed
    assert first.mean() == pytest.approx(0.4, abs=1e-12)
    assert first.n_points <= 2
    assert max(first.support) > 0.4


def test_variance_member_sampling():
    spec = VarianceClassSpec(0.5, 0.05)
    rng = np.random.default_rng(5)
    for _ in range(25):
        member = sample_class_member(spec, rng)
        assert member.mean() == pytest.approx(0.5, abs=1e-12)
        assert member.variance() == pytest.approx(0.05, abs=1e-12)
        assert member.n_points <= 3


def test_moment_member_sampling():
    spec = MomentVector((0.5, 0.3))
    rng = np.random.default_rng(6)
    for _ in range(25):
        member = sample_class_member(spec, rng)
        assert member.moment(1) == pytest.approx(0.5, abs=1e-11)
        assert member.moment(2) == pytest.approx(0.3, abs=1e-11)
        assert member.n_points <= 3


def test_conditional_member_sampling():
    partition = PartitionSpec((0.0, 0.4, 1.0))
    cm = ConditionalMeansSpec(partition, (0.2, 0.7), 0.45)
    rng = np.random.default_rng(7)
    for _ in range(20):
        member = sample_class_member(cm, rng)
        assert member.mean() == pytest.approx(0.45, abs=1e-11)
        low = [
            (s, q) for s, q in zip(member.support, member.probs) if s < 0.4 and q > 0
        ]
        mass = sum(q for _, q in low)
        if mass > 1e-12:
            cell_mean = sum(s * q for s, q in low) / mass
            assert cell_mean == pytest.approx(0.2, abs=1e-10)

    cp = ConditionalProbsSpec(partition, (0.3, 0.7), 0.5)
    for _ in range(20):
        member = sample_class_member(cp, rng)
        assert member.mean() == pytest.approx(0.5, abs=1e-11)
        mass_low = sum(q for s, q in zip(member.support, member.probs) if s < 0.4)
        assert mass_low == pytest.approx(0.3, abs=1e-12)


def test_infeasible_class_exhausts_sampling():
    with pytest.raises(SamplingExhaustedError):
        sample_class_member(MomentVector((0.5, 0.2)), 3)  # mu2 < mu1^2: empty class


def test_validate_bound_accepts_sound_bound():
    inst = MeanInstance(3, 0.5, 2.0)
    bound = hoeffding_bound(inst).value
    report = validate_bound([MomentVector((0.5,))] * 3, 2.0, bound, 200, 7)
    assert report.ok
    assert 0.0 < report.max_tail <= bound


def test_validate_bound_trivial_bound_always_passes():
    report = validate_bound([MomentVector((0.5,))] * 3, 2.0, 1.0, 50, 9)
    assert report.ok


def test_validate_bound_detects_corrupted_bound():
    # half the exponential bound near the threshold is beatable by members
    inst = MeanInstance(3, 0.5, 1.6)
    corrupted = hoeffding_bound(inst).value / 2.0
    report = validate_bound([MomentVector((0.5,))] * 3, 1.6, corrupted, 200, 7)
    assert not report.ok
    violation = report.violations[0]
    assert violation.tail > corrupted
    assert len(violation.members) == 3


def test_validate_bound_guards():
    with pytest.raises(DomainError):
        validate_bound([MomentVector((0.5,))] * 9, 3.0, 1.0, 1, 0)
    empty = validate_bound([MomentVector((0.5,))] * 3, 2.0, 0.5, 0, 0)
    assert empty.ok and empty.trials == 0


def test_unequal_bernoullis_dominated_by_averaged_binomial():
    # domination kicks in one unit above the mean; at c <= n*q_bar the
    # unequal-probability sum can have the larger tail (n=2, c=1 via AM-GM)
    rng = np.random.default_rng(97)
    for _ in range(40):
        n = int(rng.integers(2, 7))
        qs = rng.uniform(0.05, 0.95, n)
        q_bar = float(np.mean(qs))
        total = convolve([bernoulli(float(q)) for q in qs])
        reference = BinomialSpec(n, q_bar)
        start = math.ceil(n * q_bar + 1.0 - 1e-12)
        for c in range(max(start, 0), n + 1):
            assert total.upper_tail(float(c)) <= upper_tail(reference, c) + 1e-10


def test_markov_reduction_examples():
    report = markov_reduction_check([1.0, 1.0], 4.0)
    assert report.value == pytest.approx(0.5, abs=1e-15)
    assert report.eps_star == 0.0
    assert report.ok

    single = markov_reduction_check([0.7], 2.0)
    assert single.value == pytest.approx(0.35, abs=1e-15)

    triple = markov_reduction_check([0.5, 0.5, 0.5], 2.0)
    assert triple.value == pytest.approx(0.75, abs=1e-15)
    assert triple.eps_star == 0.0

    with pytest.raises(DomainError):
        markov_reduction_check([1.0, 1.0], 2.0)


def test_markov_reduction_grid_oracle():
    # no cut point in (0, t) does better than the plain mean-over-threshold value
    mus = [0.4, 0.8, 0.3]
    t = 3.0
    parts = [DiscreteDist((0.0, t), (1 - mu / t, mu / t)) for mu in mus]
    total = convolve(parts)
    target = sum(mus) / t
    for eps in np.linspace(0.0, t - 1e-9, 4001):
        value = total.expected_positive_part(float(eps)) / (t - eps)
        assert value >= target - 1e-12
