"""Conjugate-belief machinery: updates, moments, divergences, inversions."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from banditlab.errors import (
    ConvergenceError,
    DomainError,
    FamilyMismatchError,
    NoSolutionError,
    UndefinedMeanError,
)
from banditlab.expfam import (
    BeliefState,
    ExpectationParams,
    Observation,
    RewardFamily,
    digamma,
    expectation_params,
    kl_belief,
    log_beta,
    log_gamma,
    mean_reward,
    mean_reward_sd,
    natural_from_expectation,
    posterior_quantile,
    posterior_update,
    trigamma,
)
from banditlab.oracles import kl_quadrature

EULER_GAMMA = 0.5772156649015329

beta = lambda a, b: BeliefState(RewardFamily.BERNOULLI, a, b)
gamma = lambda a, b: BeliefState(RewardFamily.EXPONENTIAL, a, b)


class TestSpecialFunctions:
    def test_digamma_reference_values(self):
        # digamma(1) = -euler_gamma; digamma(0.5) = -euler_gamma - 2 ln 2;
        # digamma(10) = -euler_gamma + H_9.
        assert digamma(1.0) == pytest.approx(-EULER_GAMMA, abs=1e-12)
        assert digamma(0.5) == pytest.approx(-EULER_GAMMA - 2.0 * math.log(2.0), abs=1e-12)
        assert digamma(2.0) == pytest.approx(1.0 - EULER_GAMMA, abs=1e-12)
        h9 = sum(1.0 / k for k in range(1, 10))
        assert digamma(10.0) == pytest.approx(-EULER_GAMMA + h9, abs=1e-12)

    def test_digamma_recurrence(self):
        assert digamma(2.0) - digamma(1.0) == pytest.approx(1.0, abs=1e-12)
        for x in (0.3, 1.7, 5.5, 40.0):
            assert digamma(x + 1.0) - digamma(x) == pytest.approx(1.0 / x, abs=1e-12)

    def test_trigamma_reference_values(self):
        assert trigamma(1.0) == pytest.approx(math.pi**2 / 6.0, abs=1e-12)
        assert trigamma(0.5) == pytest.approx(math.pi**2 / 2.0, abs=1e-12)
        assert trigamma(2.0) == pytest.approx(math.pi**2 / 6.0 - 1.0, abs=1e-12)

    def test_log_beta_and_log_gamma(self):
        assert log_beta(2.0, 2.0) == pytest.approx(math.log(1.0 / 6.0), abs=1e-12)
        assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), abs=1e-12)
        assert log_gamma(6.0) == pytest.approx(math.log(120.0), abs=1e-12)

    def test_matches_scipy_over_sweep(self):
        xs = np.concatenate([np.linspace(0.01, 8.0, 300), np.linspace(8.0, 400.0, 80)])
        for x in xs:
            assert abs(digamma(float(x)) - special.digamma(x)) < 1e-12
            assert abs(trigamma(float(x)) - special.polygamma(1, x)) < 1e-12

    @pytest.mark.parametrize("fn", [digamma, trigamma, log_gamma])
    def test_domain_errors(self, fn):
        for bad in (0.0, -1.0, math.inf, math.nan):
            with pytest.raises(DomainError):
                fn(bad)
        with pytest.raises(DomainError):
            log_beta(1.0, 0.0)


class TestPosteriorUpdate:
    def test_bernoulli_success(self):
        assert posterior_update(beta(1, 1), Observation(1.0)) == beta(2, 1)

    def test_bernoulli_failure(self):
        assert posterior_update(beta(2, 3), Observation(0.0)) == beta(2, 4)

    def test_exponential(self):
        out = posterior_update(gamma(3, 1.5), Observation(0.7))
        assert out.alpha == pytest.approx(4.0)
        assert out.beta == pytest.approx(2.2)

    def test_input_unchanged(self):
        b = beta(1, 1)
        posterior_update(b, Observation(1.0))
        assert b == beta(1, 1)

    def test_reward_outside_support(self):
        with pytest.raises(DomainError):
            posterior_update(beta(1, 1), Observation(0.5))
        with pytest.raises(DomainError):
            posterior_update(gamma(1, 1), Observation(-0.1))

    def test_update_order_commutes(self):
        via_10 = posterior_update(posterior_update(beta(1, 1), Observation(1.0)), Observation(0.0))
        via_01 = posterior_update(posterior_update(beta(1, 1), Observation(0.0)), Observation(1.0))
        assert via_10 == via_01

    def test_prior_washout_bound(self):
        rng = np.random.default_rng(7)
        b = beta(1, 1)
        total = 0.0
        n = 400
        for _ in range(n):
            x = float(rng.random() < 0.3)
            total += x
            b = posterior_update(b, Observation(x))
        assert abs(mean_reward(b) - total / n) <= 2.0 / n


class TestMeanReward:
    def test_bernoulli(self):
        assert mean_reward(beta(2, 1)) == pytest.approx(2.0 / 3.0)
        assert mean_reward(beta(1, 1)) == pytest.approx(0.5)

    def test_gamma_matches_quadrature(self):
        # Oracle: E[X] = integral over theta of b(theta) * (integral of
        # x * theta e^{-theta x} dx), both integrals numeric.
        b = gamma(3, 1)

        def predictive_mean(belief):
            def inner(theta):
                val, _ = integrate.quad(lambda x: x * theta * math.exp(-theta * x), 0, np.inf)
                dens = math.exp(
                    belief.alpha * math.log(belief.beta)
                    - math.lgamma(belief.alpha)
                    + (belief.alpha - 1.0) * math.log(theta)
                    - belief.beta * theta
                )
                return dens * val

            val, _ = integrate.quad(inner, 0, np.inf, limit=200)
            return val

        assert predictive_mean(b) == pytest.approx(0.5, abs=1e-8)
        assert mean_reward(b) == pytest.approx(0.5, abs=1e-12)

    def test_gamma_undefined(self):
        with pytest.raises(UndefinedMeanError):
            mean_reward(gamma(1, 1))

    def test_sd_finiteness(self):
        assert mean_reward_sd(beta(2, 2)) == pytest.approx(math.sqrt(4.0 / (16.0 * 5.0)))
        assert math.isinf(mean_reward_sd(gamma(2, 1)))
        assert mean_reward_sd(gamma(3, 2)) == pytest.approx(1.0)


class TestKLBelief:
    def test_identity_is_zero(self):
        assert kl_belief(beta(1, 1), beta(1, 1)) == pytest.approx(0.0, abs=1e-14)
        assert kl_belief(gamma(2, 3), gamma(2, 3)) == pytest.approx(0.0, abs=1e-14)

    def test_beta_value_from_quadrature(self):
        # Frozen from adaptive quadrature of b1 log(b1/b2): 0.1250928025.
        val = kl_belief(beta(2, 2), beta(1, 1))
        assert val == pytest.approx(0.1250928025, abs=1e-8)
        assert val == pytest.approx(kl_quadrature(beta(2, 2), beta(1, 1)), abs=1e-8)

    def test_asymmetry(self):
        fwd = kl_belief(beta(2, 2), beta(1, 1))
        rev = kl_belief(beta(1, 1), beta(2, 2))
        assert abs(fwd - rev) > 1e-3
        assert rev == pytest.approx(kl_quadrature(beta(1, 1), beta(2, 2)), abs=1e-8)

    def test_family_mismatch(self):
        with pytest.raises(FamilyMismatchError):
            kl_belief(beta(1, 1), gamma(1, 1))

    @pytest.mark.parametrize("family", list(RewardFamily))
    def test_quadrature_agreement_random_pairs(self, family):
        rng = np.random.default_rng(11)
        for _ in range(10):
            a1, b1, a2, b2 = np.exp(rng.uniform(np.log(0.3), np.log(30.0), size=4))
            p = BeliefState(family, float(a1), float(b1))
            q = BeliefState(family, float(a2), float(b2))
            assert kl_belief(p, q) == pytest.approx(kl_quadrature(p, q), abs=1e-7)

    @given(
        a1=st.floats(0.2, 40.0), b1=st.floats(0.2, 40.0),
        a2=st.floats(0.2, 40.0), b2=st.floats(0.2, 40.0),
    )
    @settings(max_examples=120, deadline=None)
    def test_nonnegative(self, a1, b1, a2, b2):
        val = kl_belief(beta(a1, b1), beta(a2, b2))
        assert val >= -1e-12
        if abs(a1 - a2) < 1e-13 and abs(b1 - b2) < 1e-13:
            assert val < 1e-10


class TestExpectationParams:
    def test_uniform_prior(self):
        mu = expectation_params(beta(1, 1))
        assert mu.m1 == pytest.approx(-1.0, abs=1e-12)
        assert mu.m2 == pytest.approx(-1.0, abs=1e-12)

    def test_beta_2_1(self):
        mu = expectation_params(beta(2, 1))
        assert mu.m1 == pytest.approx(-0.5, abs=1e-12)
        assert mu.m2 == pytest.approx(-1.5, abs=1e-12)

    def test_gamma_2_2(self):
        mu = expectation_params(gamma(2, 2))
        assert mu.m1 == pytest.approx(digamma(2.0) - math.log(2.0), abs=1e-12)
        assert mu.m2 == pytest.approx(1.0, abs=1e-12)


class TestNaturalFromExpectation:
    def test_round_trip_examples(self):
        out = natural_from_expectation(ExpectationParams(-1.0, -1.0), RewardFamily.BERNOULLI)
        assert out.alpha == pytest.approx(1.0, abs=1e-9)
        assert out.beta == pytest.approx(1.0, abs=1e-9)
        out = natural_from_expectation(ExpectationParams(-0.5, -1.5), RewardFamily.BERNOULLI)
        assert out.alpha == pytest.approx(2.0, abs=1e-9)
        assert out.beta == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("family", list(RewardFamily))
    def test_round_trip_1000_samples(self, family):
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(1000):
            a, b = np.exp(rng.uniform(np.log(0.1), np.log(50.0), size=2))
            state = BeliefState(family, float(a), float(b))
            back = natural_from_expectation(expectation_params(state), family)
            worst = max(worst, abs(back.alpha - a) / a, abs(back.beta - b) / b)
        assert worst < 1e-8

    @given(a=st.floats(0.1, 50.0), b=st.floats(0.1, 50.0))
    @settings(max_examples=150, deadline=None)
    def test_round_trip_property(self, a, b):
        state = beta(a, b)
        back = natural_from_expectation(expectation_params(state), RewardFamily.BERNOULLI)
        assert back.alpha == pytest.approx(a, rel=1e-8, abs=1e-10)
        assert back.beta == pytest.approx(b, rel=1e-8, abs=1e-10)

    def test_unrealizable_targets(self):
        with pytest.raises(NoSolutionError):
            natural_from_expectation(ExpectationParams(0.5, -1.0), RewardFamily.BERNOULLI)
        with pytest.raises(NoSolutionError):
            # For Gamma, E[log theta] < log E[theta] strictly.
            natural_from_expectation(ExpectationParams(1.0, math.e), RewardFamily.EXPONENTIAL)

    def test_iteration_cap(self):
        with pytest.raises(ConvergenceError):
            natural_from_expectation(
                ExpectationParams(-0.5, -1.5), RewardFamily.BERNOULLI, max_iter=1
            )


class TestPosteriorQuantile:
    def test_uniform_median(self):
        assert posterior_quantile(beta(1, 1), 0.5) == pytest.approx(0.5, abs=1e-10)

    def test_symmetric_median(self):
        assert posterior_quantile(beta(2, 2), 0.5) == pytest.approx(0.5, abs=1e-10)

    def test_gamma_mean_quantile_monotone(self):
        b = gamma(5, 2)
        q_lo = posterior_quantile(b, 0.1)
        q_hi = posterior_quantile(b, 0.9)
        assert q_lo < mean_reward(b) < q_hi

    def test_level_domain(self):
        with pytest.raises(DomainError):
            posterior_quantile(beta(1, 1), 1.5)


class TestBeliefStateValidation:
    @pytest.mark.parametrize("a,b", [(0.0, 1.0), (-1.0, 1.0), (1.0, math.inf), (math.nan, 1.0)])
    def test_invalid_parameters(self, a, b):
        with pytest.raises(DomainError):
            BeliefState(RewardFamily.BERNOULLI, a, b)

    def test_observation_requires_finite_reward(self):
        with pytest.raises(DomainError):
            Observation(math.inf)
