"""Exponential-family reward models and conjugate belief machinery.

Two conjugate pairs are supported:

* Bernoulli rewards with Beta beliefs over the success probability, and
* exponential rewards (rate parametrization) with Gamma beliefs over the
  rate.

Beliefs live in dual coordinates.  The natural side is the familiar
``(alpha, beta)`` pair; the expectation side is the mean of the sufficient
statistics,

* Beta:  ``(E[log theta], E[log(1 - theta)]) = (psi(a) - psi(a+b), psi(b) - psi(a+b))``
* Gamma: ``(E[log theta], E[theta]) = (psi(a) - log(b), a / b)``

and :func:`natural_from_expectation` inverts the map with a damped 2-D
Newton iteration (the map is a diffeomorphism on the realizable set, so
the inverse is unique).

Scalar special functions here are self-contained (recurrence shift plus
asymptotic series); vectorized code paths elsewhere in the package use
``scipy.special`` equivalents, and the test suite pins both to the same
reference values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import (
    ConvergenceError,
    DomainError,
    FamilyMismatchError,
    NoSolutionError,
    UndefinedMeanError,
)

__all__ = [
    "RewardFamily",
    "BeliefState",
    "Observation",
    "ExpectationParams",
    "digamma",
    "trigamma",
    "log_gamma",
    "log_beta",
    "posterior_update",
    "mean_reward",
    "kl_belief",
    "expectation_params",
    "natural_from_expectation",
]


class RewardFamily(Enum):
    """Reward distribution family; fixes the conjugate belief family."""

    BERNOULLI = "bernoulli"
    EXPONENTIAL = "exponential"

    @property
    def support(self) -> tuple[float, float]:
        """Closed interval hull of the reward support."""
        if self is RewardFamily.BERNOULLI:
            return (0.0, 1.0)
        return (0.0, math.inf)

    def contains(self, reward: float) -> bool:
        """Whether ``reward`` is a valid draw from this family."""
        if not math.isfinite(reward):
            return False
        if self is RewardFamily.BERNOULLI:
            return reward == 0.0 or reward == 1.0
        return reward >= 0.0


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------

# Asymptotic series coefficients B_2k / (2k) for digamma; valid once the
# argument has been shifted above 6 (truncation error < 1e-12 there).
_DIGAMMA_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)

# B_2k coefficients for trigamma's series in x^-(2k+1).
_TRIGAMMA_COEFFS = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
)


def digamma(x: float) -> float:
    """Logarithmic derivative of the gamma function, for x > 0.

    Uses the recurrence psi(x) = psi(x+1) - 1/x to shift the argument
    above 6, then the asymptotic series in 1/x^2.
    """
    if not (x > 0.0) or not math.isfinite(x):
        raise DomainError(f"digamma requires a positive finite argument, got {x!r}")
    acc = 0.0
    while x <= 6.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for c in _DIGAMMA_COEFFS:
        series += c * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x - series


def trigamma(x: float) -> float:
    """Derivative of digamma, for x > 0."""
    if not (x > 0.0) or not math.isfinite(x):
        raise DomainError(f"trigamma requires a positive finite argument, got {x!r}")
    acc = 0.0
    while x <= 6.0:
        acc += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    power = inv * inv2
    for c in _TRIGAMMA_COEFFS:
        series += c * power
        power *= inv2
    return acc + inv + 0.5 * inv2 + series


def log_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if not (x > 0.0) or not math.isfinite(x):
        raise DomainError(f"log_gamma requires a positive finite argument, got {x!r}")
    return math.lgamma(x)


def log_beta(a: float, b: float) -> float:
    """log B(a, b) for a, b > 0."""
    if not (a > 0.0 and b > 0.0) or not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"log_beta requires positive finite arguments, got {a!r}, {b!r}")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


# ---------------------------------------------------------------------------
# Belief states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BeliefState:
    """Conjugate posterior over one arm's reward parameter.

    Beta(alpha, beta) for Bernoulli rewards; Gamma(alpha, rate=beta) for
    exponential rewards.  Parameters are positive reals (projections
    produce fractional values, so no integer bookkeeping).
    """

    family: RewardFamily
    alpha: float
    beta: float

    def __post_init__(self):
        a, b = self.alpha, self.beta
        if not (a > 0.0 and b > 0.0 and math.isfinite(a) and math.isfinite(b)):
            raise DomainError(f"belief parameters must be positive and finite, got ({a!r}, {b!r})")

    @property
    def n(self) -> float:
        """Pseudo-count alpha + beta (Bernoulli bookkeeping)."""
        return self.alpha + self.beta


@dataclass(frozen=True)
class Observation:
    """A single reward observed on a given arm."""

    reward: float
    arm: int = 0

    def __post_init__(self):
        if not math.isfinite(self.reward):
            raise DomainError(f"reward must be finite, got {self.reward!r}")


@dataclass(frozen=True)
class ExpectationParams:
    """Expectation-side coordinates (mean sufficient statistics), length 2."""

    m1: float
    m2: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.m1, self.m2)


def posterior_update(b: BeliefState, x: Observation) -> BeliefState:
    """Conjugate Bayesian update; returns a new state, input unchanged.

    Bernoulli: success -> (alpha+1, beta), failure -> (alpha, beta+1).
    Exponential: (alpha+1, beta + reward).
    """
    r = x.reward
    if not b.family.contains(r):
        raise DomainError(f"reward {r!r} outside support of {b.family.value}")
    if b.family is RewardFamily.BERNOULLI:
        if r == 1.0:
            return replace(b, alpha=b.alpha + 1.0)
        return replace(b, beta=b.beta + 1.0)
    return replace(b, alpha=b.alpha + 1.0, beta=b.beta + r)


def mean_reward(b: BeliefState) -> float:
    """Posterior-predictive mean reward.

    Bernoulli: alpha / (alpha + beta).  Exponential: beta / (alpha - 1),
    the posterior mean of 1/theta, which requires alpha > 1.
    """
    if b.family is RewardFamily.BERNOULLI:
        return b.alpha / (b.alpha + b.beta)
    if b.alpha <= 1.0:
        raise UndefinedMeanError(
            f"posterior-predictive mean undefined for Gamma shape {b.alpha!r} <= 1"
        )
    return b.beta / (b.alpha - 1.0)


def mean_reward_sd(b: BeliefState) -> float:
    """Posterior standard deviation of the mean-reward parameter.

    Bernoulli: sd of theta under Beta(alpha, beta).  Exponential: sd of
    1/theta (inverse-gamma), infinite for shape <= 2.
    """
    if b.family is RewardFamily.BERNOULLI:
        n = b.alpha + b.beta
        return math.sqrt(b.alpha * b.beta / (n * n * (n + 1.0)))
    if b.alpha <= 2.0:
        return math.inf
    return b.beta / ((b.alpha - 1.0) * math.sqrt(b.alpha - 2.0))


def posterior_quantile(b: BeliefState, level: float) -> float:
    """Quantile of the posterior mean-reward parameter.

    Bernoulli: quantile of theta via the regularized incomplete beta
    inverse.  Exponential: quantile of the mean 1/theta, i.e. one over
    the complementary quantile of the rate.
    """
    from scipy import special

    if not 0.0 <= level <= 1.0:
        raise DomainError(f"quantile level must be in [0,1], got {level!r}")
    if b.family is RewardFamily.BERNOULLI:
        return float(special.betaincinv(b.alpha, b.beta, level))
    theta_q = float(special.gammaincinv(b.alpha, 1.0 - level)) / b.beta
    return math.inf if theta_q == 0.0 else 1.0 / theta_q


def kl_belief(p: BeliefState, q: BeliefState) -> float:
    """KL divergence D(p || q) between two beliefs of the same family.

    Closed-form exponential-family expressions; >= 0, and 0 iff the
    parameters coincide.
    """
    if p.family is not q.family:
        raise FamilyMismatchError(f"cannot compare {p.family.value} with {q.family.value}")
    if p.family is RewardFamily.BERNOULLI:
        n_p = p.alpha + p.beta
        return (
            log_beta(q.alpha, q.beta)
            - log_beta(p.alpha, p.beta)
            + (p.alpha - q.alpha) * digamma(p.alpha)
            + (p.beta - q.beta) * digamma(p.beta)
            - (n_p - q.alpha - q.beta) * digamma(n_p)
        )
    return (
        (p.alpha - q.alpha) * digamma(p.alpha)
        - math.lgamma(p.alpha)
        + math.lgamma(q.alpha)
        + q.alpha * (math.log(p.beta) - math.log(q.beta))
        + p.alpha * (q.beta - p.beta) / p.beta
    )


def expectation_params(b: BeliefState) -> ExpectationParams:
    """Map a belief to expectation coordinates."""
    if b.family is RewardFamily.BERNOULLI:
        d_n = digamma(b.alpha + b.beta)
        return ExpectationParams(digamma(b.alpha) - d_n, digamma(b.beta) - d_n)
    return ExpectationParams(digamma(b.alpha) - math.log(b.beta), b.alpha / b.beta)


def _beta_initial_guess(m1: float, m2: float) -> tuple[float, float]:
    # Invert psi(a) - psi(n) ~ log(a/n) - (1/(2a) - 1/(2n)) to second order.
    ratio = math.exp(m1 - m2)  # ~ alpha / beta
    gap = -math.log1p(math.exp(m1 - m2)) + (m1 - m2) - m1  # log(a/n) - m1 > 0
    if gap <= 0.0 or not math.isfinite(gap):
        return 1.0, 1.0
    beta0 = 1.0 / (2.0 * gap * ratio * (1.0 + ratio))
    alpha0 = ratio * beta0
    if not (math.isfinite(alpha0) and math.isfinite(beta0)):
        return 1.0, 1.0
    return min(max(alpha0, 1e-3), 1e6), min(max(beta0, 1e-3), 1e6)


def _gamma_initial_guess(m1: float, m2: float) -> tuple[float, float]:
    # log(a) - psi(a) ~ 1/(2a).
    gap = math.log(m2) - m1
    alpha0 = min(max(0.5 / gap, 1e-3), 1e6)
    return alpha0, alpha0 / m2


def natural_from_expectation(
    mu: ExpectationParams,
    family: RewardFamily,
    *,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> BeliefState:
    """Invert :func:`expectation_params`: find (alpha, beta) matching ``mu``.

    Damped Newton on log-parameters with the trigamma Jacobian.  Raises
    :class:`NoSolutionError` if ``mu`` lies outside the realizable set and
    :class:`ConvergenceError` if the iteration cap is hit.
    """
    m1, m2 = mu.m1, mu.m2
    if family is RewardFamily.BERNOULLI:
        if not (m1 < 0.0 and m2 < 0.0):
            raise NoSolutionError(f"Beta expectation components must be negative, got {mu}")
        a, b = _beta_initial_guess(m1, m2)
    else:
        if not (m2 > 0.0) or not (m1 < math.log(m2)):
            raise NoSolutionError(f"Gamma expectation point not realizable: {mu}")
        a, b = _gamma_initial_guess(m1, m2)

    def residual(a: float, b: float) -> tuple[float, float]:
        if family is RewardFamily.BERNOULLI:
            d_n = digamma(a + b)
            return (digamma(a) - d_n - m1, digamma(b) - d_n - m2)
        return (digamma(a) - math.log(b) - m1, a / b - m2)

    r1, r2 = residual(a, b)
    err = math.hypot(r1, r2)
    restarted = False
    for _ in range(max_iter):
        if max(abs(r1), abs(r2)) <= tol:
            return BeliefState(family, a, b)
        if family is RewardFamily.BERNOULLI:
            t_n = trigamma(a + b)
            j11 = trigamma(a) - t_n
            j12 = -t_n
            j21 = -t_n
            j22 = trigamma(b) - t_n
        else:
            j11 = trigamma(a)
            j12 = -1.0 / b
            j21 = 1.0 / b
            j22 = -a / (b * b)
        # Chain rule for z = (log a, log b).
        j11 *= a
        j12 *= b
        j21 *= a
        j22 *= b
        det = j11 * j22 - j12 * j21
        if det == 0.0 or not math.isfinite(det):
            raise ConvergenceError("singular Jacobian in expectation-map inversion")
        dz1 = -(r1 * j22 - r2 * j12) / det
        dz2 = -(j11 * r2 - j21 * r1) / det
        # Clamp the log-step; softens wild early iterations.
        dz1 = min(max(dz1, -3.0), 3.0)
        dz2 = min(max(dz2, -3.0), 3.0)
        if max(abs(dz1), abs(dz2)) < 1e-6:
            # Quadratic basin: take the bare Newton step; the residual
            # norm is at float resolution and a strict-decrease test
            # would stall.
            a *= math.exp(dz1)
            b *= math.exp(dz2)
            r1, r2 = residual(a, b)
            err = math.hypot(r1, r2)
            continue
        step = 1.0
        # Newton directions descend the Euclidean residual norm.
        for _ in range(40):
            a_new = a * math.exp(step * dz1)
            b_new = b * math.exp(step * dz2)
            r1_new, r2_new = residual(a_new, b_new)
            err_new = math.hypot(r1_new, r2_new)
            if err_new < err:
                a, b, r1, r2, err = a_new, b_new, r1_new, r2_new, err_new
                break
            step *= 0.5
        else:
            if restarted:
                raise ConvergenceError("line search failed in expectation-map inversion")
            restarted = True
            a, b = 1.0, 1.0
            r1, r2 = residual(a, b)
            err = math.hypot(r1, r2)
    if max(abs(r1), abs(r2)) <= tol:
        return BeliefState(family, a, b)
    raise ConvergenceError(
        f"expectation-map inversion did not reach tol={tol} in {max_iter} iterations"
    )
