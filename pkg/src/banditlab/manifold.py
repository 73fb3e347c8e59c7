"""Belief-reward joint distributions, exposure schedules, and projections.

A belief-reward distribution couples a conjugate belief ``b(theta)`` with
the reward model ``f_theta(x)`` into the joint ``b(theta) f_theta(x)``
(already normalized for conjugate pairs).  The pseudobelief is the
KL-barycentre of the arms' joints; tilting it by the focal factor
``exp(x / tau)`` and renormalizing gives the pseudobelief-focal-reward
distribution used both to pick arms (I-projection) and to absorb new
observations (reverse I-projection).

The reverse projection minimizes, over pseudobelief parameters
``(a, b)``,

    sum_a KL(P_a || Q(a, b, tau))
        = sum_a KL(belief_a || pseudo) - (1/tau) sum_a E_a[X]
          + K * log Z(a, b, tau)  + const,

which is convex in the pseudobelief's natural parameters (its Hessian is
K times the covariance of the tilted sufficient statistics), so a damped
Newton iteration on log-parameters with a warm start converges in a few
steps.

Exponential rewards need care: the focal normalizer
``E_b[theta / (theta - 1/tau)]`` only makes sense when the belief puts
negligible mass at or below ``1/tau``.  The public normalizer rejects
exposures that violate this; the projection clamps the exposure it feeds
to the normalizer (and warns) while arm scoring keeps the schedule's raw
exposure.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate, special

from .errors import (
    ConvergenceError,
    DivergentNormalizerError,
    DomainError,
    FamilyMismatchError,
)
from .expfam import (
    BeliefState,
    ExpectationParams,
    RewardFamily,
    digamma,
    expectation_params,
    kl_belief,
    mean_reward,
    natural_from_expectation,
    trigamma,
)

__all__ = [
    "ExposureSchedule",
    "InfiniteExposure",
    "LogSchedule",
    "TwoPhase",
    "exposure",
    "BeliefReward",
    "PseudobeliefFocal",
    "log_focal_normalizer",
    "effective_exposure",
    "pseudobelief_barycentre",
    "ri_projection",
    "ri_objective",
    "i_projection_score",
]

logger = logging.getLogger(__name__)

# Belief mass at or below 1/tau beyond which the exponential-family focal
# normalizer is treated as divergent.
_MASS_LIMIT = 0.01
# Relative offset regularizing the integrable neighbourhood of the pole.
_POLE_OFFSET = 1e-6


# ---------------------------------------------------------------------------
# Exposure schedules
# ---------------------------------------------------------------------------


class ExposureSchedule:
    """Maps a step count t >= 1 to the focal exposure tau(t)."""

    def tau(self, t: int) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class InfiniteExposure(ExposureSchedule):
    """Pure exploration: tau(t) = +inf for every t."""

    def tau(self, t: int) -> float:
        return math.inf


@dataclass(frozen=True)
class LogSchedule(ExposureSchedule):
    """tau(t) = 1 / (log t + c * log log t), clamped to +inf early on.

    The denominator is negative or undefined for small t (log log t < 0
    for t < e); those steps are treated as pure exploration.
    """

    c: float = 15.0

    def __post_init__(self):
        if not (self.c > 0.0):
            raise DomainError(f"schedule constant must be positive, got {self.c!r}")

    def tau(self, t: int) -> float:
        log_t = math.log(t)
        if log_t <= 0.0:
            return math.inf
        denom = log_t + self.c * math.log(log_t)
        if denom <= 1e-12:
            return math.inf
        return 1.0 / denom


@dataclass(frozen=True)
class TwoPhase(ExposureSchedule):
    """Pure exploration for t <= t_exp, then the inner schedule at t."""

    t_exp: int
    inner: LogSchedule

    def __post_init__(self):
        if self.t_exp < 0:
            raise DomainError(f"exploration window must be >= 0, got {self.t_exp!r}")

    def tau(self, t: int) -> float:
        if t <= self.t_exp:
            return math.inf
        return self.inner.tau(t)


def exposure(schedule: ExposureSchedule, t: int) -> float:
    """Evaluate a schedule at step t >= 1."""
    if t < 1:
        raise DomainError(f"exposure is defined for t >= 1, got {t!r}")
    return schedule.tau(t)


# ---------------------------------------------------------------------------
# Joint distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BeliefReward:
    """Joint distribution of (reward, parameter) for one arm."""

    belief: BeliefState

    @property
    def family(self) -> RewardFamily:
        return self.belief.family

    def log_density(self, x: float, theta: float) -> float:
        """Log joint density b(theta) * f_theta(x)."""
        b = self.belief
        if self.family is RewardFamily.BERNOULLI:
            log_prior = (
                (b.alpha - 1.0) * math.log(theta)
                + (b.beta - 1.0) * math.log1p(-theta)
                - special.betaln(b.alpha, b.beta)
            )
            log_lik = math.log(theta) if x == 1.0 else math.log1p(-theta)
            return log_prior + log_lik
        log_prior = (
            b.alpha * math.log(b.beta)
            - math.lgamma(b.alpha)
            + (b.alpha - 1.0) * math.log(theta)
            - b.beta * theta
        )
        return log_prior + math.log(theta) - theta * x


@dataclass(frozen=True)
class PseudobeliefFocal:
    """Pseudobelief tilted by the focal factor exp(x / tau), normalized.

    ``tau`` is the exposure the schedule asked for; ``tau_effective`` is
    what the normalizer actually used (these differ only when the
    exponential-family clamp engaged).  ``log_z`` is the normalizer at
    ``tau_effective``; it is 0 when tau is infinite.
    """

    pseudo_belief: BeliefState
    tau: float
    log_z: float
    tau_effective: float = math.nan

    def __post_init__(self):
        if math.isnan(self.tau_effective):
            object.__setattr__(self, "tau_effective", self.tau)
        if not (self.tau > 0.0):
            raise DomainError(f"exposure must be positive, got {self.tau!r}")
        if math.isinf(self.tau) and self.log_z != 0.0:
            raise DomainError("infinite exposure requires log_z == 0")
        if not math.isfinite(self.log_z):
            raise DomainError(f"log_z must be finite, got {self.log_z!r}")

    @property
    def family(self) -> RewardFamily:
        return self.pseudo_belief.family


# ---------------------------------------------------------------------------
# Focal normalizer
# ---------------------------------------------------------------------------


def _bernoulli_log_z(alpha: float, beta: float, tau: float) -> float:
    if math.isinf(tau):
        return 0.0
    inv_tau = 1.0 / tau
    u = math.exp(-inv_tau)
    return inv_tau + math.log(alpha + beta * u) - math.log(alpha + beta)


def _gamma_mass_below(alpha: float, beta: float, s: float) -> float:
    return float(special.gammainc(alpha, beta * s))


def _gamma_w_bounds(alpha: float, beta: float, s: float) -> tuple[float, float]:
    # theta = s + exp(w); cover the belief's upper tail generously.
    hi = float(special.gammaincinv(alpha, 1.0 - 1e-14)) / beta
    hi = max(hi * 2.0, s * 8.0, 10.0 / beta)
    return math.log(s * _POLE_OFFSET), math.log(hi)


def log_focal_normalizer(pb: BeliefState, tau: float) -> float:
    """Log of the focal-joint normalizer Z(pseudobelief, tau).

    Bernoulli: closed form log((alpha * e^{1/tau} + beta) / (alpha+beta)).
    Exponential: log E_b[theta / (theta - 1/tau)] by adaptive quadrature
    over theta > (1/tau)(1 + 1e-6); raises
    :class:`DivergentNormalizerError` when the belief mass at or below
    1/tau exceeds 1%, since the integral is then dominated by the pole.
    """
    if not (tau > 0.0):
        raise DomainError(f"exposure must be positive, got {tau!r}")
    if math.isinf(tau):
        return 0.0
    if pb.family is RewardFamily.BERNOULLI:
        return _bernoulli_log_z(pb.alpha, pb.beta, tau)
    s = 1.0 / tau
    if _gamma_mass_below(pb.alpha, pb.beta, s) > _MASS_LIMIT:
        raise DivergentNormalizerError(
            f"belief mass below 1/tau={s:.6g} exceeds {_MASS_LIMIT:%}; clamp the exposure"
        )
    a, b = pb.alpha, pb.beta
    w_lo, w_hi = _gamma_w_bounds(a, b, s)
    # Peak of the integrand theta^a e^{-b theta} sits near a/b; factor it out.
    theta_peak = max(a / b, s * (1.0 + _POLE_OFFSET))
    shift = a * math.log(b) - math.lgamma(a) + a * math.log(theta_peak) - b * theta_peak

    def integrand(w: float) -> float:
        theta = s + math.exp(w)
        log_val = (
            a * math.log(b)
            - math.lgamma(a)
            + a * math.log(theta)
            - b * theta
            - shift
        )
        return math.exp(log_val)

    val, _ = integrate.quad(integrand, w_lo, w_hi, epsabs=1e-12, epsrel=1e-11, limit=300)
    if val <= 0.0 or not math.isfinite(val):
        raise DivergentNormalizerError("focal normalizer quadrature failed to converge")
    return shift + math.log(val)


_clamp_warned = False


def effective_exposure(tau: float, pb: BeliefState) -> float:
    """Clamp tau so the focal normalizer of ``pb`` stays well-defined.

    Exponential family only: enforces 1/tau <= half the belief's 1st
    percentile of theta, logging a warning the first time the clamp
    engages.  Bernoulli and infinite exposures pass through unchanged.
    """
    global _clamp_warned
    if math.isinf(tau) or pb.family is RewardFamily.BERNOULLI:
        return tau
    q01 = float(special.gammaincinv(pb.alpha, _MASS_LIMIT)) / pb.beta
    s_max = 0.5 * q01
    if 1.0 / tau <= s_max:
        return tau
    if not _clamp_warned:
        logger.warning(
            "clamping exposure: 1/tau=%.4g exceeds half the belief 1%% quantile %.4g "
            "(further clamps logged at DEBUG)",
            1.0 / tau,
            s_max,
        )
        _clamp_warned = True
    else:
        logger.debug("clamping exposure 1/tau=%.4g to %.4g", 1.0 / tau, s_max)
    return 1.0 / s_max


# ---------------------------------------------------------------------------
# Barycentre and reverse I-projection
# ---------------------------------------------------------------------------


def _check_same_family(beliefs: Sequence[BeliefState]) -> RewardFamily:
    if not beliefs:
        raise DomainError("need at least one belief")
    family = beliefs[0].family
    for b in beliefs[1:]:
        if b.family is not family:
            raise FamilyMismatchError("all beliefs must share one reward family")
    return family


def pseudobelief_barycentre(arms: Sequence[BeliefState]) -> BeliefState:
    """Belief whose expectation parameters average the arms' (KL barycentre)."""
    family = _check_same_family(arms)
    mus = [expectation_params(b) for b in arms]
    m1 = math.fsum(m.m1 for m in mus) / len(mus)
    m2 = math.fsum(m.m2 for m in mus) / len(mus)
    return natural_from_expectation(ExpectationParams(m1, m2), family)


@lru_cache(maxsize=4)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _gamma_tilted_moments(
    alpha: float, beta: float, s: float
) -> tuple[float, float, float, float, float, float]:
    """Moments of theta under the belief tilted by theta/(theta - s).

    Returns (log_z, E[log theta], E[theta], Var[log theta], Var[theta],
    Cov[log theta, theta]).  s == 0 uses the exact Gamma moments.
    """
    if s == 0.0:
        e_log = digamma(alpha) - math.log(beta)
        return (0.0, e_log, alpha / beta, trigamma(alpha), alpha / beta**2, 1.0 / beta)
    w_lo, w_hi = _gamma_w_bounds(alpha, beta, s)
    nodes, weights = _leggauss(192)
    half = 0.5 * (w_hi - w_lo)
    w = w_lo + half * (nodes + 1.0)
    theta = s + np.exp(w)
    log_theta = np.log(theta)
    log_vals = alpha * math.log(beta) - math.lgamma(alpha) + alpha * log_theta - beta * theta
    c = float(log_vals.max())
    vals = weights * np.exp(log_vals - c)
    z_rel = float(vals.sum())
    if z_rel <= 0.0 or not math.isfinite(z_rel):
        raise DivergentNormalizerError("tilted-moment quadrature failed")
    log_z = c + math.log(z_rel * half)
    p = vals / z_rel
    e_log = float(p @ log_theta)
    e_theta = float(p @ theta)
    var_log = float(p @ (log_theta - e_log) ** 2)
    var_theta = float(p @ (theta - e_theta) ** 2)
    cov = float(p @ ((log_theta - e_log) * (theta - e_theta)))
    return log_z, e_log, e_theta, var_log, var_theta, cov


class _RiProblem:
    """Reduced objective/gradient/Hessian for one rI-projection solve."""

    def __init__(self, family: RewardFamily, m1: float, m2: float, tau_eff: float):
        self.family = family
        self.m1 = m1
        self.m2 = m2
        if math.isinf(tau_eff):
            self.inv_tau = 0.0
            self.u = 1.0
            self.s = 0.0
        else:
            self.inv_tau = 1.0 / tau_eff
            self.u = math.exp(-self.inv_tau)
            self.s = self.inv_tau

    def value(self, a: float, b: float) -> float:
        if self.family is RewardFamily.BERNOULLI:
            log_z = self.inv_tau + math.log(a + b * self.u) - math.log(a + b)
            log_beta_ab = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
            return -a * self.m1 - b * self.m2 + log_beta_ab + log_z
        if self.s > 0.0 and _gamma_mass_below(a, b, self.s) > 2.0 * _MASS_LIMIT:
            return math.inf
        log_z = _gamma_tilted_moments(a, b, self.s)[0] if self.s > 0.0 else 0.0
        return -a * self.m1 + b * self.m2 + math.lgamma(a) - a * math.log(b) + log_z

    def grad_hess(self, a: float, b: float):
        if self.family is RewardFamily.BERNOULLI:
            n = a + b
            d = a + b * self.u
            psi_n = digamma(n)
            tri_n = trigamma(n)
            g1 = digamma(a) - psi_n + 1.0 / d - 1.0 / n - self.m1
            g2 = digamma(b) - psi_n + self.u / d - 1.0 / n - self.m2
            inv_d2 = 1.0 / (d * d)
            inv_n2 = 1.0 / (n * n)
            h11 = trigamma(a) - tri_n - inv_d2 + inv_n2
            h12 = -tri_n - self.u * inv_d2 + inv_n2
            h22 = trigamma(b) - tri_n - self.u * self.u * inv_d2 + inv_n2
            return g1, g2, h11, h12, h22
        if self.s > 0.0 and _gamma_mass_below(a, b, self.s) > 2.0 * _MASS_LIMIT:
            raise DivergentNormalizerError("trial point outside convergent region")
        _, e_log, e_theta, var_log, var_theta, cov = _gamma_tilted_moments(a, b, self.s)
        g1 = e_log - self.m1
        g2 = self.m2 - e_theta
        return g1, g2, var_log, -cov, var_theta


def _coordinate_descent(problem: _RiProblem, a: float, b: float, *, sweeps: int = 200):
    """Derivative-free fallback: golden-section sweeps on log-parameters.

    Best-effort: returns the best point found; the caller judges it by
    its gradient.
    """
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    z = [math.log(a), math.log(b)]

    def eval_at(z0: float, z1: float) -> float:
        return problem.value(math.exp(z0), math.exp(z1))

    f = eval_at(z[0], z[1])
    for _ in range(sweeps):
        moved = 0.0
        for i in (0, 1):
            lo, hi = z[i] - 0.5, z[i] + 0.5
            # Expand the bracket until the current point beats both ends.
            for _ in range(60):
                f_lo = eval_at(lo, z[1]) if i == 0 else eval_at(z[0], lo)
                f_hi = eval_at(hi, z[1]) if i == 0 else eval_at(z[0], hi)
                if f <= f_lo and f <= f_hi:
                    break
                lo -= 0.5
                hi += 0.5
            for _ in range(80):
                m1_ = hi - phi * (hi - lo)
                m2_ = lo + phi * (hi - lo)
                f1 = eval_at(m1_, z[1]) if i == 0 else eval_at(z[0], m1_)
                f2 = eval_at(m2_, z[1]) if i == 0 else eval_at(z[0], m2_)
                if f1 <= f2:
                    hi = m2_
                else:
                    lo = m1_
                if hi - lo < 1e-13:
                    break
            new_zi = 0.5 * (lo + hi)
            moved = max(moved, abs(new_zi - z[i]))
            z[i] = new_zi
            f = eval_at(z[0], z[1])
        if moved < 1e-10:
            break
    return math.exp(z[0]), math.exp(z[1])


def _mean_expectation(beliefs: Sequence[BeliefState]) -> tuple[float, float]:
    k = len(beliefs)
    if k <= 8:
        # Scalar path: cheaper than array construction for few arms.
        if beliefs[0].family is RewardFamily.BERNOULLI:
            s1 = s2 = 0.0
            for b in beliefs:
                d_n = digamma(b.alpha + b.beta)
                s1 += digamma(b.alpha) - d_n
                s2 += digamma(b.beta) - d_n
        else:
            s1 = sum(digamma(b.alpha) - math.log(b.beta) for b in beliefs)
            s2 = sum(b.alpha / b.beta for b in beliefs)
        return s1 / k, s2 / k
    alphas = np.array([b.alpha for b in beliefs])
    betas = np.array([b.beta for b in beliefs])
    if beliefs[0].family is RewardFamily.BERNOULLI:
        d_n = special.digamma(alphas + betas)
        m1 = float(np.sum(special.digamma(alphas) - d_n)) / k
        m2 = float(np.sum(special.digamma(betas) - d_n)) / k
    else:
        m1 = float(np.sum(special.digamma(alphas) - np.log(betas))) / k
        m2 = float(np.sum(alphas / betas)) / k
    return m1, m2


def ri_projection(
    arms: Sequence[BeliefReward],
    tau: float,
    *,
    init: BeliefState | None = None,
    grad_tol: float = 1e-10,
    max_iter: int = 200,
) -> PseudobeliefFocal:
    """Reverse I-projection: pseudobelief minimizing sum_a KL(P_a || Q).

    With infinite exposure the solution is exactly the KL barycentre.
    Newton on log-parameters, warm-started from ``init`` (or the
    barycentre), with a derivative-free coordinate-descent fallback.
    """
    if not arms:
        raise DomainError("ri_projection needs at least one arm")
    beliefs = [arm.belief for arm in arms]
    family = _check_same_family(beliefs)
    if not (tau > 0.0):
        raise DomainError(f"exposure must be positive, got {tau!r}")

    if init is None:
        init = pseudobelief_barycentre(beliefs)
    tau_eff = tau
    if family is RewardFamily.EXPONENTIAL and not math.isinf(tau):
        tau_eff = effective_exposure(tau, init)

    m1, m2 = _mean_expectation(beliefs)
    problem = _RiProblem(family, m1, m2, tau_eff)

    a, b = init.alpha, init.beta
    converged = False
    for _ in range(max_iter):
        g1, g2, h11, h12, h22 = problem.grad_hess(a, b)
        gz1, gz2 = g1 * a, g2 * b
        if math.hypot(gz1, gz2) <= grad_tol:
            converged = True
            break
        # Hessian in log-parameters.
        hz11 = h11 * a * a + g1 * a
        hz12 = h12 * a * b
        hz22 = h22 * b * b + g2 * b
        lam = 0.0
        for _ in range(12):
            d11, d22 = hz11 + lam, hz22 + lam
            det = d11 * d22 - hz12 * hz12
            if det > 0.0 and d11 > 0.0:
                break
            lam = max(2.0 * lam, 1e-8 * (abs(hz11) + abs(hz22) + 1.0))
        else:
            break
        dz1 = -(gz1 * d22 - gz2 * hz12) / det
        dz2 = -(d11 * gz2 - hz12 * gz1) / det
        norm = max(abs(dz1), abs(dz2))
        if norm > 2.0:
            dz1 *= 2.0 / norm
            dz2 *= 2.0 / norm
        if norm < 1e-4:
            # Quadratic basin: objective differences are below float
            # resolution here, so skip the line search and let Newton
            # contract the gradient directly.
            a *= math.exp(dz1)
            b *= math.exp(dz2)
            continue
        f0 = problem.value(a, b)
        step = 1.0
        for _ in range(40):
            a_new = a * math.exp(step * dz1)
            b_new = b * math.exp(step * dz2)
            f_new = problem.value(a_new, b_new)
            if f_new < f0:
                a, b = a_new, b_new
                break
            step *= 0.5
        else:
            break

    if not converged:
        g1, g2, *_ = problem.grad_hess(a, b)
        if math.hypot(g1 * a, g2 * b) > grad_tol:
            a, b = _coordinate_descent(problem, a, b)
            g1, g2, *_ = problem.grad_hess(a, b)
            if math.hypot(g1 * a, g2 * b) > 1e6 * grad_tol:
                raise ConvergenceError("rI-projection failed to reach a stationary point")

    solution = BeliefState(family, a, b)
    log_z = log_focal_normalizer(solution, tau_eff)
    return PseudobeliefFocal(pseudo_belief=solution, tau=tau, log_z=log_z, tau_effective=tau_eff)


def focal_mixture_projection(
    arms: Sequence[BeliefReward],
    tau: float,
    *,
    init: BeliefState | None = None,
) -> PseudobeliefFocal:
    """Manifold projection of the focal-tilted average belief-reward.

    The average joint (1/K) sum_a P_a, tilted by exp(x/tau) and
    renormalized, is the collective summary biased toward higher
    rewards; its moment-matched projection back onto the belief manifold
    is the pseudobelief whose expectation parameters equal the tilted
    mixture's, with each arm weighted by its expected tilt mass.  The
    weights favour arms with higher predictive means, so finite exposure
    shifts the summary toward the better arms; with infinite exposure
    the weights are uniform and this is exactly the KL barycentre.

    This is the summary the decision loop carries.  It differs from
    :func:`ri_projection`, which minimizes the literal objective
    sum_a KL(P_a || Q): there the normalizer term pushes the
    pseudobelief parameters away from high rewards by exactly the tilt
    it later applies, which starves the exploitation signal.
    """
    if not arms:
        raise DomainError("focal_mixture_projection needs at least one arm")
    beliefs = [arm.belief for arm in arms]
    family = _check_same_family(beliefs)
    if not (tau > 0.0):
        raise DomainError(f"exposure must be positive, got {tau!r}")

    tau_eff = tau
    if family is RewardFamily.EXPONENTIAL and not math.isinf(tau):
        tau_eff = effective_exposure(tau, init if init is not None else pseudobelief_barycentre(beliefs))

    if math.isinf(tau_eff):
        pb = pseudobelief_barycentre(beliefs)
        return PseudobeliefFocal(pseudo_belief=pb, tau=tau, log_z=0.0, tau_effective=tau_eff)

    if family is RewardFamily.BERNOULLI:
        u = math.exp(-1.0 / tau_eff)
        alphas = np.array([b.alpha for b in beliefs])
        betas = np.array([b.beta for b in beliefs])
        ns = alphas + betas
        means = alphas / ns
        psi_n1 = special.digamma(ns + 1.0)
        # E_b[theta T(theta)] and E_b[(1-theta) T(theta)] are Beta moments
        # with one pseudo-count moved, so the tilted moments stay closed form.
        m1 = means * (special.digamma(alphas + 1.0) - psi_n1) \
            + u * (1.0 - means) * (special.digamma(alphas) - psi_n1)
        m2 = means * (special.digamma(betas) - psi_n1) \
            + u * (1.0 - means) * (special.digamma(betas + 1.0) - psi_n1)
        weights = means + u * (1.0 - means)
        total = float(weights.sum())
        mu = ExpectationParams(float(m1.sum()) / total, float(m2.sum()) / total)
    else:
        s = 1.0 / tau_eff
        weights = []
        moments = []
        for b in beliefs:
            log_w, e_log, e_theta, *_ = _gamma_tilted_moments(b.alpha, b.beta, s)
            weights.append(log_w)
            moments.append((e_log, e_theta))
        log_ws = np.array(weights)
        ws = np.exp(log_ws - log_ws.max())
        ws /= ws.sum()
        mu = ExpectationParams(
            float(sum(w * m[0] for w, m in zip(ws, moments))),
            float(sum(w * m[1] for w, m in zip(ws, moments))),
        )
    pb = natural_from_expectation(mu, family)
    # The projected summary can be wider than the belief the clamp was
    # derived from; re-clamp against it so the recorded normalizer is
    # well-defined.
    tau_eff = effective_exposure(tau_eff, pb)
    log_z = log_focal_normalizer(pb, tau_eff)
    return PseudobeliefFocal(pseudo_belief=pb, tau=tau, log_z=log_z, tau_effective=tau_eff)


def ri_objective(arms: Sequence[BeliefReward], tau: float, pseudo: BeliefState) -> float:
    """Full projection objective sum_a KL(P_a || Q) at a candidate pseudobelief.

    Includes the reward terms and normalizer that the solver drops as
    arm-independent constants, so values are comparable across candidate
    pseudobeliefs at fixed arms and exposure.
    """
    beliefs = [arm.belief for arm in arms]
    family = _check_same_family(beliefs)
    if pseudo.family is not family:
        raise FamilyMismatchError("pseudo-belief family does not match the arms")
    total = math.fsum(kl_belief(b, pseudo) for b in beliefs)
    if not math.isinf(tau):
        total -= math.fsum(mean_reward(b) for b in beliefs) / tau
        total += len(beliefs) * log_focal_normalizer(pseudo, tau)
    return total


def i_projection_score(arm: BeliefReward, q: PseudobeliefFocal) -> float:
    """Per-arm I-projection objective, up to an arm-independent constant.

    Equals KL(P_arm || Q) minus the constants K log Z and the pseudo
    normalizer, i.e. ``-mean_reward(arm)/tau + KL(belief || pseudo)``.
    Scores are therefore only comparable within one time step.  An
    exponential-family arm with shape <= 1 has infinite predictive mean,
    which makes its score -inf: such arms are always picked first.
    """
    if arm.family is not q.family:
        raise FamilyMismatchError("arm and pseudobelief families differ")
    if math.isinf(q.tau):
        return kl_belief(arm.belief, q.pseudo_belief)
    if arm.family is RewardFamily.EXPONENTIAL and arm.belief.alpha <= 1.0:
        return -math.inf
    return -mean_reward(arm.belief) / q.tau + kl_belief(arm.belief, q.pseudo_belief)
