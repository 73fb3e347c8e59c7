"""Independent numerical oracles used to cross-check the closed forms.

Everything here recomputes quantities from first principles (adaptive
quadrature over densities, exhaustive grid scans) rather than reusing the
analytic expressions under test, so oracle and implementation can only
agree if both are right.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

from .expfam import BeliefState, RewardFamily
from .manifold import BeliefReward, PseudobeliefFocal

__all__ = [
    "belief_log_pdf",
    "kl_quadrature",
    "focal_normalizer_quadrature",
    "joint_kl_quadrature",
    "ri_grid_search",
    "klucb_grid_scan",
    "quantile_grid_inversion",
]


def belief_log_pdf(b: BeliefState, theta):
    """Log density of the belief at theta (vectorized)."""
    theta = np.asarray(theta, dtype=float)
    if b.family is RewardFamily.BERNOULLI:
        return (
            (b.alpha - 1.0) * np.log(theta)
            + (b.beta - 1.0) * np.log1p(-theta)
            - special.betaln(b.alpha, b.beta)
        )
    return (
        b.alpha * math.log(b.beta)
        - math.lgamma(b.alpha)
        + (b.alpha - 1.0) * np.log(theta)
        - b.beta * theta
    )


def kl_quadrature(p: BeliefState, q: BeliefState, *, tol: float = 1e-10) -> float:
    """KL(p || q) by adaptive quadrature of p log(p/q) over theta."""

    def integrand(theta: float) -> float:
        lp = float(belief_log_pdf(p, theta))
        lq = float(belief_log_pdf(q, theta))
        return math.exp(lp) * (lp - lq)

    if p.family is RewardFamily.BERNOULLI:
        val, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=300)
        return val
    # Split at the bulk of p to help the subdivision.
    mode = max(p.alpha - 1.0, 0.1) / p.beta
    val1, _ = integrate.quad(integrand, 0.0, mode, epsabs=tol, epsrel=tol, limit=300)
    val2, _ = integrate.quad(integrand, mode, math.inf, epsabs=tol, epsrel=tol, limit=300)
    return val1 + val2


def _focal_points(pseudo: BeliefState, inv_tau: float):
    """Integration grid hints for the tilted joint in theta."""
    if pseudo.family is RewardFamily.BERNOULLI:
        return 0.0, 1.0
    lo = inv_tau * (1.0 + 1e-6)
    hi = max(float(special.gammaincinv(pseudo.alpha, 1.0 - 1e-14)) / pseudo.beta * 2.0,
             lo * 8.0)
    return lo, hi


def focal_normalizer_quadrature(pseudo: BeliefState, tau: float) -> float:
    """log Z by direct quadrature of the tilted joint, marginalized over x.

    For Bernoulli the x-sum is explicit: integrate
    b(theta) (theta e^{1/tau} + 1 - theta).  For exponential rewards the
    inner x-integral gives b(theta) theta/(theta - 1/tau) on
    theta > 1/tau.
    """
    if math.isinf(tau):
        return 0.0
    inv_tau = 1.0 / tau
    lo, hi = _focal_points(pseudo, inv_tau)
    if pseudo.family is RewardFamily.BERNOULLI:
        def integrand(theta: float) -> float:
            tilt = theta * math.exp(inv_tau) + (1.0 - theta)
            return math.exp(float(belief_log_pdf(pseudo, theta))) * tilt
    else:
        def integrand(theta: float) -> float:
            return math.exp(float(belief_log_pdf(pseudo, theta))) * theta / (theta - inv_tau)

    val, _ = integrate.quad(integrand, lo, hi, epsabs=1e-12, epsrel=1e-11, limit=400)
    return math.log(val)


def joint_kl_quadrature(arm: BeliefReward, q: PseudobeliefFocal, *, tol: float = 1e-9) -> float:
    """Full KL(P_arm || Q) integrating the joint densities numerically.

    The normalizer of Q is recomputed here by quadrature; nothing is
    taken from the closed forms under test.
    """
    b = arm.belief
    pb = q.pseudo_belief
    tau = q.tau_effective
    log_z = focal_normalizer_quadrature(pb, tau)
    inv_tau = 0.0 if math.isinf(tau) else 1.0 / tau

    if arm.family is RewardFamily.BERNOULLI:
        total = 0.0
        for x in (0.0, 1.0):
            def integrand(theta: float, x=x) -> float:
                lp = arm.log_density(x, theta)
                lq = (
                    float(belief_log_pdf(pb, theta))
                    + (math.log(theta) if x == 1.0 else math.log1p(-theta))
                    + x * inv_tau
                    - log_z
                )
                return math.exp(lp) * (lp - lq)
            val, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=300)
            total += val
        return total

    lo, hi = _focal_points(pb, inv_tau)
    lo = max(lo, 1e-12)

    def outer(theta: float) -> float:
        # Inner expectation over x ~ Exp(theta) of the log ratio.
        rate_gap = theta - inv_tau

        def inner(x: float) -> float:
            lp = arm.log_density(x, theta)
            lq = (float(belief_log_pdf(pb, theta)) + math.log(theta) - theta * x
                  + x * inv_tau - log_z)
            return theta * math.exp(-theta * x) * (lp - lq)

        x_hi = 80.0 / max(rate_gap, theta * 0.05)
        val, _ = integrate.quad(inner, 0.0, x_hi, epsabs=tol, epsrel=tol, limit=200)
        return math.exp(float(belief_log_pdf(b, theta))) * val

    lo_b = max(float(special.gammaincinv(b.alpha, 1e-14)) / b.beta, lo)
    hi_b = max(float(special.gammaincinv(b.alpha, 1.0 - 1e-14)) / b.beta * 2.0, lo_b * 4.0)
    val, _ = integrate.quad(outer, lo_b, hi_b, epsabs=tol, epsrel=tol, limit=200)
    return val


def ri_grid_search(
    arms,
    tau: float,
    *,
    lo: float = 0.01,
    hi: float = 12.0,
    resolution: float = 0.01,
) -> tuple[float, float, bool]:
    """Exhaustive grid argmin of the reverse-projection objective.

    Scans (alpha, beta) over a square grid and returns the minimizing
    pair plus a flag telling whether the argmin landed strictly inside
    the grid (a boundary hit means the search box was too small).
    Bernoulli arms only; the objective dropping arm-only constants is
    -alpha*m1 - beta*m2 + log B(alpha, beta) + log Z(alpha, beta, tau),
    per grid point.
    """
    beliefs = [a.belief for a in arms]
    alphas = np.array([b.alpha for b in beliefs])
    betas = np.array([b.beta for b in beliefs])
    d_n = special.digamma(alphas + betas)
    m1 = float(np.mean(special.digamma(alphas) - d_n))
    m2 = float(np.mean(special.digamma(betas) - d_n))

    grid = np.arange(lo, hi + resolution / 2, resolution)
    a = grid[:, None]
    b = grid[None, :]
    obj = -a * m1 - b * m2 + special.betaln(a, b)
    if not math.isinf(tau):
        inv_tau = 1.0 / tau
        u = math.exp(-inv_tau)
        obj = obj + inv_tau + np.log(a + b * u) - np.log(a + b)
    flat = int(np.argmin(obj))
    i, j = np.unravel_index(flat, obj.shape)
    interior = 0 < i < len(grid) - 1 and 0 < j < len(grid) - 1
    return float(grid[i]), float(grid[j]), interior


def klucb_grid_scan(p_hat: float, pulls: int, f_t: float, *, step: float = 1e-6) -> float:
    """Largest q on a uniform grid satisfying pulls * d(p_hat, q) <= f_t."""
    qs = np.arange(p_hat, 1.0, step)
    eps = 1e-15
    qc = np.clip(qs, eps, 1.0 - eps)
    d = np.zeros_like(qs)
    if p_hat > 0.0:
        d += p_hat * np.log(p_hat / qc)
    if p_hat < 1.0:
        d += (1.0 - p_hat) * np.log((1.0 - p_hat) / (1.0 - qc))
    ok = np.flatnonzero(pulls * d <= f_t)
    return float(qs[ok[-1]]) if len(ok) else p_hat


def quantile_grid_inversion(belief: BeliefState, level: float, *, step: float = 1e-7) -> float:
    """First grid point whose posterior CDF reaches ``level`` (chunked scan)."""
    if belief.family is not RewardFamily.BERNOULLI:
        raise NotImplementedError("grid inversion oracle covers Beta posteriors")
    chunk = 1_000_000
    x = 0.0
    while x < 1.0:
        qs = np.arange(x, min(x + chunk * step, 1.0 + step / 2), step)
        cdf = special.betainc(belief.alpha, belief.beta, np.clip(qs, 0.0, 1.0))
        hit = np.flatnonzero(cdf >= level)
        if len(hit):
            return float(qs[hit[0]])
        x = float(qs[-1]) + step
    return 1.0
