"""Theoretic performance-limit calculators indexed by the scalar-channel
noise variance ``delta_v``.

Under the equivalent scalar channel ``q = x + v`` with ``v ~ N(0, delta_v I)``
and a Bernoulli-Gaussian prior, the radial statistic ``||q||^2`` is a scaled
chi-square under either hypothesis, so the minimum weighted support set error
and the ROC curve reduce to regularized incomplete gamma evaluations.  The
minimum mean absolute error requires numerical averaging over the pseudo-data
marginal; the MMSE as a function of ``delta_v`` reduces to a 1-D radial
integral and is inverted by bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gammainc, gammaincc, ndtr
from scipy.stats import chi2

from .gamp import bg_denoise
from .metrics import mwse_threshold, posterior_median

__all__ = [
    "LimitQuery",
    "LimitResult",
    "NumericError",
    "mmwse",
    "roc_curve",
    "roc_area",
    "mmae",
    "conditional_mae",
    "mmse_of_delta",
    "invert_mmse",
    "state_evolution_delta",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)

DELTA_V_CAP = 1e12


class NumericError(RuntimeError):
    """A numerical routine failed to reach its required tolerance."""


@dataclass(frozen=True)
class LimitQuery:
    """Operating point for a limit calculator; ``beta`` only for MWSE."""

    delta_v: float
    rho: float
    J: int
    beta: float | None = None

    def __post_init__(self):
        if not self.delta_v > 0:
            raise ValueError("delta_v must be positive")
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if self.J < 1:
            raise ValueError("J must be >= 1")
        if self.beta is not None and not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")


@dataclass(frozen=True)
class LimitResult:
    """Error floor plus the delta_v it was evaluated at.

    ``components`` carries (p_false_alarm, p_miss) for support-set limits;
    ``method`` is one of "closed_form", "quadrature", "monte_carlo" (the
    last with ``n_samples`` and ``std_err`` filled in).
    """

    value: float
    delta_v: float
    method: str
    components: tuple[float, float] | None = None
    n_samples: int | None = None
    std_err: float | None = None


def mmwse(query: LimitQuery) -> LimitResult:
    """Minimum mean weighted support set error at the given operating point.

    The false-alarm probability is the upper chi-square tail
    ``Q(J/2, tau / (2 delta_v))`` and the miss probability the lower tail
    ``P(J/2, tau / (2 (1+delta_v)))`` of the radial statistic; the value is
    ``beta (1-rho) P(FA) + (1-beta) rho P(miss)``.  A nonpositive threshold
    collapses to always-declare-active.
    """
    if query.beta is None:
        raise ValueError("mmwse requires beta")
    dv, rho, J, beta = query.delta_v, query.rho, query.J, query.beta
    tau = mwse_threshold(dv, rho, beta, J)
    if tau <= 0:
        p_fa, p_miss = 1.0, 0.0
    else:
        p_fa = float(gammaincc(J / 2.0, tau / (2.0 * dv)))
        p_miss = float(gammainc(J / 2.0, tau / (2.0 * (1.0 + dv))))
    value = beta * (1.0 - rho) * p_fa + (1.0 - beta) * rho * p_miss
    return LimitResult(value=value, delta_v=dv, method="closed_form",
                       components=(p_fa, p_miss))


def roc_curve(delta_v, rho, J, thresholds) -> np.ndarray:
    """(FPR, TPR) pairs for the radial support detector across thresholds.

    ``FPR(t) = Q(J/2, t/(2 delta_v))`` and ``TPR(t) = Q(J/2, t/(2(1+delta_v)))``;
    the grid must be sorted ascending.
    """
    if not delta_v > 0:
        raise ValueError("delta_v must be positive")
    t = np.asarray(thresholds, dtype=float)
    if np.any(t < 0) or np.any(np.diff(t) < 0):
        raise ValueError("thresholds must be nonnegative and sorted ascending")
    fpr = gammaincc(J / 2.0, t / (2.0 * delta_v))
    tpr = gammaincc(J / 2.0, t / (2.0 * (1.0 + delta_v)))
    return np.column_stack([fpr, tpr])


def roc_area(points: np.ndarray) -> float:
    """Trapezoid area under a (FPR, TPR) curve, padded to span [0, 1]."""
    pts = np.asarray(points, dtype=float)
    order = np.argsort(pts[:, 0])
    fpr = np.concatenate([[0.0], pts[order, 0], [1.0]])
    tpr = np.concatenate([[0.0], pts[order, 1], [1.0]])
    return float(np.trapezoid(tpr, fpr))


def conditional_mae(pi, mu, sigma, t):
    """Posterior-conditional absolute loss E[|x - t|] in closed mixture form.

    The posterior of one component is a point mass at 0 (weight 1-pi) plus
    N(mu, sigma^2) (weight pi); the Gaussian part folds around ``t``.
    """
    d = (mu - t) / sigma
    gauss = sigma * np.sqrt(2.0 / np.pi) * np.exp(-0.5 * d * d) \
        + (mu - t) * (2.0 * ndtr(d) - 1.0)
    return (1.0 - pi) * np.abs(t) + pi * gauss


def _mmae_monte_carlo(query: LimitQuery, n_samples: int, seed) -> LimitResult:
    dv, rho, J = query.delta_v, query.rho, query.J
    rng = np.random.default_rng(seed)
    active = rng.random(n_samples) < rho
    x = np.where(active[:, None], rng.standard_normal((n_samples, J)), 0.0)
    q = x + np.sqrt(dv) * rng.standard_normal((n_samples, J))
    _, _, pi = bg_denoise(dv, q, rho)
    mu = q / (1.0 + dv)
    sigma = np.sqrt(dv / (1.0 + dv))
    pi_cols = np.repeat(pi[:, None], J, axis=1)
    med = posterior_median(pi_cols, mu, sigma).reshape(q.shape)
    per_sample = conditional_mae(pi_cols, mu, sigma, med).mean(axis=1)
    value = float(per_sample.mean())
    std_err = float(per_sample.std(ddof=1) / np.sqrt(n_samples))
    return LimitResult(value=value, delta_v=dv, method="monte_carlo",
                       n_samples=n_samples, std_err=std_err)


def _mmae_quadrature_smv(query: LimitQuery) -> LimitResult:
    dv, rho = query.delta_v, query.rho

    def integrand(qv):
        qa = np.asarray([qv])
        _, _, pi = bg_denoise(dv, qa[:, None], rho)
        mu = qv / (1.0 + dv)
        sigma = np.sqrt(dv / (1.0 + dv))
        med = posterior_median(pi[0], mu, sigma)
        fq = (rho * np.exp(-qv**2 / (2.0 * (1.0 + dv))) / (_SQRT_2PI * np.sqrt(1.0 + dv))
              + (1.0 - rho) * np.exp(-qv**2 / (2.0 * dv)) / (_SQRT_2PI * np.sqrt(dv)))
        return fq * conditional_mae(pi[0], mu, sigma, med)

    lim = 12.0 * np.sqrt(1.0 + dv)
    value, abserr = integrate.quad(integrand, -lim, lim, limit=400,
                                   epsabs=1e-12, epsrel=1e-10)
    return LimitResult(value=float(value), delta_v=dv, method="quadrature")


def mmae(query: LimitQuery, n_samples: int = 100_000, seed=0,
         method: str = "monte_carlo") -> LimitResult:
    """Minimum mean absolute error per signal component.

    Averages the closed-form conditional loss at the posterior median over
    the pseudo-data marginal: Monte Carlo for any J (returns a standard
    error), or a deterministic quadrature path for J = 1.
    """
    if method == "quadrature":
        if query.J != 1:
            raise ValueError("the quadrature path is only available for J = 1")
        return _mmae_quadrature_smv(query)
    if method != "monte_carlo":
        raise ValueError(f"unknown method {method!r}")
    if n_samples < 100:
        raise ValueError("n_samples must be >= 100")
    return _mmae_monte_carlo(query, n_samples, seed)


def _radial_shrinkage_second_moment(delta_v, rho, J):
    # E[||E[x|q]||^2] split over the two support hypotheses; under either,
    # r = ||q||^2 is a scaled chi-square, leaving 1-D integrals in r.
    log_rho = np.log(rho)
    log_1mrho = np.log1p(-rho)
    half_j = J / 2.0
    log_slab = half_j * np.log1p(1.0 / delta_v)

    def pi_of_r(r):
        log_g = log_slab - r / (2.0 * delta_v * (delta_v + 1.0))
        log_c = np.logaddexp(log_rho, log_1mrho + log_g)
        return np.exp(log_rho - log_c)

    pieces = []
    errors = []
    for weight, scale in ((rho, 1.0 + delta_v), (1.0 - rho, delta_v)):
        def integrand(u):
            r = scale * u
            return chi2.pdf(u, J) * pi_of_r(r) ** 2 * r

        val, abserr = integrate.quad(integrand, 0.0, np.inf, limit=400,
                                     epsabs=1e-13, epsrel=1e-11)
        pieces.append(weight * val)
        errors.append(weight * abserr)
    total = sum(pieces) / (1.0 + delta_v) ** 2
    abserr = sum(errors) / (1.0 + delta_v) ** 2
    return total, abserr


def mmse_of_delta(delta_v, rho, J) -> float:
    """MMSE of one super-symbol as a function of the scalar-channel variance.

    Computed as ``J rho - E[||E[x|q]||^2]`` with the J-dimensional average
    reduced to radial integrals; adaptive quadrature targets relative error
    1e-8 and raises :class:`NumericError` when the estimate misses it.
    """
    if not delta_v > 0:
        raise ValueError("delta_v must be positive")
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    second, abserr = _radial_shrinkage_second_moment(delta_v, rho, J)
    value = J * rho - second
    # the subtraction caps achievable accuracy at ~1e-11 * J rho even when
    # the integrals themselves converge, so floor the tolerance there
    if abserr > max(1e-8 * abs(value), 1e-11 * J * rho):
        raise NumericError(
            f"radial quadrature achieved absolute error {abserr:.3e} on "
            f"value {value:.6e}")
    return max(value, 0.0)


def invert_mmse(target_mmse, rho, J, full_output=False):
    """Solve ``mmse_of_delta(delta_v) = target`` for delta_v by bisection.

    The map is strictly increasing with range (0, J rho); targets requiring
    ``delta_v`` beyond 1e12 return the cap with ``saturated`` set in the
    ``full_output`` info dict.
    """
    limit = J * rho
    if not 0 < target_mmse < limit:
        raise ValueError(f"target must lie in (0, {limit}), got {target_mmse}")
    tol = 1e-10 * limit
    lo, hi = 0.0, 1.0
    saturated = False
    while mmse_of_delta(hi, rho, J) < target_mmse:
        lo = hi
        hi *= 10.0
        if hi >= DELTA_V_CAP:
            hi = DELTA_V_CAP
            saturated = mmse_of_delta(hi, rho, J) < target_mmse
            break
    delta_v = hi
    achieved = mmse_of_delta(delta_v, rho, J)
    if not saturated:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            value = mmse_of_delta(mid, rho, J)
            if abs(value - target_mmse) <= tol:
                delta_v, achieved = mid, value
                break
            if value < target_mmse:
                lo = mid
            else:
                hi = mid
            delta_v, achieved = mid, value
    if full_output:
        return delta_v, {"saturated": saturated, "achieved_mmse": achieved}
    return delta_v


def state_evolution_delta(R, rho, J, delta_z) -> float:
    """Fixed point of ``delta_v = (delta_z + mmse_of_delta(delta_v)/J) / R``.

    Starts from the uninformed point ``(delta_z + rho) / R`` and iterates
    until the relative change drops below 1e-10; in regimes with several
    fixed points this returns the one reached from the uninformed start,
    matching what the message-passing engine attains.  AWGN only.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    if delta_z < 0:
        raise ValueError("delta_z must be nonnegative")
    dv = (delta_z + rho) / R
    for _ in range(10_000):
        m = mmse_of_delta(dv, rho, J) if dv > 0 else 0.0
        dv_new = (delta_z + m / J) / R
        if dv_new <= 1e-15:
            return dv_new
        if abs(dv_new - dv) <= 1e-10 * dv_new:
            return dv_new
        dv = dv_new
    raise NumericError("state-evolution fixed point did not converge in 1e4 iterations")
