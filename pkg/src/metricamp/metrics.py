"""Metric-optimal denoisers applied to the pseudo data (q, delta_v).

Each estimator minimizes the posterior expectation of one additive error
metric over super-symbols:

* MSE       -> posterior mean (the spike-and-slab shrinkage itself);
* MWSE      -> support decision thresholding the radial statistic ||q||^2,
               trading false alarms (weight beta) against misses (1-beta);
* Hamming   -> all-ones/all-zeros decision on the row sum, for the binary
               all-ones prior;
* MAE       -> per-component posterior median, found by bisection on the
               spike-plus-Gaussian mixture CDF.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .gamp import (
    BernoulliBinaryPrior,
    BernoulliGaussianPrior,
    GampOutput,
    bernoulli_denoise,
    bg_denoise,
)

__all__ = [
    "MetricSpec",
    "MetricPriorMismatch",
    "PosteriorSummary",
    "parse_metric",
    "mwse_threshold",
    "mwse_estimate",
    "hamming_threshold",
    "hamming_estimate",
    "posterior_median",
    "mae_estimate",
    "mmse_estimate",
    "apply_metric",
]

METRIC_KINDS = ("mse", "mwse", "hamming", "mae")


class MetricPriorMismatch(ValueError):
    """Metric requested for a prior it is not defined on."""


@dataclass(frozen=True)
class MetricSpec:
    """Which additive error metric to optimize; ``beta`` only for MWSE."""

    kind: str
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind == "mwse":
            if self.beta is None or not 0 <= self.beta <= 1:
                raise ValueError("mwse requires beta in [0, 1]")
        elif self.beta is not None:
            raise ValueError(f"metric {self.kind!r} takes no beta")

    def __str__(self):
        if self.kind == "mwse":
            return f"mwse:beta={self.beta:g}"
        return self.kind


def parse_metric(text: str) -> MetricSpec:
    """Parse a metric string: "mse" | "mwse:beta=0.2" | "hamming" | "mae"."""
    text = text.strip()
    if text.startswith("mwse"):
        if ":" not in text:
            raise ValueError("mwse metric needs ':beta=<value>'")
        _, _, arg = text.partition(":")
        key, _, value = arg.partition("=")
        if key.strip() != "beta":
            raise ValueError(f"unknown mwse argument {key.strip()!r}")
        return MetricSpec("mwse", beta=float(value))
    return MetricSpec(text)


@dataclass(frozen=True)
class PosteriorSummary:
    """Sufficient statistics of the spike-and-slab posterior of one row."""

    pi: float
    active_mean: np.ndarray
    active_var: float


def mwse_threshold(delta_v, rho, beta, J) -> float:
    """Decision threshold on ||q||^2 for the weighted support set error.

    tau = 2 delta_v (1+delta_v) * ln[ beta(1-rho)/((1-beta)rho)
                                      * ((1+delta_v)/delta_v)^(J/2) ]
    """
    if not delta_v > 0:
        raise ValueError("delta_v must be positive")
    if not 0 < beta < 1:
        raise ValueError(
            "beta in {0, 1} is degenerate (tau = -+inf); use the constant "
            "all-ones / all-zeros estimator instead")
    log_ratio = (np.log(beta) + np.log1p(-rho) - np.log1p(-beta) - np.log(rho)
                 + 0.5 * J * np.log1p(1.0 / delta_v))
    return float(2.0 * delta_v * (1.0 + delta_v) * log_ratio)


def mwse_estimate(q, delta_v, rho, beta):
    """Optimal support bits: 1 iff ||q_n||^2 > tau (ties resolve to 0)."""
    q = np.asarray(q, dtype=float)
    single = q.ndim == 1
    qb = q[None, :] if single else q
    tau = mwse_threshold(delta_v, rho, beta, qb.shape[1])
    decision = (np.einsum("ij,ij->i", qb, qb) > tau).astype(int)
    return int(decision[0]) if single else decision


def hamming_threshold(delta_v, rho, J) -> float:
    """Row-sum threshold for the Hamming-optimal decision on binary rows."""
    if not delta_v > 0:
        raise ValueError("delta_v must be positive")
    return float(0.5 * J + delta_v * (np.log1p(-rho) - np.log(rho)))


def hamming_estimate(q, delta_v, rho):
    """All-ones iff sum_j q_j >= J/2 + delta_v ln((1-rho)/rho), else zeros."""
    q = np.asarray(q, dtype=float)
    single = q.ndim == 1
    qb = q[None, :] if single else q
    J = qb.shape[1]
    active = qb.sum(axis=1) >= hamming_threshold(delta_v, rho, J)
    est = np.where(active[:, None], 1.0, 0.0) * np.ones((1, J))
    return est[0] if single else est


def posterior_median(pi, mu, sigma, tol=1e-12, max_iter=200):
    """Median of the mixture F(t) = (1-pi) 1{t>=0} + pi Phi((t-mu)/sigma).

    If the spike straddles the half quantile (F(0-) < 1/2 <= F(0)) the
    median is 0; otherwise bisection on the continuous branch drives
    |F(t) - 1/2| below ``tol``.  All arguments broadcast.
    """
    pi, mu, sigma = np.broadcast_arrays(
        np.asarray(pi, dtype=float), np.asarray(mu, dtype=float),
        np.asarray(sigma, dtype=float))
    scalar = pi.ndim == 0
    pi = np.atleast_1d(pi).ravel()
    mu = np.atleast_1d(mu).ravel()
    sigma = np.atleast_1d(sigma).ravel()

    f_left = pi * ndtr((0.0 - mu) / sigma)     # F(0-)
    f_right = f_left + (1.0 - pi)              # F(0)
    out = np.zeros_like(mu)
    neg_branch = f_left >= 0.5                 # median strictly below 0
    pos_branch = f_right < 0.5                 # median strictly above 0

    for branch, lo0, hi0 in (
        (neg_branch, mu - 12.0 * sigma, np.zeros_like(mu)),
        (pos_branch, np.zeros_like(mu), mu + 12.0 * sigma),
    ):
        if not np.any(branch):
            continue
        lo = lo0[branch].copy()
        hi = hi0[branch].copy()
        p = pi[branch]
        m = mu[branch]
        sg = sigma[branch]

        def cdf(t):
            return p * ndtr((t - m) / sg) + np.where(t >= 0, 1.0 - p, 0.0)

        assert np.all(cdf(lo) <= 0.5) and np.all(cdf(hi) >= 0.5), \
            "bisection bracket failed for mixture median"
        mid = 0.5 * (lo + hi)
        for _ in range(max_iter):
            fmid = cdf(mid)
            hi = np.where(fmid >= 0.5, mid, hi)
            lo = np.where(fmid < 0.5, mid, lo)
            mid = 0.5 * (lo + hi)
            if np.all(np.abs(cdf(mid) - 0.5) <= tol):
                break
        out[branch] = mid
    return float(out[0]) if scalar else out.reshape(-1)


def mae_estimate(q, delta_v, rho):
    """Component-wise posterior medians under the spike-and-slab posterior.

    The activity weight pi is shared across the row (a function of ||q||^2
    only); conditioned on activity the components are independent
    N(q_j/(1+delta_v), delta_v/(1+delta_v)).
    """
    q = np.asarray(q, dtype=float)
    single = q.ndim == 1
    qb = q[None, :] if single else q
    _, _, pi = bg_denoise(delta_v, qb, rho)
    mu = qb / (1.0 + delta_v)
    sigma = np.sqrt(delta_v / (1.0 + delta_v))
    med = posterior_median(np.repeat(pi[:, None], qb.shape[1], axis=1), mu, sigma)
    med = med.reshape(qb.shape)
    return med[0] if single else med


def mmse_estimate(q, delta_v, rho):
    """Posterior mean (identical to the engine's spike-and-slab denoiser)."""
    mean, _, _ = bg_denoise(delta_v, q, rho)
    return mean


def apply_metric(output: GampOutput, metric: MetricSpec, prior):
    """Map a converged engine output through the metric-optimal estimator.

    Returns the estimate matrix, except for MWSE which returns the support
    bit vector.  Raises :class:`MetricPriorMismatch` for combinations the
    estimators are not defined on (MAE or MSE-as-shrinkage only exist for
    the Bernoulli-Gaussian prior; the Hamming rule needs the binary prior).
    """
    q, delta_v = output.q, output.delta_v
    is_bg = isinstance(prior, BernoulliGaussianPrior)
    is_binary = isinstance(prior, BernoulliBinaryPrior)
    if not (is_bg or is_binary):
        raise ValueError(f"unknown prior {prior!r}")
    rho = prior.rho

    if metric.kind == "mse":
        if is_bg:
            return mmse_estimate(q, delta_v, rho)
        mean, _, _ = bernoulli_denoise(delta_v, q, rho)
        return mean

    if metric.kind == "mwse":
        if metric.beta == 0.0:
            return np.ones(q.shape[0], dtype=int)
        if metric.beta == 1.0:
            return np.zeros(q.shape[0], dtype=int)
        if is_bg:
            return mwse_estimate(q, delta_v, rho, metric.beta)
        # Binary prior: weighted posterior comparison on the activity weight.
        _, _, pi = bernoulli_denoise(delta_v, q, rho)
        return ((1.0 - metric.beta) * pi > metric.beta * (1.0 - pi)).astype(int)

    if metric.kind == "hamming":
        if not is_binary:
            raise MetricPriorMismatch(
                "the Hamming-optimal rule is defined for the binary all-ones prior")
        return hamming_estimate(q, delta_v, rho)

    if metric.kind == "mae":
        if not is_bg:
            raise MetricPriorMismatch(
                "the MAE-optimal median is defined for the Bernoulli-Gaussian prior")
        return mae_estimate(q, delta_v, rho)

    raise ValueError(f"unknown metric kind {metric.kind!r}")
