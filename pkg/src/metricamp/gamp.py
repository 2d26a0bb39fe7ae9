"""Generalized approximate message passing for the MMV model.

One sweep runs J independent output-channel passes (data-parallel over j),
aggregates the per-channel scalar-channel variances into a single
``delta_v``, and then denoises every super-symbol row of the pseudo data
(data-parallel over n).  The engine emits the converged estimate together
with the pseudo data ``q`` and ``delta_v`` so that a metric-specific
denoiser can be applied afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .channels import (
    AwgnChannel,
    LogisticChannel,
    awgn_gout,
    default_mixture,
    logistic_moments,
)
from .model import MeasurementSet

__all__ = [
    "BernoulliGaussianPrior",
    "BernoulliBinaryPrior",
    "GampConfig",
    "GampState",
    "GampOutput",
    "GampDivergenceError",
    "bg_denoise",
    "bernoulli_denoise",
    "run_gamp",
]

_S_FLOOR = 1e-300  # keeps theta strictly positive in saturated regimes


@dataclass(frozen=True)
class BernoulliGaussianPrior:
    """Spike-and-slab prior: active super-symbols are N(0, I_J)."""

    rho: float

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")


@dataclass(frozen=True)
class BernoulliBinaryPrior:
    """Binary prior: active super-symbols are the all-ones row."""

    rho: float

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")


@dataclass(frozen=True)
class GampConfig:
    """Iteration controls.

    ``delta_aggregation`` selects how the per-channel variances combine
    into the scalar ``delta_v``: ``"mean"`` (default; keeps J = 1 and
    J > 1 dimensionally consistent in the denoiser) or ``"sum"``.
    ``damping`` convexly mixes the new estimate/residual with the previous
    iterate; 0 disables it.  ``seed`` is recorded for provenance only --
    the sweep itself is deterministic.
    """

    t_max: int = 200
    epsilon: float = 1e-8
    delta_aggregation: str = "mean"
    damping: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.t_max < 1:
            raise ValueError("t_max must be >= 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.delta_aggregation not in ("mean", "sum"):
            raise ValueError("delta_aggregation must be 'mean' or 'sum'")
        if not 0 <= self.damping < 1:
            raise ValueError("damping must lie in [0, 1)")


@dataclass
class GampState:
    """Mutable per-iteration state exposed to the optional iteration hook."""

    t: int
    x_hat: np.ndarray
    s: np.ndarray
    h: np.ndarray
    q: np.ndarray
    theta: np.ndarray
    k: np.ndarray
    delta_v_per_channel: np.ndarray
    delta_v: float
    delta: float


@dataclass
class GampOutput:
    """Final estimate plus the scalar-channel summary (q, delta_v).

    ``trace`` holds one (delta, delta_v) pair per iteration, where delta is
    the mean squared change of the estimate over the sweep.
    """

    x_hat: np.ndarray
    q: np.ndarray
    delta_v: float
    iterations: int
    converged: bool
    trace: list[tuple[float, float]] = field(default_factory=list)
    delta_v_per_channel: np.ndarray | None = None


class GampDivergenceError(RuntimeError):
    """Raised when the sweep produces nonpositive or non-finite variances or NaNs."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


def bg_denoise(delta_v, q, rho):
    """Posterior mean/variance of a spike-and-slab super-symbol.

    Given pseudo data ``q = x + v`` with ``v ~ N(0, delta_v I)`` and the
    Bernoulli-Gaussian prior, the posterior activity weight is
    ``pi = rho / C`` with

        C = rho + (1-rho) (1 + 1/delta_v)^(J/2)
                  exp(-||q||^2 / (2 delta_v (delta_v+1)))

    evaluated in the log domain.  The mean is ``pi * q / (1 + delta_v)``
    and the variance is the exact spike-and-slab posterior variance.

    ``q`` may be a single row (J,) or a batch (N, J); returns
    (mean, var, pi) with matching leading shape.
    """
    if not delta_v > 0:
        raise ValueError("delta_v must be positive")
    q = np.asarray(q, dtype=float)
    single = q.ndim == 1
    qb = q[None, :] if single else q
    J = qb.shape[1]
    r = np.einsum("ij,ij->i", qb, qb)
    log_g = 0.5 * J * np.log1p(1.0 / delta_v) - r / (2.0 * delta_v * (delta_v + 1.0))
    with np.errstate(divide="ignore"):  # rho = 1 degenerates to pure shrinkage
        log_c = np.logaddexp(np.log(rho), np.log1p(-rho) + log_g)
        pi = np.exp(np.log(rho) - log_c)
    with np.errstate(over="ignore", invalid="ignore"):  # absurd q -> nan, caught upstream
        mean = pi[:, None] * qb / (delta_v + 1.0)
        second = pi[:, None] / (delta_v + 1.0) * (qb**2 / (delta_v + 1.0) + delta_v)
        var = second - mean**2
    if single:
        return mean[0], var[0], float(pi[0])
    return mean, var, pi


def bernoulli_denoise(delta_v, q, rho):
    """Posterior mean/variance for the all-ones binary prior.

    The activity weight depends on the row sum only:
    ``pi = sigmoid(log(rho/(1-rho)) + (sum_j q_j - J/2) / delta_v)``,
    computed in the log domain; mean = pi * 1 and var = pi - pi^2.
    """
    if not delta_v > 0:
        raise ValueError("delta_v must be positive")
    q = np.asarray(q, dtype=float)
    single = q.ndim == 1
    qb = q[None, :] if single else q
    J = qb.shape[1]
    logit = np.log(rho) - np.log1p(-rho) + (qb.sum(axis=1) - 0.5 * J) / delta_v
    pi = expit(logit)
    mean = np.repeat(pi[:, None], J, axis=1)
    var = mean - mean**2
    if single:
        return mean[0], var[0], float(pi[0])
    return mean, var, pi


def _initial_variance(prior, channel):
    # The printed initialization rho*delta_z presumes an AWGN channel;
    # channels without delta_z start from the prior second moment rho.
    if isinstance(channel, AwgnChannel):
        return prior.rho * channel.delta_z
    return prior.rho


def run_gamp(measurements: MeasurementSet, prior, config: GampConfig | None = None,
             iter_callback=None) -> GampOutput:
    """Run the MMV message-passing sweep until the estimate stabilizes.

    Parameters
    ----------
    measurements : MeasurementSet
        Per-channel matrices/observations plus the channel model.  Matrix
        entries must scale as 1/sqrt(N).
    prior : BernoulliGaussianPrior or BernoulliBinaryPrior
        Super-symbol prior used by the input-side denoiser.
    config : GampConfig
        Iteration controls; defaults converge in all shipped regimes.
    iter_callback : callable, optional
        Called with the :class:`GampState` after every iteration (used by
        invariant tests; has no effect on the result).

    Returns
    -------
    GampOutput
        Posterior-mean estimate, pseudo data, aggregated delta_v, iteration
        count, convergence flag, and the per-iteration trace.

    Raises
    ------
    GampDivergenceError
        If a per-channel delta_v turns nonpositive/non-finite or the
        estimate develops NaNs; the exception carries the trace so far.
    """
    if config is None:
        config = GampConfig()
    J = measurements.j
    M, N = measurements.m, measurements.n
    A = [np.ascontiguousarray(a, dtype=float) for a in measurements.matrices]
    y = [np.asarray(o, dtype=float) for o in measurements.observations]
    for j in range(J):
        if A[j].shape != (M, N):
            raise ValueError("all channel matrices must share dimensions M x N")
        if y[j].shape != (M,):
            raise ValueError("observation length must match M")
    A2 = [a**2 for a in A]
    a2_rowsum = [a2.sum(axis=1) for a2 in A2]

    channel = measurements.channel
    if isinstance(prior, BernoulliGaussianPrior):
        denoise = lambda dv, q: bg_denoise(dv, q, prior.rho)
    elif isinstance(prior, BernoulliBinaryPrior):
        denoise = lambda dv, q: bernoulli_denoise(dv, q, prior.rho)
    else:
        raise ValueError(f"unknown prior {prior!r}")
    if isinstance(channel, LogisticChannel):
        mix = channel.mixture if channel.mixture is not None else default_mixture()
        kernel = lambda k, yj, th: logistic_moments(k, yj, th, channel.a, mix)
    elif isinstance(channel, AwgnChannel):
        kernel = lambda k, yj, th: awgn_gout(k, yj, th, channel.delta_z)
    else:
        raise ValueError(f"unknown channel model {channel!r}")

    x_hat = np.zeros((N, J))
    s = np.full((N, J), _initial_variance(prior, channel))
    h = np.zeros((M, J))
    q = np.zeros((N, J))
    theta = np.zeros((M, J))
    k = np.zeros((M, J))
    delta_v_per_channel = np.zeros(J)
    damping = config.damping

    trace: list[tuple[float, float]] = []
    converged = False
    for t in range(1, config.t_max + 1):
        # Output-channel pass: each channel touches only its own slices, so
        # this loop is safe to parallelize; the aggregation below is the
        # synchronization point.
        for j in range(J):
            theta[:, j] = A2[j] @ s[:, j]
            k[:, j] = A[j] @ x_hat[:, j] - theta[:, j] * h[:, j]
            res = kernel(k[:, j], y[j], theta[:, j])
            h_new = res.g
            if damping > 0:
                h_new = (1.0 - damping) * h_new + damping * h[:, j]
            h[:, j] = h_new
            denom = float(a2_rowsum[j] @ res.r) / N
            if not np.isfinite(denom) or denom <= 0:
                raise GampDivergenceError(
                    f"channel {j}: nonpositive or non-finite scalar-channel "
                    f"variance at iteration {t}", trace)
            delta_v_per_channel[j] = 1.0 / denom
            q[:, j] = x_hat[:, j] + delta_v_per_channel[j] * (A[j].T @ h[:, j])

        if config.delta_aggregation == "mean":
            delta_v = float(delta_v_per_channel.mean())
        else:
            delta_v = float(delta_v_per_channel.sum())

        a_prev = x_hat
        x_new, s_new, _ = denoise(delta_v, q)
        if damping > 0:
            x_new = (1.0 - damping) * x_new + damping * a_prev
        x_hat = x_new
        s = np.maximum(s_new, _S_FLOOR)
        if not np.all(np.isfinite(x_hat)):
            raise GampDivergenceError(f"NaN in estimate at iteration {t}", trace)

        with np.errstate(over="ignore"):  # a diverging delta is caught next sweep
            delta = float(np.mean((x_hat - a_prev) ** 2))
        trace.append((delta, delta_v))
        if iter_callback is not None:
            iter_callback(GampState(
                t=t, x_hat=x_hat, s=s, h=h, q=q, theta=theta, k=k,
                delta_v_per_channel=delta_v_per_channel.copy(),
                delta_v=delta_v, delta=delta,
            ))
        if delta <= config.epsilon:
            converged = True
            break

    return GampOutput(
        x_hat=x_hat,
        q=q.copy(),
        delta_v=trace[-1][1],
        iterations=len(trace),
        converged=converged,
        trace=trace,
        delta_v_per_channel=delta_v_per_channel.copy(),
    )
