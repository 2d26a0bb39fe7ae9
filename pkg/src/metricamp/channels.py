"""Output-channel kernels for the measurement channels.

The message-passing engine reduces each measurement to a scalar problem:
given a Gaussian prior ``w ~ N(k, theta)`` and an observation ``y`` drawn
through the channel likelihood ``f(y|w)``, it needs the kernel

    g_out(k, y, theta) = (E[w | k, y, theta] - k) / theta

together with ``r = -d g_out / d k``.  Two channels are supported:

* additive white Gaussian noise, ``y = w + z`` with ``z ~ N(0, delta_z)``,
  for which the kernel is closed form;
* a binary logistic channel, ``P(y=1 | w) = 1 / (1 + exp(-a w))``, handled
  by approximating the sigmoid with a mixture of Gaussian CDFs so that all
  posterior moments reduce to normal CDF/pdf evaluations.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls
from scipy.special import expit, log_ndtr, ndtr

__all__ = [
    "AwgnChannel",
    "LogisticChannel",
    "SigmoidMixture",
    "GoutResult",
    "MixtureFitError",
    "awgn_gout",
    "build_sigmoid_mixture",
    "default_mixture",
    "load_mixture",
    "save_mixture",
    "logistic_moments",
]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Sup-norm bound the mixture must satisfy over [-10, 10].
MIXTURE_TOL = 1e-3

# Ladder used when fitting from scratch; a refined set of scales for
# u_max = 8 ships with the package (see data/sigmoid_mixture_u8.json).
_LADDER_LO = 0.8
_LADDER_HI = 12.0

_DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
_DEFAULT_MIXTURE_PATH = os.path.join(_DATA_DIR, "sigmoid_mixture_u8.json")


class MixtureFitError(RuntimeError):
    """Raised when the CDF-mixture fit misses the sup-norm tolerance."""


@dataclass(frozen=True)
class AwgnChannel:
    """Additive white Gaussian noise channel with variance ``delta_z``."""

    delta_z: float

    kind = "awgn"

    def __post_init__(self):
        if not self.delta_z > 0:
            raise ValueError(f"delta_z must be positive, got {self.delta_z}")


@dataclass(frozen=True)
class LogisticChannel:
    """Binary logistic channel ``P(y=1|w) = sigmoid(a*w)``.

    ``mixture`` may pin a specific CDF-mixture approximation; when left
    ``None`` the packaged default (u_max = 8) is used.
    """

    a: float
    mixture: "SigmoidMixture | None" = field(default=None, compare=False)

    kind = "logistic"

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"scaling factor a must be positive, got {self.a}")


@dataclass(frozen=True)
class SigmoidMixture:
    """Approximation ``sigmoid(w) ~= sum_u alpha_u * Phi(w / sigma_u)``.

    Weights are nonnegative and sum to one, so the complement identity
    ``1 - sum_u alpha_u Phi(w/sigma_u) = sum_u alpha_u Phi(-w/sigma_u)``
    holds exactly; the y=0 branch of the logistic kernel relies on it.
    """

    alphas: np.ndarray
    sigmas: np.ndarray
    fit_error: float

    @property
    def u_max(self) -> int:
        return len(self.alphas)

    def evaluate(self, w) -> np.ndarray:
        """Mixture value at ``w`` (approximates the unit-scale sigmoid)."""
        w = np.asarray(w, dtype=float)
        return ndtr(w[..., None] / self.sigmas) @ self.alphas


def _fit_weights(sigmas, grid, target, penalty=10.0):
    # Nonnegative least squares with a soft sum-to-one row, then exact
    # renormalization so the complement identity is preserved.
    design = ndtr(grid[:, None] / sigmas[None, :])
    augmented = np.vstack([design, penalty * np.ones((1, len(sigmas)))])
    rhs = np.concatenate([target, [penalty]])
    alphas, _ = nnls(augmented, rhs)
    total = alphas.sum()
    if total <= 0:
        return alphas, np.inf
    alphas = alphas / total
    return alphas, float(np.max(np.abs(design @ alphas - target)))


def build_sigmoid_mixture(u_max: int = 8, sigmas=None) -> SigmoidMixture:
    """Fit a Gaussian-CDF mixture to the unit-scale sigmoid on [-10, 10].

    Scales default to a geometric ladder; weights come from nonnegative
    least squares on a dense grid.  Raises :class:`MixtureFitError` with
    the achieved error when the sup-norm bound ``MIXTURE_TOL`` is missed
    (in practice u_max >= 6 is comfortably inside the bound).
    """
    if u_max < 1:
        raise ValueError("u_max must be >= 1")
    if sigmas is None:
        sigmas = np.geomspace(_LADDER_LO, _LADDER_HI, u_max)
    else:
        sigmas = np.asarray(sigmas, dtype=float)
        if len(sigmas) != u_max or np.any(sigmas <= 0):
            raise ValueError("sigmas must be u_max positive scales")
    grid = np.linspace(-10.0, 10.0, 4001)
    alphas, err = _fit_weights(sigmas, grid, expit(grid))
    if err > MIXTURE_TOL:
        raise MixtureFitError(
            f"mixture fit with u_max={u_max} achieved sup error {err:.3e} "
            f"> tolerance {MIXTURE_TOL:.1e}"
        )
    return SigmoidMixture(alphas=alphas, sigmas=sigmas, fit_error=err)


def save_mixture(mix: SigmoidMixture, path: str) -> None:
    payload = {
        "u_max": mix.u_max,
        "alphas": [float(a) for a in mix.alphas],
        "sigmas": [float(s) for s in mix.sigmas],
        "fit_error": mix.fit_error,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_mixture(path: str) -> SigmoidMixture:
    with open(path) as fh:
        payload = json.load(fh)
    return SigmoidMixture(
        alphas=np.asarray(payload["alphas"], dtype=float),
        sigmas=np.asarray(payload["sigmas"], dtype=float),
        fit_error=float(payload["fit_error"]),
    )


_default_mixture_cache: SigmoidMixture | None = None


def default_mixture() -> SigmoidMixture:
    """Packaged u_max = 8 mixture (sup error ~4e-7); fit on demand if absent."""
    global _default_mixture_cache
    if _default_mixture_cache is None:
        if os.path.exists(_DEFAULT_MIXTURE_PATH):
            _default_mixture_cache = load_mixture(_DEFAULT_MIXTURE_PATH)
        else:
            _default_mixture_cache = build_sigmoid_mixture(8)
    return _default_mixture_cache


@dataclass(frozen=True)
class GoutResult:
    """Kernel value ``g``, its negated derivative ``r``, and the posterior
    mean/variance of the pre-channel value ``w``.

    ``r = (1 - posterior_var_w / theta) / theta`` holds by construction and
    ``posterior_var_w`` lies in ``[0, theta]``.  ``saturated`` marks entries
    whose evidence was contradictory enough to underflow the normalizer in
    double precision; values at those entries are the analytic limits.
    """

    g: np.ndarray
    r: np.ndarray
    posterior_mean_w: np.ndarray
    posterior_var_w: np.ndarray
    saturated: np.ndarray | bool = False


def awgn_gout(k, y, theta, delta_z) -> GoutResult:
    """Closed-form kernel for the AWGN channel: ``g = (y-k)/(delta_z+theta)``."""
    k = np.asarray(k, dtype=float)
    y = np.asarray(y, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0):
        raise ValueError("theta must be positive")
    if not delta_z > 0:
        raise ValueError("delta_z must be positive")
    g = (y - k) / (delta_z + theta)
    r = np.broadcast_to(1.0 / (delta_z + theta), g.shape).copy()
    mean_w = k + theta * g
    var_w = np.broadcast_to(theta * delta_z / (theta + delta_z), g.shape).copy()
    return GoutResult(g=g, r=r, posterior_mean_w=mean_w, posterior_var_w=var_w)


def logistic_moments(k, y, theta, a, mix: SigmoidMixture | None = None) -> GoutResult:
    """Kernel for the logistic channel via the Gaussian-CDF mixture.

    With ``d_u^2 = (sigma_u/a)^2 + theta`` and ``eta_u = k / d_u``, each
    mixture component contributes a Gaussian-times-CDF posterior whose
    normalizer is ``Phi(+-eta_u)`` and whose moments involve only the
    inverse Mills ratio ``phi/Phi``.  Assembling the component moments
    gives, for ``zeta_u = eta_u`` when y=1 and ``-eta_u`` when y=0,

        B = sum_u W_u * (phi/Phi)(zeta_u) / d_u
        D = sum_u W_u * zeta_u * (phi/Phi)(zeta_u) / d_u^2
        g = sign(y) * B,   r = D + B^2

    where ``W_u`` are the posterior component weights (softmax of
    ``log alpha_u + log Phi(zeta_u)``).  Everything is evaluated in the
    log domain, so arbitrarily contradictory ``(k, y)`` stay finite and
    no ``0/0`` arises even as ``theta -> 0``.
    """
    k = np.asarray(k, dtype=float)
    y = np.asarray(y, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0):
        raise ValueError("theta must be nonnegative")
    if not a > 0:
        raise ValueError("scaling factor a must be positive")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("logistic observations must be 0 or 1")
    if mix is None:
        mix = default_mixture()

    k, y, theta = np.broadcast_arrays(k, y, theta)
    s_eff = mix.sigmas / a
    d2 = s_eff**2 + theta[..., None]
    d = np.sqrt(d2)
    eta = k[..., None] / d
    sign = np.where(y == 1, 1.0, -1.0)
    zeta = sign[..., None] * eta

    log_cdf = log_ndtr(zeta)
    with np.errstate(divide="ignore"):
        log_alpha = np.where(mix.alphas > 0, np.log(mix.alphas), -np.inf)
    log_w = log_alpha + log_cdf
    log_w_max = np.max(log_w, axis=-1, keepdims=True)
    weights = np.exp(log_w - log_w_max)
    weights /= weights.sum(axis=-1, keepdims=True)

    # inverse Mills ratio phi(zeta)/Phi(zeta), stable for any zeta
    imr = np.exp(-0.5 * zeta**2 - _LOG_SQRT_2PI - log_cdf)

    b_sum = np.sum(weights * imr / d, axis=-1)
    d_sum = np.sum(weights * zeta * imr / d2, axis=-1)

    g = sign * b_sum
    r = np.maximum(d_sum + b_sum**2, 0.0)
    mean_w = k + theta * g
    var_w = np.clip(theta * (1.0 - theta * r), 0.0, theta)

    # normalizer of the evidence; y=0 uses the exact complement
    z1 = ndtr(eta) @ mix.alphas
    z_tilde = np.where(y == 1, z1, 1.0 - z1)
    saturated = z_tilde <= np.finfo(float).tiny
    return GoutResult(
        g=g,
        r=r,
        posterior_mean_w=mean_w,
        posterior_var_w=var_w,
        saturated=saturated,
    )


def evidence(k, y, theta, a, mix: SigmoidMixture | None = None) -> np.ndarray:
    """Normalizer ``Z = integral f(y|w) N(w; k, theta) dw`` of the mixture model.

    The y=1 and y=0 values are exact complements by construction.
    """
    k = np.asarray(k, dtype=float)
    y = np.asarray(y, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if mix is None:
        mix = default_mixture()
    s_eff = mix.sigmas / a
    eta = k[..., None] / np.sqrt(s_eff**2 + theta[..., None])
    z1 = ndtr(eta) @ mix.alphas
    return np.where(y == 1, z1, 1.0 - z1)
