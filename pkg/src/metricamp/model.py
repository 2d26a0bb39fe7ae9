"""Jointly sparse signal ensembles, sensing matrices, and noisy measurements.

A problem instance couples an N x J signal matrix whose rows (super-symbols)
are either entirely zero or entirely active, J per-channel sensing matrices
scaling as 1/sqrt(N), and the J observation vectors produced by pushing each
channel through a measurement channel.  All generation is pure given a seed;
independent streams are derived with ``numpy.random.SeedSequence`` spawn keys
so trials and channels never share randomness.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .channels import AwgnChannel, LogisticChannel

__all__ = [
    "PRIOR_BERNOULLI_GAUSSIAN",
    "PRIOR_BERNOULLI_BINARY",
    "MATRIX_GAUSSIAN_UNIT_ROW",
    "MATRIX_SIGNED_BERNOULLI",
    "ParameterError",
    "SignalEnsemble",
    "MeasurementSet",
    "ProblemInstance",
    "generate_signal",
    "generate_matrix",
    "measure",
    "generate_instance",
    "save_instance",
    "load_instance",
]

PRIOR_BERNOULLI_GAUSSIAN = "bernoulli_gaussian"
PRIOR_BERNOULLI_BINARY = "bernoulli_binary"

MATRIX_GAUSSIAN_UNIT_ROW = "gaussian_unit_row"
MATRIX_SIGNED_BERNOULLI = "signed_bernoulli"


class ParameterError(ValueError):
    """Invalid generation parameter (dimensions, rates, kinds)."""


@dataclass
class SignalEnsemble:
    """N x J matrix of super-symbols sharing a common support.

    Row n is nonzero iff ``support[n]``; active rows are i.i.d. standard
    normal per component for the Bernoulli-Gaussian prior and all-ones for
    the Bernoulli binary prior used in active-user detection.
    """

    entries: np.ndarray
    support: np.ndarray
    rho: float
    prior_kind: str

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def j(self) -> int:
        return self.entries.shape[1]


@dataclass
class MeasurementSet:
    """Per-channel sensing operators and observations plus the channel model."""

    matrices: list[np.ndarray]
    observations: list[np.ndarray]
    channel: AwgnChannel | LogisticChannel

    @property
    def j(self) -> int:
        return len(self.matrices)

    @property
    def m(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def n(self) -> int:
        return self.matrices[0].shape[1]

    @property
    def rate(self) -> float:
        """Measurement rate R = M/N."""
        return self.m / self.n


@dataclass
class ProblemInstance:
    """A replayable (signal, measurements) pair tagged with its root seed."""

    signal: SignalEnsemble
    measurements: MeasurementSet
    seed: int
    matrix_kind: str


def _validate_rho(rho):
    if not 0 < rho < 1:
        raise ParameterError(f"rho must lie in (0, 1), got {rho}")


def generate_signal(N, J, rho, prior_kind, seed) -> SignalEnsemble:
    """Draw a jointly sparse ensemble with Bernoulli(rho) support.

    Parameters
    ----------
    N, J : int
        Number of super-symbols and number of signal vectors.
    rho : float
        Sparsity rate in (0, 1).
    prior_kind : str
        ``PRIOR_BERNOULLI_GAUSSIAN`` (active components i.i.d. N(0,1)) or
        ``PRIOR_BERNOULLI_BINARY`` (active rows all ones).
    seed : int or numpy.random.SeedSequence
        Reproducibility handle; identical inputs give bit-identical output.
    """
    if N < 1 or J < 1:
        raise ParameterError("N and J must be >= 1")
    _validate_rho(rho)
    rng = np.random.default_rng(seed)
    support = rng.random(N) < rho
    if prior_kind == PRIOR_BERNOULLI_GAUSSIAN:
        entries = rng.standard_normal((N, J))
        entries[~support] = 0.0
    elif prior_kind == PRIOR_BERNOULLI_BINARY:
        entries = np.where(support[:, None], 1.0, 0.0) * np.ones((N, J))
    else:
        raise ParameterError(f"unknown prior kind {prior_kind!r}")
    return SignalEnsemble(entries=entries, support=support, rho=rho, prior_kind=prior_kind)


def generate_matrix(M, N, kind=MATRIX_GAUSSIAN_UNIT_ROW, seed=0, normalize_rows=True):
    """Draw an M x N sensing matrix whose entries scale as 1/sqrt(N).

    ``gaussian_unit_row`` draws i.i.d. N(0, 1/N) entries and (by default)
    rescales every row to exactly unit Euclidean norm; pass
    ``normalize_rows=False`` to keep the raw i.i.d. draw.  The
    ``signed_bernoulli`` kind draws uniform +-1/sqrt(N) entries.
    """
    if M < 1 or N < 1:
        raise ParameterError("M and N must be >= 1")
    rng = np.random.default_rng(seed)
    if kind == MATRIX_GAUSSIAN_UNIT_ROW:
        A = rng.standard_normal((M, N)) / np.sqrt(N)
        if normalize_rows:
            A /= np.linalg.norm(A, axis=1, keepdims=True)
        return A
    if kind == MATRIX_SIGNED_BERNOULLI:
        return (2.0 * rng.integers(0, 2, size=(M, N)) - 1.0) / np.sqrt(N)
    raise ParameterError(f"unknown matrix kind {kind!r}")


def measure(A, x, channel, seed) -> np.ndarray:
    """Push one signal column through the channel: w = A x, then y = Z(w).

    AWGN adds N(0, delta_z) noise per entry; the logistic channel emits
    y_m in {0, 1} with P(y_m = 1) = sigmoid(a * w_m).
    """
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    if A.shape[1] != x.shape[0]:
        raise ParameterError(
            f"incompatible shapes: A is {A.shape}, x has length {x.shape[0]}"
        )
    w = A @ x
    rng = np.random.default_rng(seed)
    if isinstance(channel, AwgnChannel):
        return w + rng.normal(0.0, np.sqrt(channel.delta_z), size=w.shape)
    if isinstance(channel, LogisticChannel):
        return (rng.random(w.shape) < expit(channel.a * w)).astype(float)
    raise ParameterError(f"unknown channel model {channel!r}")


def generate_instance(
    N, M, J, rho, prior_kind, channel, seed,
    matrix_kind=MATRIX_GAUSSIAN_UNIT_ROW, normalize_rows=True,
) -> ProblemInstance:
    """Generate a full problem instance from one root seed.

    Stream splitting: with root seed ``s``, the signal uses
    ``SeedSequence(s, spawn_key=(0,))``, channel j's matrix uses
    ``SeedSequence(s, spawn_key=(1, j))``, and channel j's measurement noise
    uses ``SeedSequence(s, spawn_key=(2, j))``.  Channels are therefore
    independent and can be generated concurrently.
    """
    seed = int(seed)
    signal = generate_signal(N, J, rho, prior_kind, np.random.SeedSequence(seed, spawn_key=(0,)))
    matrices, observations = [], []
    for j in range(J):
        A = generate_matrix(
            M, N, matrix_kind,
            seed=np.random.SeedSequence(seed, spawn_key=(1, j)),
            normalize_rows=normalize_rows,
        )
        y = measure(A, signal.entries[:, j], channel,
                    seed=np.random.SeedSequence(seed, spawn_key=(2, j)))
        matrices.append(A)
        observations.append(y)
    measurements = MeasurementSet(matrices=matrices, observations=observations, channel=channel)
    return ProblemInstance(signal=signal, measurements=measurements, seed=seed,
                           matrix_kind=matrix_kind)


def _channel_to_dict(channel):
    if isinstance(channel, AwgnChannel):
        return {"kind": "awgn", "delta_z": channel.delta_z}
    if isinstance(channel, LogisticChannel):
        return {"kind": "logistic", "a": channel.a}
    raise ParameterError(f"unknown channel model {channel!r}")


def _channel_from_dict(d):
    if d["kind"] == "awgn":
        return AwgnChannel(delta_z=d["delta_z"])
    if d["kind"] == "logistic":
        return LogisticChannel(a=d["a"])
    raise ParameterError(f"unknown channel kind {d['kind']!r}")


def save_instance(instance: ProblemInstance, directory: str) -> None:
    """Serialize an instance as CSV matrices plus a JSON header for replay.

    Layout: ``header.json`` with dimensions/params/seed, ``X.csv`` (N x J),
    ``support.csv``, and per channel ``A_<j>.csv`` / ``y_<j>.csv``.  Floats
    are written with 17 significant digits so the round trip is bit exact.
    """
    os.makedirs(directory, exist_ok=True)
    sig, meas = instance.signal, instance.measurements
    header = {
        "format_version": 1,
        "N": sig.n,
        "M": meas.m,
        "J": sig.j,
        "rho": sig.rho,
        "prior_kind": sig.prior_kind,
        "matrix_kind": instance.matrix_kind,
        "channel": _channel_to_dict(meas.channel),
        "seed": instance.seed,
    }
    with open(os.path.join(directory, "header.json"), "w") as fh:
        json.dump(header, fh, indent=2)
        fh.write("\n")
    fmt = "%.17g"
    np.savetxt(os.path.join(directory, "X.csv"), sig.entries, fmt=fmt, delimiter=",")
    np.savetxt(os.path.join(directory, "support.csv"), sig.support.astype(int),
               fmt="%d", delimiter=",")
    for j in range(meas.j):
        np.savetxt(os.path.join(directory, f"A_{j}.csv"), meas.matrices[j],
                   fmt=fmt, delimiter=",")
        np.savetxt(os.path.join(directory, f"y_{j}.csv"), meas.observations[j],
                   fmt=fmt, delimiter=",")


def load_instance(directory: str) -> ProblemInstance:
    with open(os.path.join(directory, "header.json")) as fh:
        header = json.load(fh)
    N, J = header["N"], header["J"]
    entries = np.loadtxt(os.path.join(directory, "X.csv"), delimiter=",", ndmin=2)
    entries = entries.reshape(N, J)
    support = np.loadtxt(os.path.join(directory, "support.csv"), delimiter=",").astype(bool)
    support = support.reshape(N)
    signal = SignalEnsemble(entries=entries, support=support, rho=header["rho"],
                            prior_kind=header["prior_kind"])
    channel = _channel_from_dict(header["channel"])
    matrices, observations = [], []
    for j in range(J):
        matrices.append(np.loadtxt(os.path.join(directory, f"A_{j}.csv"),
                                   delimiter=",", ndmin=2))
        observations.append(np.loadtxt(os.path.join(directory, f"y_{j}.csv"),
                                       delimiter=",").reshape(-1))
    measurements = MeasurementSet(matrices=matrices, observations=observations, channel=channel)
    return ProblemInstance(signal=signal, measurements=measurements,
                           seed=header["seed"], matrix_kind=header["matrix_kind"])
