"""Reproducible experiment runner for the synthetic sweeps.

Spec files are plain ``key = value`` text; ``#`` starts a comment and list
values are comma separated::

    name = wse_awgn            # wse_awgn | roc | mae_logistic | aud
    N = 2000
    J_list = 1, 3
    R_list = 0.3, 0.5, 0.7
    noise_list = 0.01          # delta_z for AWGN experiments, a for logistic
    rho = 0.1
    metric = mwse:beta=0.2     # mse | mwse:beta=<b> | hamming | mae
    trials = 10
    base_seed = 42
    output_path = fig2.csv
    delta_v_source = empirical # or "se" (AWGN only)
    gamp.t_max = 200           # optional engine overrides
    gamp.epsilon = 1e-8
    gamp.damping = 0.0
    gamp.delta_aggregation = mean
    roc.points = 200           # roc experiments: threshold-grid size
    omp.max_atoms = 300        # aud experiments: defaults to ceil(1.5*rho*N)
    omp.threshold = 0.5

Every run writes a single CSV with one fixed column order (documented in
``CSV_COLUMNS``); irrelevant fields are left empty.  ``row_kind`` is
``trial`` (one row per trial), ``aggregate`` (per sweep point: mean error,
standard error, and the theoretic value at the trial-averaged delta_v), or
``roc_point`` (theoretic curve samples).  Per-trial seeds derive from
``SeedSequence(base_seed, spawn_key=(sweep_index, trial_index))``, so results
do not depend on scheduling; floats print with 17 significant digits, which
makes re-runs byte identical.  Wall-clock timings stay in memory only.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2 as _chi2

from .baselines import OmpConfig, binarize, omp
from .channels import AwgnChannel, LogisticChannel
from .gamp import (
    BernoulliBinaryPrior,
    BernoulliGaussianPrior,
    GampConfig,
    GampDivergenceError,
    run_gamp,
)
from .limits import LimitQuery, mmae, mmwse, roc_curve, state_evolution_delta
from .metrics import MetricSpec, apply_metric, parse_metric
from .model import (
    MATRIX_GAUSSIAN_UNIT_ROW,
    MATRIX_SIGNED_BERNOULLI,
    PRIOR_BERNOULLI_BINARY,
    PRIOR_BERNOULLI_GAUSSIAN,
    generate_instance,
)

__all__ = [
    "CSV_COLUMNS",
    "EXPERIMENT_NAMES",
    "SpecError",
    "ExperimentSpec",
    "TrialRecord",
    "parse_spec_file",
    "parse_spec_text",
    "trial_seed",
    "compute_empirical_error",
    "run_experiment",
    "run_gamp_trace",
]

EXPERIMENT_NAMES = ("wse_awgn", "roc", "mae_logistic", "aud")

CSV_COLUMNS = [
    "row_kind", "sweep_index", "trial_index", "seed",
    "N", "J", "R", "noise_param", "rho", "beta", "metric",
    "t_max", "epsilon", "damping", "delta_aggregation",
    "delta_v_source", "config_hash",
    "delta_v", "iterations", "converged",
    "empirical_error", "theoretic_error", "std_err",
    "omp_error", "omp_std_err",
    "threshold", "fpr", "tpr",
]


class SpecError(ValueError):
    """Malformed experiment spec; the message names the offending key."""


@dataclass
class ExperimentSpec:
    name: str
    N: int
    J_list: list[int]
    R_list: list[float]
    noise_list: list[float]
    rho: float
    metric: MetricSpec
    trials: int
    base_seed: int
    output_path: str
    gamp: GampConfig = field(default_factory=GampConfig)
    delta_v_source: str = "empirical"
    roc_points: int = 200
    omp_max_atoms: int | None = None
    omp_threshold: float = 0.5

    def __post_init__(self):
        if self.name not in EXPERIMENT_NAMES:
            raise SpecError(f"invalid value for key 'name': {self.name!r}")
        if self.trials < 1:
            raise SpecError("invalid value for key 'trials': must be >= 1")
        for key, values in (("J_list", self.J_list), ("R_list", self.R_list),
                            ("noise_list", self.noise_list)):
            if not values:
                raise SpecError(f"invalid value for key '{key}': must be nonempty")
        if self.delta_v_source not in ("empirical", "se"):
            raise SpecError("invalid value for key 'delta_v_source': "
                            "must be 'empirical' or 'se'")
        required_metric = {"wse_awgn": "mwse", "roc": "mwse",
                           "mae_logistic": "mae", "aud": "hamming"}[self.name]
        if self.metric.kind != required_metric:
            raise SpecError(
                f"invalid value for key 'metric': experiment '{self.name}' "
                f"requires a '{required_metric}' metric")

    @property
    def beta(self):
        return self.metric.beta

    def sweep_points(self):
        """Sweep points in fixed (J, R, noise) lexicographic order."""
        points = []
        for J in self.J_list:
            for R in self.R_list:
                for noise in self.noise_list:
                    points.append((J, R, noise))
        return points

    def config_hash(self) -> str:
        payload = {
            "name": self.name, "N": self.N, "J_list": self.J_list,
            "R_list": self.R_list, "noise_list": self.noise_list,
            "rho": self.rho, "metric": str(self.metric), "trials": self.trials,
            "base_seed": self.base_seed,
            "gamp": [self.gamp.t_max, self.gamp.epsilon,
                     self.gamp.delta_aggregation, self.gamp.damping],
            "delta_v_source": self.delta_v_source,
            "roc_points": self.roc_points,
            "omp": [self.omp_max_atoms, self.omp_threshold],
        }
        digest = hashlib.sha256(json.dumps(payload, sort_keys=True).encode())
        return digest.hexdigest()[:12]


@dataclass
class TrialRecord:
    seed: int
    R: float
    J: int
    noise_param: float
    empirical_error: float
    delta_v_final: float
    iterations: int
    converged: bool
    wall_time: float
    theoretic_error: float | None = None
    omp_error: float | None = None


_SPEC_KEYS = {
    "name", "N", "J_list", "R_list", "noise_list", "rho", "metric",
    "trials", "base_seed", "output_path", "delta_v_source",
    "gamp.t_max", "gamp.epsilon", "gamp.damping", "gamp.delta_aggregation",
    "roc.points", "omp.max_atoms", "omp.threshold",
}

_REQUIRED_KEYS = ("name", "N", "J_list", "R_list", "noise_list", "rho",
                  "metric", "trials", "base_seed", "output_path")


def _parse_value(key, raw, cast):
    try:
        return cast(raw)
    except ValueError as exc:
        raise SpecError(f"invalid value for key '{key}': {raw!r}") from exc


def parse_spec_text(text: str) -> ExperimentSpec:
    entries = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _SPEC_KEYS:
            raise SpecError(f"unknown key '{key}'")
        if key in entries:
            raise SpecError(f"duplicate key '{key}'")
        entries[key] = value
    for key in _REQUIRED_KEYS:
        if key not in entries:
            raise SpecError(f"missing required key '{key}'")

    def floats(key):
        return [_parse_value(key, v.strip(), float)
                for v in entries[key].split(",") if v.strip()]

    gamp_kwargs = {}
    if "gamp.t_max" in entries:
        gamp_kwargs["t_max"] = _parse_value("gamp.t_max", entries["gamp.t_max"], int)
    if "gamp.epsilon" in entries:
        gamp_kwargs["epsilon"] = _parse_value("gamp.epsilon", entries["gamp.epsilon"], float)
    if "gamp.damping" in entries:
        gamp_kwargs["damping"] = _parse_value("gamp.damping", entries["gamp.damping"], float)
    if "gamp.delta_aggregation" in entries:
        gamp_kwargs["delta_aggregation"] = entries["gamp.delta_aggregation"]
    try:
        gamp = GampConfig(**gamp_kwargs)
    except ValueError as exc:
        raise SpecError(f"invalid gamp.* value: {exc}") from exc

    try:
        metric = parse_metric(entries["metric"])
    except ValueError as exc:
        raise SpecError(f"invalid value for key 'metric': {exc}") from exc

    spec = ExperimentSpec(
        name=entries["name"],
        N=_parse_value("N", entries["N"], int),
        J_list=[_parse_value("J_list", v.strip(), int)
                for v in entries["J_list"].split(",") if v.strip()],
        R_list=floats("R_list"),
        noise_list=floats("noise_list"),
        rho=_parse_value("rho", entries["rho"], float),
        metric=metric,
        trials=_parse_value("trials", entries["trials"], int),
        base_seed=_parse_value("base_seed", entries["base_seed"], int),
        output_path=entries["output_path"],
        gamp=gamp,
        delta_v_source=entries.get("delta_v_source", "empirical"),
        roc_points=_parse_value("roc.points", entries.get("roc.points", "200"), int),
        omp_max_atoms=(_parse_value("omp.max_atoms", entries["omp.max_atoms"], int)
                       if "omp.max_atoms" in entries else None),
        omp_threshold=_parse_value("omp.threshold", entries.get("omp.threshold", "0.5"), float),
    )
    return spec


def parse_spec_file(path: str) -> ExperimentSpec:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecError(f"cannot read spec file {path!r}: {exc}") from exc
    return parse_spec_text(text)


def trial_seed(base_seed, sweep_index, trial_index) -> int:
    """Deterministic per-trial root seed, independent of scheduling."""
    ss = np.random.SeedSequence(base_seed, spawn_key=(sweep_index, trial_index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def compute_empirical_error(X_true, X_est, metric: MetricSpec) -> float:
    """Realized per-super-symbol loss (1/N) sum_n d(x_n, xhat_n).

    MSE sums squared norms; MWSE charges ``beta`` per false alarm and
    ``1 - beta`` per miss (``X_est`` is the support bit vector); Hamming
    counts rows that differ anywhere; MAE averages per-component absolute
    error over the J components.
    """
    X_true = np.asarray(X_true, dtype=float)
    if X_true.ndim != 2:
        raise ValueError("X_true must be an N x J matrix")
    N = X_true.shape[0]
    est = np.asarray(X_est, dtype=float)
    if metric.kind == "mwse":
        if est.shape != (N,):
            raise ValueError("MWSE expects a length-N support bit vector")
        true_support = np.any(X_true != 0.0, axis=1)
        est_support = est > 0.5
        false_alarms = np.sum(~true_support & est_support)
        misses = np.sum(true_support & ~est_support)
        return float((metric.beta * false_alarms + (1.0 - metric.beta) * misses) / N)
    if est.shape != X_true.shape:
        raise ValueError(f"shape mismatch: {est.shape} vs {X_true.shape}")
    if metric.kind == "mse":
        return float(np.sum((X_true - est) ** 2) / N)
    if metric.kind == "hamming":
        return float(np.mean(np.any(X_true != est, axis=1)))
    if metric.kind == "mae":
        return float(np.mean(np.abs(X_true - est)))
    raise ValueError(f"unknown metric kind {metric.kind!r}")


def _experiment_pieces(spec: ExperimentSpec, noise):
    if spec.name in ("wse_awgn", "roc"):
        return (AwgnChannel(delta_z=noise), PRIOR_BERNOULLI_GAUSSIAN,
                MATRIX_GAUSSIAN_UNIT_ROW, BernoulliGaussianPrior(spec.rho))
    if spec.name == "mae_logistic":
        return (LogisticChannel(a=noise), PRIOR_BERNOULLI_GAUSSIAN,
                MATRIX_GAUSSIAN_UNIT_ROW, BernoulliGaussianPrior(spec.rho))
    if spec.name == "aud":
        return (AwgnChannel(delta_z=noise), PRIOR_BERNOULLI_BINARY,
                MATRIX_SIGNED_BERNOULLI, BernoulliBinaryPrior(spec.rho))
    raise SpecError(f"invalid value for key 'name': {spec.name!r}")


def _run_trial(spec: ExperimentSpec, sweep_index, trial_index, J, R, noise) -> TrialRecord:
    seed = trial_seed(spec.base_seed, sweep_index, trial_index)
    channel, prior_kind, matrix_kind, prior = _experiment_pieces(spec, noise)
    M = int(round(R * spec.N))
    started = time.perf_counter()
    instance = generate_instance(spec.N, M, J, spec.rho, prior_kind, channel,
                                 seed, matrix_kind=matrix_kind)
    try:
        output = run_gamp(instance.measurements, prior, spec.gamp)
        estimate = apply_metric(output, spec.metric, prior)
        error = compute_empirical_error(instance.signal.entries, estimate, spec.metric)
        delta_v, iterations, converged = output.delta_v, output.iterations, output.converged
    except GampDivergenceError:
        error, delta_v, iterations, converged = math.nan, math.nan, 0, False

    omp_error = None
    if spec.name == "aud":
        omp_error = _run_omp_baseline(spec, instance)
    wall = time.perf_counter() - started
    return TrialRecord(seed=seed, R=R, J=J, noise_param=noise,
                       empirical_error=error, delta_v_final=delta_v,
                       iterations=iterations, converged=converged,
                       wall_time=wall, omp_error=omp_error)


def _run_omp_baseline(spec: ExperimentSpec, instance) -> float:
    max_atoms = spec.omp_max_atoms
    if max_atoms is None:
        max_atoms = math.ceil(1.5 * spec.rho * spec.N)
    config = OmpConfig(max_atoms=max_atoms, threshold=spec.omp_threshold)
    J = instance.signal.j
    est = np.zeros_like(instance.signal.entries)
    for j in range(J):
        x_hat, _ = omp(instance.measurements.matrices[j],
                       instance.measurements.observations[j], config)
        est[:, j] = binarize(x_hat, config.threshold)
    return compute_empirical_error(instance.signal.entries, est,
                                   MetricSpec("hamming"))


def _theory_value(spec: ExperimentSpec, sweep_index, J, R, noise, delta_v):
    """Theoretic limit at the sweep point, or None when not defined."""
    if delta_v is None or not np.isfinite(delta_v):
        return None
    if spec.name in ("wse_awgn", "roc"):
        return mmwse(LimitQuery(delta_v, spec.rho, J, spec.metric.beta)).value
    if spec.name == "mae_logistic":
        query = LimitQuery(delta_v, spec.rho, J)
        if J == 1:
            return mmae(query, method="quadrature").value
        seed = trial_seed(spec.base_seed, sweep_index, spec.trials)
        return mmae(query, n_samples=400_000, seed=seed).value
    return None


def _sweep_delta_v(spec: ExperimentSpec, J, R, noise, records):
    if spec.delta_v_source == "se":
        if spec.name not in ("wse_awgn", "roc", "aud"):
            raise SpecError("delta_v_source 'se' requires an AWGN experiment")
        return state_evolution_delta(R, spec.rho, J, noise)
    values = [r.delta_v_final for r in records if np.isfinite(r.delta_v_final)]
    return float(np.mean(values)) if values else None


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.17g}"
    return str(value)


def _base_row(spec: ExperimentSpec, chash):
    return {
        "N": spec.N, "rho": spec.rho, "beta": spec.beta,
        "metric": str(spec.metric), "t_max": spec.gamp.t_max,
        "epsilon": spec.gamp.epsilon, "damping": spec.gamp.damping,
        "delta_aggregation": spec.gamp.delta_aggregation,
        "delta_v_source": spec.delta_v_source, "config_hash": chash,
    }


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> list[dict]:
    """Run the sweep and write the CSV artifact to ``spec.output_path``.

    Trials run in a thread pool (numpy releases the GIL in the heavy
    kernels); rows are emitted in (sweep_index, trial_index) order no
    matter how the pool schedules them.  Returns the rows as dicts.
    """
    points = spec.sweep_points()
    tasks = [(si, ti) for si in range(len(points)) for ti in range(spec.trials)]

    def work(task):
        si, ti = task
        J, R, noise = points[si]
        return task, _run_trial(spec, si, ti, J, R, noise)

    results = {}
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for task, record in pool.map(work, tasks):
                results[task] = record
    else:
        for task in tasks:
            task, record = work(task)
            results[task] = record

    chash = spec.config_hash()
    rows: list[dict] = []
    for si, (J, R, noise) in enumerate(points):
        records = [results[(si, ti)] for ti in range(spec.trials)]
        for ti, rec in enumerate(records):
            row = dict.fromkeys(CSV_COLUMNS, None)
            row.update(_base_row(spec, chash))
            row.update({
                "row_kind": "trial", "sweep_index": si, "trial_index": ti,
                "seed": rec.seed, "J": J, "R": R, "noise_param": noise,
                "delta_v": rec.delta_v_final, "iterations": rec.iterations,
                "converged": rec.converged,
                "empirical_error": rec.empirical_error,
                "omp_error": rec.omp_error,
            })
            rows.append(row)

        finite = [r.empirical_error for r in records if np.isfinite(r.empirical_error)]
        mean_err = float(np.mean(finite)) if finite else math.nan
        std_err = (float(np.std(finite, ddof=1) / np.sqrt(len(finite)))
                   if len(finite) > 1 else math.nan)
        delta_v = _sweep_delta_v(spec, J, R, noise, records)
        theory = _theory_value(spec, si, J, R, noise, delta_v)
        agg = dict.fromkeys(CSV_COLUMNS, None)
        agg.update(_base_row(spec, chash))
        agg.update({
            "row_kind": "aggregate", "sweep_index": si, "J": J, "R": R,
            "noise_param": noise, "delta_v": delta_v,
            "empirical_error": mean_err, "std_err": std_err,
            "theoretic_error": theory,
        })
        if spec.name == "aud":
            omp_vals = [r.omp_error for r in records if r.omp_error is not None]
            agg["omp_error"] = float(np.mean(omp_vals)) if omp_vals else None
            agg["omp_std_err"] = (float(np.std(omp_vals, ddof=1) / np.sqrt(len(omp_vals)))
                                  if len(omp_vals) > 1 else None)
        rows.append(agg)

        if spec.name == "roc" and delta_v is not None:
            grid = (1.0 + delta_v) * _chi2.ppf(
                np.linspace(1e-6, 1.0 - 1e-6, spec.roc_points), J)
            for threshold, (fpr, tpr) in zip(grid, roc_curve(delta_v, spec.rho, J, grid)):
                row = dict.fromkeys(CSV_COLUMNS, None)
                row.update(_base_row(spec, chash))
                row.update({
                    "row_kind": "roc_point", "sweep_index": si, "J": J,
                    "R": R, "noise_param": noise, "delta_v": delta_v,
                    "threshold": threshold, "fpr": float(fpr), "tpr": float(tpr),
                })
                rows.append(row)

    _write_csv(spec.output_path, rows)
    return rows


def _write_csv(path, rows):
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in CSV_COLUMNS))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def run_gamp_trace(spec: ExperimentSpec, output_path: str) -> list[tuple]:
    """Run sweep point 0, trial 0 and dump the per-iteration trace CSV."""
    J, R, noise = spec.sweep_points()[0]
    seed = trial_seed(spec.base_seed, 0, 0)
    channel, prior_kind, matrix_kind, prior = _experiment_pieces(spec, noise)
    M = int(round(R * spec.N))
    instance = generate_instance(spec.N, M, J, spec.rho, prior_kind, channel,
                                 seed, matrix_kind=matrix_kind)
    output = run_gamp(instance.measurements, prior, spec.gamp)
    lines = ["iteration,delta,delta_v"]
    trace = []
    for i, (delta, delta_v) in enumerate(output.trace, start=1):
        trace.append((i, delta, delta_v))
        lines.append(f"{i},{delta:.17g},{delta_v:.17g}")
    with open(output_path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    return trace
