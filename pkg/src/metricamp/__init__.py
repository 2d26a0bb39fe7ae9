"""Metric-optimal estimation for noisy multi-measurement-vector problems.

The pipeline has two parts: a message-passing engine (:mod:`metricamp.gamp`)
that reduces the linear inverse problem to an equivalent scalar Gaussian
channel with pseudo data ``q`` and noise variance ``delta_v``, and a family
of denoisers (:mod:`metricamp.metrics`) that map ``(q, delta_v)`` to the
estimate minimizing a chosen additive error metric.  Theoretic error floors
indexed by ``delta_v`` live in :mod:`metricamp.limits`; problem generation,
baselines, and the experiment harness complete the package.
"""

from .baselines import OmpConfig, binarize, omp
from .channels import (
    AwgnChannel,
    GoutResult,
    LogisticChannel,
    SigmoidMixture,
    awgn_gout,
    build_sigmoid_mixture,
    default_mixture,
    logistic_moments,
)
from .gamp import (
    BernoulliBinaryPrior,
    BernoulliGaussianPrior,
    GampConfig,
    GampDivergenceError,
    GampOutput,
    bernoulli_denoise,
    bg_denoise,
    run_gamp,
)
from .harness import (
    ExperimentSpec,
    SpecError,
    compute_empirical_error,
    parse_spec_file,
    parse_spec_text,
    run_experiment,
    trial_seed,
)
from .limits import (
    LimitQuery,
    LimitResult,
    NumericError,
    invert_mmse,
    mmae,
    mmse_of_delta,
    mmwse,
    roc_area,
    roc_curve,
    state_evolution_delta,
)
from .metrics import (
    MetricPriorMismatch,
    MetricSpec,
    apply_metric,
    hamming_estimate,
    mae_estimate,
    mmse_estimate,
    mwse_estimate,
    mwse_threshold,
    parse_metric,
    posterior_median,
)
from .model import (
    MeasurementSet,
    ProblemInstance,
    SignalEnsemble,
    generate_instance,
    generate_matrix,
    generate_signal,
    load_instance,
    measure,
    save_instance,
)

__version__ = "0.1.0"
