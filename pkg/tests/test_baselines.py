import math

import numpy as np
import pytest

from metricamp import (
    AwgnChannel,
    BernoulliBinaryPrior,
    GampConfig,
    MetricSpec,
    OmpConfig,
    apply_metric,
    binarize,
    compute_empirical_error,
    generate_instance,
    generate_matrix,
    omp,
    run_gamp,
)


def _unit_column_matrix(rng, M, N):
    A = rng.standard_normal((M, N))
    return A / np.linalg.norm(A, axis=0, keepdims=True)


def test_omp_one_sparse_exact_recovery():
    rng = np.random.default_rng(0)
    A = _unit_column_matrix(rng, 50, 20)
    y = 3.0 * A[:, 7]
    x_hat, support = omp(A, y, OmpConfig(max_atoms=5, residual_tol=1e-12))
    assert support == [7]
    assert abs(x_hat[7] - 3.0) <= 1e-10
    assert np.all(x_hat[np.arange(20) != 7] == 0.0)


def test_omp_zero_measurement():
    rng = np.random.default_rng(1)
    A = _unit_column_matrix(rng, 30, 10)
    x_hat, support = omp(A, np.zeros(30), OmpConfig(max_atoms=4))
    assert support == []
    assert np.all(x_hat == 0.0)


def test_omp_residual_nonincreasing():
    rng = np.random.default_rng(2)
    A = _unit_column_matrix(rng, 60, 120)
    y = A[:, :10] @ rng.normal(size=10) + 0.05 * rng.standard_normal(60)
    norms = []
    for k in range(1, 15):
        x_hat, _ = omp(A, y, OmpConfig(max_atoms=k))
        norms.append(np.linalg.norm(y - A @ x_hat))
    assert np.all(np.diff(norms) <= 1e-12)


def test_omp_support_size_and_uniqueness():
    rng = np.random.default_rng(3)
    A = _unit_column_matrix(rng, 40, 80)
    y = rng.standard_normal(40)
    _, support = omp(A, y, OmpConfig(max_atoms=12))
    assert len(support) == 12
    assert len(set(support)) == 12


def test_omp_max_atoms_validated():
    rng = np.random.default_rng(4)
    A = _unit_column_matrix(rng, 10, 30)
    with pytest.raises(ValueError):
        omp(A, np.zeros(10), OmpConfig(max_atoms=11))


def test_omp_noiseless_sparse_recovery_rate():
    # sanity property: M >= 4 k ln N recovers k-sparse signals almost always
    N, k = 256, 8
    M = int(4 * k * math.log(N))
    successes = 0
    for trial in range(100):
        rng = np.random.default_rng(100 + trial)
        A = _unit_column_matrix(rng, M, N)
        true_support = rng.choice(N, size=k, replace=False)
        coeffs = rng.normal(0.0, 1.0, size=k)
        coeffs += np.sign(coeffs)  # keep coefficients away from zero
        y = A[:, true_support] @ coeffs
        _, support = omp(A, y, OmpConfig(max_atoms=k, residual_tol=1e-10))
        if set(support) == set(true_support):
            successes += 1
    assert successes >= 95


def test_omp_rank_deficient_fallback_warns():
    rng = np.random.default_rng(5)
    M = 30
    a = rng.standard_normal(M)
    a /= np.linalg.norm(a)
    e = rng.standard_normal(M)
    e -= (e @ a) * a
    e /= np.linalg.norm(e)
    b = a + 1e-9 * e
    b /= np.linalg.norm(b)
    c = rng.standard_normal(M)
    c -= (c @ a) * a + (c @ e) * e
    c /= np.linalg.norm(c)
    A = np.column_stack([a, b, c])
    y = a + 0.9 * b + 0.5 * c
    with pytest.warns(UserWarning, match="rank deficient"):
        x_hat, support = omp(A, y, OmpConfig(max_atoms=3))
    assert np.all(np.isfinite(x_hat))
    assert np.linalg.norm(y - A @ x_hat) <= 1e-6


def test_binarize_basic():
    assert np.array_equal(binarize(np.array([0.9, 0.1]), 0.5), [1.0, 0.0])


def test_binarize_boundary_is_zero():
    assert np.array_equal(binarize(np.array([0.5, 0.5]), 0.5), [0.0, 0.0])


def test_binarize_threshold_sweep_minimized_at_half():
    # in a regime OMP solves well, its coefficient noise is symmetric about
    # the true {0,1} values, so a cut at one half is optimal (ties allowed)
    inst = generate_instance(600, 420, 1, 0.1, "bernoulli_binary",
                             AwgnChannel(0.005), seed=6,
                             matrix_kind="signed_bernoulli")
    config = OmpConfig(max_atoms=math.ceil(1.5 * 0.1 * 600))
    x_hat, _ = omp(inst.measurements.matrices[0],
                   inst.measurements.observations[0], config)
    truth = inst.signal.entries[:, 0]
    sweep = {}
    for threshold in np.linspace(0.1, 0.9, 17):
        decisions = binarize(x_hat, float(threshold))
        sweep[float(threshold)] = np.mean(decisions != truth)
    assert sweep[0.5] == min(sweep.values())


def test_omp_loses_to_metric_optimal_pipeline_head_to_head():
    # paired comparison on the detection task: N=2000, R=0.5, rho=0.1,
    # delta_z=0.01; the pipeline should win on at least 45 of 50 seeds
    N, R, rho, dz = 2000, 0.5, 0.1, 0.01
    prior = BernoulliBinaryPrior(rho)
    metric = MetricSpec("hamming")
    omp_config = OmpConfig(max_atoms=math.ceil(1.5 * rho * N))
    wins = 0
    for seed in range(50):
        inst = generate_instance(N, int(R * N), 1, rho, "bernoulli_binary",
                                 AwgnChannel(dz), seed=seed,
                                 matrix_kind="signed_bernoulli")
        out = run_gamp(inst.measurements, prior, GampConfig(damping=0.1))
        est = apply_metric(out, metric, prior)
        gamp_error = compute_empirical_error(inst.signal.entries, est, metric)
        x_omp, _ = omp(inst.measurements.matrices[0],
                       inst.measurements.observations[0], omp_config)
        omp_est = binarize(x_omp, omp_config.threshold)[:, None]
        omp_error = compute_empirical_error(inst.signal.entries, omp_est, metric)
        if omp_error > gamp_error:
            wins += 1
    assert wins >= 45
