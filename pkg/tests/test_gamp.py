import numpy as np
import pytest

from metricamp import (
    AwgnChannel,
    BernoulliBinaryPrior,
    BernoulliGaussianPrior,
    GampConfig,
    GampDivergenceError,
    bernoulli_denoise,
    bg_denoise,
    generate_instance,
    run_gamp,
)
from metricamp.model import MeasurementSet
from oracles import gauss_pdf, spike_slab_component_posterior


def test_bg_denoise_zero_input():
    mean, var, pi = bg_denoise(0.5, np.zeros(3), 0.1)
    assert np.all(mean == 0.0)
    assert np.all(var >= 0.0)
    assert 0.0 < pi < 1.0


def test_bg_denoise_degenerate_pure_gaussian():
    q = np.array([2.0, -1.0])
    mean, var, pi = bg_denoise(1.0, q, 1.0)
    assert pi == 1.0
    assert np.allclose(mean, q / 2.0, rtol=0, atol=0)
    assert np.allclose(var, 0.5)


def test_bg_denoise_matches_quadrature_oracle():
    rng = np.random.default_rng(0)
    q = rng.normal(0.0, 1.2, size=3)
    mean, var, pi = bg_denoise(0.5, q, 0.1)
    o_mean, o_var, o_pi = spike_slab_component_posterior(q, 0.5, 0.1)
    assert np.max(np.abs(mean - o_mean)) <= 1e-6
    assert np.max(np.abs(var - o_var)) <= 1e-6
    assert abs(pi - o_pi) <= 1e-6


def test_bg_shrinkage_bound():
    rng = np.random.default_rng(1)
    for _ in range(200):
        dv = float(rng.uniform(0.05, 3.0))
        q = rng.normal(0.0, 2.0, size=rng.integers(1, 6))
        mean, _, _ = bg_denoise(dv, q, float(rng.uniform(0.01, 0.99)))
        assert np.linalg.norm(mean) <= np.linalg.norm(q) / (1.0 + dv) + 1e-12


def test_bernoulli_denoise_symmetric_evidence():
    # row sum exactly J/2 with rho = 1/2 gives an exactly balanced posterior
    q = np.array([1.0, 0.5, -0.5, 1.0])  # sums to 2 = J/2
    mean, var, pi = bernoulli_denoise(0.3, q, 0.5)
    assert pi == 0.5
    assert np.all(mean == 0.5)
    assert np.allclose(var, 0.25)


def test_bernoulli_denoise_saturation():
    mean, var, pi = bernoulli_denoise(0.2, np.array([1e4, 1e4]), 0.1)
    assert pi == 1.0
    assert np.all(var == 0.0)
    mean, var, pi = bernoulli_denoise(0.2, np.array([-1e4, -1e4]), 0.1)
    assert pi == 0.0


def test_bernoulli_denoise_two_point_bayes_oracle():
    dv, rho, q = 0.2, 0.1, 0.9
    _, _, pi = bernoulli_denoise(dv, np.array([q]), rho)
    like1 = rho * gauss_pdf(q, 1.0, dv)
    like0 = (1.0 - rho) * gauss_pdf(q, 0.0, dv)
    assert abs(pi - like1 / (like0 + like1)) <= 1e-12


def test_bernoulli_pi_monotone_in_row_sum():
    sums = np.linspace(-5.0, 5.0, 41)
    pis = [bernoulli_denoise(0.4, np.array([s / 2, s / 2]), 0.2)[2] for s in sums]
    assert np.all(np.diff(pis) > 0)


def test_run_gamp_near_noiseless_well_posed():
    # sparse enough that R = 0.7 measurements pin the signal down
    inst = generate_instance(1000, 700, 1, 0.5, "bernoulli_gaussian",
                             AwgnChannel(1e-6), seed=42)
    out = run_gamp(inst.measurements, BernoulliGaussianPrior(0.5), GampConfig())
    mse = float(np.mean(np.sum((out.x_hat - inst.signal.entries) ** 2, axis=1)))
    assert out.converged
    assert mse < 1e-3


def test_run_gamp_all_zero_signal():
    rng = np.random.default_rng(5)
    N, M = 500, 350
    A = rng.standard_normal((M, N)) / np.sqrt(N)
    A /= np.linalg.norm(A, axis=1, keepdims=True)
    y = rng.normal(0.0, 0.1, size=M)  # pure noise, nothing to find
    meas = MeasurementSet(matrices=[A], observations=[y], channel=AwgnChannel(0.01))
    out = run_gamp(meas, BernoulliGaussianPrior(0.1), GampConfig())
    assert float(np.sum(out.x_hat**2) / N) < out.delta_v


def test_run_gamp_variance_positivity_every_iteration():
    inst = generate_instance(400, 240, 2, 0.1, "bernoulli_gaussian",
                             AwgnChannel(0.01), seed=9)
    seen = []
    run_gamp(inst.measurements, BernoulliGaussianPrior(0.1), GampConfig(),
             iter_callback=lambda st: seen.append(float(st.s.min())))
    assert seen
    assert min(seen) >= 0.0


def test_run_gamp_channel_symmetry():
    # identical per-channel inputs must produce identical per-channel variances
    inst = generate_instance(300, 200, 1, 0.1, "bernoulli_gaussian",
                             AwgnChannel(0.01), seed=12)
    A = inst.measurements.matrices[0]
    y = inst.measurements.observations[0]
    meas = MeasurementSet(matrices=[A, A, A], observations=[y, y, y],
                          channel=AwgnChannel(0.01))
    spread = []
    run_gamp(meas, BernoulliGaussianPrior(0.1), GampConfig(),
             iter_callback=lambda st: spread.append(
                 float(np.ptp(st.delta_v_per_channel))))
    assert max(spread) <= 1e-10


def test_run_gamp_determinism():
    inst = generate_instance(400, 200, 2, 0.1, "bernoulli_gaussian",
                             AwgnChannel(0.01), seed=33)
    prior = BernoulliGaussianPrior(0.1)
    a = run_gamp(inst.measurements, prior, GampConfig())
    b = run_gamp(inst.measurements, prior, GampConfig())
    assert np.array_equal(a.x_hat, b.x_hat)
    assert np.array_equal(a.q, b.q)
    assert a.delta_v == b.delta_v
    assert a.trace == b.trace


def test_run_gamp_iterations_capped():
    inst = generate_instance(200, 100, 1, 0.1, "bernoulli_gaussian",
                             AwgnChannel(0.01), seed=2)
    out = run_gamp(inst.measurements, BernoulliGaussianPrior(0.1),
                   GampConfig(t_max=5, epsilon=1e-30))
    assert out.iterations == 5
    assert not out.converged
    assert len(out.trace) == 5


def test_run_gamp_divergence_error_carries_trace():
    rng = np.random.default_rng(0)
    N, M = 100, 60
    A = rng.standard_normal((M, N)) / np.sqrt(N)
    y = np.full(M, 1e200)  # absurd observations blow the recursion up
    meas = MeasurementSet(matrices=[A], observations=[y], channel=AwgnChannel(0.01))
    with pytest.raises(GampDivergenceError) as excinfo:
        run_gamp(meas, BernoulliGaussianPrior(0.1), GampConfig())
    assert isinstance(excinfo.value.trace, list)


def test_run_gamp_binary_prior_recovers_support():
    inst = generate_instance(1000, 500, 1, 0.1, "bernoulli_binary",
                             AwgnChannel(0.01), seed=77,
                             matrix_kind="signed_bernoulli")
    out = run_gamp(inst.measurements, BernoulliBinaryPrior(0.1), GampConfig())
    hard = out.x_hat[:, 0] > 0.5
    errors = np.sum(hard != inst.signal.support)
    assert out.converged
    assert errors <= 5


def test_gamp_config_validation():
    with pytest.raises(ValueError):
        GampConfig(t_max=0)
    with pytest.raises(ValueError):
        GampConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        GampConfig(delta_aggregation="median")
    with pytest.raises(ValueError):
        GampConfig(damping=1.0)


def test_delta_aggregation_modes():
    inst = generate_instance(300, 200, 2, 0.1, "bernoulli_gaussian",
                             AwgnChannel(0.01), seed=8)
    prior = BernoulliGaussianPrior(0.1)
    mean_out = run_gamp(inst.measurements, prior, GampConfig(t_max=3, epsilon=1e-30))
    sum_out = run_gamp(inst.measurements, prior,
                       GampConfig(t_max=3, epsilon=1e-30, delta_aggregation="sum"))
    assert sum_out.trace[0][1] == pytest.approx(2.0 * mean_out.trace[0][1])
