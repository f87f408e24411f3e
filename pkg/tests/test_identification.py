import numpy as np
import pytest

from momentprobe import DegenerateProbesError, UnderDeterminedError
from momentprobe.processes import GaussianTriplet
from momentprobe.tomography import (default_gaussian_probes,
                                    identify_gaussian, resource_matrix)


def random_triplet(rng, modes):
    d = 2 * modes
    a = rng.uniform(-1, 1, (d, d))
    return GaussianTriplet(rng.uniform(-1, 1, (d, d)), a.T @ a / 10.0,
                           rng.uniform(-1, 1, d))


def outputs(triplet, means_in, sigma=0.0, rng=None):
    means_out = means_in @ triplet.scale.T + triplet.shift
    if sigma > 0:
        means_out = means_out + rng.normal(0.0, sigma, means_out.shape)
    d = triplet.scale.shape[0]
    cov = triplet.scale @ (0.25 * np.eye(d)) @ triplet.scale.T + triplet.noise
    return means_out, cov


@pytest.mark.parametrize("modes", [1, 2, 3])
def test_recovers_random_triplets(modes):
    rng = np.random.default_rng(100 + modes)
    means_in = np.array(default_gaussian_probes(modes))
    for _ in range(5):
        truth = random_triplet(rng, modes)
        means_out, cov = outputs(truth, means_in)
        result = identify_gaussian(means_in, means_out, cov)
        assert np.max(np.abs(result.triplet.scale - truth.scale)) < 1e-12
        assert np.max(np.abs(result.triplet.noise - truth.noise)) < 1e-12
        assert np.max(np.abs(result.triplet.shift - truth.shift)) < 1e-12
        assert result.residual < 1e-12


def test_extra_probes_use_least_squares():
    rng = np.random.default_rng(7)
    truth = random_triplet(rng, 1)
    means_in = np.vstack([default_gaussian_probes(1),
                          rng.uniform(-1, 1, (4, 2))])
    means_out, cov = outputs(truth, means_in)
    result = identify_gaussian(means_in, means_out, cov)
    assert np.max(np.abs(result.triplet.scale - truth.scale)) < 1e-12


def test_underdetermined_names_required_count():
    means_in = np.array(default_gaussian_probes(1))[:2]
    with pytest.raises(UnderDeterminedError, match="at least 3 probes"):
        identify_gaussian(means_in, means_in, 0.25 * np.eye(2))


def test_collinear_probes_rejected():
    means_in = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(DegenerateProbesError, match="collinear"):
        identify_gaussian(means_in, means_in, 0.25 * np.eye(2))


def test_complex_probe_amplitudes_accepted():
    rng = np.random.default_rng(3)
    truth = random_triplet(rng, 1)
    amps = [0.0, 1.0, 1.0j]
    means_in = np.array([[a.real, a.imag] for a in map(complex, amps)])
    means_out, cov = outputs(truth, means_in)
    result = identify_gaussian(amps, means_out, cov)
    assert np.max(np.abs(result.triplet.scale - truth.scale)) < 1e-12


def test_noise_degrades_gracefully():
    rng = np.random.default_rng(9)
    truth = random_triplet(rng, 2)
    means_in = np.array(default_gaussian_probes(2))
    means_out, cov = outputs(truth, means_in, sigma=1e-8, rng=rng)
    result = identify_gaussian(means_in, means_out, cov)
    assert np.max(np.abs(result.triplet.scale - truth.scale)) < 1e-6


def test_resource_matrix_default_probes():
    res = resource_matrix(default_gaussian_probes(2), 2)
    assert res.matrix.shape == (5, 5)
    assert res.invertible
    assert res.cond < 10.0


def test_resource_matrix_flags_shortage():
    res = resource_matrix(default_gaussian_probes(1)[:2], 1)
    assert not res.invertible


def test_identified_noise_is_symmetric():
    rng = np.random.default_rng(15)
    truth = random_triplet(rng, 1)
    means_in = np.array(default_gaussian_probes(1))
    means_out, cov = outputs(truth, means_in)
    got = identify_gaussian(means_in, means_out, cov).triplet
    assert np.allclose(got.noise, got.noise.T)
