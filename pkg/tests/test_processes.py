import math

import numpy as np
import pytest

from momentprobe import (ConfigError, GaussianState, UnsupportedProcessError,
                         apply_tensor, coherent_moments, gaussian_moments)
from momentprobe.processes import (NLA, Attenuation, BeamSplitter,
                                   CatGeneration, Decoherence, Displacement,
                                   GaussianChannel, GaussianTriplet, Identity,
                                   PhotonAdd, PhotonSub, as_gaussian_triplet,
                                   catalog_tensor, gaussian_apply,
                                   nla_success_probability, output_moments,
                                   process_modes)

from helpers import annihilator, coherent_vec, state_moment

ALPHAS = [0.5, -0.3 + 0.8j, 1.1 - 0.2j]


def coherent_table(alpha, cutoff):
    return coherent_moments(alpha, cutoff)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_identity_and_attenuation_monomials(alpha):
    for j in range(4):
        for k in range(4):
            assert abs(output_moments(Identity(), alpha, (j, k))
                       - alpha ** j * np.conj(alpha) ** k) < 1e-12
            got = output_moments(Attenuation(0.7), alpha, (j, k))
            b = 0.7 * alpha
            assert abs(got - b ** j * np.conj(b) ** k) < 1e-12


@pytest.mark.parametrize("alpha", ALPHAS)
def test_displacement_shifts_amplitude(alpha):
    beta = 0.3 + 0.2j
    b = alpha + beta
    for j in range(4):
        for k in range(4):
            got = output_moments(Displacement(beta), alpha, (j, k))
            assert abs(got - b ** j * np.conj(b) ** k) < 1e-12


@pytest.mark.parametrize("alpha", ALPHAS)
def test_photon_add_against_fock_oracle(alpha):
    """Adding a photon multiplies the state by the raising operator."""
    dim = 60
    vec = coherent_vec(alpha, dim)
    raised = annihilator(dim).conj().T @ vec
    for j in range(4):
        for k in range(4):
            want = state_moment(raised, j, k)
            got = output_moments(PhotonAdd(), alpha, (j, k))
            assert abs(got - want) < 1e-9 * max(1.0, abs(want))


@pytest.mark.parametrize("alpha", ALPHAS)
def test_photon_sub_against_fock_oracle(alpha):
    dim = 60
    vec = coherent_vec(alpha, dim)
    lowered = annihilator(dim) @ vec
    for j in range(4):
        for k in range(4):
            want = state_moment(lowered, j, k)
            got = output_moments(PhotonSub(), alpha, (j, k))
            assert abs(got - want) < 1e-9 * max(1.0, abs(want))


def test_cat_factors_four_valued():
    spec = CatGeneration()
    want = {(0, 0): 1.0, (1, 1): 1.0, (0, 1): 1.0j, (1, 0): -1.0j}
    alpha = 0.9
    for (jp, kp), factor in want.items():
        for j in range(jp, 4, 2):
            for k in range(kp, 4, 2):
                got = output_moments(spec, alpha, (j, k))
                base = alpha ** j * alpha ** k
                assert abs(got - factor * base) < 1e-12


@pytest.mark.parametrize("alpha", [0.3, 0.7 - 0.4j])
def test_nla_against_truncated_amplifier_oracle(alpha):
    """The heralded amplifier acts as g^n with weight (g^2-1)^-N."""
    gain, scissors = 1.2, 8
    dim = 70
    vec = coherent_vec(alpha, dim)
    kvec = gain ** np.arange(dim) * vec / (gain ** 2 - 1) ** (scissors / 2)
    spec = NLA(gain=gain, scissors=scissors)
    for j in range(4):
        for k in range(4):
            if j == 0 and k == 0:
                assert output_moments(spec, alpha, (0, 0)) == 1.0
                continue
            want = state_moment(kvec, j, k)
            got = output_moments(spec, alpha, (j, k))
            assert abs(got - want) < 1e-9 * max(1.0, abs(want))


def test_nla_success_probability():
    gain, scissors = 1.2, 8
    alpha = 0.4
    p, reliable = nla_success_probability(gain, scissors, alpha)
    want = math.exp((gain ** 2 - 1) * abs(alpha) ** 2) \
        / (gain ** 2 - 1) ** scissors
    assert abs(p - want) < 1e-12 * want
    assert reliable
    _, reliable_big = nla_success_probability(gain, scissors, 2.0)
    assert not reliable_big


def test_decoherence_matches_gaussian_picture():
    """Tensor application and covariance evolution agree on coherent
    input."""
    spec = Decoherence(n_bath=1.5, gamma=0.8, tau=0.6)
    alpha = 0.7 + 0.1j
    tensor = catalog_tensor(spec, 3)
    via_tensor = apply_tensor(tensor, coherent_table(alpha, 3))
    state = GaussianState([alpha.real, alpha.imag], 0.25 * np.eye(2))
    via_gauss = gaussian_moments(gaussian_apply(as_gaussian_triplet(spec),
                                                state), 3)
    for key, v in via_tensor.entries.items():
        assert abs(v - via_gauss.entries[key]) < 1e-11


def test_decoherence_zero_time_is_identity():
    tensor = catalog_tensor(Decoherence(n_bath=2.0, gamma=1.0, tau=0.0), 3)
    ident = catalog_tensor(Identity(), 3)
    for key, v in ident.entries.items():
        assert abs(tensor.entries[key] - v) < 1e-14


def test_decoherence_preserves_trace():
    spec = Decoherence(n_bath=2.0, gamma=1.0, tau=0.5)
    for alpha in ALPHAS:
        assert abs(output_moments(spec, alpha, (0, 0)) - 1.0) < 1e-14


def test_beam_splitter_mixes_amplitudes():
    spec = BeamSplitter(t=0.8, r=0.6)
    a1, a2 = 0.5 - 0.1j, -0.3 + 0.7j
    b1 = 0.8 * a1 - 0.6 * a2
    b2 = 0.6 * a1 + 0.8 * a2
    for j1 in range(3):
        for k2 in range(3):
            got = output_moments(spec, (a1, a2), ((j1, 1), (0, k2)))
            want = b1 ** j1 * b2 * np.conj(b2) ** k2
            assert abs(got - want) < 1e-12


def test_beam_splitter_tensor_consistent_with_moments():
    """Input box must cover the full mixing order j1+j2."""
    spec = BeamSplitter(t=0.8, r=0.6)
    tensor = catalog_tensor(spec, ((2, 2), (4, 4)))
    a1, a2 = 0.4, 0.3 - 0.5j
    table_in = gaussian_moments(
        GaussianState([a1.real, a1.imag, a2.real, a2.imag],
                      0.25 * np.eye(4)), (4, 4))
    out = apply_tensor(tensor, table_in)
    for j in ((0, 0), (1, 0), (2, 1), (2, 2)):
        for k in ((0, 0), (1, 1), (0, 2)):
            want = output_moments(spec, (a1, a2), (j, k))
            assert abs(out.value(j, k) - want) < 1e-11


def test_beam_splitter_tensor_conserves_photon_number():
    tensor = catalog_tensor(BeamSplitter(t=0.8, r=0.6), (2, 2))
    for (j, k, m, n), v in tensor.entries.items():
        if v != 0 and (sum(m) != sum(j) or sum(n) != sum(k)):
            raise AssertionError(f"off-band entry at {(j, k, m, n)}")


def test_attenuation_composes():
    t1 = catalog_tensor(Attenuation(0.9), 3)
    t2 = catalog_tensor(Attenuation(0.8), 3)
    combined = catalog_tensor(Attenuation(0.72), 3)
    table = coherent_table(0.7 + 0.2j, 3)
    twice = apply_tensor(t1, apply_tensor(t2, table))
    once = apply_tensor(combined, table)
    for key, v in once.entries.items():
        assert abs(twice.entries[key] - v) < 1e-12


def test_catalog_rejects_generic_gaussian():
    triplet = GaussianTriplet(0.5 * np.eye(2), 0.1 * np.eye(2),
                              np.zeros(2))
    with pytest.raises(UnsupportedProcessError, match="estimation"):
        catalog_tensor(GaussianChannel(triplet), 3)


def test_gaussian_channel_moments_match_named_process():
    beta = 0.2 - 0.6j
    named = Displacement(beta)
    channel = GaussianChannel(as_gaussian_triplet(named))
    for alpha in ALPHAS:
        for j in range(3):
            for k in range(3):
                want = output_moments(named, alpha, (j, k))
                got = output_moments(channel, alpha, (j, k))
                assert abs(got - want) < 1e-11


def test_triplet_compose_matches_sequential_apply():
    rng = np.random.default_rng(11)
    t1 = GaussianTriplet(rng.uniform(-1, 1, (2, 2)),
                         np.diag(rng.uniform(0.1, 0.3, 2)),
                         rng.uniform(-1, 1, 2))
    t2 = GaussianTriplet(rng.uniform(-1, 1, (2, 2)),
                         np.diag(rng.uniform(0.1, 0.3, 2)),
                         rng.uniform(-1, 1, 2))
    state = GaussianState([0.4, -0.2], 0.25 * np.eye(2))
    seq = gaussian_apply(t2, gaussian_apply(t1, state))
    combined = gaussian_apply(t2.compose(t1), state)
    assert np.allclose(seq.mean, combined.mean, atol=1e-13)
    assert np.allclose(seq.cov, combined.cov, atol=1e-13)


def test_attenuation_triplet_matches_low_moments():
    eta = 0.6
    triplet = as_gaussian_triplet(Attenuation(eta))
    assert np.allclose(triplet.scale, eta * np.eye(2))
    assert np.allclose(triplet.noise, (1 - eta ** 2) / 4.0 * np.eye(2))
    assert np.allclose(triplet.shift, 0.0)


def test_as_gaussian_triplet_rejects_nonlinear():
    with pytest.raises(UnsupportedProcessError):
        as_gaussian_triplet(PhotonAdd())


def test_process_modes():
    assert process_modes(Identity()) == 1
    assert process_modes(BeamSplitter(t=0.8, r=0.6)) == 2


@pytest.mark.parametrize("bad, message", [
    (lambda: Attenuation(1.0), "process.eta"),
    (lambda: Attenuation(0.0), "process.eta"),
    (lambda: BeamSplitter(t=0.5, r=0.5), "t\\^2"),
    (lambda: NLA(gain=1.0, scissors=4), "process.gain"),
    (lambda: NLA(gain=1.5, scissors=0), "process.scissors"),
    (lambda: Decoherence(n_bath=-0.1, gamma=1.0, tau=0.1), "process.n_bath"),
    (lambda: Decoherence(n_bath=1.0, gamma=-1.0, tau=0.1), "process.gamma"),
])
def test_parameter_validation(bad, message):
    with pytest.raises(ConfigError, match=message):
        bad()


def test_catalog_tensor_boxes():
    tensor = catalog_tensor(Attenuation(0.7), (3, 2))
    assert tensor.cutoff_out == (3,)
    assert tensor.cutoff_in == (2,)
    assert (((3,), (3,), (3,), (3,)) not in tensor.entries)
    assert tensor.value((2,), (2,), (2,), (2,)) == pytest.approx(0.7 ** 4)
