"""Tests for Gaussian states and linear-optical maps."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holosim.errors import ContractViolation, DomainError
from holosim.optics.gaussian_core import (
    GaussianState,
    LinearOpticalMap,
    apply_map,
    apply_maps,
    beam_splitter_map,
    heisenberg_matrix,
    interferometer_map,
    loss_map,
    prepare_coherent,
    prepare_squeezed_vacuum,
    prepare_twb,
    product_state,
    vacuum,
)

phases = st.floats(min_value=-2 * math.pi, max_value=2 * math.pi, allow_nan=False)
photons = st.floats(min_value=0.0, max_value=50.0, allow_nan=False)


def test_coherent_state_moments():
    """Coherent states carry only a displacement."""
    state = prepare_coherent(4.0, 0.3)
    assert state.displacement[0] == pytest.approx(2.0 * np.exp(0.3j))
    assert np.all(state.moment_aa == 0)
    assert np.all(state.moment_adag_a == 0)
    assert state.mean_photon_number() == pytest.approx(4.0)


def test_squeezed_vacuum_moments():
    """Squeezed vacuum: <da da> = exp(2i theta) sqrt(lam(1+lam)), <da^dag da> = lam."""
    state = prepare_squeezed_vacuum(0.5, 0.2)
    assert state.moment_aa[0, 0] == pytest.approx(np.exp(0.4j) * math.sqrt(0.75))
    assert state.moment_adag_a[0, 0] == pytest.approx(0.5)
    assert state.is_physical()


def test_twin_beam_is_pure_and_correlated():
    """The twin beam pairs the modes and saturates the physicality bound."""
    state = prepare_twb(2.0, 0.1)
    assert state.moment_aa[0, 1] == pytest.approx(np.exp(0.2j) * math.sqrt(6.0))
    assert state.moment_aa[0, 0] == 0
    assert state.physicality_eigenvalues().min() == pytest.approx(0.0, abs=1e-9)
    assert state.is_physical()


@pytest.mark.parametrize("factory,args", [
    (prepare_coherent, (-1.0,)),
    (prepare_coherent, (float("nan"),)),
    (prepare_squeezed_vacuum, (-0.1,)),
    (prepare_twb, (float("inf"),)),
])
def test_rejects_bad_photon_numbers(factory, args):
    with pytest.raises(DomainError):
        factory(*args)


def test_state_validation():
    """Moment matrices must be symmetric / Hermitian with a non-negative diagonal."""
    with pytest.raises(DomainError):
        GaussianState(2, [0, 0], [[0, 1], [0, 0]], np.zeros((2, 2)))
    with pytest.raises(DomainError):
        GaussianState(2, [0, 0], np.zeros((2, 2)), [[0, 1j], [1j, 0]])
    with pytest.raises(DomainError):
        GaussianState(1, [0], [[0]], [[-1.0]])
    with pytest.raises(DomainError):
        GaussianState(0, [], [], [])


def test_unphysical_state_is_detected():
    """Anomalous correlations beyond sqrt(N(N+1)) violate the uncertainty principle."""
    state = GaussianState(1, [0.0], [[1.0]], [[0.0]])
    assert not state.is_physical()


def test_product_reduced_and_extended():
    squeezed = prepare_squeezed_vacuum(0.5)
    coherent = prepare_coherent(9.0)
    joint = product_state(squeezed, coherent)
    assert joint.num_modes == 2
    assert joint.reduced([1]).mean_photon_number() == pytest.approx(9.0)
    assert joint.reduced([0]).moment_aa[0, 0] == pytest.approx(squeezed.moment_aa[0, 0])

    padded = joint.extended(2)
    assert padded.num_modes == 4
    assert padded.mean_photon_number(3) == 0.0
    with pytest.raises(DomainError):
        joint.reduced([0, 0])


def test_map_must_be_unitary():
    with pytest.raises(ContractViolation):
        LinearOpticalMap([[1.0, 0.1], [0.0, 1.0]], (0, 1))


@pytest.mark.parametrize("builder", [
    lambda: interferometer_map(0.3, 1, 1),
    lambda: beam_splitter_map(2, 2),
    lambda: loss_map(1.5, 0),
    lambda: loss_map(-0.1, 0),
])
def test_map_constructors_reject_bad_arguments(builder):
    with pytest.raises(DomainError):
        builder()


def test_map_targets_must_exist():
    with pytest.raises(DomainError):
        apply_map(vacuum(2), interferometer_map(0.5, 0, 3))


def test_interferometer_at_zero_phase_passes_modes_through():
    """phi = 0 sends a to c and -b to d."""
    block = interferometer_map(0.0, 0, 1).matrix_u
    np.testing.assert_allclose(block, [[1, 0], [0, -1]], atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(phi=phases, lam=photons, mu=photons, theta=phases)
def test_lossless_maps_conserve_photon_number(phi, lam, mu, theta):
    state = product_state(prepare_squeezed_vacuum(lam, theta), prepare_coherent(mu))
    out = apply_maps(state, [interferometer_map(phi, 0, 1), beam_splitter_map(0, 1)])
    assert out.mean_photon_number() == pytest.approx(state.mean_photon_number(), rel=1e-9, abs=1e-12)
    assert out.is_physical()


@settings(max_examples=40, deadline=None)
@given(eta=st.floats(min_value=0.0, max_value=1.0), lam=photons, mu=photons)
def test_loss_scales_populations(eta, lam, mu):
    """Loss multiplies every population by eta and appends one vacuum ancilla."""
    squeezed = apply_map(prepare_squeezed_vacuum(lam), loss_map(eta, 0))
    assert squeezed.num_modes == 2
    assert squeezed.mean_photon_number(0) == pytest.approx(eta * lam, abs=1e-12)
    assert squeezed.moment_aa[0, 0] == pytest.approx(eta * math.sqrt(lam * (1 + lam)), abs=1e-9)
    assert squeezed.is_physical()

    coherent = apply_map(prepare_coherent(mu), loss_map(eta, 0))
    assert coherent.mean_photon_number(0) == pytest.approx(eta * mu, abs=1e-12)


def test_heisenberg_matrix_matches_state_propagation():
    """Rows of the Heisenberg matrix reproduce the propagated moments."""
    state = product_state(prepare_squeezed_vacuum(0.7, 0.4), prepare_coherent(3.0, 1.1))
    maps = [interferometer_map(0.9, 0, 1), loss_map(0.6, 0), loss_map(0.8, 1)]
    out = apply_maps(state, maps)
    matrix = heisenberg_matrix(maps, 2)
    extended = state.extended(2)

    assert matrix.shape == (4, 4)
    np.testing.assert_allclose(out.displacement, matrix @ extended.displacement, atol=1e-12)
    np.testing.assert_allclose(out.moment_aa, matrix @ extended.moment_aa @ matrix.T, atol=1e-12)
    np.testing.assert_allclose(
        out.moment_adag_a, matrix.conj() @ extended.moment_adag_a @ matrix.T, atol=1e-12
    )
    np.testing.assert_allclose(matrix.conj().T @ matrix, np.eye(4), atol=1e-12)


def test_beam_splitter_arm_convention():
    """a_out = (a + b)/sqrt2 and b_out = (b - a)/sqrt2."""
    matrix = heisenberg_matrix([beam_splitter_map(0, 1)], 2)
    np.testing.assert_allclose(matrix, np.array([[1, 1], [-1, 1]]) / math.sqrt(2))


def test_twin_beam_marginal_is_thermal():
    """Either half of a twin beam alone is a thermal state with lam photons."""
    for mode in (0, 1):
        marginal = prepare_twb(0.9, 0.4).reduced([mode])
        assert marginal.moment_adag_a[0, 0] == pytest.approx(0.9)
        assert marginal.moment_aa[0, 0] == 0
        assert marginal.displacement[0] == 0


def test_interferometer_at_pi_swaps_the_arms():
    """phi = pi sends -i b to c and i a to d."""
    block = interferometer_map(math.pi, 0, 1).matrix_u
    np.testing.assert_allclose(block, [[0, -1j], [1j, 0]], atol=1e-15)

    state = product_state(prepare_coherent(4.0, 0.2), prepare_squeezed_vacuum(0.5))
    out = apply_map(state, interferometer_map(math.pi, 0, 1))
    assert out.mean_photon_number(0) == pytest.approx(0.5)
    assert out.mean_photon_number(1) == pytest.approx(4.0)


@pytest.mark.parametrize("eta1,eta2", [(0.9, 0.5), (0.3, 1.0), (0.0, 0.7)])
def test_losses_compose_multiplicatively(eta1, eta2):
    state = product_state(prepare_squeezed_vacuum(0.7, 0.3), prepare_coherent(4.0, 0.5))
    twice = apply_maps(state, [loss_map(eta1, 0), loss_map(eta2, 0)]).reduced([0, 1])
    once = apply_map(state, loss_map(eta1 * eta2, 0)).reduced([0, 1])
    np.testing.assert_allclose(twice.displacement, once.displacement, atol=1e-12)
    np.testing.assert_allclose(twice.moment_aa, once.moment_aa, atol=1e-12)
    np.testing.assert_allclose(twice.moment_adag_a, once.moment_adag_a, atol=1e-12)
