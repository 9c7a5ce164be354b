"""Tests for the Wick moment engine."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holosim.errors import ContractViolation, DomainError, UnsupportedDegreeError
from holosim.optics.gaussian_core import (
    apply_maps,
    heisenberg_matrix,
    interferometer_map,
    loss_map,
    prepare_coherent,
    prepare_squeezed_vacuum,
    prepare_twb,
    product_state,
)
from holosim.optics.wick_moments import (
    FormPolynomial,
    LinearForm,
    OperatorPolynomial,
    covariance,
    expectation,
    number_difference_moment,
    real_expectation,
    variance,
)
from holosim.validation import random_polynomial

a = OperatorPolynomial.annihilation
ad = OperatorPolynomial.creation
n_op = OperatorPolynomial.number


def test_polynomial_algebra():
    poly = (a(0) + ad(1)) * 2.0
    assert poly.degree == 1
    assert poly.modes() == {0, 1}
    assert poly.dagger().terms == ((2.0, ((0, True),)), (2.0, ((1, False),)))
    assert (n_op(0) - n_op(0)).terms == ()
    assert (a(0) ** 3).degree == 3
    with pytest.raises(DomainError):
        a(0) ** -1


def test_coherent_moments():
    """Coherent states factorize: <N> = mu and <N^2> = mu^2 + mu."""
    state = prepare_coherent(3.0, 0.4)
    assert expectation(n_op(0), state) == pytest.approx(3.0)
    assert expectation(a(0) * ad(0), state) == pytest.approx(4.0)
    assert real_expectation(n_op(0) * n_op(0), state) == pytest.approx(12.0)
    assert variance(n_op(0), state) == pytest.approx(3.0)


def test_squeezed_vacuum_moments():
    """Squeezed vacuum: <a a> = exp(2i theta) sqrt(lam(1+lam)), Var N = 2 lam (1 + lam)."""
    lam = 0.5
    state = prepare_squeezed_vacuum(lam, 0.25)
    assert expectation(a(0) * a(0), state) == pytest.approx(np.exp(0.5j) * math.sqrt(0.75))
    assert expectation(a(0), state) == 0
    assert variance(n_op(0), state) == pytest.approx(2 * lam * (1 + lam))
    assert real_expectation(n_op(0) ** 2, state) == pytest.approx(3 * lam**2 + 2 * lam)


def test_twin_beam_photon_numbers_are_locked():
    lam = 1.5
    state = prepare_twb(lam, 0.3)
    assert covariance(n_op(0), n_op(1), state) == pytest.approx(lam * (1 + lam))
    assert variance(n_op(0) - n_op(1), state) == pytest.approx(0.0, abs=1e-10)


def test_number_difference_moment():
    """Two independent squeezed vacua: <(N1 - N2)^2> = 4 lam (1 + lam)."""
    state = product_state(prepare_squeezed_vacuum(0.5), prepare_squeezed_vacuum(0.5))
    assert number_difference_moment((0, 1), 2, state) == pytest.approx(3.0, rel=1e-12)
    assert number_difference_moment((0, 1), 1, state) == pytest.approx(0.0, abs=1e-12)
    assert number_difference_moment((0, 1), 3, state) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(UnsupportedDegreeError):
        number_difference_moment((0, 1), 5, state)
    with pytest.raises(DomainError):
        number_difference_moment((0, 1), 0, state)


def test_non_hermitian_observable_is_rejected():
    state = prepare_coherent(1.0, 0.3)
    with pytest.raises(ContractViolation):
        variance(a(0), state)
    with pytest.raises(ContractViolation):
        real_expectation(a(0) * a(0), state)


def test_mode_outside_state_is_rejected():
    with pytest.raises(DomainError):
        expectation(n_op(2), prepare_coherent(1.0))


@settings(max_examples=30, deadline=None)
@given(
    lam=st.floats(min_value=0.0, max_value=5.0),
    mu=st.floats(min_value=0.0, max_value=50.0),
    theta=st.floats(min_value=-math.pi, max_value=math.pi),
)
def test_commutator_holds_in_any_state(lam, mu, theta):
    state = product_state(prepare_squeezed_vacuum(lam, theta), prepare_coherent(mu, -theta))
    for mode in (0, 1):
        commutator = expectation(a(mode) * ad(mode) - ad(mode) * a(mode), state)
        assert commutator == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_expectation_is_linear(seed):
    rng = np.random.default_rng(seed)
    state = product_state(prepare_squeezed_vacuum(0.7, 0.2), prepare_coherent(2.0, 1.0))
    p = random_polynomial(rng, 2, 4, 4)
    q = random_polynomial(rng, 2, 4, 4)
    combined = expectation(p + 2.5 * q, state)
    separate = expectation(p, state) + 2.5 * expectation(q, state)
    assert combined == pytest.approx(separate, rel=1e-10, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(
    phi=st.floats(min_value=0.0, max_value=2 * math.pi),
    eta=st.floats(min_value=0.0, max_value=1.0),
)
def test_fluctuation_expansion_preserves_moments(phi, eta):
    """Splitting forms into mean and fluctuation leaves <P> and Var P unchanged."""
    state = product_state(prepare_squeezed_vacuum(0.5, 0.1), prepare_coherent(20.0, 0.3)).extended(1)
    maps = [interferometer_map(phi, 0, 1), loss_map(eta, 0)]
    matrix = heisenberg_matrix(maps, 2)
    diff = FormPolynomial.number(LinearForm.from_row(matrix[0])) - FormPolynomial.number(
        LinearForm.from_row(matrix[1])
    )
    expanded = diff.fluctuation_expand(state)
    assert real_expectation(expanded, state) == pytest.approx(real_expectation(diff, state), rel=1e-12, abs=1e-9)
    assert variance(expanded, state) == pytest.approx(variance(diff, state), rel=1e-9, abs=1e-9)


def test_form_polynomial_matches_operator_polynomial():
    """Heisenberg-picture forms agree with the propagated state."""
    source = product_state(prepare_squeezed_vacuum(0.8, 0.3), prepare_coherent(5.0, 0.9))
    maps = [interferometer_map(1.3, 0, 1)]
    out = apply_maps(source, maps)
    observable = (n_op(0) - n_op(1)) ** 2
    pulled_back = observable.substitute(heisenberg_matrix(maps, 2))
    assert expectation(pulled_back, source) == pytest.approx(expectation(observable, out), rel=1e-10)


def test_large_displacement_keeps_precision():
    """
    Centered factors resolve the squeezed noise floor under a 1e23-photon beam:
    Var(N_c - N_d) at pi/2 is lam + mu (1 + 2 lam - 2 sqrt(lam(1+lam))).
    """
    mu, lam = 1e23, 0.5
    state = product_state(prepare_squeezed_vacuum(lam), prepare_coherent(mu))
    matrix = heisenberg_matrix([interferometer_map(math.pi / 2, 0, 1)], 2)
    diff = FormPolynomial.number(LinearForm.from_row(matrix[0])) - FormPolynomial.number(
        LinearForm.from_row(matrix[1])
    )
    expected = lam + mu * (1 + 2 * lam - 2 * math.sqrt(lam * (1 + lam)))
    assert variance(diff.fluctuation_expand(state), state) == pytest.approx(expected, rel=1e-9)


def test_constant_and_empty_polynomials():
    state = prepare_coherent(1.0)
    assert expectation(OperatorPolynomial(), state) == 0
    assert expectation(OperatorPolynomial.constant(2.5), state) == pytest.approx(2.5)
    assert expectation(FormPolynomial.constant(-1.0), state) == pytest.approx(-1.0)


def _ordered_pair(state, left, right) -> complex:
    """<x y> for single zero-mean factors read straight off the moment matrices."""
    (j, left_dagger), (k, right_dagger) = left, right
    if not left_dagger and not right_dagger:
        return state.moment_aa[j, k]
    if left_dagger and not right_dagger:
        return state.moment_adag_a[j, k]
    if not left_dagger and right_dagger:
        return state.moment_adag_a[k, j] + (1.0 if j == k else 0.0)
    return np.conj(state.moment_aa[j, k])


@pytest.mark.parametrize("factors", [
    ((0, False), (1, True), (2, False), (0, True)),
    ((1, False), (2, False), (0, True), (0, True)),
    ((2, True), (1, True), (1, False), (2, False)),
    ((0, False), (0, False), (0, True), (0, True)),
])
def test_four_factors_match_three_pairings(factors):
    """Zero-mean Gaussian: <x1 x2 x3 x4> = <x1 x2><x3 x4> + <x1 x3><x2 x4> + <x1 x4><x2 x3>."""
    state = product_state(prepare_squeezed_vacuum(0.6, 0.35), prepare_twb(0.8, -0.2))
    x1, x2, x3, x4 = factors
    expected = (
        _ordered_pair(state, x1, x2) * _ordered_pair(state, x3, x4)
        + _ordered_pair(state, x1, x3) * _ordered_pair(state, x2, x4)
        + _ordered_pair(state, x1, x4) * _ordered_pair(state, x2, x3)
    )
    poly = OperatorPolynomial(((1.0, tuple(factors)),))
    assert expectation(poly, state) == pytest.approx(expected, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("eta", [0.0, 0.4, 1.0])
def test_attenuated_coherent_light_stays_poissonian(eta):
    mu = 250.0
    state = apply_maps(prepare_coherent(mu, 0.7), [loss_map(eta, 0)])
    assert variance(n_op(0), state) == pytest.approx(eta * mu, abs=1e-9)
    assert real_expectation(n_op(0), state) == pytest.approx(eta * mu, abs=1e-9)
