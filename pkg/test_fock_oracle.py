"""Cross-checks between the Gaussian engine and the truncated Fock oracle."""

import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holosim.errors import DomainError, TruncationError
from holosim.optics.fock_oracle import (
    CoherentMode,
    FockConfig,
    SqueezedMode,
    TwinBeamModes,
    VacuumMode,
    auto_cutoff,
    oracle_expectation,
    tail_weight,
)
from holosim.optics.gaussian_core import apply_maps, heisenberg_matrix, interferometer_map, loss_map
from holosim.optics.wick_moments import OperatorPolynomial, expectation
from holosim.validation import ORACLE_DEGREE, ORACLE_TRIALS, oracle_deviation, random_polynomial

a = OperatorPolynomial.annihilation
ad = OperatorPolynomial.creation
n_op = OperatorPolynomial.number


def _close(gaussian: complex, fock: complex, tol: float = 1e-8) -> bool:
    return abs(gaussian - fock) <= tol


def test_auto_cutoff():
    assert auto_cutoff(0.0, 0.0, 4) == 4
    assert auto_cutoff(0.5, 1.0, 8) <= 90
    assert auto_cutoff(2.0, 1.0, 4) > auto_cutoff(0.5, 1.0, 4)
    assert auto_cutoff(0.5, 10.0, 4) >= auto_cutoff(0.5, 1.0, 4)
    # a coherent tail this wide outgrows the squeezed one
    assert auto_cutoff(0.5, 60.0, 4) > auto_cutoff(0.5, 1.0, 4)
    with pytest.raises(DomainError):
        auto_cutoff(-1.0, 0.0, 2)


@pytest.mark.parametrize("mode", [
    CoherentMode(2.0, 0.4),
    SqueezedMode(0.5, 0.3),
    VacuumMode(),
])
def test_amplitudes_are_normalized(mode):
    cutoff = max(2, FockConfig((mode,), 1).required_cutoff(2))
    config = FockConfig((mode,), cutoff)
    assert np.sum(np.abs(config.state_vector()) ** 2) == pytest.approx(1.0, abs=1e-10)


def test_twin_beam_amplitudes_are_normalized():
    config = FockConfig((TwinBeamModes(0.3, 0.2),), 80)
    assert np.sum(np.abs(config.state_vector()) ** 2) == pytest.approx(1.0, abs=1e-10)


def test_small_cutoff_raises_with_required_cutoff():
    config = FockConfig((SqueezedMode(2.0),), 6)
    with pytest.raises(TruncationError) as info:
        oracle_expectation(n_op(0) * n_op(0), config)
    assert info.value.required_cutoff > 6
    assert f"use cutoff >= {info.value.required_cutoff}" in str(info.value)


def test_tail_weight_shrinks_with_cutoff():
    mode = SqueezedMode(1.0)
    assert tail_weight(mode, 20, 4) > tail_weight(mode, 60, 4)
    assert tail_weight(VacuumMode(), 0, 8) == 0.0


def test_vacuum_ancillas():
    """Factors on ancilla modes are evaluated in the vacuum."""
    config = FockConfig((CoherentMode(1.0),), 30, ancilla_count=1)
    assert oracle_expectation(a(1) * ad(1), config) == pytest.approx(1.0)
    assert oracle_expectation(ad(1) * a(1), config) == 0
    assert oracle_expectation(n_op(0) * a(1) * ad(1), config) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        oracle_expectation(a(2), config)


def test_simple_moments_against_closed_forms():
    lam, mu = 0.5, 1.5
    config = FockConfig((SqueezedMode(lam), CoherentMode(mu)), 1)
    config = FockConfig(config.modes, config.required_cutoff(4))
    assert oracle_expectation(n_op(0), config) == pytest.approx(lam)
    assert oracle_expectation(n_op(1) * n_op(1), config) == pytest.approx(mu * mu + mu)
    assert oracle_expectation(a(0) * a(0), config) == pytest.approx(np.sqrt(lam * (1 + lam)))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_random_polynomials_agree_up_to_degree_eight(seed):
    rng = np.random.default_rng(seed)
    config = FockConfig((SqueezedMode(0.5, 0.3), CoherentMode(1.0, 0.7)), 1)
    config = FockConfig(config.modes, config.required_cutoff(8))
    state = config.to_gaussian()
    poly = random_polynomial(rng, 2, 8, 6)
    assert _close(expectation(poly, state), oracle_expectation(poly, config))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_twin_beam_agrees(seed):
    rng = np.random.default_rng(seed)
    config = FockConfig((TwinBeamModes(0.4, 0.1),), 1)
    config = FockConfig(config.modes, config.required_cutoff(6))
    poly = random_polynomial(rng, 2, 6, 6)
    assert _close(expectation(poly, config.to_gaussian()), oracle_expectation(poly, config))


@pytest.mark.parametrize("phi,eta", [(0.0, 1.0), (1.1, 0.8), (2.5, 0.3)])
def test_lossy_interferometer_agrees(phi, eta):
    """Heisenberg substitution with a vacuum ancilla matches the Gaussian propagation."""
    modes = (SqueezedMode(0.5), CoherentMode(1.0))
    config = FockConfig(modes, 1, ancilla_count=1)
    config = FockConfig(modes, config.required_cutoff(4), ancilla_count=1)
    maps = [interferometer_map(phi, 0, 1), loss_map(eta, 0)]
    diff = n_op(0) - n_op(1)
    gaussian = expectation(diff * diff, apply_maps(FockConfig(modes, config.cutoff).to_gaussian(), maps))
    fock = oracle_expectation((diff * diff).substitute(heisenberg_matrix(maps, 2)), config)
    assert _close(gaussian, fock)


def test_oracle_deviation_is_small():
    # 100 degree-8 polynomials per input state plus the lossy interferometer
    assert ORACLE_DEGREE == 8
    assert oracle_deviation(seed=3, trials=ORACLE_TRIALS) <= 1e-8


def test_auto_cutoff_logs_its_choice(caplog):
    with caplog.at_level(logging.DEBUG, logger="holosim.optics.fock_oracle"):
        cutoff = auto_cutoff(0.5, 1.0, 4)
    assert f"auto cutoff {cutoff}" in caplog.text
