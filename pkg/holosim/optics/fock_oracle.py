"""Truncated Fock-space oracle for cross-checking the Gaussian moment engine.

The joint input state is built as a dense tensor of amplitudes and ladder
operators are applied along its axes, so no operator matrix is ever formed.
Vacuum ancillas introduced by loss are not simulated: any factor on a mode
index past the configured modes is evaluated as a vacuum expectation.
"""

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from holosim.errors import DomainError, TruncationError
from holosim.optics.gaussian_core import (
    GaussianState,
    prepare_coherent,
    prepare_squeezed_vacuum,
    prepare_twb,
    product_state,
    vacuum,
)
from holosim.optics.wick_moments import OperatorPolynomial

logger = logging.getLogger(__name__)

LEAKAGE_TOL = 1e-10
MAX_TAIL_SCAN = 20000


def _geometric_horizon(ratio: float) -> int:
    if ratio <= 0.0:
        return 8
    return int(min(MAX_TAIL_SCAN, np.ceil(120.0 / max(-np.log(ratio), 1e-3)) + 64))


@dataclass(frozen=True)
class VacuumMode:
    width = 1

    def amplitudes(self, cutoff: int) -> np.ndarray:
        amps = np.zeros(cutoff + 1, dtype=complex)
        amps[0] = 1.0
        return amps

    def photon_distribution(self) -> np.ndarray:
        return np.array([1.0])

    def to_gaussian(self) -> GaussianState:
        return vacuum(1)


@dataclass(frozen=True)
class CoherentMode:
    mu: float
    theta: float = 0.0
    width = 1

    def amplitudes(self, cutoff: int) -> np.ndarray:
        n = np.arange(cutoff + 1)
        if self.mu == 0:
            return VacuumMode().amplitudes(cutoff)
        log_mag = -0.5 * self.mu + 0.5 * n * np.log(self.mu) - 0.5 * gammaln(n + 1)
        return np.exp(log_mag) * np.exp(1j * n * self.theta)

    def photon_distribution(self) -> np.ndarray:
        horizon = int(self.mu + 20.0 * np.sqrt(self.mu) + 200)
        return poisson.pmf(np.arange(horizon + 1), self.mu)

    def to_gaussian(self) -> GaussianState:
        return prepare_coherent(self.mu, self.theta)


@dataclass(frozen=True)
class SqueezedMode:
    lam: float
    theta: float = 0.0
    width = 1

    def amplitudes(self, cutoff: int) -> np.ndarray:
        amps = np.zeros(cutoff + 1, dtype=complex)
        if self.lam == 0:
            amps[0] = 1.0
            return amps
        m = np.arange(cutoff // 2 + 1)
        t = np.sqrt(self.lam / (1.0 + self.lam))
        log_mag = (
            -0.25 * np.log1p(self.lam)
            + 0.5 * gammaln(2 * m + 1)
            - m * np.log(2.0)
            - gammaln(m + 1)
            + m * np.log(t)
        )
        amps[2 * m] = np.exp(log_mag) * np.exp(2j * m * self.theta)
        return amps

    def photon_distribution(self) -> np.ndarray:
        t = np.sqrt(self.lam / (1.0 + self.lam))
        horizon = _geometric_horizon(t)
        return np.abs(self.amplitudes(horizon)) ** 2

    def to_gaussian(self) -> GaussianState:
        return prepare_squeezed_vacuum(self.lam, self.theta)


@dataclass(frozen=True)
class TwinBeamModes:
    """Two-mode squeezed vacuum occupying two consecutive modes."""

    lam: float
    theta: float = 0.0
    width = 2

    def coefficients(self, cutoff: int) -> np.ndarray:
        n = np.arange(cutoff + 1)
        if self.lam == 0:
            return (n == 0).astype(complex)
        ratio = self.lam / (1.0 + self.lam)
        return np.exp(-0.5 * np.log1p(self.lam) + 0.5 * n * np.log(ratio)) * np.exp(2j * n * self.theta)

    def amplitudes(self, cutoff: int) -> np.ndarray:
        return np.diag(self.coefficients(cutoff))

    def photon_distribution(self) -> np.ndarray:
        horizon = _geometric_horizon(self.lam / (1.0 + self.lam))
        return np.abs(self.coefficients(horizon)) ** 2

    def to_gaussian(self) -> GaussianState:
        return prepare_twb(self.lam, self.theta)


InputMode = Union[VacuumMode, CoherentMode, SqueezedMode, TwinBeamModes]


def tail_weight(mode: InputMode, cutoff: int, degree: int) -> float:
    """``sum_{n > cutoff} p_n (n + 1)^(degree / 2)`` for one input's photon distribution."""
    distribution = mode.photon_distribution()
    n = np.arange(distribution.size)
    mask = n > cutoff
    return float(np.sum(distribution[mask] * (n[mask] + 1.0) ** (0.5 * degree)))


def _minimal_cutoff(distribution: np.ndarray, degree: int) -> int:
    n = np.arange(distribution.size)
    weights = distribution * (n + 1.0) ** (0.5 * degree)
    # tails[k] = sum over n > k
    tails = np.concatenate([np.cumsum(weights[::-1])[::-1][1:], [0.0]])
    return int(np.argmax(tails < LEAKAGE_TOL))


def auto_cutoff(lam: float, mu: float, degree: int) -> int:
    """
    Smallest per-mode cutoff that keeps a degree-``degree`` moment accurate.

    Args:
        lam: Squeezed-light photon number (squeezed tails dominate twin-beam marginals)
        mu: Coherent photon number
        degree: Polynomial degree to be evaluated

    Returns:
        Cutoff with moment-weighted leakage below 1e-10, plus ``degree`` for ladder headroom
    """
    if lam < 0 or mu < 0:
        raise DomainError(f"photon numbers must be >= 0, got lambda={lam}, mu={mu}")
    if degree < 0:
        raise DomainError(f"degree must be >= 0, got {degree}")
    needed = max(
        _minimal_cutoff(SqueezedMode(lam).photon_distribution(), degree),
        _minimal_cutoff(CoherentMode(mu).photon_distribution(), degree),
    )
    logger.debug("auto cutoff %d for lambda=%g mu=%g degree %d", needed + degree, lam, mu, degree)
    return needed + degree


@dataclass(frozen=True)
class FockConfig:
    """
    Product input state truncated at ``cutoff`` photons per mode.

    Attributes:
        modes: Input descriptors in mode order (a twin beam takes two slots)
        cutoff: Highest photon number kept per mode
        ancilla_count: Vacuum ancillas following the configured modes
    """

    modes: Tuple[InputMode, ...]
    cutoff: int
    ancilla_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise DomainError("FockConfig needs at least one input mode")
        if self.cutoff < 1:
            raise DomainError(f"cutoff must be >= 1, got {self.cutoff}")
        if self.ancilla_count < 0:
            raise DomainError(f"ancilla_count must be >= 0, got {self.ancilla_count}")

    @property
    def num_modes(self) -> int:
        return sum(m.width for m in self.modes)

    def to_gaussian(self) -> GaussianState:
        """The same input as a Gaussian state, ancillas included."""
        return product_state(*(m.to_gaussian() for m in self.modes)).extended(self.ancilla_count)

    def state_vector(self) -> np.ndarray:
        tensors = [m.amplitudes(self.cutoff) for m in self.modes]
        return reduce(np.multiply.outer, tensors)

    def required_cutoff(self, degree: int) -> int:
        return max(_minimal_cutoff(m.photon_distribution(), degree) for m in self.modes) + degree

    def leakage(self, degree: int) -> float:
        """Largest moment-weighted tail beyond ``cutoff - degree`` over the inputs."""
        usable = self.cutoff - degree
        if usable < 0:
            return float("inf")
        return max(tail_weight(m, usable, degree) for m in self.modes)

    def check_leakage(self, degree: int):
        leak = self.leakage(degree)
        if leak >= LEAKAGE_TOL:
            raise TruncationError(
                f"cutoff {self.cutoff} leaks {leak:.3e} of a degree-{degree} moment",
                required_cutoff=self.required_cutoff(degree),
            )


def _apply_ladder(vector: np.ndarray, mode: int, dagger: bool) -> np.ndarray:
    moved = np.moveaxis(vector, mode, 0)
    out = np.zeros_like(moved)
    size = moved.shape[0]
    root = np.sqrt(np.arange(1, size)).reshape((-1,) + (1,) * (moved.ndim - 1))
    if dagger:
        out[1:] = root * moved[:-1]
    else:
        out[:-1] = root * moved[1:]
    return np.moveaxis(out, 0, mode)


def _vacuum_string(factors: Sequence[bool]) -> complex:
    size = len(factors) + 1
    vector = np.zeros(size, dtype=complex)
    vector[0] = 1.0
    for dagger in reversed(factors):
        vector = _apply_ladder(vector, 0, dagger)
    return complex(vector[0])


def oracle_expectation(poly: OperatorPolynomial, config: FockConfig) -> complex:
    """
    ``<P>`` in the truncated Fock space.

    Args:
        poly: Polynomial over the configured modes and trailing vacuum ancillas
        config: Truncated input state

    Returns:
        Complex expectation value

    Raises:
        TruncationError: The cutoff is too small for the polynomial's degree
    """
    signal = config.num_modes
    limit = signal + config.ancilla_count
    bad = [m for m in poly.modes() if not 0 <= m < limit]
    if bad:
        raise DomainError(f"modes {sorted(bad)} are outside the {limit} configured modes")
    config.check_leakage(poly.degree)

    psi = config.state_vector()
    total = []
    for coeff, factors in poly.simplify().terms:
        ancillas = {}
        chain = []
        for mode, dagger in factors:
            if mode < signal:
                chain.append((mode, dagger))
            else:
                ancillas.setdefault(mode, []).append(dagger)
        weight = coeff
        for daggers in ancillas.values():
            weight *= _vacuum_string(daggers)
        if weight == 0:
            continue
        vector = psi
        for mode, dagger in reversed(chain):
            vector = _apply_ladder(vector, mode, dagger)
        total.append(weight * np.vdot(psi, vector))
    return complex(np.sum(total)) if total else 0j
