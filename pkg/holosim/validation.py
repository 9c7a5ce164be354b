"""Self-checks run by ``holosim validate``: oracle agreement, closed forms, invariants."""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from holosim.experiment import holometer
from holosim.experiment.holometer import Family, HolometerConfig, RadiationPressureParams
from holosim.experiment.noise_sim import NoiseModel, run_campaign
from holosim.optics.fock_oracle import CoherentMode, FockConfig, SqueezedMode, TwinBeamModes, oracle_expectation
from holosim.optics.gaussian_core import apply_maps, heisenberg_matrix, interferometer_map, loss_map
from holosim.optics.wick_moments import OperatorPolynomial, expectation, number_difference_moment

logger = logging.getLogger(__name__)

ORACLE_TOL = 1e-8
ORACLE_DEGREE = 8
ORACLE_TRIALS = 100


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tolerance: float
    passed: bool
    detail: str = ""


def random_polynomial(rng: np.random.Generator, num_modes: int, max_degree: int, n_terms: int) -> OperatorPolynomial:
    """Random operator polynomial with complex coefficients and arbitrary operator order."""
    terms = []
    for _ in range(n_terms):
        degree = int(rng.integers(0, max_degree + 1))
        factors = tuple(
            (int(rng.integers(0, num_modes)), bool(rng.integers(0, 2))) for _ in range(degree)
        )
        coeff = complex(rng.normal(), rng.normal())
        terms.append((coeff, factors))
    return OperatorPolynomial(tuple(terms))


def _relative(value: float, reference: float) -> float:
    return abs(value - reference) / max(abs(reference), 1e-300)


def _fock_config(modes, degree: int, cutoff: int, ancilla_count: int = 0) -> FockConfig:
    config = FockConfig(tuple(modes), max(cutoff, 1), ancilla_count)
    if cutoff <= 0:
        config = FockConfig(config.modes, config.required_cutoff(degree), ancilla_count)
    return config


def oracle_deviation(seed: int = 0, cutoff: int = 0, trials: int = ORACLE_TRIALS) -> float:
    """
    Largest ``|Gaussian - Fock|`` over random polynomials and a lossy interferometer.

    Args:
        seed: Seed of the random polynomials
        cutoff: Fock cutoff (0 picks it from the leakage bound)
        trials: Polynomials drawn per input state

    Returns:
        Worst absolute deviation
    """
    rng = np.random.default_rng(seed)
    degree = ORACLE_DEGREE
    deviations = []
    for modes in (
        (SqueezedMode(0.5, 0.3), CoherentMode(1.0, 0.7)),
        (TwinBeamModes(0.3, 0.2),),
    ):
        config = _fock_config(modes, degree, cutoff)
        state = config.to_gaussian()
        for _ in range(trials):
            poly = random_polynomial(rng, config.num_modes, degree, 5)
            deviations.append(abs(expectation(poly, state) - oracle_expectation(poly, config)))

    modes = (SqueezedMode(0.5, 0.0), CoherentMode(1.0, 0.0))
    config = _fock_config(modes, degree, cutoff, ancilla_count=1)
    maps = [interferometer_map(1.1, 0, 1), loss_map(0.8, 0)]
    difference = OperatorPolynomial.number(0) - OperatorPolynomial.number(1)
    observable = difference * difference
    gaussian = expectation(observable, apply_maps(FockConfig(modes, config.cutoff).to_gaussian(), maps))
    fock = oracle_expectation(observable.substitute(heisenberg_matrix(maps, 2)), config)
    deviations.append(abs(gaussian - fock))
    return max(deviations)


def _check(name: str, tolerance: float, measure: Callable[[], float]) -> CheckResult:
    try:
        measured = float(measure())
    except Exception as exc:  # a crash is a failed check, not a crashed suite
        logger.debug("check %s raised", name, exc_info=True)
        return CheckResult(name, float("nan"), tolerance, False, f"{type(exc).__name__}: {exc}")
    return CheckResult(name, measured, tolerance, bool(measured <= tolerance))


def squeeze_sign_pairing(mu: float = 100.0, lam: float = 0.5) -> float:
    """
    Relative deviation of ``Var(N_c - N_d)`` at pi/2 from its squeezed value.

    With aligned phases the squeezed quadrature must face the coherent beam; a
    flipped squeezing sign yields the anti-squeezed variance and a large deviation.
    """
    config = HolometerConfig.default(Family.SQ, mu, lam)
    s = math.sqrt(lam * (1.0 + lam))
    expected = lam + mu * (1.0 + 2.0 * lam - 2.0 * s)
    return _relative(holometer.difference_variance(config, 1), expected)


def run_checks(seed: int = 0, cutoff: int = 0) -> List[CheckResult]:
    """
    Run every self-check.

    Args:
        seed: Seed of the random oracle polynomials and of the Monte Carlo campaign
        cutoff: Fock cutoff (0 picks it from the leakage bound)

    Returns:
        One CheckResult per check, in a fixed order
    """
    mu, lam = 100.0, 0.5
    sq = HolometerConfig.default(Family.SQ, mu, lam)
    twb = HolometerConfig.default(Family.TWB, 1e3, lam)
    s = math.sqrt(lam * (1.0 + lam))

    def rp_squeezed():
        (var1, var2), cov12 = holometer.rp_moments(sq)
        expected = lam + mu * (1.0 + 2.0 * lam + 2.0 * s)
        return max(_relative(var1, expected), _relative(var2, expected), abs(cov12) / mu)

    def rp_twin_beam():
        (var1, var2), cov12 = holometer.rp_moments(HolometerConfig.default(Family.TWB, mu, lam))
        expected = lam + mu * (1.0 + 2.0 * lam)
        return max(_relative(var1, expected), _relative(var2, expected), _relative(cov12, 2.0 * mu * s))

    def classical_baseline():
        return max(
            _relative(holometer.u0(HolometerConfig.default(Family.CL, m)), holometer.u0_cl_closed(m))
            for m in (1e2, 1e6, 1e23)
        )

    def squeezed_scaling():
        big_mu, big_lam = holometer.HIGH_RESOURCE_MU, holometer.HIGH_RESOURCE_LAMBDA
        config = HolometerConfig.default(Family.SQ, big_mu, big_lam)
        return abs(holometer.u0(config) * 2.0 * math.sqrt(2.0) * big_lam * big_mu - 1.0)

    def twin_beam_efficiency_limit():
        config = HolometerConfig.default(Family.TWB, 1e6, 1e-3)
        return max(
            _relative(holometer.u0_ratio(config.replace(eta=eta)), math.sqrt(2.0 * (1.0 - eta) / eta))
            for eta in (0.5, 0.7, 0.9, 0.99)
        )

    def squeezed_efficiency_limit():
        small = 1e-4
        config = HolometerConfig.default(Family.SQ, 1e6, small)
        return max(
            abs(holometer.u0_ratio(config.replace(eta=eta)) - (1.0 - 2.0 * eta * math.sqrt(small)))
            for eta in (0.5, 0.75, 1.0)
        )

    def estimator():
        result = run_campaign(sq, None, NoiseModel.around(sq, 1e-3, 0.5), 100_000, seed)
        return abs(result.estimate - result.true_value) / result.std_error

    def number_difference():
        state = HolometerConfig.default(Family.SQ, 0.0, lam).input_state()
        return _relative(number_difference_moment((0, 1), 2, state), 4.0 * lam * (1.0 + lam))

    def physicality():
        worst = 0.0
        for family in Family:
            eigenvalues = HolometerConfig.default(family, mu, lam).input_state().physicality_eigenvalues()
            worst = max(worst, -float(eigenvalues.min()))
        return worst

    checks: List[Tuple[str, float, Callable[[], float]]] = [
        ("fock oracle agreement |delta|", ORACLE_TOL, lambda: oracle_deviation(seed, cutoff)),
        ("squeeze sign pairing", 1e-9, squeeze_sign_pairing),
        ("u0 engine vs closed form", 1e-9, lambda: _relative(holometer.u0(sq), holometer.u0_sq_closed(mu, lam))),
        ("classical u0 = sqrt2/mu (mu=1e2,1e6,1e23)", 1e-10, classical_baseline),
        ("squeezed u0 * 2 sqrt2 lambda mu -> 1", 1e-2, squeezed_scaling),
        ("signal coefficient (mu-lambda)^2", 1e-6,
         lambda: _relative(holometer.signal_coefficient(sq), (mu - lam) ** 2)),
        ("twb noise-free Var[C]/mu^2", 1e-12, lambda: abs(holometer.var_c(twb, None, 0.0, 0.0)) / twb.mu**2),
        ("twb cross-covariance curvature", 1e-6,
         lambda: _relative(holometer.twb_cross_covariance_curvature(twb), holometer.twb_signal_closed(twb.mu, lam, 0.0))),
        ("twb ratio vs sqrt(2(1-eta)/eta), lambda=1e-3", 2e-2, twin_beam_efficiency_limit),
        ("sq ratio vs 1-2 eta sqrt(lambda), lambda=1e-4", 5e-3, squeezed_efficiency_limit),
        ("twb high-resource crossing vs 1-1/(2 sqrt5)", 1e-3,
         lambda: abs(holometer.high_resource_crossing() - holometer.high_resource_limit())),
        ("radiation-pressure moments (SQ)", 1e-9, rp_squeezed),
        ("radiation-pressure moments (TWB)", 1e-9, rp_twin_beam),
        ("radiation-pressure scale R", 1e-2, lambda: _relative(RadiationPressureParams().R, 8.6e24)),
        ("<(N1-N2)^2> two squeezed vacua", 1e-12, number_difference),
        ("input-state physicality", 1e-9, physicality),
        ("covariance estimate |error| / std_error", 3.0, estimator),
    ]
    return [_check(name, tolerance, measure) for name, tolerance, measure in checks]
