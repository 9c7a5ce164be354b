"""Monte Carlo campaigns recovering an injected phase covariance.

Phase pairs are drawn from a correlated (parallel) and an uncorrelated
(perpendicular) bivariate normal with identical marginals. The quantum
expectation of ``C`` at each drawn pair is exact; only the phase noise (and,
in shot mode, a normal detector outcome) is sampled.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Tuple, Union

import numpy as np

from holosim.errors import DomainError
from holosim.experiment import holometer
from holosim.experiment.holometer import HolometerConfig, ObservableSpec

logger = logging.getLogger(__name__)

BLOCK_SIZE = 4096
SIGMA_WARNING = 0.1
MODES = ("exact", "shot")

STREAM_PARALLEL = 0
STREAM_PERPENDICULAR = 1
STREAM_SHOT_PARALLEL = 2
STREAM_SHOT_PERPENDICULAR = 3


@dataclass(frozen=True)
class NoiseModel:
    """
    Gaussian phase fluctuations around the central phases.

    Attributes:
        sigma: Per-interferometer standard deviation (rad)
        rho: Correlation coefficient of the parallel configuration
        centers: Central phases ``(phi0_1, phi0_2)``
    """

    sigma: float
    rho: float = 0.0
    centers: Tuple[float, float] = (math.pi / 2, math.pi / 2)

    def __post_init__(self):
        if not math.isfinite(self.sigma) or self.sigma <= 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")
        if not -1.0 <= self.rho <= 1.0:
            raise DomainError(f"rho must lie in [-1, 1], got {self.rho}")
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))

    @classmethod
    def around(cls, config: HolometerConfig, sigma: float, rho: float = 0.0) -> "NoiseModel":
        return cls(sigma=sigma, rho=rho, centers=config.centers)

    @property
    def true_covariance(self) -> float:
        return self.rho * self.sigma**2

    def second_moments(self) -> Tuple[float, float, float]:
        """Phase-noise ``(var1, var2, cov)`` of the parallel configuration."""
        var = self.sigma**2
        return var, var, self.true_covariance

    def cholesky(self, parallel: bool) -> np.ndarray:
        rho = self.rho if parallel else 0.0
        return self.sigma * np.array([[1.0, 0.0], [rho, math.sqrt(1.0 - rho * rho)]])


@dataclass(frozen=True)
class EstimationResult:
    estimate: float
    std_error: float
    n_samples: int
    true_value: float


def _block_generator(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), stream, block])))


def standard_normals(seed: int, stream: int, n: int, width: int = 1) -> np.ndarray:
    """
    Reproducible normals in fixed-size blocks, each block seeded from ``(seed, stream, block)``.

    Sample ``i`` depends only on the seed, the stream and ``i``, so blocks can be
    generated in any order.
    """
    if seed < 0:
        raise DomainError(f"seed must be >= 0, got {seed}")
    out = np.empty((n, width))
    for block, start in enumerate(range(0, n, BLOCK_SIZE)):
        stop = min(start + BLOCK_SIZE, n)
        draws = _block_generator(seed, stream, block).standard_normal((BLOCK_SIZE, width))
        out[start:stop] = draws[: stop - start]
    return out


def draw_phases(noise: NoiseModel, n: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Phase pairs for the parallel and perpendicular configurations.

    Args:
        noise: Phase-noise model
        n: Samples per configuration
        seed: Campaign seed

    Returns:
        Two ``(n, 2)`` arrays of absolute phases
    """
    centers = np.asarray(noise.centers)
    parallel = centers + standard_normals(seed, STREAM_PARALLEL, n, 2) @ noise.cholesky(True).T
    perpendicular = centers + standard_normals(seed, STREAM_PERPENDICULAR, n, 2) @ noise.cholesky(False).T
    return parallel, perpendicular


class PhaseResponse:
    """
    Exact trigonometric interpolant of a band-limited function of two phases.

    The function is sampled on a ``(2B + 1)^2`` grid over one period and expanded
    with a 2-D DFT; harmonics up to ``B`` per phase are reproduced exactly.
    """

    def __init__(self, function: Callable[[float, float], float], bandwidth: int):
        size = 2 * bandwidth + 1
        grid = 2.0 * math.pi * np.arange(size) / size
        values = np.array([[function(p1, p2) for p2 in grid] for p1 in grid])
        self.coefficients = np.fft.fft2(values) / size**2
        self.harmonics = np.rint(np.fft.fftfreq(size, d=1.0 / size)).astype(int)

    def __call__(self, phi1, phi2) -> np.ndarray:
        phi1 = np.atleast_1d(np.asarray(phi1, dtype=float))
        phi2 = np.atleast_1d(np.asarray(phi2, dtype=float))
        e1 = np.exp(1j * phi1[:, None] * self.harmonics[None, :])
        e2 = np.exp(1j * phi2[:, None] * self.harmonics[None, :])
        return np.einsum("ia,ab,ib->i", e1, self.coefficients, e2).real


@lru_cache(maxsize=32)
def mean_response(config: HolometerConfig, spec: ObservableSpec) -> PhaseResponse:
    return PhaseResponse(lambda p1, p2: holometer.mean_c(config, spec, p1, p2), spec.bandwidth)


@lru_cache(maxsize=32)
def variance_response(config: HolometerConfig, spec: ObservableSpec) -> PhaseResponse:
    return PhaseResponse(lambda p1, p2: holometer.var_c(config, spec, p1, p2), 2 * spec.bandwidth)


def _clamped_std(var: np.ndarray) -> np.ndarray:
    if np.any(var < 0):
        logger.warning("clamped %d negative variances (min %.3e) to 0", int(np.sum(var < 0)), float(var.min()))
        var = np.maximum(var, 0.0)
    return np.sqrt(var)


def run_campaign(
    config: HolometerConfig,
    spec: Optional[ObservableSpec],
    noise: NoiseModel,
    n_samples: int,
    seed: int,
    mode: str = "exact",
) -> EstimationResult:
    """
    Estimate the injected phase covariance from simulated measurements of ``C``.

    Args:
        config: Holometer configuration
        spec: Observable (None picks the family default)
        noise: Phase-noise model
        n_samples: Samples per configuration (>= 2)
        seed: Campaign seed
        mode: "exact" averages exact expectations, "shot" adds a normal detector outcome

    Returns:
        EstimationResult

    Raises:
        InsensitiveConfigurationError: The signal coefficient vanishes
    """
    spec = spec if spec is not None else ObservableSpec.for_family(config.family)
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    if n_samples < 2:
        raise DomainError(f"n_samples must be >= 2, got {n_samples}")
    if noise.sigma > SIGMA_WARNING:
        logger.warning("sigma=%.3g rad is outside the small-fluctuation regime (> %.1f)", noise.sigma, SIGMA_WARNING)

    signal = holometer.require_sensitive(config, spec)
    parallel, perpendicular = draw_phases(noise, n_samples, seed)
    if not (np.all(np.isfinite(parallel)) and np.all(np.isfinite(perpendicular))):
        raise DomainError("non-finite phases drawn")

    response = mean_response(config, spec)
    values_par = response(parallel[:, 0], parallel[:, 1])
    values_perp = response(perpendicular[:, 0], perpendicular[:, 1])

    if mode == "shot":
        spread = variance_response(config, spec)
        std_par = _clamped_std(spread(parallel[:, 0], parallel[:, 1]))
        std_perp = _clamped_std(spread(perpendicular[:, 0], perpendicular[:, 1]))
        values_par = values_par + std_par * standard_normals(seed, STREAM_SHOT_PARALLEL, n_samples)[:, 0]
        values_perp = values_perp + std_perp * standard_normals(seed, STREAM_SHOT_PERPENDICULAR, n_samples)[:, 0]

    if not (np.all(np.isfinite(values_par)) and np.all(np.isfinite(values_perp))):
        raise DomainError("non-finite observable values in campaign")

    estimate = (values_par.mean() - values_perp.mean()) / signal
    std_error = math.sqrt(values_par.var(ddof=1) / n_samples + values_perp.var(ddof=1) / n_samples) / abs(signal)
    logger.debug("campaign seed=%d n=%d estimate=%.6e se=%.3e", seed, n_samples, estimate, std_error)
    return EstimationResult(
        estimate=float(estimate),
        std_error=float(std_error),
        n_samples=int(n_samples),
        true_value=noise.true_covariance,
    )


def sample_noise_observation(
    config: HolometerConfig,
    spec: Optional[ObservableSpec],
    phases: Tuple[float, float],
    seed: int,
    size: Optional[int] = None,
) -> Union[float, np.ndarray]:
    """
    Simulated detector outcome(s) for ``C`` at fixed phases.

    Args:
        config: Holometer configuration
        spec: Observable
        phases: ``(phi1, phi2)``
        seed: Generator seed
        size: Number of draws (None for a single float)

    Returns:
        Normal draw(s) with the exact mean and variance of ``C``
    """
    phi1, phi2 = phases
    mean = holometer.mean_c(config, spec, phi1, phi2)
    var = holometer.var_c(config, spec, phi1, phi2)
    if var < 0:
        logger.warning("negative variance %.3e at phases (%.6g, %.6g) clamped to 0", var, phi1, phi2)
        var = 0.0
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    draws = rng.normal(mean, math.sqrt(var), size=size)
    return float(draws) if size is None else draws
