"""Two-interferometer holometer: observables, signal coefficient and uncertainty budget.

Input modes are laid out as ``[a1, a2, b1, b2]``: the ``a`` ports carry vacuum
(classical), squeezed vacua or the twin beam, the ``b`` ports the coherent
beams. Interferometer k mixes ``a_k`` and ``b_k``; its outputs ``c_k`` and
``d_k`` take the places of ``a_k`` and ``b_k``. Loss ancillas follow the four
input modes in the order the monitored ports are attenuated.

Observables are assembled from per-interferometer centered factors
``X_k(phi_k)``: the photon-number difference ``N_ck - N_dk`` for
PRODUCT_OF_DIFFERENCES and ``N_ck`` for SQUARED_DIFFERENCE, minus the mean at
the central phase.
"""

import logging
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property, lru_cache
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from holosim.errors import ContractViolation, DomainError, InsensitiveConfigurationError
from holosim.optics.gaussian_core import (
    GaussianState,
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
from holosim.optics.wick_moments import (
    FormPolynomial,
    LinearForm,
    TwoPointTable,
    covariance,
    real_expectation,
    variance,
)
from holosim.utils.numerics import DEFAULT_STEP, derivative, extrapolated_stencil, mixed_derivative, mixed_stencil
from holosim.utils.parallel import ordered_map

logger = logging.getLogger(__name__)

HBAR = 1.0546e-34
SPEED_OF_LIGHT = 2.998e8

MODE_A1, MODE_A2, MODE_B1, MODE_B2 = 0, 1, 2, 3
PORTS = {"c1": MODE_A1, "c2": MODE_A2, "d1": MODE_B1, "d2": MODE_B2}

SIGNAL_RTOL = 1e-10
NEGATIVE_RTOL = 1e-9
FACTOR_CACHE_SIZE = 256

HIGH_RESOURCE_MU = 1e9
HIGH_RESOURCE_LAMBDA = 1e3


class Family(str, Enum):
    CL = "CL"
    SQ = "SQ"
    TWB = "TWB"


class ObservableKind(str, Enum):
    PRODUCT_OF_DIFFERENCES = "product"
    SQUARED_DIFFERENCE = "squared"


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value}")
    return value


@dataclass(frozen=True)
class HolometerConfig:
    """
    One holometer setting.

    Attributes:
        family: Input family (CL, SQ or TWB)
        mu: Coherent mean photon number per interferometer
        lam: Squeezed or twin-beam mean photon number per mode
        theta_alpha: Coherent phase (rad)
        theta_sq: Squeezing phase of the SQ or TWB input (rad)
        phi0_1: Central phase of interferometer 1 (rad)
        phi0_2: Central phase of interferometer 2 (rad)
        eta: Detection efficiency in [0, 1]
    """

    family: Family
    mu: float
    lam: float = 0.0
    theta_alpha: float = 0.0
    theta_sq: float = 0.0
    phi0_1: float = math.pi / 2
    phi0_2: float = math.pi / 2
    eta: float = 1.0

    def __post_init__(self):
        try:
            family = Family(self.family)
        except ValueError as exc:
            raise DomainError(f"unknown family {self.family!r}") from exc
        object.__setattr__(self, "family", family)
        for name in ("mu", "lam", "theta_alpha", "theta_sq", "phi0_1", "phi0_2", "eta"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if self.mu < 0 or self.lam < 0:
            raise DomainError(f"photon numbers must be >= 0, got mu={self.mu}, lambda={self.lam}")
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"eta must lie in [0, 1], got {self.eta}")
        if family is Family.CL and self.lam != 0.0:
            logger.debug("classical configuration ignores lambda=%g", self.lam)
            object.__setattr__(self, "lam", 0.0)

    @classmethod
    def default(cls, family, mu: float, lam: float = 0.0, eta: float = 1.0, **kwargs) -> "HolometerConfig":
        """Configuration at the family's optimal working point (pi/2 for CL/SQ, 0 for TWB)."""
        phi0 = 0.0 if Family(family) is Family.TWB else math.pi / 2
        kwargs.setdefault("phi0_1", phi0)
        kwargs.setdefault("phi0_2", phi0)
        return cls(family=family, mu=mu, lam=lam, eta=eta, **kwargs)

    def replace(self, **changes) -> "HolometerConfig":
        return replace(self, **changes)

    def classical(self) -> "HolometerConfig":
        """Coherent-only baseline with the same mu, eta and coherent phase."""
        return replace(self, family=Family.CL, lam=0.0, phi0_1=math.pi / 2, phi0_2=math.pi / 2)

    @property
    def centers(self) -> Tuple[float, float]:
        return (self.phi0_1, self.phi0_2)

    def input_state(self) -> GaussianState:
        """Four-mode input ``[a1, a2, b1, b2]``."""
        if self.family is Family.CL:
            signal = vacuum(2)
        elif self.family is Family.SQ:
            signal = product_state(
                prepare_squeezed_vacuum(self.lam, self.theta_sq),
                prepare_squeezed_vacuum(self.lam, self.theta_sq),
            )
        else:
            signal = prepare_twb(self.lam, self.theta_sq)
        coherent = prepare_coherent(self.mu, self.theta_alpha)
        return product_state(signal, coherent, coherent)


@dataclass(frozen=True)
class ObservableSpec:
    """Which correlation observable the two interferometers feed."""

    kind: ObservableKind

    def __post_init__(self):
        object.__setattr__(self, "kind", ObservableKind(self.kind))

    @classmethod
    def for_family(cls, family) -> "ObservableSpec":
        if Family(family) is Family.TWB:
            return cls(ObservableKind.SQUARED_DIFFERENCE)
        return cls(ObservableKind.PRODUCT_OF_DIFFERENCES)

    @property
    def monitored_ports(self) -> Tuple[str, ...]:
        if self.kind is ObservableKind.PRODUCT_OF_DIFFERENCES:
            return ("c1", "d1", "c2", "d2")
        return ("c1", "c2")

    @property
    def bandwidth(self) -> int:
        """Highest harmonic of ``<C>`` in either phase."""
        return 1 if self.kind is ObservableKind.PRODUCT_OF_DIFFERENCES else 2

    def combine(self, x1: FormPolynomial, x2: FormPolynomial) -> FormPolynomial:
        if self.kind is ObservableKind.PRODUCT_OF_DIFFERENCES:
            return x1 * x2
        z = x1 - x2
        return z * z

    def derivative_terms(self, x, dx, ddx) -> Dict[str, FormPolynomial]:
        """
        ``C`` and its phase derivatives from the factors and their derivatives.

        Args:
            x: Centered factors ``(X1, X2)``
            dx: First derivatives ``(X1', X2')``
            ddx: Second derivatives ``(X1'', X2'')``

        Returns:
            Mapping with keys ``c, c1, c2, c11, c22, c12``
        """
        x1, x2 = x
        d1, d2 = dx
        dd1, dd2 = ddx
        if self.kind is ObservableKind.PRODUCT_OF_DIFFERENCES:
            return {
                "c": x1 * x2,
                "c1": d1 * x2,
                "c2": x1 * d2,
                "c11": dd1 * x2,
                "c22": x1 * dd2,
                "c12": d1 * d2,
            }
        z = x1 - x2
        return {
            "c": z * z,
            "c1": d1 * z + z * d1,
            "c2": -(d2 * z + z * d2),
            "c11": dd1 * z + z * dd1 + (d1 * d1).scaled(2.0),
            "c22": -(dd2 * z + z * dd2) + (d2 * d2).scaled(2.0),
            "c12": -(d1 * d2 + d2 * d1),
        }


def _resolve_spec(config: HolometerConfig, spec: Optional[ObservableSpec]) -> ObservableSpec:
    return spec if spec is not None else ObservableSpec.for_family(config.family)


def _number(row: np.ndarray) -> FormPolynomial:
    return FormPolynomial.number(LinearForm.from_row(row))


class HolometerModel:
    """Heisenberg-picture evaluation of one configuration and observable."""

    def __init__(self, config: HolometerConfig, spec: ObservableSpec):
        self.config = config
        self.spec = spec
        self.state = config.input_state().extended(len(spec.monitored_ports))
        self.table = TwoPointTable(self.state)
        self._factors: "OrderedDict[Tuple[int, float], FormPolynomial]" = OrderedDict()
        self._factors_lock = threading.Lock()
        self.center_means = (
            self.raw_mean(1, config.phi0_1),
            self.raw_mean(2, config.phi0_2),
        )

    def output_rows(self, phi1: float, phi2: float) -> Dict[str, np.ndarray]:
        maps = [
            interferometer_map(phi1, MODE_A1, MODE_B1),
            interferometer_map(phi2, MODE_A2, MODE_B2),
        ]
        maps += [loss_map(self.config.eta, PORTS[port]) for port in self.spec.monitored_ports]
        matrix = heisenberg_matrix(maps, 4)
        return {port: matrix[index] for port, index in PORTS.items()}

    def raw_factor(self, k: int, phi: float) -> FormPolynomial:
        """Uncentered per-interferometer observable at phase ``phi``."""
        if k not in (1, 2):
            raise DomainError(f"interferometer index must be 1 or 2, got {k}")
        phases = (phi, self.config.phi0_2) if k == 1 else (self.config.phi0_1, phi)
        rows = self.output_rows(*phases)
        count = _number(rows[f"c{k}"])
        if self.spec.kind is ObservableKind.PRODUCT_OF_DIFFERENCES:
            return count - _number(rows[f"d{k}"])
        return count

    def raw_mean(self, k: int, phi: float) -> float:
        return real_expectation(self.raw_factor(k, phi), self.state, self.table)

    def factor(self, k: int, phi: float) -> FormPolynomial:
        """``X_k(phi)``: raw factor minus its central mean, displacements expanded out."""
        key = (k, float(phi))
        with self._factors_lock:
            cached = self._factors.get(key)
            if cached is not None:
                self._factors.move_to_end(key)
                return cached
        expanded = self.raw_factor(k, phi).fluctuation_expand(self.state) - self.center_means[k - 1]
        with self._factors_lock:
            self._factors[key] = expanded
            # least recently used phases go first
            while len(self._factors) > FACTOR_CACHE_SIZE:
                self._factors.popitem(last=False)
        return expanded

    @property
    def cached_factor_count(self) -> int:
        return len(self._factors)

    def factor_derivative(self, k: int, order: int, step: float = DEFAULT_STEP) -> FormPolynomial:
        center = self.config.centers[k - 1]
        total = FormPolynomial.constant(0.0)
        for offset, weight in extrapolated_stencil(order, step).items():
            total = total + self.factor(k, center + offset).scaled(weight)
        return total

    def observable(self, phi1: float, phi2: float) -> FormPolynomial:
        return self.spec.combine(self.factor(1, phi1), self.factor(2, phi2))

    def mean_c(self, phi1: float, phi2: float) -> float:
        return real_expectation(self.observable(phi1, phi2), self.state, self.table)

    def var_c(self, phi1: float, phi2: float) -> float:
        return variance(self.observable(phi1, phi2), self.state, self.table)

    @cached_property
    def _signal_samples(self) -> Tuple[float, float]:
        """Mixed-stencil estimate of the signal and the magnitude of its summands."""
        x0, y0 = self.config.centers
        terms = np.array([w * self.mean_c(x0 + dx, y0 + dy) for (dx, dy), w in mixed_stencil().items()])
        return float(np.sum(terms)), float(np.sum(np.abs(terms)))

    @property
    def signal_coefficient(self) -> float:
        return self._signal_samples[0]

    @property
    def signal_floor(self) -> float:
        """Below this the signal is indistinguishable from round-off in the stencil sum."""
        return SIGNAL_RTOL * self._signal_samples[1]

    @cached_property
    def derivative_terms(self) -> Dict[str, FormPolynomial]:
        centers = self.config.centers
        x = (self.factor(1, centers[0]), self.factor(2, centers[1]))
        dx = (self.factor_derivative(1, 1), self.factor_derivative(2, 1))
        ddx = (self.factor_derivative(1, 2), self.factor_derivative(2, 2))
        return self.spec.derivative_terms(x, dx, ddx)

    def expect(self, poly: FormPolynomial) -> float:
        return real_expectation(poly, self.state, self.table)

    def cov(self, poly_a: FormPolynomial, poly_b: FormPolynomial) -> float:
        return covariance(poly_a, poly_b, self.state, self.table)

    def var(self, poly: FormPolynomial) -> float:
        return variance(poly, self.state, self.table)

    @cached_property
    def phase_coefficients(self) -> Tuple[float, float, float]:
        terms = self.derivative_terms
        c = terms["c"]

        def second_moment(poly):
            mean = self.expect(poly)
            return self.var(poly) + mean * mean

        a11 = self.cov(c, terms["c11"]) + second_moment(terms["c1"])
        a22 = self.cov(c, terms["c22"]) + second_moment(terms["c2"])
        a12 = 2.0 * self.cov(c, terms["c12"]) + 2.0 * (
            self.cov(terms["c1"], terms["c2"]) + self.expect(terms["c1"]) * self.expect(terms["c2"])
        )
        return a11, a22, a12


@lru_cache(maxsize=64)
def get_model(config: HolometerConfig, spec: Optional[ObservableSpec] = None) -> HolometerModel:
    return HolometerModel(config, _resolve_spec(config, spec))


def _variance_scale(config: HolometerConfig) -> float:
    return (config.mu + config.lam + 1.0) ** 2


def _non_negative(value: float, scale: float, label: str) -> float:
    if value >= 0:
        return value
    if -value <= NEGATIVE_RTOL * max(scale, 1.0):
        logger.warning("%s is negative by %.3e (rounding); clamped to 0", label, -value)
        return 0.0
    raise ContractViolation(f"{label} is negative beyond tolerance: {value:.6e}")


def mean_c(config: HolometerConfig, spec: Optional[ObservableSpec], phi1: float, phi2: float) -> float:
    """``<C(phi1, phi2)>`` with loss on every monitored port."""
    return get_model(config, spec).mean_c(phi1, phi2)


def var_c(config: HolometerConfig, spec: Optional[ObservableSpec], phi1: float, phi2: float) -> float:
    """``Var[C(phi1, phi2)]``."""
    return get_model(config, spec).var_c(phi1, phi2)


def signal_coefficient(config: HolometerConfig, spec: Optional[ObservableSpec] = None) -> float:
    """
    Mixed phase derivative of ``<C>`` at the central phases.

    Args:
        config: Holometer configuration
        spec: Observable (None picks the family default)

    Returns:
        Signal coefficient; may be zero
    """
    return get_model(config, spec).signal_coefficient


def require_sensitive(config: HolometerConfig, spec: Optional[ObservableSpec] = None) -> float:
    """Signal coefficient, raising if it vanishes."""
    model = get_model(config, spec)
    signal = model.signal_coefficient
    if not math.isfinite(signal) or abs(signal) <= model.signal_floor:
        raise InsensitiveConfigurationError(
            f"signal coefficient {signal:.3e} vanishes for {config.family.value} "
            f"at phi0=({config.phi0_1:.6g}, {config.phi0_2:.6g}), eta={config.eta:.6g}"
        )
    return signal


def u0(config: HolometerConfig, spec: Optional[ObservableSpec] = None) -> float:
    """
    Zero-order covariance uncertainty ``sqrt(2 Var[C]) / |signal|``.

    Raises:
        InsensitiveConfigurationError: The signal coefficient vanishes
    """
    signal = require_sensitive(config, spec)
    model = get_model(config, spec)
    noise = _non_negative(model.var_c(*config.centers), _variance_scale(config), "Var[C]")
    return math.sqrt(2.0 * noise) / abs(signal)


def u0_sq_closed(mu: float, lam: float) -> float:
    """Closed-form zero-order uncertainty for squeezed inputs at pi/2, eta = 1."""
    if mu < 0 or lam < 0:
        raise DomainError(f"photon numbers must be >= 0, got mu={mu}, lambda={lam}")
    if mu == lam:
        raise DomainError("u0_sq_closed is singular at mu == lambda")
    noise = lam + mu * (1.0 + 2.0 * lam - 2.0 * math.sqrt(lam + lam * lam))
    return math.sqrt(2.0) * noise / (lam - mu) ** 2


def u0_cl_closed(mu: float) -> float:
    if mu <= 0:
        raise DomainError(f"classical uncertainty needs mu > 0, got {mu}")
    return u0_sq_closed(mu, 0.0)


def twb_signal_closed(mu: float, lam: float, dtheta: float) -> float:
    """Cross-covariance curvature of the twin-beam counts: ``-1/2 sqrt(lam(1+lam)) mu cos(2 dtheta)``."""
    return -0.5 * math.sqrt(lam * (1.0 + lam)) * mu * math.cos(2.0 * dtheta)


def twb_cross_covariance_curvature(config: HolometerConfig) -> float:
    """``d^2 Cov(N_c1, N_c2) / dphi1 dphi2`` at the central phases."""
    model = get_model(config, ObservableSpec(ObservableKind.SQUARED_DIFFERENCE))
    return mixed_derivative(
        lambda p1, p2: model.cov(model.factor(1, p1), model.factor(2, p2)),
        *config.centers,
    )


def difference_variance(config: HolometerConfig, k: int) -> float:
    """``Var(N_ck - N_dk)`` at the central phase of interferometer ``k``."""
    model = get_model(config, ObservableSpec(ObservableKind.PRODUCT_OF_DIFFERENCES))
    return model.var(model.factor(k, config.centers[k - 1]))


def single_phase_uncertainty(config: HolometerConfig, k: int = 1) -> float:
    """
    Phase uncertainty of interferometer ``k`` read on its own.

    Args:
        config: Holometer configuration
        k: Interferometer index (1 or 2)

    Returns:
        ``sqrt(Var N_k-) / |d<N_k->/dphi|``
    """
    model = get_model(config, ObservableSpec(ObservableKind.PRODUCT_OF_DIFFERENCES))
    slope = derivative(lambda phi: model.raw_mean(k, phi), config.centers[k - 1])
    if abs(slope) <= SIGNAL_RTOL * (config.mu + config.lam + 1.0):
        raise InsensitiveConfigurationError(f"interferometer {k} has zero slope at its central phase")
    return math.sqrt(max(difference_variance(config, k), 0.0)) / abs(slope)


def single_phase_closed(mu: float, lam: float) -> float:
    if mu == lam:
        raise DomainError("single-phase uncertainty is singular at mu == lambda")
    noise = lam + mu * (1.0 + 2.0 * lam - 2.0 * math.sqrt(lam + lam * lam))
    return math.sqrt(noise) / abs(mu - lam)


def phase_coefficients(config: HolometerConfig, spec: Optional[ObservableSpec] = None) -> Tuple[float, float, float]:
    """``(A11, A22, A12)``: sensitivity of ``Var[C]`` to phase second moments."""
    return get_model(config, spec).phase_coefficients


def averaged_mean_c(config: HolometerConfig, spec: Optional[ObservableSpec], noise) -> float:
    """
    ``<C>`` averaged over small phase fluctuations to second order.

    Args:
        config: Holometer configuration
        spec: Observable
        noise: Object exposing ``second_moments() -> (var1, var2, cov)``

    Returns:
        Averaged mean
    """
    var1, var2, cov12 = noise.second_moments()
    model = get_model(config, spec)
    terms = model.derivative_terms
    return (
        model.expect(terms["c"])
        + 0.5 * model.expect(terms["c11"]) * var1
        + 0.5 * model.expect(terms["c22"]) * var2
        + model.expect(terms["c12"]) * cov12
    )


def averaged_var_c(config: HolometerConfig, spec: Optional[ObservableSpec], noise) -> float:
    """``Var[C]`` including the second-order phase-noise contribution."""
    var1, var2, cov12 = noise.second_moments()
    a11, a22, a12 = phase_coefficients(config, spec)
    return var_c(config, spec, *config.centers) + a11 * var1 + a22 * var2 + a12 * cov12


def u0_ratio(config: HolometerConfig, spec: Optional[ObservableSpec] = None) -> float:
    """``U0 / U0_CL`` at the same mu and eta; NaN where either side is insensitive."""
    try:
        return u0(config, spec) / u0(config.classical())
    except InsensitiveConfigurationError:
        return float("nan")


def efficiency_sweep(
    config: HolometerConfig,
    spec: Optional[ObservableSpec],
    eta_grid: Iterable[float],
    workers: int = 1,
) -> List[Tuple[float, float]]:
    """
    Uncertainty ratio against the classical baseline over detection efficiencies.

    Args:
        config: Configuration whose eta is swept
        spec: Observable
        eta_grid: Efficiencies in [0, 1]
        workers: Thread count (row order is preserved)

    Returns:
        ``[(eta, ratio), ...]``
    """
    etas = [float(eta) for eta in eta_grid]
    for eta in etas:
        if not 0.0 <= eta <= 1.0:
            raise DomainError(f"eta must lie in [0, 1], got {eta}")
    ratios = ordered_map(lambda eta: u0_ratio(config.replace(eta=eta), spec), etas, workers)
    return list(zip(etas, ratios))


def efficiency_crossing(
    config: HolometerConfig, spec: Optional[ObservableSpec] = None, lo: float = 0.5, hi: float = 0.99
) -> float:
    """Efficiency at which the uncertainty ratio crosses 1, bracketed in ``[lo, hi]``."""

    def excess(eta):
        return u0_ratio(config.replace(eta=eta), spec) - 1.0

    f_lo, f_hi = excess(lo), excess(hi)
    if not (math.isfinite(f_lo) and math.isfinite(f_hi)) or f_lo * f_hi > 0:
        raise DomainError(f"ratio does not cross 1 between eta={lo} and eta={hi}")
    return float(brentq(excess, lo, hi, xtol=1e-8))


def high_resource_crossing(mu: float = HIGH_RESOURCE_MU, lam: float = HIGH_RESOURCE_LAMBDA) -> float:
    """Twin-beam break-even efficiency when both photon numbers are large (mu >> lam >> 1)."""
    return efficiency_crossing(HolometerConfig.default(Family.TWB, mu, lam))


def high_resource_limit() -> float:
    """``eta`` solving ``2 sqrt(5) (1 - eta) = 1``, the large-lambda limit of the crossing."""
    return 1.0 - 1.0 / (2.0 * math.sqrt(5.0))


@dataclass(frozen=True)
class RadiationPressureParams:
    """
    Mirror and beam parameters setting the radiation-pressure scale.

    Attributes:
        tau: Measurement time (s)
        mass: Mirror mass (kg)
        omega: Central angular frequency (rad/s)
    """

    tau: float = 1e-3
    mass: float = 100.0
    omega: float = 3.14e15

    def __post_init__(self):
        for name in ("tau", "mass", "omega"):
            value = _finite(name, getattr(self, name))
            if value <= 0:
                raise DomainError(f"{name} must be > 0, got {value}")
            object.__setattr__(self, name, value)

    @property
    def r_inv(self) -> float:
        return HBAR * self.omega**2 * self.tau / (SPEED_OF_LIGHT**2 * self.mass)

    @property
    def R(self) -> float:
        return 1.0 / self.r_inv

    def optical_power(self, mu: float) -> float:
        """Beam power carrying ``mu`` photons per measurement time."""
        return HBAR * self.omega * mu / self.tau


def rp_moments(config: HolometerConfig) -> Tuple[Tuple[float, float], float]:
    """
    Intra-arm photon-number difference moments driving radiation pressure.

    Args:
        config: Holometer configuration

    Returns:
        ``((<dn_1^2>, <dn_2^2>), <dn_1 dn_2>)``
    """
    state = config.input_state()
    table = TwoPointTable(state)
    matrix = heisenberg_matrix([beam_splitter_map(MODE_A1, MODE_B1), beam_splitter_map(MODE_A2, MODE_B2)], 4)
    differences = []
    for a_mode, b_mode in ((MODE_A1, MODE_B1), (MODE_A2, MODE_B2)):
        diff = _number(matrix[a_mode]) - _number(matrix[b_mode])
        differences.append(diff.fluctuation_expand(state))
    var1 = variance(differences[0], state, table)
    var2 = variance(differences[1], state, table)
    cov12 = covariance(differences[0], differences[1], state, table)
    return (var1, var2), cov12


def _rp_term(config, spec, rp: RadiationPressureParams) -> float:
    a11, a22, a12 = phase_coefficients(config, spec)
    (v1, v2), cov12 = rp_moments(config)
    r2 = rp.r_inv**2
    term = r2 * (a11 * v1 + a22 * v2 + a12 * cov12)
    scale = r2 * (abs(a11 * v1) + abs(a22 * v2) + abs(a12 * cov12))
    return _non_negative(term, scale, "radiation-pressure contribution")


def u2(config: HolometerConfig, spec: Optional[ObservableSpec], rp: RadiationPressureParams) -> float:
    """Covariance uncertainty with radiation-pressure phase noise added to ``Var[C]``."""
    signal = require_sensitive(config, spec)
    noise = _non_negative(var_c(config, spec, *config.centers), _variance_scale(config), "Var[C]")
    return math.sqrt(2.0 * (noise + _rp_term(config, spec, rp))) / abs(signal)


@dataclass(frozen=True)
class UncertaintyBudget:
    signal_coeff: float
    var_c0: float
    u0: float
    a11: float
    a22: float
    a12: float
    rp_var: Tuple[float, float]
    rp_cov: float
    u2: float


def budget(
    config: HolometerConfig, spec: Optional[ObservableSpec] = None, rp: Optional[RadiationPressureParams] = None
) -> UncertaintyBudget:
    """
    Every term of the uncertainty budget in one pass.

    Args:
        config: Holometer configuration
        spec: Observable (None picks the family default)
        rp: Radiation-pressure parameters (None uses the defaults)

    Returns:
        UncertaintyBudget
    """
    rp = rp or RadiationPressureParams()
    a11, a22, a12 = phase_coefficients(config, spec)
    rp_var, rp_cov = rp_moments(config)
    return UncertaintyBudget(
        signal_coeff=signal_coefficient(config, spec),
        var_c0=var_c(config, spec, *config.centers),
        u0=u0(config, spec),
        a11=a11,
        a22=a22,
        a12=a12,
        rp_var=rp_var,
        rp_cov=rp_cov,
        u2=u2(config, spec, rp),
    )
