"""Gaussian states of light and the linear-optical maps acting on them.

States carry only fluctuation moments (``<da da>`` and ``<da^dag da>`` with
``da = a - <a>``); the commutator is supplied by the moment engine. Coherent
states therefore have all-zero moment matrices.
"""

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from holosim.errors import ContractViolation, DomainError

UNITARY_TOL = 1e-12
MOMENT_TOL = 1e-10


def _frozen(values, shape: Optional[Tuple[int, ...]] = None) -> np.ndarray:
    array = np.array(values, dtype=complex, copy=True)
    if shape is not None:
        array = array.reshape(shape)
    array.setflags(write=False)
    return array


def _check_non_negative(name: str, value: float) -> float:
    value = float(value)
    if not np.isfinite(value) or value < 0:
        raise DomainError(f"{name} must be a finite number >= 0, got {value}")
    return value


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Displacement and fluctuation moments of ``num_modes`` bosonic modes.

    Attributes:
        num_modes: Number of modes
        displacement: ``<a_k>`` for every mode
        moment_aa: ``<da_j da_k>`` (symmetric)
        moment_adag_a: ``<da_j^dag da_k>`` (Hermitian, non-negative diagonal)
    """

    num_modes: int
    displacement: np.ndarray
    moment_aa: np.ndarray
    moment_adag_a: np.ndarray

    def __post_init__(self):
        m = int(self.num_modes)
        if m < 1:
            raise DomainError(f"a state needs at least one mode, got {self.num_modes}")
        try:
            disp = _frozen(self.displacement, (m,))
            aa = _frozen(self.moment_aa, (m, m))
            adag_a = _frozen(self.moment_adag_a, (m, m))
        except ValueError as exc:
            raise DomainError(f"moment data does not match {m} modes: {exc}") from exc

        scale = max(1.0, float(np.abs(aa).max(initial=0.0)), float(np.abs(adag_a).max(initial=0.0)))
        if not np.allclose(aa, aa.T, rtol=0.0, atol=MOMENT_TOL * scale):
            raise DomainError("moment_aa must be symmetric")
        if not np.allclose(adag_a, adag_a.conj().T, rtol=0.0, atol=MOMENT_TOL * scale):
            raise DomainError("moment_adag_a must be Hermitian")
        if np.any(np.diag(adag_a).real < -MOMENT_TOL * scale):
            raise DomainError("moment_adag_a must have a non-negative diagonal")

        object.__setattr__(self, "num_modes", m)
        object.__setattr__(self, "displacement", disp)
        object.__setattr__(self, "moment_aa", aa)
        object.__setattr__(self, "moment_adag_a", adag_a)

    def mean_photon_number(self, mode: Optional[int] = None) -> float:
        """
        Mean photon number of one mode, or of all modes together.

        Args:
            mode: Mode index (None sums over every mode)

        Returns:
            ``<a^dag a>``
        """
        populations = np.abs(self.displacement) ** 2 + np.diag(self.moment_adag_a).real
        if mode is None:
            return float(np.sum(populations))
        self._check_mode(mode)
        return float(populations[mode])

    def two_point_matrix(self) -> np.ndarray:
        """Ordered two-point table ``<x_i x_j>`` over ``x = (da_1..da_M, da_1^dag..da_M^dag)``."""
        m = self.num_modes
        aa = self.moment_aa
        adag_a = self.moment_adag_a
        table = np.empty((2 * m, 2 * m), dtype=complex)
        table[:m, :m] = aa
        table[:m, m:] = adag_a.T + np.eye(m)
        table[m:, :m] = adag_a
        table[m:, m:] = aa.conj()
        return table

    def covariance_block(self) -> np.ndarray:
        """Hermitian matrix ``<xi xi^dag>`` with ``xi = (da, da^dag)``; PSD for physical states."""
        m = self.num_modes
        block = np.empty((2 * m, 2 * m), dtype=complex)
        block[:m, :m] = self.moment_adag_a.T + np.eye(m)
        block[:m, m:] = self.moment_aa
        block[m:, :m] = self.moment_aa.conj()
        block[m:, m:] = self.moment_adag_a
        return block

    def physicality_eigenvalues(self) -> np.ndarray:
        block = self.covariance_block()
        return np.linalg.eigvalsh(0.5 * (block + block.conj().T))

    def is_physical(self, tol: float = 1e-9) -> bool:
        eigenvalues = self.physicality_eigenvalues()
        scale = max(1.0, float(np.abs(eigenvalues).max()))
        return bool(eigenvalues.min() >= -tol * scale)

    def reduced(self, modes: Sequence[int]) -> "GaussianState":
        """Trace out every mode not listed; the kept modes appear in the given order."""
        modes = list(modes)
        for mode in modes:
            self._check_mode(mode)
        if len(set(modes)) != len(modes):
            raise DomainError(f"repeated mode in {modes}")
        index = np.ix_(modes, modes)
        return GaussianState(
            num_modes=len(modes),
            displacement=self.displacement[modes],
            moment_aa=self.moment_aa[index],
            moment_adag_a=self.moment_adag_a[index],
        )

    def extended(self, n_vacuum: int) -> "GaussianState":
        """Append ``n_vacuum`` vacuum modes after the existing ones."""
        if n_vacuum < 0:
            raise DomainError(f"cannot append {n_vacuum} modes")
        if n_vacuum == 0:
            return self
        return product_state(self, vacuum(n_vacuum))

    def _check_mode(self, mode: int):
        if not 0 <= int(mode) < self.num_modes:
            raise DomainError(f"mode {mode} outside a {self.num_modes}-mode state")


def vacuum(num_modes: int = 1) -> GaussianState:
    zeros = np.zeros((num_modes, num_modes))
    return GaussianState(num_modes, np.zeros(num_modes), zeros, zeros)


def product_state(*states: GaussianState) -> GaussianState:
    """Direct sum of independent states; mode order follows the argument order."""
    if not states:
        raise DomainError("product_state needs at least one state")
    total = sum(s.num_modes for s in states)
    disp = np.zeros(total, dtype=complex)
    aa = np.zeros((total, total), dtype=complex)
    adag_a = np.zeros((total, total), dtype=complex)
    start = 0
    for state in states:
        stop = start + state.num_modes
        disp[start:stop] = state.displacement
        aa[start:stop, start:stop] = state.moment_aa
        adag_a[start:stop, start:stop] = state.moment_adag_a
        start = stop
    return GaussianState(total, disp, aa, adag_a)


def prepare_coherent(mu: float, theta_alpha: float = 0.0) -> GaussianState:
    """
    Single-mode coherent state with amplitude ``sqrt(mu) exp(i theta_alpha)``.

    Args:
        mu: Mean photon number
        theta_alpha: Phase in radians

    Returns:
        GaussianState with zero fluctuation moments
    """
    mu = _check_non_negative("mu", mu)
    alpha = np.sqrt(mu) * np.exp(1j * theta_alpha)
    return GaussianState(1, [alpha], [[0.0]], [[0.0]])


def prepare_squeezed_vacuum(lam: float, theta_xi: float = 0.0) -> GaussianState:
    """
    Single-mode squeezed vacuum with mean photon number ``lam = sinh^2|xi|``.

    ``<da da> = exp(2i theta_xi) sqrt(lam (1 + lam))``: with theta_alpha equal to
    theta_xi the quadrature read out against the coherent beam is the squeezed one.

    Args:
        lam: Mean photon number
        theta_xi: Squeezing phase in radians

    Returns:
        GaussianState with zero displacement
    """
    lam = _check_non_negative("lambda", lam)
    anomalous = np.exp(2j * theta_xi) * np.sqrt(lam * (1.0 + lam))
    return GaussianState(1, [0.0], [[anomalous]], [[lam]])


def prepare_twb(lam: float, theta_zeta: float = 0.0) -> GaussianState:
    """
    Two-mode squeezed vacuum (twin beam) with ``lam`` mean photons per mode.

    Args:
        lam: Mean photon number per mode
        theta_zeta: Two-mode squeezing phase in radians

    Returns:
        Two-mode GaussianState with ``<da_1 da_2> = exp(2i theta_zeta) sqrt(lam (1 + lam))``
    """
    lam = _check_non_negative("lambda", lam)
    anomalous = np.exp(2j * theta_zeta) * np.sqrt(lam * (1.0 + lam))
    aa = [[0.0, anomalous], [anomalous, 0.0]]
    adag_a = [[lam, 0.0], [0.0, lam]]
    return GaussianState(2, [0.0, 0.0], aa, adag_a)


@dataclass(frozen=True, eq=False)
class LinearOpticalMap:
    """
    Unitary acting on a few target modes plus freshly appended vacuum ancillas.

    ``matrix_u`` is the local block over ``modes + ancillas``: output operator r is
    ``sum_j matrix_u[r, j] * input_j``. Ancillas are appended after every existing
    mode of the state the map is applied to and are never reused.
    """

    matrix_u: np.ndarray
    modes: Tuple[int, ...]
    ancilla_count: int = 0

    def __post_init__(self):
        modes = tuple(int(m) for m in self.modes)
        if len(set(modes)) != len(modes):
            raise DomainError(f"map targets must be distinct, got {modes}")
        if any(m < 0 for m in modes):
            raise DomainError(f"negative mode index in {modes}")
        size = len(modes) + int(self.ancilla_count)
        try:
            block = _frozen(self.matrix_u, (size, size))
        except ValueError as exc:
            raise DomainError(f"map block does not match {size} modes: {exc}") from exc
        deviation = np.abs(block.conj().T @ block - np.eye(size)).max()
        if deviation > UNITARY_TOL:
            raise ContractViolation(f"map is not unitary (max deviation {deviation:.3e})")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "ancilla_count", int(self.ancilla_count))
        object.__setattr__(self, "matrix_u", block)

    def embed(self, num_modes: int) -> np.ndarray:
        """
        Full unitary over ``num_modes`` existing modes plus this map's ancillas.

        Args:
            num_modes: Mode count of the state the map is applied to

        Returns:
            Square matrix of size ``num_modes + ancilla_count``
        """
        if self.modes and max(self.modes) >= num_modes:
            raise DomainError(f"map targets {self.modes} but the state has {num_modes} modes")
        size = num_modes + self.ancilla_count
        full = np.eye(size, dtype=complex)
        positions = list(self.modes) + [num_modes + i for i in range(self.ancilla_count)]
        full[np.ix_(positions, positions)] = self.matrix_u
        return full


def interferometer_map(phi: float, mode_a: int, mode_b: int) -> LinearOpticalMap:
    """
    Michelson interferometer with phase difference ``phi`` between the arms.

    ``c = cos(phi/2) a - i sin(phi/2) b`` replaces mode_a and
    ``d = -cos(phi/2) b + i sin(phi/2) a`` replaces mode_b.
    """
    if mode_a == mode_b:
        raise DomainError(f"interferometer needs two distinct modes, got {mode_a} twice")
    cos = np.cos(0.5 * phi)
    sin = np.sin(0.5 * phi)
    block = [[cos, -1j * sin], [1j * sin, -cos]]
    return LinearOpticalMap(block, (mode_a, mode_b))


def beam_splitter_map(mode_a: int, mode_b: int) -> LinearOpticalMap:
    """50:50 splitter into the arms: ``a_out = (a + b)/sqrt2``, ``b_out = (b - a)/sqrt2``."""
    if mode_a == mode_b:
        raise DomainError(f"beam splitter needs two distinct modes, got {mode_a} twice")
    block = np.array([[1.0, 1.0], [-1.0, 1.0]]) / np.sqrt(2.0)
    return LinearOpticalMap(block, (mode_a, mode_b))


def loss_map(eta: float, mode: int) -> LinearOpticalMap:
    """
    Loss as a beam splitter of transmittance ``eta`` mixing in a vacuum ancilla.

    Args:
        eta: Transmission efficiency in [0, 1]
        mode: Attenuated mode

    Returns:
        Map with one ancilla: ``c -> sqrt(eta) c + sqrt(1 - eta) v``
    """
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"eta must lie in [0, 1], got {eta}")
    t = np.sqrt(eta)
    r = np.sqrt(1.0 - eta)
    return LinearOpticalMap([[t, r], [-r, t]], (mode,), ancilla_count=1)


def apply_map(state: GaussianState, optical_map: LinearOpticalMap) -> GaussianState:
    """
    Propagate a state through a linear-optical map.

    Args:
        state: Input state
        optical_map: Map whose targets exist in ``state``

    Returns:
        Output state with the map's ancillas appended
    """
    u = optical_map.embed(state.num_modes)
    extended = state.extended(optical_map.ancilla_count)
    return GaussianState(
        num_modes=extended.num_modes,
        displacement=u @ extended.displacement,
        moment_aa=u @ extended.moment_aa @ u.T,
        moment_adag_a=u.conj() @ extended.moment_adag_a @ u.T,
    )


def apply_maps(state: GaussianState, maps: Iterable[LinearOpticalMap]) -> GaussianState:
    for optical_map in maps:
        state = apply_map(state, optical_map)
    return state


def heisenberg_matrix(maps: Iterable[LinearOpticalMap], num_modes: int) -> np.ndarray:
    """
    Output operators of a map sequence written over the input modes.

    Row r holds the coefficients of output mode r over the input modes followed by
    every ancilla the sequence appends, in order of appearance.
    """
    total = np.eye(num_modes, dtype=complex)
    size = num_modes
    for optical_map in maps:
        u = optical_map.embed(size)
        if optical_map.ancilla_count:
            padded = np.eye(size + optical_map.ancilla_count, dtype=complex)
            padded[:size, :size] = total
            total = padded
        total = u @ total
        size += optical_map.ancilla_count
    return total
