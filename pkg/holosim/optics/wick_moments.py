"""Normally-unordered moments of Gaussian states via Wick/Isserlis expansion.

Polynomials come in two flavours. ``OperatorPolynomial`` is the readable form:
terms of ``(coefficient, ((mode, dagger), ...))`` in operator order. It compiles
into a ``FormPolynomial`` whose factors are linear forms over the input modes,
which is what the engine evaluates. Heisenberg-picture observables are built
directly as form polynomials so that large coherent amplitudes never have to be
expanded into monomials.
"""

import math
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from numbers import Number
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from holosim.errors import ContractViolation, DomainError, UnsupportedDegreeError
from holosim.optics.gaussian_core import GaussianState

Factor = Tuple[int, bool]
Monomial = Tuple[Factor, ...]

HERMITIAN_RTOL = 1e-9
MAX_DIFFERENCE_ORDER = 4
_CHUNK = 512


@dataclass(frozen=True)
class OperatorPolynomial:
    """
    Finite sum of coefficient times an ordered product of ladder operators.

    A factor ``(k, True)`` is ``a_k^dag`` and ``(k, False)`` is ``a_k``.
    """

    terms: Tuple[Tuple[complex, Monomial], ...] = ()

    @classmethod
    def constant(cls, value: complex) -> "OperatorPolynomial":
        return cls(((complex(value), ()),))

    @classmethod
    def annihilation(cls, mode: int) -> "OperatorPolynomial":
        return cls(((1.0 + 0j, ((int(mode), False),)),))

    @classmethod
    def creation(cls, mode: int) -> "OperatorPolynomial":
        return cls(((1.0 + 0j, ((int(mode), True),)),))

    @classmethod
    def number(cls, mode: int) -> "OperatorPolynomial":
        return cls.creation(mode) * cls.annihilation(mode)

    @property
    def degree(self) -> int:
        return max((len(factors) for _, factors in self.terms), default=0)

    def modes(self) -> set:
        return {mode for _, factors in self.terms for mode, _ in factors}

    def simplify(self) -> "OperatorPolynomial":
        """Collect identical monomials and drop zero coefficients."""
        collected: Dict[Monomial, complex] = {}
        for coeff, factors in self.terms:
            collected[factors] = collected.get(factors, 0j) + coeff
        return OperatorPolynomial(tuple((c, f) for f, c in collected.items() if c != 0))

    def dagger(self) -> "OperatorPolynomial":
        return OperatorPolynomial(tuple(
            (complex(coeff).conjugate(), tuple((mode, not dag) for mode, dag in reversed(factors)))
            for coeff, factors in self.terms
        ))

    def substitute(self, matrix: np.ndarray) -> "OperatorPolynomial":
        """
        Rewrite output-mode operators over input modes.

        Args:
            matrix: Heisenberg matrix; output r is ``sum_j matrix[r, j] a_j``

        Returns:
            Polynomial over the input modes, like terms collected
        """
        matrix = np.asarray(matrix, dtype=complex)
        expansions = {}
        for mode in self.modes():
            if mode >= matrix.shape[0]:
                raise DomainError(f"mode {mode} is not an output of a {matrix.shape[0]}-row map")
            row = matrix[mode]
            support = np.flatnonzero(row)
            expansions[(mode, False)] = [(row[j], (int(j), False)) for j in support]
            expansions[(mode, True)] = [(np.conj(row[j]), (int(j), True)) for j in support]

        out: List[Tuple[complex, Monomial]] = []
        for coeff, factors in self.terms:
            for choice in product(*(expansions[f] for f in factors)):
                weight = coeff
                for w, _ in choice:
                    weight *= w
                out.append((complex(weight), tuple(f for _, f in choice)))
        return OperatorPolynomial(tuple(out)).simplify()

    def compile(self, num_modes: int) -> "FormPolynomial":
        """Turn the polynomial into a form polynomial over ``num_modes`` modes."""
        forms: List[LinearForm] = []
        index: Dict[Factor, int] = {}
        terms = []
        for coeff, factors in self.terms:
            positions = []
            for mode, dag in factors:
                if not 0 <= mode < num_modes:
                    raise DomainError(f"mode {mode} outside a {num_modes}-mode state")
                key = (mode, bool(dag))
                if key not in index:
                    index[key] = len(forms)
                    forms.append(LinearForm.mode(mode, dag, num_modes))
                positions.append(index[key])
            terms.append((complex(coeff), tuple(positions)))
        return FormPolynomial(tuple(forms), tuple(terms))

    def __add__(self, other):
        other = _as_operator_polynomial(other)
        if other is None:
            return NotImplemented
        return OperatorPolynomial(self.terms + other.terms).simplify()

    __radd__ = __add__

    def __neg__(self):
        return OperatorPolynomial(tuple((-c, f) for c, f in self.terms))

    def __sub__(self, other):
        other = _as_operator_polynomial(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return OperatorPolynomial(tuple((c * other, f) for c, f in self.terms)).simplify()
        if not isinstance(other, OperatorPolynomial):
            return NotImplemented
        return OperatorPolynomial(tuple(
            (c1 * c2, f1 + f2) for c1, f1 in self.terms for c2, f2 in other.terms
        )).simplify()

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __pow__(self, power: int):
        if int(power) != power or power < 0:
            raise DomainError(f"polynomial powers must be non-negative integers, got {power}")
        result = OperatorPolynomial.constant(1.0)
        for _ in range(int(power)):
            result = result * self
        return result


def _as_operator_polynomial(value) -> Optional[OperatorPolynomial]:
    if isinstance(value, OperatorPolynomial):
        return value
    if isinstance(value, Number):
        return OperatorPolynomial.constant(value)
    return None


@dataclass(frozen=True, eq=False)
class LinearForm:
    """
    ``sum_j coeffs[j] a_j + sum_j coeffs[M + j] a_j^dag + offset``.

    A centered form stands for the same combination of fluctuation operators
    ``da = a - <a>``: its mean is zero in the state it was centered for.
    """

    coeffs: np.ndarray
    offset: complex = 0j
    centered: bool = False

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex).reshape(-1)
        if coeffs.size % 2:
            raise DomainError("linear form needs an even coefficient count")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "offset", complex(self.offset))

    @property
    def num_modes(self) -> int:
        return self.coeffs.size // 2

    @classmethod
    def mode(cls, mode: int, dagger: bool, num_modes: int) -> "LinearForm":
        coeffs = np.zeros(2 * num_modes, dtype=complex)
        coeffs[mode + (num_modes if dagger else 0)] = 1.0
        return cls(coeffs)

    @classmethod
    def from_row(cls, row: Sequence[complex], dagger: bool = False) -> "LinearForm":
        """Output operator ``sum_j row[j] a_j`` (or its adjoint)."""
        row = np.asarray(row, dtype=complex)
        zeros = np.zeros_like(row)
        if dagger:
            return cls(np.concatenate([zeros, row.conj()]))
        return cls(np.concatenate([row, zeros]))

    def dagger(self) -> "LinearForm":
        m = self.num_modes
        swapped = np.concatenate([self.coeffs[m:].conj(), self.coeffs[:m].conj()])
        return LinearForm(swapped, self.offset.conjugate(), self.centered)

    def mean(self, state: GaussianState) -> complex:
        if self.centered:
            return 0j
        m = self.num_modes
        disp = state.displacement
        return complex(self.coeffs[:m] @ disp + self.coeffs[m:] @ disp.conj()) + self.offset

    def fluctuation(self) -> "LinearForm":
        return LinearForm(self.coeffs, 0j, centered=True)

    def key(self) -> tuple:
        return (self.coeffs.tobytes(), self.offset, self.centered)


@dataclass(frozen=True, eq=False)
class FormPolynomial:
    """Sum of coefficient times an ordered product of linear forms from a shared table."""

    forms: Tuple[LinearForm, ...]
    terms: Tuple[Tuple[complex, Tuple[int, ...]], ...]

    @classmethod
    def constant(cls, value: complex) -> "FormPolynomial":
        return cls((), ((complex(value), ()),))

    @classmethod
    def from_forms(cls, *forms: LinearForm, coeff: complex = 1.0) -> "FormPolynomial":
        return cls(tuple(forms), ((complex(coeff), tuple(range(len(forms)))),))

    @classmethod
    def number(cls, form: LinearForm) -> "FormPolynomial":
        """``L^dag L`` for an output operator ``L``."""
        return cls.from_forms(form.dagger(), form)

    @property
    def num_modes(self) -> Optional[int]:
        return self.forms[0].num_modes if self.forms else None

    @property
    def degree(self) -> int:
        return max((len(idx) for _, idx in self.terms), default=0)

    def dagger(self) -> "FormPolynomial":
        return FormPolynomial(
            tuple(f.dagger() for f in self.forms),
            tuple((c.conjugate(), tuple(reversed(idx))) for c, idx in self.terms),
        )

    def scaled(self, factor: complex) -> "FormPolynomial":
        return FormPolynomial(self.forms, tuple((c * factor, idx) for c, idx in self.terms))

    def collect(self) -> "FormPolynomial":
        """
        Merge like terms: constants are summed exactly, degree-1 terms with the same
        centering are folded into a single form.
        """
        constants: List[complex] = []
        linear: Dict[bool, List[Tuple[complex, LinearForm]]] = defaultdict(list)
        higher: Dict[Tuple[int, ...], complex] = {}
        for coeff, idx in self.terms:
            if coeff == 0:
                continue
            if not idx:
                constants.append(coeff)
            elif len(idx) == 1:
                linear[self.forms[idx[0]].centered].append((coeff, self.forms[idx[0]]))
            else:
                higher[idx] = higher.get(idx, 0j) + coeff

        forms = list(self.forms)
        terms: List[Tuple[complex, Tuple[int, ...]]] = []
        if constants:
            total = _fsum_complex(constants)
            if total != 0:
                terms.append((total, ()))
        for centered, pieces in linear.items():
            coeffs = sum(c * f.coeffs for c, f in pieces)
            offset = _fsum_complex([c * f.offset for c, f in pieces])
            if np.any(coeffs != 0) or offset != 0:
                forms.append(LinearForm(coeffs, offset, centered))
                terms.append((1.0 + 0j, (len(forms) - 1,)))
        terms.extend((c, idx) for idx, c in higher.items() if c != 0)
        return FormPolynomial(tuple(forms), tuple(terms))._compact()

    def fluctuation_expand(self, state: GaussianState) -> "FormPolynomial":
        """
        Rewrite every form as ``mean + fluctuation`` and expand.

        The result holds the exact constant part, one centered linear form and
        centered higher terms, so large displacements cancel before evaluation.
        """
        _check_modes(self, state)
        means = [f.mean(state) for f in self.forms]
        centered = [f.fluctuation() for f in self.forms]
        terms: List[Tuple[complex, Tuple[int, ...]]] = []
        for coeff, idx in self.terms:
            n = len(idx)
            for mask in range(1 << n):
                weight = coeff
                kept = []
                for pos, i in enumerate(idx):
                    if mask >> pos & 1:
                        kept.append(i)
                    else:
                        weight *= means[i]
                if weight != 0:
                    terms.append((weight, tuple(kept)))
        return FormPolynomial(tuple(centered), tuple(terms)).collect()

    def _compact(self) -> "FormPolynomial":
        used = sorted({i for _, idx in self.terms for i in idx})
        if len(used) == len(self.forms):
            return self
        remap = {old: new for new, old in enumerate(used)}
        return FormPolynomial(
            tuple(self.forms[i] for i in used),
            tuple((c, tuple(remap[i] for i in idx)) for c, idx in self.terms),
        )

    def _merged_with(self, other: "FormPolynomial"):
        forms = list(self.forms)
        keys = {f.key(): i for i, f in enumerate(forms)}
        remap = []
        for form in other.forms:
            key = form.key()
            if key not in keys:
                keys[key] = len(forms)
                forms.append(form)
            remap.append(keys[key])
        other_terms = tuple((c, tuple(remap[i] for i in idx)) for c, idx in other.terms)
        return tuple(forms), other_terms

    def __add__(self, other):
        if isinstance(other, Number):
            other = FormPolynomial.constant(other)
        if not isinstance(other, FormPolynomial):
            return NotImplemented
        forms, other_terms = self._merged_with(other)
        return FormPolynomial(forms, self.terms + other_terms).collect()

    __radd__ = __add__

    def __neg__(self):
        return self.scaled(-1.0)

    def __sub__(self, other):
        if isinstance(other, Number):
            other = FormPolynomial.constant(other)
        if not isinstance(other, FormPolynomial):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Number):
            return self.scaled(other)
        if not isinstance(other, FormPolynomial):
            return NotImplemented
        forms, other_terms = self._merged_with(other)
        terms = tuple((c1 * c2, i1 + i2) for c1, i1 in self.terms for c2, i2 in other_terms)
        return FormPolynomial(forms, terms).collect()

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self.scaled(other)
        return NotImplemented


Polynomial = Union[OperatorPolynomial, FormPolynomial]


def _fsum_complex(values) -> complex:
    values = list(values)
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


def _check_modes(poly: FormPolynomial, state: GaussianState):
    for form in poly.forms:
        if form.num_modes != state.num_modes:
            raise DomainError(
                f"polynomial acts on {form.num_modes} modes but the state has {state.num_modes}"
            )


@lru_cache(maxsize=None)
def _involutions(n: int):
    """All partial pairings of ``range(n)`` grouped by pair count.

    Returns a tuple of ``(pairs, fixed)`` index arrays with shapes ``(G, k, 2)``
    and ``(G, n - 2k)``; each pair is ordered by position.
    """

    def build(items):
        if not items:
            yield [], []
            return
        first, rest = items[0], items[1:]
        for pairs, fixed in build(rest):
            yield pairs, [first] + fixed
        for j, partner in enumerate(rest):
            remaining = rest[:j] + rest[j + 1:]
            for pairs, fixed in build(remaining):
                yield [(first, partner)] + pairs, fixed

    grouped = defaultdict(list)
    for pairs, fixed in build(tuple(range(n))):
        grouped[len(pairs)].append((pairs, fixed))
    out = []
    for k in sorted(grouped):
        entries = grouped[k]
        pairs = np.array([p for p, _ in entries], dtype=int).reshape(len(entries), k, 2)
        fixed = np.array([f for _, f in entries], dtype=int).reshape(len(entries), n - 2 * k)
        out.append((pairs, fixed))
    return tuple(out)


class TwoPointTable:
    """Two-point data of one state, ready to contract form polynomials."""

    def __init__(self, state: GaussianState):
        self.state = state
        self.matrix = state.two_point_matrix()

    def evaluate(self, poly: Polynomial, with_scale: bool = False):
        """
        Expectation value of a polynomial.

        Args:
            poly: Operator or form polynomial over this state's modes
            with_scale: Also return the sum of absolute term contributions

        Returns:
            Complex expectation, or ``(value, scale)``
        """
        if isinstance(poly, OperatorPolynomial):
            poly = poly.compile(self.state.num_modes)
        _check_modes(poly, self.state)
        if not poly.terms:
            return (0j, 0.0) if with_scale else 0j

        if poly.forms:
            table = np.stack([f.coeffs for f in poly.forms])
            pairs = table @ self.matrix @ table.T
            means = np.array([f.mean(self.state) for f in poly.forms])
        else:
            pairs = np.zeros((0, 0), dtype=complex)
            means = np.zeros(0, dtype=complex)

        by_degree = defaultdict(list)
        for coeff, idx in poly.terms:
            by_degree[len(idx)].append((coeff, idx))

        contributions: List[complex] = []
        for n, group in sorted(by_degree.items()):
            coeffs = np.array([c for c, _ in group], dtype=complex)
            idx = np.array([i for _, i in group], dtype=int).reshape(len(group), n)
            values = np.concatenate([
                _term_values(pairs, means, idx[start:start + _CHUNK])
                for start in range(0, len(group), _CHUNK)
            ])
            contributions.extend((coeffs * values).tolist())

        value = _fsum_complex(contributions)
        if with_scale:
            return value, math.fsum(abs(c) for c in contributions)
        return value


def _term_values(pairs: np.ndarray, means: np.ndarray, idx: np.ndarray) -> np.ndarray:
    count, n = idx.shape
    if n == 0:
        return np.ones(count, dtype=complex)
    has_means = bool(np.any(means[idx] != 0))
    total = np.zeros(count, dtype=complex)
    for pair_pos, fixed_pos in _involutions(n):
        if fixed_pos.shape[1] and not has_means:
            continue
        value = np.ones((count, pair_pos.shape[0]), dtype=complex)
        if pair_pos.shape[1]:
            left = idx[:, pair_pos[..., 0]]
            right = idx[:, pair_pos[..., 1]]
            value = value * pairs[left, right].prod(axis=-1)
        if fixed_pos.shape[1]:
            value = value * means[idx[:, fixed_pos]].prod(axis=-1)
        total += value.sum(axis=1)
    return total


def expectation(poly: Polynomial, state: GaussianState) -> complex:
    """
    Exact ``<P>`` for a Gaussian state.

    Args:
        poly: Polynomial in ladder operators of ``state``'s modes
        state: Gaussian state

    Returns:
        Complex expectation value
    """
    return TwoPointTable(state).evaluate(poly)


def _as_form(poly: Polynomial, state: GaussianState) -> FormPolynomial:
    if isinstance(poly, OperatorPolynomial):
        return poly.compile(state.num_modes)
    return poly


def _real_mean(poly: FormPolynomial, table: TwoPointTable, label: str) -> float:
    value, scale = table.evaluate(poly, with_scale=True)
    if abs(value.imag) > HERMITIAN_RTOL * max(scale, abs(value.real), 1e-300):
        raise ContractViolation(
            f"{label} is not Hermitian: expectation {value.real:.6g}{value.imag:+.6g}i"
        )
    return value.real


def real_expectation(poly: Polynomial, state: GaussianState, table: Optional[TwoPointTable] = None) -> float:
    """``<P>`` for a Hermitian polynomial; a non-real result raises ContractViolation."""
    table = table or TwoPointTable(state)
    return _real_mean(_as_form(poly, state), table, "observable")


def variance(poly: Polynomial, state: GaussianState, table: Optional[TwoPointTable] = None) -> float:
    """
    ``<P^2> - <P>^2`` for a Hermitian polynomial.

    Args:
        poly: Hermitian polynomial
        state: Gaussian state
        table: Reusable two-point table of ``state``

    Returns:
        Real variance
    """
    table = table or TwoPointTable(state)
    poly = _as_form(poly, state)
    mean = _real_mean(poly, table, "observable")
    second = _real_mean(poly * poly, table, "squared observable")
    return second - mean * mean


def covariance(
    poly_a: Polynomial, poly_b: Polynomial, state: GaussianState, table: Optional[TwoPointTable] = None
) -> float:
    """Symmetrized ``Re<AB> - <A><B>`` for Hermitian ``A`` and ``B``."""
    table = table or TwoPointTable(state)
    poly_a = _as_form(poly_a, state)
    poly_b = _as_form(poly_b, state)
    mean_a = _real_mean(poly_a, table, "first observable")
    mean_b = _real_mean(poly_b, table, "second observable")
    symmetric = (poly_a * poly_b + poly_b * poly_a).scaled(0.5)
    return _real_mean(symmetric, table, "symmetrized product") - mean_a * mean_b


def number_difference_moment(modes: Tuple[int, int], order: int, state: GaussianState) -> float:
    """
    ``<(N_i - N_j)^order>`` for a pair of modes.

    Args:
        modes: Mode pair ``(i, j)``
        order: Moment order, 1 to 4
        state: Gaussian state

    Returns:
        Real moment
    """
    if int(order) != order or order < 1:
        raise DomainError(f"moment order must be a positive integer, got {order}")
    if order > MAX_DIFFERENCE_ORDER:
        raise UnsupportedDegreeError(
            f"number-difference moments are supported up to order {MAX_DIFFERENCE_ORDER}, got {order}"
        )
    i, j = modes
    difference = OperatorPolynomial.number(i) - OperatorPolynomial.number(j)
    return real_expectation(difference ** int(order), state)
