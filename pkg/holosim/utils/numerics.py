"""Finite-difference stencils with Richardson extrapolation."""

from typing import Callable, Dict, Sequence, Tuple, Union

import numpy as np

from holosim.errors import DomainError

DEFAULT_STEP = 1e-3


def richardson_extrapolate(
    base_values: Sequence[Union[np.ndarray, float]],
    p: int,
    r: float = 2.0,
) -> Union[np.ndarray, float]:
    """
    Combine approximations taken at steps ``h, h/r, h/r^2, ...``.

    Args:
        base_values: Approximations ordered by decreasing step
        p: Order of the leading error term
        r: Step reduction factor between entries

    Returns:
        Extrapolated value (scalar or array, matching the input)
    """
    n = len(base_values)
    if n < 2:
        raise DomainError("richardson_extrapolate requires at least two base values")

    vals = [np.asarray(v) for v in base_values]
    for j in range(1, n):
        factor = r ** (p * j)
        for k in range(n - 1, j - 1, -1):
            vals[k] = (factor * vals[k] - vals[k - 1]) / (factor - 1.0)

    result = vals[-1]
    return result.item() if result.ndim == 0 else result


def richardson_weights(levels: int, p: int = 2, r: float = 2.0) -> np.ndarray:
    """Weights ``w`` with ``richardson_extrapolate(v) == sum(w * v)``."""
    return np.asarray(richardson_extrapolate(list(np.eye(levels)), p=p, r=r))


def central_stencil(order: int, step: float) -> Dict[float, float]:
    """Offset-to-weight map of the 3-point central difference of a given order."""
    if order == 1:
        return {step: 0.5 / step, -step: -0.5 / step}
    if order == 2:
        return {step: 1.0 / step**2, 0.0: -2.0 / step**2, -step: 1.0 / step**2}
    raise DomainError(f"central differences are implemented for orders 1 and 2, got {order}")


def extrapolated_stencil(order: int, step: float = DEFAULT_STEP, levels: int = 2) -> Dict[float, float]:
    """
    Central-difference stencil with Richardson extrapolation folded into the weights.

    Linear in the sampled values, so it applies to anything that supports
    addition and scalar multiplication, operator polynomials included.
    """
    weights = richardson_weights(levels)
    combined: Dict[float, float] = {}
    for level, level_weight in enumerate(weights):
        for offset, w in central_stencil(order, step / 2.0**level).items():
            combined[offset] = combined.get(offset, 0.0) + level_weight * w
    return combined


def mixed_stencil(step: float = DEFAULT_STEP, levels: int = 2) -> Dict[Tuple[float, float], float]:
    """Extrapolated stencil for the mixed second derivative ``d^2 f / dx dy``."""
    weights = richardson_weights(levels)
    combined: Dict[Tuple[float, float], float] = {}
    for level, level_weight in enumerate(weights):
        h = step / 2.0**level
        for sx in (1.0, -1.0):
            for sy in (1.0, -1.0):
                key = (sx * h, sy * h)
                combined[key] = combined.get(key, 0.0) + level_weight * sx * sy / (4.0 * h * h)
    return combined


def derivative(f: Callable[[float], float], x0: float, order: int = 1, step: float = DEFAULT_STEP) -> float:
    """First or second derivative of a scalar function."""
    return float(sum(w * f(x0 + dx) for dx, w in extrapolated_stencil(order, step).items()))


def mixed_derivative(
    f: Callable[[float, float], float], x0: float, y0: float, step: float = DEFAULT_STEP
) -> float:
    """
    ``d^2 f / dx dy`` at ``(x0, y0)`` from two levels of central differences.

    Args:
        f: Smooth function of two variables
        x0: First coordinate
        y0: Second coordinate
        step: Coarse step size

    Returns:
        Extrapolated mixed derivative
    """
    terms = [w * f(x0 + dx, y0 + dy) for (dx, dy), w in mixed_stencil(step).items()]
    return float(np.sum(terms))
