"""Discrete differential operators on rectangular grids with Neumann boundaries.

Conventions used throughout the package:

* A *scalar grid* is a 2-D ``float64`` array of shape ``(M, N)``. The first
  axis is the row direction ``i``, the second the column direction ``j``.
* A *vector field* is a ``float64`` array of shape ``(2, M, N)``. Component
  ``0`` (called ``x``) points along the row direction, component ``1``
  (called ``y``) along the column direction. Keeping ``x`` bound to rows
  removes the usual transposition ambiguity.

``grad_forward`` uses one-sided forward differences that vanish on the last
row/column; ``div_backward`` uses the matching backward differences with the
Neumann boundary cases (value at the first index, plain difference in the
interior, negated previous value at the last index). The pair is a discrete
adjoint pair: ``<grad_forward(u), v> == -<u, div_backward(v)>`` holds to
rounding error, which several solver identities in this package rely on.

All operators are pure functions returning freshly allocated arrays.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "grad_forward",
    "div_backward",
    "laplacian",
    "inner_product",
    "magnitude",
    "regularized_magnitude",
]


def _as_scalar(u) -> NDArray[np.float64]:
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2:
        raise ValueError(f"scalar grid must be 2-D, got shape {u.shape}")
    return u


def _as_vector(v) -> NDArray[np.float64]:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 3 or v.shape[0] != 2:
        raise ValueError(f"vector field must have shape (2, M, N), got {v.shape}")
    return v


def grad_forward(u) -> NDArray[np.float64]:
    """Forward-difference gradient of a scalar grid.

    Parameters
    ----------
    u : array_like, shape (M, N)

    Returns
    -------
    ndarray, shape (2, M, N)
        Component 0 holds ``u[i+1, j] - u[i, j]`` (zero on the last row),
        component 1 holds ``u[i, j+1] - u[i, j]`` (zero on the last column).
    """
    u = _as_scalar(u)
    out = np.zeros((2,) + u.shape, dtype=np.float64)
    out[0, :-1, :] = u[1:, :] - u[:-1, :]
    out[1, :, :-1] = u[:, 1:] - u[:, :-1]
    return out


def div_backward(v) -> NDArray[np.float64]:
    """Backward-difference divergence of a vector field.

    The boundary handling is the discrete adjoint of :func:`grad_forward`:
    first row/column keeps the component value, interior takes the backward
    difference, and the last row/column contributes the negated previous
    value. Axes of length one contribute nothing (their forward gradient is
    identically zero).

    Parameters
    ----------
    v : array_like, shape (2, M, N)

    Returns
    -------
    ndarray, shape (M, N)
    """
    v = _as_vector(v)
    vx, vy = v[0], v[1]
    m, n = vx.shape
    out = np.zeros((m, n), dtype=np.float64)
    if m > 1:
        out[0, :] += vx[0, :]
        out[1:-1, :] += vx[1:-1, :] - vx[:-2, :]
        out[-1, :] -= vx[-2, :]
    if n > 1:
        out[:, 0] += vy[:, 0]
        out[:, 1:-1] += vy[:, 1:-1] - vy[:, :-2]
        out[:, -1] -= vy[:, -2]
    return out


def laplacian(u) -> NDArray[np.float64]:
    """Composed Laplacian ``div_backward(grad_forward(u))``.

    Deliberately defined as the literal composition (never as a separate
    5-point stencil) so identities between solvers that mix the two
    operators hold bit-for-bit.
    """
    return div_backward(grad_forward(u))


def inner_product(a, b) -> float:
    """Euclidean inner product of two scalar grids or two vector fields.

    Sums pointwise products over every entry (both components for vector
    fields). Raises ``ValueError`` on shape mismatch, which always indicates
    a caller bug.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.ndim == 2:
        pass
    elif a.ndim == 3 and a.shape[0] == 2:
        pass
    else:
        raise ValueError(f"expected (M, N) or (2, M, N) arrays, got {a.shape}")
    return float(np.sum(a * b))


def magnitude(v) -> NDArray[np.float64]:
    """Pointwise Euclidean length ``sqrt(vx**2 + vy**2)`` of a vector field."""
    v = _as_vector(v)
    return np.sqrt(v[0] * v[0] + v[1] * v[1])


def regularized_magnitude(v, epsilon: float) -> NDArray[np.float64]:
    """Smoothed length ``sqrt(vx**2 + vy**2 + epsilon)`` of a vector field.

    Strictly positive, so it is safe as a denominator, and smooth in ``v``:
    near zero it levels off at ``sqrt(epsilon)`` instead of developing the
    steep 1/epsilon slope an additive floor would have. Every normalization
    inside the solvers and the curvature diagnostic uses this one definition.
    """
    v = _as_vector(v)
    return np.sqrt(v[0] * v[0] + v[1] * v[1] + epsilon)
