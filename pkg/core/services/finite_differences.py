"""
Central finite-difference derivatives of vectorised functions.

Used wherever a closed form is not available: expression Lagrangians,
homogeneous functions and the barrier audits.
"""

from __future__ import annotations

from collections.abc import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

FloatArray = NDArray[np.float64]
VectorFunction = Callable[[FloatArray], FloatArray]


def _steps(x: FloatArray, step: ArrayLike) -> FloatArray:
    return np.broadcast_to(np.asarray(step, dtype=float), x.shape[:-1])[..., None]


def central_gradient(f: VectorFunction, x: ArrayLike, step: ArrayLike) -> FloatArray:
    """∇f at points of shape (..., n) with per-point step; error O(step²)."""
    pts = np.asarray(x, dtype=float)
    s = _steps(pts, step)
    n = pts.shape[-1]
    grad = np.empty(pts.shape)
    for k in range(n):
        shift = s * np.eye(n)[k]
        grad[..., k] = (f(pts + shift) - f(pts - shift)) / (2.0 * s[..., 0])
    return grad


def central_hessian(f: VectorFunction, x: ArrayLike, step: ArrayLike) -> FloatArray:
    """Symmetric D²f at points of shape (..., n) by central second differences."""
    pts = np.asarray(x, dtype=float)
    s = _steps(pts, step)
    n = pts.shape[-1]
    eye = np.eye(n)
    centre = f(pts)
    s2 = s[..., 0] ** 2
    hess = np.empty((*pts.shape, n))
    for j in range(n):
        ej = s * eye[j]
        hess[..., j, j] = (f(pts + ej) - 2.0 * centre + f(pts - ej)) / s2
        for k in range(j + 1, n):
            ek = s * eye[k]
            mixed = (f(pts + ej + ek) - f(pts + ej - ek) - f(pts - ej + ek) + f(pts - ej - ek)) / (4.0 * s2)
            hess[..., j, k] = mixed
            hess[..., k, j] = mixed
    return hess
