"""Finite-difference fallback for fields given as plain callables."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

BLACKBOX_TOL = 1e-6
STEP_FACTOR = 1e-4


def step_for(x: np.ndarray, scale: float | None = None) -> float:
    if scale is None:
        scale = max(1.0, float(np.max(np.abs(x))) if x.size else 1.0)
    return STEP_FACTOR * scale


def partial(f: Callable, x: Sequence[float], i: int, h: float | None = None) -> np.ndarray | float:
    """Fourth-order central difference of ``f`` along coordinate ``i``."""
    x = np.asarray(x, dtype=float)
    h = step_for(x) if h is None else h
    e = np.zeros_like(x)
    e[i] = h
    f2p, f1p = np.asarray(f(x + 2 * e)), np.asarray(f(x + e))
    f1m, f2m = np.asarray(f(x - e)), np.asarray(f(x - 2 * e))
    return (-f2p + 8.0 * f1p - 8.0 * f1m + f2m) / (12.0 * h)


def jacobian(f: Callable, x: Sequence[float], h: float | None = None) -> np.ndarray:
    """Rows are output components, columns are directions."""
    x = np.asarray(x, dtype=float)
    cols = [np.atleast_1d(partial(f, x, i, h)) for i in range(x.size)]
    return np.stack(cols, axis=-1)


class BlackBoxField:
    """Component values from a callable; derivatives by finite differences."""

    def __init__(self, func: Callable, dim: int, scale: float | None = None):
        self.func = func
        self.dim = dim
        self.scale = scale

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)))

    def partial(self, x, i: int):
        x = np.asarray(x, dtype=float)
        return partial(self.func, x, i, step_for(x, self.scale))

    def jacobian(self, x):
        x = np.asarray(x, dtype=float)
        return jacobian(self.func, x, step_for(x, self.scale))


def lie_bracket_at(X: BlackBoxField, Y: BlackBoxField, x) -> np.ndarray:
    """``[X, Y](x) = DY(x) X(x) - DX(x) Y(x)``."""
    return Y.jacobian(x) @ X(x) - X.jacobian(x) @ Y(x)
