"""Finite-difference helpers."""

from __future__ import annotations

from typing import Callable

import numpy as np


def central_diff(f: Callable[[float], np.ndarray], h: float, richardson: bool = False) -> np.ndarray:
    """d/dt f(t) at t = 0 by central differences, optionally Richardson-extrapolated."""
    d1 = (np.asarray(f(h)) - np.asarray(f(-h))) / (2 * h)
    if not richardson:
        return d1
    h2 = h / 2
    d2 = (np.asarray(f(h2)) - np.asarray(f(-h2))) / (2 * h2)
    return (4 * d2 - d1) / 3


def directional(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, v: np.ndarray, h: float, richardson: bool = True) -> np.ndarray:
    x = np.asarray(x, float)
    v = np.asarray(v, float)
    return central_diff(lambda t: f(x + t * v), h, richardson)


def jacobian(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float, richardson: bool = True) -> np.ndarray:
    x = np.asarray(x, float)
    cols = [directional(f, x, e, h, richardson) for e in np.eye(x.size)]
    return np.stack(cols, axis=-1)
