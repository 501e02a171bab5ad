"""Benchmark functions on ``[0, 1]^d``.

Each function is defined everywhere on the closed cube, so it also serves as
its own boundary oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import ConfigError, DomainError


def corner_peak(X: np.ndarray) -> np.ndarray:
    d = X.shape[1]
    return (1.0 + X.sum(axis=1) / d) ** (-d - 1)


def product_peak(X: np.ndarray) -> np.ndarray:
    return np.prod(1.0 / (1.0 + 10.0 * (X - 0.25) ** 2), axis=1)


def rosenbrock(X: np.ndarray) -> np.ndarray:
    head = X[:, :-1]
    centred = head - 0.5
    return 4.0 * ((head - 1.0) ** 2).sum(axis=1) + 400.0 * ((centred - 2.0 * centred**2) ** 2).sum(axis=1)


_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "corner_peak": corner_peak,
    "product_peak": product_peak,
    "rosenbrock": rosenbrock,
}

FUNCTION_NAMES = tuple(_FUNCTIONS)


@dataclass(frozen=True)
class TestFunction:
    name: str
    dim: int

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.name not in _FUNCTIONS:
            raise ConfigError(f"unknown test function {self.name!r}; expected one of {FUNCTION_NAMES}")
        if self.dim < 1:
            raise ConfigError(f"dimension must be >= 1, got {self.dim}")

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise DomainError(f"{self.name} is {self.dim}-dimensional, got points of dimension {X.shape[1]}")
        return _FUNCTIONS[self.name](X)


def eval_test_function(name: str, d: int, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (d,):
        raise DomainError(f"expected a point of dimension {d}, got shape {x.shape}")
    if np.any(x < 0) or np.any(x > 1):
        raise DomainError("test functions are evaluated on [0, 1]^d")
    return float(TestFunction(name, d)(x[None, :])[0])
