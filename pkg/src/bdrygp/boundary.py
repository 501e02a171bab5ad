"""Known Dirichlet boundaries, projections onto them, and the boundary mean.

Dimensions are indexed from 0. A variable ``j`` in ``left`` has known values
on the hyperplane ``x_j = 0``; a variable in ``right`` has known values on
``x_j = 1``.

Boundary oracles are callables taking an ``(m, d)`` array of points lying on
known boundary hyperplanes and returning the ``m`` function values there.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, DomainError, NumericalError

logger = logging.getLogger(__name__)

Oracle = Callable[[np.ndarray], np.ndarray]

BOUNDARY_MODES = ("full", "left", "right", "none")


class BoundaryKind(enum.Enum):
    """Which endpoints of a single variable carry known boundary values."""

    FULL = "full"
    LEFT = "left"
    RIGHT = "right"
    NONE = "none"

    @classmethod
    def from_flags(cls, left: bool, right: bool) -> "BoundaryKind":
        if left and right:
            return cls.FULL
        if left:
            return cls.LEFT
        if right:
            return cls.RIGHT
        return cls.NONE

    @property
    def flags(self) -> tuple[bool, bool]:
        return (
            self in (BoundaryKind.FULL, BoundaryKind.LEFT),
            self in (BoundaryKind.FULL, BoundaryKind.RIGHT),
        )


@dataclass(frozen=True)
class BoundaryConfig:
    """Which variables have known left (``x_j = 0``) and right (``x_j = 1``) boundaries."""

    dim: int
    left: frozenset = field(default_factory=frozenset)
    right: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError(f"dimension must be >= 1, got {self.dim}")
        object.__setattr__(self, "left", frozenset(int(j) for j in self.left))
        object.__setattr__(self, "right", frozenset(int(j) for j in self.right))
        for j in self.left | self.right:
            if not 0 <= j < self.dim:
                raise ConfigError(f"boundary index {j} outside 0..{self.dim - 1}")

    @classmethod
    def from_mode(cls, mode: str, dim: int) -> "BoundaryConfig":
        """Build one of the uniform configurations ``full``, ``left``, ``right``, ``none``."""
        everything = frozenset(range(dim))
        if mode == "full":
            return cls(dim, everything, everything)
        if mode == "left":
            return cls(dim, everything, frozenset())
        if mode == "right":
            return cls(dim, frozenset(), everything)
        if mode == "none":
            return cls(dim)
        raise ConfigError(f"unknown boundary mode {mode!r}; expected one of {BOUNDARY_MODES}")

    @classmethod
    def from_kinds(cls, kinds) -> "BoundaryConfig":
        kinds = list(kinds)
        left = {j for j, k in enumerate(kinds) if k.flags[0]}
        right = {j for j, k in enumerate(kinds) if k.flags[1]}
        return cls(len(kinds), frozenset(left), frozenset(right))

    @property
    def covers_all(self) -> bool:
        return len(self.left | self.right) == self.dim

    @property
    def has_boundary(self) -> bool:
        return bool(self.left or self.right)

    def kind(self, j: int) -> BoundaryKind:
        return BoundaryKind.from_flags(j in self.left, j in self.right)

    @property
    def kinds(self) -> tuple[BoundaryKind, ...]:
        return tuple(self.kind(j) for j in range(self.dim))


def _as_point(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise DomainError(f"expected a point of dimension {dim}, got shape {x.shape}")
    if np.any(x < 0.0) or np.any(x > 1.0) or not np.all(np.isfinite(x)):
        raise DomainError(f"point {x.tolist()} lies outside [0, 1]^{dim}")
    return x


def project(x, bounds: BoundaryConfig) -> np.ndarray:
    """Project ``x`` onto every known boundary hyperplane.

    Returns an ``(m, d)`` array holding the distinct projections, left
    projections first (by variable), then right projections. Exact duplicates
    are dropped, keeping the first occurrence.
    """
    x = _as_point(x, bounds.dim)
    out = []
    for j in sorted(bounds.left):
        p = x.copy()
        p[j] = 0.0
        out.append(p)
    for j in sorted(bounds.right):
        p = x.copy()
        p[j] = 1.0
        out.append(p)
    unique = []
    seen = set()
    for p in out:
        key = tuple(p.tolist())
        if key not in seen:
            seen.add(key)
            unique.append(p)
    if not unique:
        return np.empty((0, bounds.dim))
    return np.array(unique)


def is_on_known_boundary(x, bounds: BoundaryConfig) -> bool:
    x = np.asarray(x, dtype=float)
    return any(x[j] == 0.0 for j in bounds.left) or any(x[j] == 1.0 for j in bounds.right)


def on_known_boundary_mask(X: np.ndarray, bounds: BoundaryConfig) -> np.ndarray:
    """Row-wise :func:`is_on_known_boundary` for an ``(n, d)`` array."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    mask = np.zeros(X.shape[0], dtype=bool)
    for j in bounds.left:
        mask |= X[:, j] == 0.0
    for j in bounds.right:
        mask |= X[:, j] == 1.0
    return mask


def wendland(X1: np.ndarray, X2: np.ndarray, nu: int) -> np.ndarray:
    """Truncated power kernel ``max(1 - |x1 - x2|, 0) ** nu`` between two point sets."""
    X1 = np.atleast_2d(X1)
    X2 = np.atleast_2d(X2)
    r = np.sqrt(((X1[:, None, :] - X2[None, :, :]) ** 2).sum(axis=-1))
    return np.maximum(1.0 - r, 0.0) ** nu


def default_wendland_exponent(dim: int) -> int:
    return dim // 2 + 1


@dataclass(frozen=True)
class MeanSpec:
    """Boundary-interpolating mean function.

    ``jitter`` is relative: the projected gram receives
    ``jitter * trace / size`` on its diagonal before solving.
    """

    bounds: BoundaryConfig
    oracle: Optional[Oracle] = None
    wendland_exponent: Optional[int] = None
    jitter: float = 1e-10

    def __post_init__(self):
        nu = self.wendland_exponent
        if nu is None:
            nu = default_wendland_exponent(self.bounds.dim)
            object.__setattr__(self, "wendland_exponent", nu)
        if int(nu) != nu or nu < default_wendland_exponent(self.bounds.dim):
            raise ConfigError(
                f"Wendland exponent {nu} is not positive definite in dimension "
                f"{self.bounds.dim}; need an integer >= {default_wendland_exponent(self.bounds.dim)}"
            )
        if self.jitter < 0:
            raise ConfigError("jitter must be non-negative")
        if self.bounds.has_boundary and self.oracle is None:
            raise ConfigError("a boundary oracle is required when boundaries are known")

    @property
    def no_boundary(self) -> bool:
        """True when no boundary is known and the mean is identically zero."""
        return not self.bounds.has_boundary


def mean_function(x, spec: MeanSpec) -> float:
    """Interpolate known boundary values at the projections of ``x``."""
    x = _as_point(x, spec.bounds.dim)
    if spec.no_boundary:
        return 0.0
    P = project(x, spec.bounds)
    K = wendland(P, P, spec.wendland_exponent)
    m = K.shape[0]
    K[np.diag_indices(m)] += spec.jitter * np.trace(K) / m
    try:
        c = np.linalg.solve(K, np.asarray(spec.oracle(P), dtype=float))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"projected gram at {x.tolist()} is singular (condition {np.linalg.cond(K):.3e})"
        ) from exc
    cond = np.linalg.cond(K)
    if not math.isfinite(cond) or cond > 1e14:
        raise NumericalError(f"projected gram at {x.tolist()} is ill-conditioned (condition {cond:.3e})")
    return float(wendland(x[None, :], P, spec.wendland_exponent)[0] @ c)


def mean_values(X, spec: MeanSpec) -> np.ndarray:
    """Evaluate the mean at every row of an ``(n, d)`` array."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if spec.no_boundary:
        return np.zeros(X.shape[0])
    return np.array([mean_function(x, spec) for x in X])
