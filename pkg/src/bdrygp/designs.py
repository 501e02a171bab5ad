"""Full-grid and sparse-grid designs on ``[0, 1]^d`` with exact dyadic points.

Every coordinate is stored as a pair ``(level, index)`` meaning
``index * 2**-level``, reduced so that the index is odd or the level is 0.
Floats are produced only through :meth:`FullGrid.array` and
:meth:`SparseGrid.array`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .boundary import BoundaryConfig
from .errors import ConfigError, DomainError


def canonical(level: int, index: int) -> tuple[int, int]:
    """Reduce a dyadic coordinate ``index * 2**-level`` to its canonical pair."""
    if level < 0:
        raise DomainError(f"negative level {level}")
    while level > 0 and index % 2 == 0:
        index //= 2
        level -= 1
    return level, index


def coord_value(level: int, index: int) -> float:
    return math.ldexp(index, -level)


class MultiIndex(tuple):
    """Tuple of non-negative per-dimension levels."""

    def __new__(cls, levels: Sequence[int]):
        levels = tuple(int(a) for a in levels)
        if any(a < 0 for a in levels):
            raise DomainError(f"multi-index {levels} has a negative component")
        return super().__new__(cls, levels)

    @property
    def total(self) -> int:
        """The component sum ``|alpha|``."""
        return sum(self)

    @property
    def max(self) -> int:
        return max(self) if self else 0


@dataclass(frozen=True, order=False)
class DyadicPoint:
    """A point of ``[0, 1]^d`` whose coordinates are canonical dyadic pairs."""

    coords: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for level, index in self.coords:
            if (level, index) != canonical(level, index):
                raise DomainError(f"coordinate {(level, index)} is not canonical")
            if not 0 <= index <= (1 << level):
                raise DomainError(f"coordinate {(level, index)} lies outside [0, 1]")

    @classmethod
    def from_pairs(cls, pairs) -> "DyadicPoint":
        return cls(tuple(canonical(a, b) for a, b in pairs))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def fractions(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(b, 1 << a) for a, b in self.coords)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(coord_value(a, b) for a, b in self.coords)

    def sort_key(self) -> tuple[Fraction, ...]:
        return self.fractions

    def __lt__(self, other: "DyadicPoint") -> bool:
        return self.sort_key() < other.sort_key()


def index_range(alpha_j: int, j: int, bounds: BoundaryConfig) -> tuple[int, int]:
    """Inclusive index range of dimension ``j`` at level ``alpha_j``; may be empty."""
    if alpha_j < 0:
        raise DomainError(f"negative level {alpha_j}")
    lo = 1 if j in bounds.left else 0
    hi = (1 << alpha_j) - (1 if j in bounds.right else 0)
    return lo, hi


def _points_array(points: Sequence[DyadicPoint], dim: int) -> np.ndarray:
    if not points:
        return np.empty((0, dim))
    return np.array([p.values for p in points], dtype=float)


@dataclass(frozen=True)
class FullGrid:
    alpha: MultiIndex
    bounds: BoundaryConfig
    points: tuple[DyadicPoint, ...]

    @property
    def mesh(self) -> tuple[float, ...]:
        return tuple(math.ldexp(1.0, -a) for a in self.alpha)

    @property
    def dim(self) -> int:
        return self.bounds.dim

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def _array(self) -> np.ndarray:
        arr = _points_array(self.points, self.dim)
        arr.setflags(write=False)
        return arr

    def array(self) -> np.ndarray:
        return self._array


def full_grid(alpha, bounds: BoundaryConfig) -> FullGrid:
    """Cartesian product of the per-dimension index ranges, in lexicographic order."""
    alpha = MultiIndex(alpha)
    if len(alpha) != bounds.dim:
        raise DomainError(f"multi-index of length {len(alpha)} for a {bounds.dim}-d boundary config")
    axes = []
    for j, a in enumerate(alpha):
        lo, hi = index_range(a, j, bounds)
        axes.append([canonical(a, b) for b in range(lo, hi + 1)])
    points = tuple(DyadicPoint(c) for c in itertools.product(*axes))
    return FullGrid(alpha, bounds, points)


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ``parts``-tuples of non-negative integers summing to ``total``, lexicographically."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class SparseGrid:
    level: int
    dim: int
    bounds: BoundaryConfig
    points: tuple[DyadicPoint, ...]
    component_grids: tuple[MultiIndex, ...]

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def _array(self) -> np.ndarray:
        arr = _points_array(self.points, self.dim)
        arr.setflags(write=False)
        return arr

    def array(self) -> np.ndarray:
        return self._array


def sparse_grid_indices(k: int, d: int) -> list[MultiIndex]:
    """Multi-indices ``alpha`` with ``k <= |alpha| <= k + d - 1``."""
    return [MultiIndex(a) for total in range(k, k + d) for a in compositions(total, d)]


def sparse_grid(k: int, d: int, bounds: BoundaryConfig) -> SparseGrid:
    """Deduplicated union of the full grids with ``k <= |alpha| <= k + d - 1``."""
    if k < 1:
        raise ConfigError(f"sparse-grid level must be >= 1, got {k}")
    if d != bounds.dim:
        raise DomainError(f"dimension {d} does not match boundary config of dimension {bounds.dim}")
    alphas = sparse_grid_indices(k, d)
    # per (dimension, level) canonical coordinate lists, shared across grids
    axis_cache: dict[tuple[int, int], list[tuple[int, int]]] = {}
    seen: set[tuple[tuple[int, int], ...]] = set()
    for alpha in alphas:
        axes = []
        for j, a in enumerate(alpha):
            if (j, a) not in axis_cache:
                lo, hi = index_range(a, j, bounds)
                axis_cache[j, a] = [canonical(a, b) for b in range(lo, hi + 1)]
            axes.append(axis_cache[j, a])
        seen.update(itertools.product(*axes))
    points = sorted((DyadicPoint(c) for c in seen), key=DyadicPoint.sort_key)
    return SparseGrid(k, d, bounds, tuple(points), tuple(alphas))


def hierarchical_count(level: int, j: int, bounds: BoundaryConfig) -> int:
    """Number of points a dimension gains on moving to ``level`` (odd indices or level-0 ends)."""
    if level == 0:
        lo, hi = index_range(0, j, bounds)
        return max(hi - lo + 1, 0)
    return 1 << (level - 1)


def sparse_grid_size(k: int, d: int, bounds: BoundaryConfig) -> int:
    """Point count of ``sparse_grid(k, d, bounds)`` without enumerating the points."""
    n_max = k + d - 1
    total = 0
    for s in range(n_max + 1):
        for alpha in compositions(s, d):
            prod = 1
            for j, a in enumerate(alpha):
                prod *= hierarchical_count(a, j, bounds)
                if prod == 0:
                    break
            total += prod
    return total
