"""Piecewise-linear finite-element interpolation on full and sparse grids.

Everything here works on the *boundary-centred* function: values on known
boundary faces are taken to be zero and ``f`` is never evaluated there. To
interpolate a function with non-zero boundary data, pass ``f - mu`` and add
``mu`` back.

Evaluators map an ``(m, d)`` array of points to ``m`` values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Callable, Iterable, Iterator

import numpy as np

from .boundary import BoundaryConfig
from .designs import MultiIndex, canonical, compositions, index_range
from .errors import DomainError

Evaluator = Callable[[np.ndarray], np.ndarray]


def _hat_1d(level: int, index: int, x):
    return np.maximum(1.0 - np.abs(np.ldexp(x, level) - index), 0.0)


def hat(alpha, beta, x) -> float:
    """Tensor-product hat function centred at ``beta * 2**-alpha``.

    At level 0 the index-1 factor is ``x`` and the index-0 factor ``1 - x``.
    """
    alpha = MultiIndex(alpha)
    beta = tuple(int(b) for b in beta)
    x = np.asarray(x, dtype=float)
    if len(beta) != len(alpha) or x.shape[-1] != len(alpha):
        raise DomainError("alpha, beta and x must share a dimension")
    for a, b in zip(alpha, beta):
        if not 0 <= b <= (1 << a):
            raise DomainError(f"index {b} is invalid at level {a}")
    if np.any(x < 0) or np.any(x > 1):
        raise DomainError("hat functions are defined on [0, 1]^d")
    out = np.ones(x.shape[:-1])
    for j, (a, b) in enumerate(zip(alpha, beta)):
        out = out * _hat_1d(a, b, x[..., j])
    return float(out) if out.ndim == 0 else out


def _as_queries(x, dim: int):
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != dim:
        raise DomainError(f"query points of dimension {X.shape[1]} for a {dim}-d interpolant")
    if np.any(X < 0) or np.any(X > 1):
        raise DomainError("query points must lie in [0, 1]^d")
    return X, scalar


class CachedFunction:
    """Memoises an evaluator on grid points, keyed by canonical dyadic coordinates."""

    def __init__(self, f: Evaluator):
        self.f = f
        self.cache: dict[tuple[tuple[int, int], ...], float] = {}
        self.calls = 0

    def values(self, keys: list[tuple[tuple[int, int], ...]]) -> np.ndarray:
        missing = [key for key in dict.fromkeys(keys) if key not in self.cache]
        if missing:
            pts = np.array([[np.ldexp(b, -a) for a, b in key] for key in missing], dtype=float)
            vals = np.asarray(self.f(pts), dtype=float).reshape(len(missing))
            self.calls += len(missing)
            self.cache.update(zip(missing, vals.tolist()))
        return np.array([self.cache[key] for key in keys], dtype=float)


def nodal_tensor(f, alpha, bounds: BoundaryConfig) -> np.ndarray:
    """Values of ``f`` on every node ``beta * 2**-alpha``, ``0 <= beta_j <= 2**alpha_j``.

    Nodes on known boundary faces hold zero. ``f`` is a plain evaluator or a
    :class:`CachedFunction`.
    """
    alpha = MultiIndex(alpha)
    shape = tuple((1 << a) + 1 for a in alpha)
    V = np.zeros(shape)
    ranges = [index_range(a, j, bounds) for j, a in enumerate(alpha)]
    if any(lo > hi for lo, hi in ranges):
        return V
    axes = [range(lo, hi + 1) for lo, hi in ranges]
    sub = tuple(slice(lo, hi + 1) for lo, hi in ranges)
    sub_shape = tuple(hi - lo + 1 for lo, hi in ranges)
    if isinstance(f, CachedFunction):
        per_axis = [[canonical(a, b) for b in ax] for a, ax in zip(alpha, axes)]
        keys = list(itertools.product(*per_axis))
        V[sub] = f.values(keys).reshape(sub_shape)
    else:
        grids = np.meshgrid(*[np.ldexp(np.arange(lo, hi + 1, dtype=float), -a) for (lo, hi), a in zip(ranges, alpha)], indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        V[sub] = np.asarray(f(pts), dtype=float).reshape(sub_shape)
    return V


class FullGridInterpolant:
    """Multilinear interpolant of nodal data on the full grid of level ``alpha``."""

    def __init__(self, f, alpha, bounds: BoundaryConfig):
        self.alpha = MultiIndex(alpha)
        self.bounds = bounds
        self.values = nodal_tensor(f, self.alpha, bounds)

    def __call__(self, x):
        X, scalar = _as_queries(x, self.bounds.dim)
        d = len(self.alpha)
        cells = []
        weights = []
        for j, a in enumerate(self.alpha):
            s = np.ldexp(X[:, j], a)
            # points on a cell edge belong to the lower cell
            i = np.clip(np.ceil(s).astype(int) - 1, 0, (1 << a) - 1)
            cells.append(i)
            weights.append(s - i)
        out = np.zeros(X.shape[0])
        for corner in itertools.product((0, 1), repeat=d):
            w = np.ones(X.shape[0])
            idx = []
            for j, c in enumerate(corner):
                w = w * (weights[j] if c else 1.0 - weights[j])
                idx.append(cells[j] + c)
            out += w * self.values[tuple(idx)]
        return float(out[0]) if scalar else out


def lagrange_full(f, alpha, bounds: BoundaryConfig, x):
    """Piecewise-linear interpolant of ``f`` on the full grid ``alpha``, evaluated at ``x``."""
    return FullGridInterpolant(f, alpha, bounds)(x)


def hierarchical_indices(level: int, j: int, bounds: BoundaryConfig) -> list[int]:
    """Indices retained by the hierarchical increment of dimension ``j`` at ``level``."""
    if level == 0:
        lo, hi = index_range(0, j, bounds)
        return list(range(lo, hi + 1))
    return list(range(1, 1 << level, 2))


def _surplus_tensor(V: np.ndarray, alpha: MultiIndex) -> np.ndarray:
    C = V
    for j, a in enumerate(alpha):
        if a == 0:
            continue
        C = np.moveaxis(C, j, 0)
        C = C[1::2] - 0.5 * (C[0:-1:2] + C[2::2])
        C = np.moveaxis(C, 0, j)
    return C


def surplus(f, alpha, beta, bounds: BoundaryConfig) -> float:
    """Hierarchical surplus: the tensor stencil applied around ``beta * 2**-alpha``.

    Levels ``>= 1`` use ``[-1/2, 1, -1/2]``. At level 0 the retained endpoint
    is the only node of its increment, so its surplus is the nodal value;
    any opposite endpoint carrying a known (zero) boundary contributes nothing.
    """
    alpha = MultiIndex(alpha)
    beta = tuple(int(b) for b in beta)
    d = bounds.dim
    if len(alpha) != d or len(beta) != d:
        raise DomainError("alpha and beta must match the boundary dimension")
    axes = []
    for j, (a, b) in enumerate(zip(alpha, beta)):
        if a == 0:
            if b not in (0, 1):
                raise DomainError(f"index {b} is invalid at level 0")
            axes.append([(a, b, 1.0)])
        else:
            if b % 2 == 0 or not 0 < b < (1 << a):
                raise DomainError(f"index {b} is not hierarchical at level {a}")
            axes.append([(a, b - 1, -0.5), (a, b, 1.0), (a, b + 1, -0.5)])
    keys, weights = [], []
    for combo in itertools.product(*axes):
        w = 1.0
        key = []
        on_boundary = False
        for j, (a, b, wj) in enumerate(combo):
            assert 0 <= b <= (1 << a), "stencil left the unit cube"
            if (b == 0 and j in bounds.left) or (b == (1 << a) and j in bounds.right):
                on_boundary = True
            key.append(canonical(a, b))
            w *= wj
        if not on_boundary:
            keys.append(tuple(key))
            weights.append(w)
    if not keys:
        return 0.0
    cf = f if isinstance(f, CachedFunction) else CachedFunction(f)
    return float(np.dot(weights, cf.values(keys)))


def simplex_indices(max_total: int, d: int) -> list[MultiIndex]:
    """All multi-indices with ``0 <= |alpha| <= max_total``."""
    return [MultiIndex(a) for s in range(max_total + 1) for a in compositions(s, d)]


def box_indices(alpha) -> list[MultiIndex]:
    """All multi-indices ``alpha'`` with ``0 <= alpha' <= alpha`` componentwise."""
    return [MultiIndex(a) for a in itertools.product(*[range(x + 1) for x in alpha])]


class SurplusSet:
    """Hierarchical surpluses over a downward-closed set of multi-indices.

    ``arrays[alpha]`` holds surpluses with axis ``j`` running over odd indices
    (level ``>= 1``) or over the two endpoints 0 and 1 (level 0); endpoints on
    known boundaries hold zero and are excluded from :meth:`items`.
    """

    def __init__(self, arrays: dict, bounds: BoundaryConfig, cached: CachedFunction):
        self.arrays = arrays
        self.bounds = bounds
        self.cached = cached

    @classmethod
    def build(cls, f, alphas: Iterable, bounds: BoundaryConfig) -> "SurplusSet":
        cached = f if isinstance(f, CachedFunction) else CachedFunction(f)
        arrays = {}
        for alpha in alphas:
            alpha = MultiIndex(alpha)
            if any(a == 0 and not hierarchical_indices(0, j, bounds) for j, a in enumerate(alpha)):
                continue
            arrays[alpha] = _surplus_tensor(nodal_tensor(cached, alpha, bounds), alpha)
        return cls(arrays, bounds, cached)

    @classmethod
    def sparse(cls, f, k: int, bounds: BoundaryConfig) -> "SurplusSet":
        return cls.build(f, simplex_indices(k + bounds.dim - 1, bounds.dim), bounds)

    @property
    def alphas(self) -> list[MultiIndex]:
        return list(self.arrays)

    @property
    def max_level(self) -> int:
        return max((a.total for a in self.arrays), default=0)

    def items(self) -> Iterator[tuple[tuple[MultiIndex, tuple[int, ...]], float]]:
        for alpha, C in self.arrays.items():
            per_axis = []
            for j, a in enumerate(alpha):
                if a == 0:
                    per_axis.append([(b, b) for b in hierarchical_indices(0, j, self.bounds)])
                else:
                    per_axis.append([(p, 2 * p + 1) for p in range(1 << (a - 1))])
            for combo in itertools.product(*per_axis):
                pos = tuple(p for p, _ in combo)
                beta = tuple(b for _, b in combo)
                yield (alpha, beta), float(C[pos])

    def __len__(self) -> int:
        return sum(1 for _ in self.items())

    def component(self, alpha, x):
        """The projection onto the increment ``alpha``, evaluated at ``x``."""
        X, scalar = _as_queries(x, self.bounds.dim)
        out = self._component(MultiIndex(alpha), X)
        return float(out[0]) if scalar else out

    def _component(self, alpha: MultiIndex, X: np.ndarray) -> np.ndarray:
        C = self.arrays.get(alpha)
        if C is None:
            return np.zeros(X.shape[0])
        options = []
        for j, a in enumerate(alpha):
            xj = X[:, j]
            if a == 0:
                options.append([(np.zeros(len(xj), int), 1.0 - xj), (np.ones(len(xj), int), xj)])
            else:
                s = np.ldexp(xj, a)
                p = np.clip(np.floor(s / 2).astype(int), 0, (1 << (a - 1)) - 1)
                options.append([(p, np.maximum(1.0 - np.abs(s - (2 * p + 1)), 0.0))])
        out = np.zeros(X.shape[0])
        for combo in itertools.product(*options):
            w = np.ones(X.shape[0])
            for _, v in combo:
                w = w * v
            out += w * C[tuple(p for p, _ in combo)]
        return out

    def __call__(self, x):
        X, scalar = _as_queries(x, self.bounds.dim)
        out = np.zeros(X.shape[0])
        for alpha in self.arrays:
            out += self._component(alpha, X)
        return float(out[0]) if scalar else out


def hierarchical_interp(f, k: int, bounds: BoundaryConfig, x):
    """Sparse-grid interpolant as the sum of all surplus terms with ``|alpha| <= k + d - 1``."""
    if k < 1:
        raise DomainError(f"sparse-grid level must be >= 1, got {k}")
    return SurplusSet.sparse(f, k, bounds)(x)


@dataclass(frozen=True)
class CombinationPlan:
    """Signed full-grid terms whose sum is the sparse-grid interpolant."""

    k: int
    d: int
    terms: tuple[tuple[MultiIndex, int], ...]

    @classmethod
    def build(cls, k: int, d: int) -> "CombinationPlan":
        if k < 1 or d < 1:
            raise DomainError(f"invalid sparse-grid level {k} or dimension {d}")
        terms = []
        for j in range(d):
            weight = (-1) ** j * comb(d - 1, j)
            for alpha in compositions(k + d - 1 - j, d):
                terms.append((MultiIndex(alpha), weight))
        return cls(k, d, tuple(terms))


def combination(f, k: int, bounds: BoundaryConfig, x):
    """Sparse-grid interpolant via the alternating binomial combination of full grids."""
    plan = CombinationPlan.build(k, bounds.dim)
    X, scalar = _as_queries(x, bounds.dim)
    out = np.zeros(X.shape[0])
    for alpha, weight in plan.terms:
        out += weight * FullGridInterpolant(f, alpha, bounds)(X)
    return float(out[0]) if scalar else out
