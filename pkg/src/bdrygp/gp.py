"""Exact GP interpolation with the boundary mean and boundary kernels.

The posterior mean is ``mu(x) + k(x, X) K^{-1} [f(X) - mu(X)]`` and the
posterior covariance ``k(x, y) - k(x, X) K^{-1} k(X, y)``, with ``K`` the
(possibly jittered) gram matrix of the design.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import lapack, solve_triangular

from .boundary import BoundaryConfig, BoundaryKind, MeanSpec, mean_values
from .designs import FullGrid, SparseGrid
from .errors import DomainError, NumericalError, SingularModelError
from .kernels import Family, KernelParams, cross_cov, diag_cov, gram

logger = logging.getLogger(__name__)

JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)
VARIANCE_CLAMP = 1e-10
_QUERY_BLOCK_ENTRIES = 1 << 22


@dataclass(frozen=True)
class GramFactor:
    """Lower Cholesky factor of ``gram + jitter_used * I``.

    ``storage`` is Fortran-ordered; only its lower triangle is meaningful.
    """

    storage: np.ndarray
    jitter_used: float

    @property
    def n(self) -> int:
        return self.storage.shape[0]

    @property
    def lower(self) -> np.ndarray:
        return np.tril(self.storage)

    def solve_lower(self, B: np.ndarray) -> np.ndarray:
        return solve_triangular(self.storage, B, lower=True, check_finite=False)

    def solve(self, b: np.ndarray) -> np.ndarray:
        y = self.solve_lower(b)
        return solve_triangular(self.storage, y, lower=True, trans="T", check_finite=False)


@dataclass
class Diagnostics:
    clamped_variances: int = 0


@dataclass(frozen=True)
class PosteriorSummary:
    mean: float
    variance: float


@dataclass(frozen=True)
class GPModel:
    X: np.ndarray
    params: Optional[KernelParams]
    family: Family
    mean: MeanSpec
    residuals: np.ndarray
    factor: Optional[GramFactor]
    weights: np.ndarray
    diagnostics: Diagnostics = field(default_factory=Diagnostics, compare=False)

    @property
    def bounds(self) -> BoundaryConfig:
        return self.mean.bounds

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def jitter_used(self) -> float:
        return self.factor.jitter_used if self.factor is not None else 0.0

    @property
    def variance_scale(self) -> float:
        return self.params.variance if self.family is Family.BDRYMATERN else 1.0

    def kernel(self, XA, XB) -> np.ndarray:
        return cross_cov(XA, XB, self.params, self.bounds, self.family)

    def predict(self, Xq) -> np.ndarray:
        """Posterior means at every row of ``Xq``."""
        Xq = _query_points(Xq, self.bounds.dim)
        out = mean_values(Xq, self.mean)
        if self.n == 0:
            return out
        block = max(1, _QUERY_BLOCK_ENTRIES // self.n)
        for start in range(0, Xq.shape[0], block):
            stop = start + block
            out[start:stop] += self.kernel(Xq[start:stop], self.X) @ self.weights
        return out

    def variance(self, Xq) -> np.ndarray:
        """Posterior variances at every row of ``Xq``, clamping round-off negatives to zero."""
        Xq = _query_points(Xq, self.bounds.dim)
        prior = diag_cov(Xq, self.params, self.bounds, self.family)
        if self.n == 0:
            return prior
        out = np.empty(Xq.shape[0])
        block = max(1, _QUERY_BLOCK_ENTRIES // self.n)
        for start in range(0, Xq.shape[0], block):
            stop = start + block
            V = self.factor.solve_lower(self.kernel(self.X, Xq[start:stop]))
            out[start:stop] = prior[start:stop] - np.einsum("ij,ij->j", V, V)
        floor = -VARIANCE_CLAMP * self.variance_scale
        if np.any(out < floor):
            bad = int(np.argmin(out))
            raise NumericalError(
                f"posterior variance {out[bad]:.3e} at {Xq[bad].tolist()} is below round-off level"
            )
        negative = out < 0
        if np.any(negative):
            self.diagnostics.clamped_variances += int(negative.sum())
            out[negative] = 0.0
        return out


def _query_points(Xq, dim: int) -> np.ndarray:
    Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
    if Xq.shape[1] != dim:
        raise DomainError(f"query points of dimension {Xq.shape[1]} for a {dim}-d model")
    if np.any(Xq < 0.0) or np.any(Xq > 1.0) or not np.all(np.isfinite(Xq)):
        raise DomainError("query points must lie in [0, 1]^d")
    return Xq


def _design_array(design, bounds: BoundaryConfig) -> np.ndarray:
    if isinstance(design, (FullGrid, SparseGrid)):
        if design.bounds != bounds:
            raise DomainError("design and mean function use different boundary configs")
        return np.asarray(design.array())
    X = np.asarray(design, dtype=float)
    if X.size == 0:
        return np.empty((0, bounds.dim))
    return _query_points(X, bounds.dim)


def find_duplicates(X: np.ndarray) -> list[tuple[int, ...]]:
    """Groups of row indices holding identical points."""
    if X.shape[0] < 2:
        return []
    _, inverse, counts = np.unique(X, axis=0, return_inverse=True, return_counts=True)
    inverse = np.asarray(inverse).ravel()
    return [tuple(np.flatnonzero(inverse == g).tolist()) for g in np.flatnonzero(counts > 1)]


def _restore_lower(A: np.ndarray, diag: np.ndarray):
    # potrf leaves the strict upper triangle untouched; rebuild the lower from it
    n = A.shape[0]
    block = max(64, (1 << 22) // max(n, 1))
    for start in range(0, n, block):
        stop = min(start + block, n)
        A[stop:, start:stop] = A[start:stop, stop:].T
        blk = A[start:stop, start:stop]
        il = np.tril_indices(stop - start, -1)
        blk[il] = blk.T[il]
    A[np.diag_indices(n)] = diag


def factorize(K: np.ndarray, ladder: Sequence[float] = JITTER_LADDER) -> GramFactor:
    """Cholesky-factor ``K`` in place, escalating diagonal jitter until it succeeds.

    Jitter values are relative to the mean diagonal. ``K`` is consumed.
    """
    n = K.shape[0]
    A = K.T  # Fortran-ordered view of the symmetric matrix; no copy
    diag = np.diagonal(A).copy()
    scale = float(diag.mean())
    if not scale > 0:
        scale = 1.0
    for rel in ladder:
        jitter = rel * scale
        if jitter:
            A[np.diag_indices(n)] = diag + jitter
        c, info = lapack.dpotrf(A, lower=1, clean=0, overwrite_a=1)
        if info == 0:
            if c is not A:
                A = c
            if jitter:
                logger.info("gram factorized with jitter %.3e", jitter)
            return GramFactor(A, jitter)
        if info < 0:
            raise NumericalError(f"dpotrf rejected argument {-info}")
        if c is not A:
            A = c
        _restore_lower(A, diag)
    raise SingularModelError(
        f"gram matrix of {n} points is not positive definite even with jitter "
        f"{ladder[-1]:.0e} x mean diagonal (failed at pivot {info})",
        jitter=ladder[-1] * scale,
    )


def tridiag_inverse_1d(points, kind="left") -> np.ndarray:
    """Inverse of the 1-d Brownian gram matrix on sorted ``points``.

    The inverse is symmetric tridiagonal. ``kind`` selects the Brownian
    variant: ``left`` (``min``), ``full`` (bridge) or ``right`` (``1 - max``).
    """
    kind = BoundaryKind(kind)
    x = np.asarray(points, dtype=float).ravel()
    n = x.size
    if n == 0:
        raise DomainError("empty design")
    if np.any(np.diff(x) <= 0):
        raise DomainError("design points must be strictly increasing without duplicates")
    if kind is BoundaryKind.RIGHT:
        return tridiag_inverse_1d(1.0 - x[::-1], "left")[::-1, ::-1].copy()
    if kind is BoundaryKind.NONE:
        raise DomainError("no Brownian kernel exists without a known boundary")
    lo_ok = x[0] > 0.0
    hi_ok = x[-1] <= 1.0 if kind is BoundaryKind.LEFT else x[-1] < 1.0
    if not (lo_ok and hi_ok):
        raise DomainError(f"design points must lie in the open support of the {kind.value} kernel")
    left_gap = np.diff(np.concatenate(([0.0], x)))
    T = np.zeros((n, n))
    diag = 1.0 / left_gap
    if kind is BoundaryKind.FULL:
        right_gap = np.diff(np.concatenate((x, [1.0])))
        diag = diag + 1.0 / right_gap
    else:
        diag[:-1] += 1.0 / left_gap[1:]
    T[np.diag_indices(n)] = diag
    off = -1.0 / left_gap[1:]
    T[np.arange(n - 1), np.arange(1, n)] = off
    T[np.arange(1, n), np.arange(n - 1)] = off
    return T


def fit(
    design,
    params: Optional[KernelParams],
    family,
    mean: MeanSpec,
    f: Callable[[np.ndarray], np.ndarray],
    *,
    factor: Optional[GramFactor] = None,
    fast_path: bool = True,
    gram_hook: Optional[Callable[[np.ndarray], None]] = None,
) -> GPModel:
    """Condition the boundary GP on ``f`` evaluated over the design.

    ``factor`` reuses a factorization of the same design and kernel.
    ``gram_hook`` may modify the gram in place before factorization (used to
    probe sensitivity). With ``fast_path`` a 1-d Brownian model obtains its
    weights from the closed-form tridiagonal inverse.
    """
    family = Family.parse(family)
    bounds = mean.bounds
    X = _design_array(design, bounds)
    n = X.shape[0]
    dupes = find_duplicates(X)
    if dupes:
        raise SingularModelError(
            "design contains duplicate points: "
            + "; ".join(f"rows {g} at {X[g[0]].tolist()}" for g in dupes),
            duplicates=dupes,
        )
    values = np.asarray(f(X), dtype=float).reshape(n) if n else np.empty(0)
    residuals = values - mean_values(X, mean) if n else np.empty(0)
    if n == 0:
        return GPModel(X, params, family, mean, residuals, None, residuals)
    if factor is None:
        K = gram(X, params, bounds, family)
        if gram_hook is not None:
            gram_hook(K)
        factor = factorize(K)
    elif factor.n != n:
        raise DomainError(f"factorization of size {factor.n} for a design of {n} points")
    if fast_path and family is Family.BROWNIAN and bounds.dim == 1 and gram_hook is None:
        order = np.argsort(X[:, 0], kind="stable")
        T = tridiag_inverse_1d(X[order, 0], bounds.kind(0))
        weights = np.empty(n)
        weights[order] = T @ residuals[order]
    else:
        weights = factor.solve(residuals)
    return GPModel(X, params, family, mean, residuals, factor, weights)


def predict_mean(model: GPModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.bounds.dim,):
        raise DomainError(f"expected a point of dimension {model.bounds.dim}, got shape {x.shape}")
    return float(model.predict(x[None, :])[0])


def posterior_cov(model: GPModel, x, y) -> float:
    x = _query_points(x, model.bounds.dim)
    y = _query_points(y, model.bounds.dim)
    if x.shape[0] != 1 or y.shape[0] != 1:
        raise DomainError("posterior_cov takes two single points")
    prior = float(model.kernel(x, y)[0, 0])
    if model.n == 0:
        return prior
    vx = model.factor.solve_lower(model.kernel(model.X, x))
    vy = vx if np.array_equal(x, y) else model.factor.solve_lower(model.kernel(model.X, y))
    return prior - float(vx[:, 0] @ vy[:, 0])


def predict_batch(model: GPModel, points) -> list[PosteriorSummary]:
    points = list(points)
    out = []
    for i, x in enumerate(points):
        try:
            m = predict_mean(model, x)
            v = float(model.variance(np.asarray(x, dtype=float)[None, :])[0])
        except DomainError as exc:
            raise DomainError(f"query {i}: {exc}") from exc
        out.append(PosteriorSummary(m, v))
    return out
