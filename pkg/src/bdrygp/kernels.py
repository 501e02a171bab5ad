"""BdryMatérn and Brownian kernels, in one dimension and in product form.

The 1-d BdryMatérn factors are evaluated in the shifted form

    0.5 * exp(-w (b - a)) * (1 - exp(-2 w a)) * (1 - exp(-2 w (1 - b))) / (1 - exp(-2 w))

(with ``a = min(x, y)``, ``b = max(x, y)``) and its one-sided analogues, which
never overflow and keep full relative accuracy as ``w -> 0``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryConfig, BoundaryKind
from .errors import ConfigError, DomainError

# bound on entries per assembly block; keeps temporaries small next to an n x n gram
_BLOCK_ENTRIES = 1 << 22


class Family(enum.Enum):
    BDRYMATERN = "bdrymatern"
    BROWNIAN = "brownian"

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(f"unknown kernel family {value!r}") from None


@dataclass(frozen=True)
class KernelParams:
    """Per-dimension wavelengths and the overall variance."""

    omegas: tuple[float, ...]
    variance: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))
        if not self.omegas or any(not w > 0 for w in self.omegas):
            raise ConfigError(f"wavelengths must be positive, got {self.omegas}")
        if not self.variance > 0:
            raise ConfigError(f"variance must be positive, got {self.variance}")

    @classmethod
    def isotropic(cls, dim: int, omega: float = 1.0, variance: float = 1.0) -> "KernelParams":
        return cls((omega,) * dim, variance)

    @property
    def dim(self) -> int:
        return len(self.omegas)


def _check_unit(*arrays):
    for a in arrays:
        if np.any(a < 0.0) or np.any(a > 1.0) or not np.all(np.isfinite(a)):
            raise DomainError("kernel arguments must lie in [0, 1]")


def _bm1d(x, y, omega: float, kind: BoundaryKind):
    a = np.minimum(x, y)
    b = np.maximum(x, y)
    decay = np.exp(-omega * (b - a))
    if kind is BoundaryKind.NONE:
        return decay
    if kind is BoundaryKind.FULL:
        return 0.5 * decay * (-np.expm1(-2.0 * omega * a)) * (-np.expm1(-2.0 * omega * (1.0 - b))) / (
            -np.expm1(-2.0 * omega)
        )
    if kind is BoundaryKind.LEFT:
        return 0.5 * decay * (-np.expm1(-2.0 * omega * a))
    # exp(w a) sinh(w (1 - b)): carries an extra e^w relative to the mirrored left case
    return 0.5 * np.exp(omega * (1.0 - (b - a))) * (-np.expm1(-2.0 * omega * (1.0 - b)))


def _br1d(x, y, kind: BoundaryKind):
    a = np.minimum(x, y)
    b = np.maximum(x, y)
    if kind is BoundaryKind.FULL:
        return a * (1.0 - b)
    if kind is BoundaryKind.LEFT:
        return a
    if kind is BoundaryKind.RIGHT:
        return 1.0 - b
    raise ConfigError("the Brownian kernel is undefined for a variable without known boundaries")


def k1d_bdrymatern(x, y, omega: float, kind: BoundaryKind):
    """1-d BdryMatérn kernel; broadcasts over array arguments."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_unit(x, y)
    if not omega > 0:
        raise DomainError(f"wavelength must be positive, got {omega}")
    out = _bm1d(x, y, float(omega), BoundaryKind(kind))
    return float(out) if out.ndim == 0 else out


def k1d_brownian(x, y, kind: BoundaryKind):
    """1-d Brownian-bridge / Brownian-motion kernel; broadcasts over array arguments."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_unit(x, y)
    out = _br1d(x, y, BoundaryKind(kind))
    return float(out) if out.ndim == 0 else out


def _check_family(family: Family, params: KernelParams | None, bounds: BoundaryConfig):
    if family is Family.BROWNIAN:
        if not bounds.covers_all:
            raise ConfigError("the Brownian kernel needs a known boundary for every variable")
        if params is not None and params.variance != 1.0:
            raise ConfigError("the Brownian kernel carries no variance; use variance=1")
    elif params is None:
        raise ConfigError("the BdryMatérn kernel needs KernelParams")
    if params is not None and params.dim != bounds.dim:
        raise DomainError(f"{params.dim} wavelengths for a {bounds.dim}-d boundary config")


def _cross(XA: np.ndarray, XB: np.ndarray, params, bounds, family: Family) -> np.ndarray:
    out = np.ones((XA.shape[0], XB.shape[0]))
    for j, kind in enumerate(bounds.kinds):
        xa = XA[:, j][:, None]
        xb = XB[:, j][None, :]
        if family is Family.BROWNIAN:
            out *= _br1d(xa, xb, kind)
        else:
            out *= _bm1d(xa, xb, params.omegas[j], kind)
    if family is Family.BDRYMATERN:
        out *= params.variance
    return out


def _as_points(X, dim: int) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != dim:
        raise DomainError(f"points of dimension {X.shape[1]} for a {dim}-d kernel")
    _check_unit(X)
    return X


def kernel_product(x, y, params: KernelParams | None, bounds: BoundaryConfig, family="bdrymatern") -> float:
    """Product kernel between two single points."""
    family = Family.parse(family)
    _check_family(family, params, bounds)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (bounds.dim,) or y.shape != (bounds.dim,):
        raise DomainError(f"points of shapes {x.shape} and {y.shape} for a {bounds.dim}-d kernel")
    _check_unit(x, y)
    return float(_cross(x[None, :], y[None, :], params, bounds, family)[0, 0])


def cross_cov(XA, XB, params: KernelParams | None, bounds: BoundaryConfig, family="bdrymatern") -> np.ndarray:
    """Kernel matrix between two point sets, ``(len(XA), len(XB))``."""
    family = Family.parse(family)
    _check_family(family, params, bounds)
    XA = _as_points(XA, bounds.dim)
    XB = _as_points(XB, bounds.dim)
    return _cross(XA, XB, params, bounds, family)


def diag_cov(X, params: KernelParams | None, bounds: BoundaryConfig, family="bdrymatern") -> np.ndarray:
    """Prior variances ``k(x, x)`` for every row of ``X``."""
    family = Family.parse(family)
    _check_family(family, params, bounds)
    X = _as_points(X, bounds.dim)
    out = np.ones(X.shape[0])
    for j, kind in enumerate(bounds.kinds):
        if family is Family.BROWNIAN:
            out *= _br1d(X[:, j], X[:, j], kind)
        else:
            out *= _bm1d(X[:, j], X[:, j], params.omegas[j], kind)
    if family is Family.BDRYMATERN:
        out *= params.variance
    return out


def gram(points, params: KernelParams | None, bounds: BoundaryConfig, family="bdrymatern") -> np.ndarray:
    """Exactly symmetric kernel matrix over ``points``.

    The upper triangle is assembled in row blocks and mirrored, so memory
    beyond the output stays at ``O(block * n)``.
    """
    family = Family.parse(family)
    _check_family(family, params, bounds)
    X = _as_points(points, bounds.dim)
    n = X.shape[0]
    if n == 0:
        raise DomainError("gram matrix of an empty point set")
    K = np.empty((n, n))
    block = max(64, _BLOCK_ENTRIES // n)
    for start in range(0, n, block):
        stop = min(start + block, n)
        K[start:stop, start:] = _cross(X[start:stop], X[start:], params, bounds, family)
    for start in range(0, n, block):
        stop = min(start + block, n)
        K[start:stop, :start] = K[:start, start:stop].T
        blk = K[start:stop, start:stop]
        il = np.tril_indices(stop - start, -1)
        blk[il] = blk.T[il]
    return K

