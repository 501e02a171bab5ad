"""Convergence studies and GP/FEM equivalence checks."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Callable, Optional

import numpy as np

from ..boundary import BOUNDARY_MODES, BoundaryConfig, BoundaryKind, MeanSpec, mean_values
from ..designs import full_grid, sparse_grid, sparse_grid_size
from ..errors import BudgetError, ConfigError
from ..fem import SurplusSet, box_indices, combination, hierarchical_interp, lagrange_full
from ..gp import factorize, fit
from ..kernels import Family, KernelParams, gram
from .functions import FUNCTION_NAMES, TestFunction

logger = logging.getLogger(__name__)

ERROR_NORMS = ("L1", "Linf")


@dataclass(frozen=True)
class StudyConfig:
    """One convergence study: a single method swept over sparse-grid levels.

    ``design_mode`` picks the boundary mode whose index sets build the
    designs; by default it equals ``boundary_mode``.
    """

    function: str = "corner_peak"
    d: int = 3
    k_min: int = 2
    k_max: int = 6
    boundary_mode: str = "full"
    family: str = "bdrymatern"
    omega: float = 1.0
    variance: float = 1.0
    mc_points: int = 1000
    seed: int = 0
    error_norm: str = "L1"
    budget: int = 200_000
    design_mode: Optional[str] = None

    def __post_init__(self):
        if self.function not in FUNCTION_NAMES:
            raise ConfigError(f"unknown function {self.function!r}; expected one of {FUNCTION_NAMES}")
        if self.d < 1:
            raise ConfigError("d must be >= 1")
        if self.k_min < 1 or self.k_max < self.k_min:
            raise ConfigError(f"need 1 <= k_min <= k_max, got {self.k_min}..{self.k_max}")
        for mode in (self.boundary_mode, self.design_mode):
            if mode is not None and mode not in BOUNDARY_MODES:
                raise ConfigError(f"unknown boundary mode {mode!r}; expected one of {BOUNDARY_MODES}")
        family = Family.parse(self.family)
        if self.boundary_mode == "none" and family is not Family.BDRYMATERN:
            logger.info("boundary mode 'none' forces the BdryMatérn family")
            family = Family.BDRYMATERN
        object.__setattr__(self, "family", family.value)
        if family is Family.BROWNIAN and self.variance != 1.0:
            raise ConfigError("the Brownian family has no variance parameter; leave variance at 1")
        if not self.omega > 0 or not self.variance > 0:
            raise ConfigError("omega and variance must be positive")
        if self.mc_points < 1:
            raise ConfigError("mc_points must be >= 1")
        if self.error_norm not in ERROR_NORMS:
            raise ConfigError(f"unknown error norm {self.error_norm!r}; expected one of {ERROR_NORMS}")
        if self.budget < 1:
            raise ConfigError("budget must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "StudyConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def method(self) -> str:
        return f"{self.family}-{self.boundary_mode}"

    @property
    def bounds(self) -> BoundaryConfig:
        return BoundaryConfig.from_mode(self.boundary_mode, self.d)

    @property
    def design_bounds(self) -> BoundaryConfig:
        return BoundaryConfig.from_mode(self.design_mode or self.boundary_mode, self.d)

    @property
    def levels(self) -> range:
        return range(self.k_min, self.k_max + 1)

    def kernel_params(self) -> Optional[KernelParams]:
        if self.family == Family.BROWNIAN.value:
            return None
        return KernelParams.isotropic(self.d, self.omega, self.variance)


@dataclass(frozen=True)
class ErrorRow:
    method: str
    function: str
    d: int
    boundary_mode: str
    level: int
    n: int
    error_norm: str
    error: float
    wall_ms: float
    seed: int


def _slope(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.isfinite(y)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(x[ok], y[ok], 1)[0])


@dataclass
class ErrorReport:
    rows: list[ErrorRow] = field(default_factory=list)

    @classmethod
    def combine(cls, reports) -> "ErrorReport":
        out = cls()
        for r in reports:
            out.rows.extend(r.rows)
        return out

    @property
    def methods(self) -> list[str]:
        return list(dict.fromkeys(r.method for r in self.rows))

    def rows_for(self, method: str) -> list[ErrorRow]:
        return sorted((r for r in self.rows if r.method == method), key=lambda r: r.level)

    def errors(self, method: str) -> dict[int, float]:
        return {r.level: r.error for r in self.rows_for(method)}

    def slope(self, method: str) -> float:
        """Least-squares slope of ``log2(error)`` against the level."""
        rows = self.rows_for(method)
        with np.errstate(divide="ignore"):
            return _slope([r.level for r in rows], np.log2([r.error for r in rows]))

    def slope_vs_n(self, method: str) -> float:
        """Least-squares slope of ``log(error)`` against ``log(n)``."""
        rows = self.rows_for(method)
        with np.errstate(divide="ignore"):
            return _slope(np.log([r.n for r in rows]), np.log([r.error for r in rows]))


def draw_points(d: int, n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).random((n, d))


def estimate_error(predictor, truth, d: int, norm: str, mc_points: int, seed: int) -> float:
    """Monte-Carlo estimate of ``||truth - predictor||`` over uniform draws on ``[0, 1]^d``."""
    if norm not in ERROR_NORMS:
        raise ConfigError(f"unknown error norm {norm!r}")
    X = draw_points(d, mc_points, seed)
    diff = np.abs(np.asarray(truth(X), dtype=float) - np.asarray(predictor(X), dtype=float))
    return float(diff.mean() if norm == "L1" else diff.max())


def check_budget(config: StudyConfig) -> dict[int, int]:
    """Design size for every level, raising before any work if one exceeds the budget."""
    sizes = {}
    for k in config.levels:
        n = sparse_grid_size(k, config.d, config.design_bounds)
        if n > config.budget:
            raise BudgetError(k, n, config.budget)
        sizes[k] = n
    return sizes


def _factor_key(config: StudyConfig, k: int) -> tuple:
    return (config.d, config.design_mode or config.boundary_mode, config.boundary_mode, k,
            config.family, config.omega, config.variance)


def run_convergence_study(config: StudyConfig, *, factor_cache: Optional[dict] = None) -> ErrorReport:
    """Fit one model per level and record its error on a shared Monte-Carlo point set.

    ``factor_cache`` lets studies that differ only in the target function
    share gram factorizations.
    """
    check_budget(config)
    truth = TestFunction(config.function, config.d)
    bounds = config.bounds
    params = config.kernel_params()
    mean = MeanSpec(bounds, truth if bounds.has_boundary else None)
    X_mc = draw_points(config.d, config.mc_points, config.seed)
    y_mc = truth(X_mc)
    report = ErrorReport()
    for k in config.levels:
        start = time.perf_counter()
        design = sparse_grid(k, config.d, config.design_bounds)
        X = design.array()
        factor = None
        key = _factor_key(config, k)
        if factor_cache is not None:
            factor = factor_cache.get(key)
        if factor is None and len(X):
            factor = factorize(gram(X, params, bounds, config.family))
            if factor_cache is not None:
                factor_cache[key] = factor
        model = fit(X, params, config.family, mean, truth, factor=factor)
        diff = np.abs(y_mc - model.predict(X_mc))
        error = float(diff.mean() if config.error_norm == "L1" else diff.max())
        wall_ms = (time.perf_counter() - start) * 1e3
        logger.info("%s %s k=%d n=%d error=%.3e (%.0f ms)", config.method, config.function, k, len(X), error, wall_ms)
        report.rows.append(
            ErrorRow(config.method, config.function, config.d, config.boundary_mode, k, len(X),
                     config.error_norm, error, wall_ms, config.seed)
        )
    return report


def run_studies(configs, *, share_factors: bool = True) -> ErrorReport:
    cache = {} if share_factors else None
    return ErrorReport.combine(run_convergence_study(c, factor_cache=cache) for c in configs)


def equivalence_function(bounds: BoundaryConfig) -> Callable[[np.ndarray], np.ndarray]:
    """Product test function vanishing exactly on the known faces of ``bounds``.

    Per variable: ``x (1 - x)`` (full), ``x (2 - x)`` (left),
    ``(1 - x)(1 + x)`` (right).
    """
    factors = []
    for kind in bounds.kinds:
        if kind is BoundaryKind.FULL:
            factors.append(lambda x: x * (1.0 - x))
        elif kind is BoundaryKind.LEFT:
            factors.append(lambda x: x * (2.0 - x))
        elif kind is BoundaryKind.RIGHT:
            factors.append(lambda x: (1.0 - x) * (1.0 + x))
        else:
            raise ConfigError("equivalence checks need a known boundary for every variable")

    def f(X):
        X = np.atleast_2d(X)
        out = np.ones(X.shape[0])
        for j, g in enumerate(factors):
            out = out * g(X[:, j])
        return out

    return f


@dataclass(frozen=True)
class EquivalenceReport:
    passed: bool
    max_deviation: float
    tolerance: float
    deviations: dict
    n_design: int
    n_queries: int

    def summary(self) -> str:
        paths = ", ".join(f"{k}={v:.3e}" for k, v in self.deviations.items())
        status = "PASS" if self.passed else "FAIL"
        return (f"{status}: max deviation {self.max_deviation:.3e} (tolerance {self.tolerance:.3e}); "
                f"{paths}; n={self.n_design}, queries={self.n_queries}")


def run_equivalence_check(
    d: int,
    bounds: BoundaryConfig,
    seed: int = 0,
    *,
    k: Optional[int] = None,
    alpha=None,
    f: Optional[Callable] = None,
    n_points: int = 200,
    perturb: float = 0.0,
) -> EquivalenceReport:
    """Compare a Brownian-kernel GP against the finite-element interpolants.

    Give exactly one of ``k`` (sparse grid; checked against the combination
    technique and the surplus sum) or ``alpha`` (full grid; checked against
    Lagrange interpolation and the surplus sum over the box below ``alpha``).
    ``perturb`` adds that amount to one diagonal gram entry before fitting.
    """
    if (k is None) == (alpha is None):
        raise ConfigError("give exactly one of k or alpha")
    if bounds.dim != d:
        raise ConfigError(f"boundary config of dimension {bounds.dim} for d={d}")
    if not bounds.covers_all:
        raise ConfigError("equivalence holds only when every variable has a known boundary")
    f = f or equivalence_function(bounds)
    mean = MeanSpec(bounds, f)
    design = sparse_grid(k, d, bounds) if k is not None else full_grid(alpha, bounds)
    X = design.array()

    hook = None
    if perturb:
        target = int(np.argmin(np.abs(X - 0.5).sum(axis=1))) if len(X) else 0

        def hook(K):
            K[target, target] += perturb

    model = fit(design, None, Family.BROWNIAN, mean, f, gram_hook=hook)
    Q = draw_points(d, n_points, seed)
    predicted = model.predict(Q)

    def centred(P):
        return np.asarray(f(P), dtype=float) - mean_values(P, mean)

    mu_q = mean_values(Q, mean)
    if k is not None:
        paths = {
            "combination": mu_q + combination(centred, k, bounds, Q),
            "hierarchical": mu_q + hierarchical_interp(centred, k, bounds, Q),
        }
    else:
        paths = {
            "lagrange_full": mu_q + lagrange_full(centred, alpha, bounds, Q),
            "hierarchical": mu_q + SurplusSet.build(centred, box_indices(alpha), bounds)(Q),
        }
    deviations = {name: float(np.max(np.abs(predicted - v))) for name, v in paths.items()}
    max_dev = max(deviations.values())
    tol = 1e-8 * (1.0 + float(np.max(np.abs(f(Q)))))
    return EquivalenceReport(max_dev <= tol, max_dev, tol, deviations, len(X), n_points)


def with_overrides(config: StudyConfig, **overrides) -> StudyConfig:
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})
