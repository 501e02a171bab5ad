"""Command-line entry point: ``bdrygp bench | equiv | predict``.

Exit codes: 0 success, 2 configuration error, 3 budget error,
4 equivalence failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..boundary import BoundaryConfig, MeanSpec
from ..designs import sparse_grid, sparse_grid_size
from ..errors import BudgetError, ConfigError, DomainError
from ..gp import fit
from .functions import TestFunction
from .report import emit_report, format_float
from .study import StudyConfig, run_equivalence_check, run_studies

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_FAILED = 4

logger = logging.getLogger("bdrygp")

# CLI flag -> StudyConfig field
_OVERRIDES = {
    "function": str, "d": int, "k_min": int, "k_max": int, "boundary_mode": str, "family": str,
    "omega": float, "variance": float, "mc_points": int, "seed": int, "error_norm": str,
    "budget": int, "design_mode": str,
}


def load_config(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


def build_configs(args) -> list[StudyConfig]:
    data = load_config(args.config) if args.config else {}
    for name in _OVERRIDES:
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    modes = data.get("boundary_mode", "full")
    if isinstance(modes, str):
        modes = [m.strip() for m in modes.split(",") if m.strip()]
    if not modes:
        raise ConfigError("no boundary mode given")
    try:
        return [StudyConfig.from_dict({**data, "boundary_mode": m}) for m in modes]
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _add_study_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file whose keys mirror the study configuration fields")
    p.add_argument("--function")
    p.add_argument("--d", type=int)
    p.add_argument("--k-min", dest="k_min", type=int)
    p.add_argument("--k-max", dest="k_max", type=int)
    p.add_argument("--boundary-mode", dest="boundary_mode", help="full, left, right or none; comma-separate to compare")
    p.add_argument("--design-mode", dest="design_mode")
    p.add_argument("--family", help="bdrymatern or brownian")
    p.add_argument("--omega", type=float)
    p.add_argument("--variance", type=float)
    p.add_argument("--mc-points", dest="mc_points", type=int)
    p.add_argument("--error-norm", dest="error_norm", help="L1 or Linf")


def _add_common_flags(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--budget", type=int)


def cmd_bench(args) -> int:
    configs = build_configs(args)
    report = run_studies(configs)
    emit_report(report, args.out, timing=args.timing)
    return EXIT_OK


def _parse_alpha(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(a) for a in text.split(","))
    except ValueError:
        raise ConfigError(f"cannot parse multi-index {text!r}") from None


def cmd_equiv(args) -> int:
    bounds = BoundaryConfig.from_mode(args.boundary_mode or "full", args.d)
    alpha = _parse_alpha(args.alpha) if args.alpha else None
    if alpha is None and args.k is None:
        raise ConfigError("give --k or --alpha")
    if args.budget is not None:
        if alpha is not None:
            n = 1
            for j, a in enumerate(alpha):
                lo = 1 if j in bounds.left else 0
                hi = (1 << a) - (1 if j in bounds.right else 0)
                n *= max(hi - lo + 1, 0)
        else:
            n = sparse_grid_size(args.k, args.d, bounds)
        if n > args.budget:
            raise BudgetError(args.k if alpha is None else alpha, n, args.budget)
    result = run_equivalence_check(
        args.d, bounds, args.seed or 0, k=args.k if alpha is None else None, alpha=alpha,
        n_points=args.points, perturb=args.perturb,
    )
    line = result.summary() + "\n"
    if args.out == "-":
        sys.stdout.write(line)
    else:
        Path(args.out).write_text(line)
    return EXIT_OK if result.passed else EXIT_FAILED


def read_points(path, d: int) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read points file {path}: {exc}") from exc
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            try:
                rows.append([float(v) for v in line.replace(",", " ").split()])
            except ValueError:
                raise ConfigError(f"cannot parse point {line!r}") from None
    if any(len(r) != d for r in rows):
        raise ConfigError(f"every point must have {d} coordinates")
    return np.array(rows, dtype=float).reshape(-1, d)


def cmd_predict(args) -> int:
    config = build_configs(args)[0]
    level = args.level if args.level is not None else config.k_max
    n = sparse_grid_size(level, config.d, config.design_bounds)
    if n > config.budget:
        raise BudgetError(level, n, config.budget)
    X = read_points(args.points, config.d)
    truth = TestFunction(config.function, config.d)
    bounds = config.bounds
    mean = MeanSpec(bounds, truth if bounds.has_boundary else None)
    design = sparse_grid(level, config.d, config.design_bounds)
    model = fit(design.array(), config.kernel_params(), config.family, mean, truth)
    means = model.predict(X) if len(X) else np.empty(0)
    variances = model.variance(X) if len(X) else np.empty(0)
    lines = [",".join([f"x{j}" for j in range(config.d)] + ["mean", "variance"])]
    for x, m, v in zip(X, means, variances):
        lines.append(",".join([format_float(c) for c in x] + [format_float(m), format_float(v)]))
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bdrygp", description="Boundary-constrained GP benchmarks")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run convergence studies and write a CSV report")
    _add_study_flags(bench)
    _add_common_flags(bench)
    bench.add_argument("--timing", action="store_true", help="record wall times (output is then not reproducible)")
    bench.set_defaults(func=cmd_bench)

    equiv = sub.add_parser("equiv", help="check Brownian-GP / finite-element equivalence")
    equiv.add_argument("--d", type=int, required=True)
    equiv.add_argument("--k", type=int)
    equiv.add_argument("--alpha", help="comma-separated full-grid levels")
    equiv.add_argument("--boundary-mode", dest="boundary_mode", default="full")
    equiv.add_argument("--points", type=int, default=200)
    equiv.add_argument("--perturb", type=float, default=0.0, help="add this to one diagonal gram entry")
    _add_common_flags(equiv)
    equiv.set_defaults(func=cmd_equiv)

    predict = sub.add_parser("predict", help="fit at one level and predict at points read from a file")
    _add_study_flags(predict)
    _add_common_flags(predict)
    predict.add_argument("--level", type=int)
    predict.add_argument("--points", required=True, help="text file with one point per line")
    predict.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
