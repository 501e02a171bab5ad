"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py`` (the summary lines
appear at the end of the session) or ``python tests/test_acceptance.py``.
"""

import itertools
import time

import numpy as np
import pytest

from bdrygp.boundary import BoundaryConfig, BoundaryKind, MeanSpec
from bdrygp.designs import full_grid, sparse_grid
from bdrygp.fem import combination, hierarchical_interp
from bdrygp.gp import fit, tridiag_inverse_1d
from bdrygp.harness import cli
from bdrygp.harness.functions import FUNCTION_NAMES, TestFunction
from bdrygp.harness.study import StudyConfig, run_equivalence_check, run_studies
from bdrygp.kernels import KernelParams, gram, k1d_bdrymatern, k1d_brownian

RESULTS: dict[int, tuple[bool, str]] = {}


def record(number: int, passed: bool, detail: str):
    RESULTS[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")
    assert passed, detail


def full_grid_cases(d):
    if d < 3:
        return list(itertools.product(range(5), repeat=d))
    return [(lvl,) * 3 for lvl in range(1, 5)] + [(4, 2, 1), (1, 3, 4), (0, 2, 4), (2, 4, 3), (3, 3, 1)]


def test_criterion_1_gp_equals_full_grid_fem():
    start = time.perf_counter()
    worst = 0.0
    for d in (1, 2, 3):
        for mode in ("full", "left"):
            bounds = BoundaryConfig.from_mode(mode, d)
            for alpha in full_grid_cases(d):
                r = run_equivalence_check(d, bounds, seed=0, alpha=alpha)
                worst = max(worst, r.deviations["lagrange_full"])
    elapsed = time.perf_counter() - start
    record(1, worst <= 1e-8 and elapsed < 30, f"max deviation {worst:.2e} (tol 1e-8), {elapsed:.1f} s (limit 30 s)")


def test_criterion_2_gp_equals_sparse_combination():
    start = time.perf_counter()
    worst = 0.0
    for d in (1, 2, 3):
        for mode in ("full", "left"):
            bounds = BoundaryConfig.from_mode(mode, d)
            for k in range(1, 6):
                r = run_equivalence_check(d, bounds, seed=0, k=k)
                worst = max(worst, r.deviations["combination"])
    elapsed = time.perf_counter() - start
    record(2, worst <= 1e-8 and elapsed < 60, f"max deviation {worst:.2e} (tol 1e-8), {elapsed:.1f} s (limit 60 s)")


def test_criterion_3_surplus_sum_equals_combination():
    worst = 0.0
    rng = np.random.default_rng(0)
    for d in (1, 2, 3):
        w = rng.normal(size=d)
        Q = np.random.default_rng(d).random((500, d))

        def f(X, w=w):
            return np.exp(X @ w) * np.prod(1 + X, axis=1)

        for mode in ("full", "left", "none"):
            bounds = BoundaryConfig.from_mode(mode, d)
            for k in range(1, 6):
                dev = np.max(np.abs(hierarchical_interp(f, k, bounds, Q) - combination(f, k, bounds, Q)))
                worst = max(worst, dev)
    record(3, worst <= 1e-10, f"max deviation {worst:.2e} (tol 1e-10)")


def test_criterion_4_brownian_limit():
    rng = np.random.default_rng(0)
    x, y = rng.random(100), rng.random(100)
    lines, ok = [], True
    for kind in (BoundaryKind.FULL, BoundaryKind.LEFT, BoundaryKind.RIGHT):
        e3, e4 = (float(np.max(np.abs(k1d_bdrymatern(x, y, w, kind) / w - k1d_brownian(x, y, kind))))
                  for w in (1e-3, 1e-4))
        ok &= e3 <= 10 * e4 and e3 <= 1e-2 and e4 <= 1e-2
        lines.append(f"{kind.value}: {e3:.3e} at 1e-3, {e4:.3e} at 1e-4, ratio {e3 / e4:.4f} (limit 10)")
    record(4, ok, "; ".join(lines))


def boundary_points(bounds, n, seed):
    rng = np.random.default_rng(seed)
    X = rng.random((n, bounds.dim))
    faces = [(j, 0.0) for j in sorted(bounds.left)] + [(j, 1.0) for j in sorted(bounds.right)]
    for i, f in enumerate(rng.integers(len(faces), size=n)):
        j, v = faces[f]
        X[i, j] = v
    return X


def test_criterion_5_boundary_satisfaction():
    d, k = 3, 4
    worst = 0.0
    for name in FUNCTION_NAMES:
        f = TestFunction(name, d)
        for mode in ("full", "left"):
            bounds = BoundaryConfig.from_mode(mode, d)
            model = fit(sparse_grid(k, d, bounds), KernelParams.isotropic(d, 1.0), "bdrymatern", MeanSpec(bounds, f), f)
            X = boundary_points(bounds, 200, seed=0)
            y = f(X)
            worst = max(worst, float(np.max(np.abs(model.predict(X) - y) / (1 + np.abs(y)))))
    record(5, worst <= 1e-8, f"max relative boundary error {worst:.2e} (tol 1e-8)")


@pytest.fixture(scope="module")
def convergence():
    start = time.perf_counter()
    configs = [
        StudyConfig(function=name, d=3, k_min=2, k_max=7, boundary_mode=mode, mc_points=1000, seed=0)
        for mode in ("full", "left", "none")
        for name in ("corner_peak", "product_peak")
    ]
    report = run_studies(configs)
    return report, time.perf_counter() - start


def test_criterion_6_convergence_slopes(convergence):
    report, elapsed = convergence
    ok = elapsed < 600
    parts = []
    for name in ("corner_peak", "product_peak"):
        rows = {m: {r.level: r.error for r in report.rows if r.method == m and r.function == name}
                for m in report.methods}
        slopes = {}
        for method, errs in rows.items():
            levels = sorted(errs)
            slopes[method] = float(np.polyfit(levels, np.log2([errs[k] for k in levels]), 1)[0])
        base = rows["bdrymatern-none"]
        for mode in ("full", "left"):
            method = f"bdrymatern-{mode}"
            ok &= slopes[method] <= -0.85
            below = all(rows[method][k] < base[k] for k in range(3, 8))
            ok &= below
            parts.append(f"{name} {mode} slope {slopes[method]:.2f} below-baseline={below}")
        ok &= -0.65 < slopes["bdrymatern-none"] < -0.35
        parts.append(f"{name} baseline slope {slopes['bdrymatern-none']:.2f}")
    parts.append(f"{elapsed:.0f} s (limit 600 s)")
    record(6, ok, "; ".join(parts))


def test_criterion_7_left_over_full_ratio(convergence):
    report, _ = convergence
    errs = {m: {r.level: r.error for r in report.rows if r.method == m and r.function == "corner_peak"}
            for m in ("bdrymatern-left", "bdrymatern-full")}
    ratios = [errs["bdrymatern-left"][k] / errs["bdrymatern-full"][k] for k in range(3, 7)]
    ok = min(ratios) >= 0.9 and float(np.mean(ratios)) >= 1.0
    record(7, ok, "ratios k=3..6 " + ", ".join(f"{r:.3f}" for r in ratios) + f" (mean {np.mean(ratios):.3f})")


def test_criterion_8_tridiagonal_inverse():
    worst = 0.0
    bounds = BoundaryConfig.from_mode("left", 1)
    for n in (1, 2, 4, 8, 16):
        pts = np.arange(1, n + 1) / n
        K = gram(pts[:, None], None, bounds, "brownian")
        T = tridiag_inverse_1d(pts)
        dense = np.linalg.inv(K)
        worst = max(worst, float(np.max(np.abs(T @ K - np.eye(n)))), float(np.max(np.abs(T - dense)) / np.max(np.abs(dense))))
    record(8, worst <= 1e-10, f"max deviation {worst:.2e} (tol 1e-10)")


def test_criterion_9_error_domination_bounded():
    d = 2
    bounds = BoundaryConfig.from_mode("full", d)
    f = TestFunction("product_peak", d)
    mean = MeanSpec(bounds, f)
    probe = np.random.default_rng(0).random((2000, d))
    truth = f(probe)
    ratio = {}
    for k in (2, 6):
        X = sparse_grid(k, d, bounds).array()
        br = fit(X, None, "brownian", mean, f).predict(probe)
        bm = fit(X, KernelParams.isotropic(d, 1.0), "bdrymatern", mean, f).predict(probe)
        ratio[k] = float(np.max(np.abs(truth - br)) / np.max(np.abs(truth - bm)))
    record(9, ratio[6] <= 2 * ratio[2], f"ratio k=2 {ratio[2]:.3f}, k=6 {ratio[6]:.3f} (limit {2 * ratio[2]:.3f})")


def test_criterion_10_bench_deterministic(tmp_path):
    args = ["bench", "--function", "corner_peak", "--d", "3", "--k-min", "2", "--k-max", "4",
            "--boundary-mode", "full,left,none", "--seed", "7"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    codes = cli.main(args + ["--out", str(a)]), cli.main(args + ["--out", str(b)])
    same = a.read_bytes() == b.read_bytes()
    record(10, codes == (0, 0) and same, f"exit codes {codes}, byte-identical={same}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
