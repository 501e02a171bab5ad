"""Benchmark functions, convergence studies, equivalence checks and the CLI."""

from .functions import FUNCTION_NAMES, TestFunction, eval_test_function
from .report import emit_report, read_report, render_report
from .study import (
    ErrorReport,
    ErrorRow,
    EquivalenceReport,
    StudyConfig,
    estimate_error,
    run_convergence_study,
    run_equivalence_check,
    run_studies,
)

__all__ = [
    "FUNCTION_NAMES", "TestFunction", "eval_test_function",
    "emit_report", "read_report", "render_report",
    "ErrorReport", "ErrorRow", "EquivalenceReport", "StudyConfig", "estimate_error",
    "run_convergence_study", "run_equivalence_check", "run_studies",
]
