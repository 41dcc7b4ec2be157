"""FTRL optimizer with a linearithmic regularizer.

Thin wrapper over the C++ core: regularizer transforms, convergence bounds,
and the multi-seed benchmark harness.
"""

from ._core import (
    CsvRow,
    ExperimentConfig,
    ExperimentResult,
    QUpdateRule,
    RegularizerParams,
    RunAbort,
    RunOutput,
    RunSummary,
    ScheduleKind,
    SeedSummary,
    branch_point,
    csv_text,
    experiment_id,
    grad_phi_star,
    lambert_w0,
    problem_names,
    psi,
    psi_prime,
    psi_second,
    psi_star,
    psi_star_prime,
    run_experiment,
    summary_text,
    theorem2_bound,
    theorem3_bound,
    theoremF_bound,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "CsvRow",
    "ExperimentConfig",
    "ExperimentResult",
    "QUpdateRule",
    "RegularizerParams",
    "RunAbort",
    "RunOutput",
    "RunSummary",
    "ScheduleKind",
    "SeedSummary",
    "branch_point",
    "csv_text",
    "experiment_id",
    "grad_phi_star",
    "lambert_w0",
    "problem_names",
    "psi",
    "psi_prime",
    "psi_second",
    "psi_star",
    "psi_star_prime",
    "run_experiment",
    "summary_text",
    "theorem2_bound",
    "theorem3_bound",
    "theoremF_bound",
    "validate",
]
