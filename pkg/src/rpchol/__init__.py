"""Pivoted partial Cholesky low-rank approximation with configurable random pivot rules.

The residual diagonal drives pivot selection: uniform (power 0), diagonal-power
sampling (``gibbs:<beta>``), greedy (power infinity), an alternating hedge, and
a row-norm-ratio rule. Two engines run the same downdate — a dense reference
engine reporting any residual norm per step, and an entry-budgeted engine that
reads only (k+1)*n matrix entries.
"""

from .analysis import (
    BoundReport,
    best_norm_ratio_pivot,
    beta1_expected_residual,
    beta1_expected_trace,
    beta2_chain,
    diag_power_distribution,
    diagonal_decay,
    enumerate_expected,
    expected_frobenius_sq,
    indicator_distribution,
    single_pivot_bounds,
    third_moment_gap,
)
from .cholesky import (
    DenseFactorization,
    EntryOracle,
    OracleFactorization,
    RunReport,
    engines_agree,
    factorize,
    run,
)
from .exceptions import (
    ConvergenceError,
    EngineMismatchError,
    MissingInformationError,
    NoValidPivotError,
    RpcholError,
)
from .generators import (
    PointSet,
    gaussian_kernel,
    random_orthogonal,
    random_spd_spectrum,
    spiral_points,
)
from .linalg import (
    cubed_diag,
    frobenius_norm,
    frobenius_norm_sq,
    operator_norm,
    row_norms_sq,
    schatten_norm,
    sym_eigenvalues,
    trace,
)
from .pivoting import (
    Alternating,
    DiagNormRatio,
    Gibbs,
    Greedy,
    PivotContext,
    Uniform,
    active_mask,
    parse_rule,
    rule_from_beta,
    rule_name,
    select_pivot,
    selection_probabilities,
)
from .rng import make_rng, stream_rng, trial_rng, weighted_sample, weighted_sample_many

__version__ = "0.1.0"

_LAZY = {"PivotedCholesky": ".estimator"}


def __getattr__(name):
    # Defer the scikit-learn import until the estimator is actually wanted.
    if name in _LAZY:
        import importlib

        module = importlib.import_module(_LAZY[name], __name__)
        value = getattr(module, name)
        globals()[name] = value
        return value
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [
    "Alternating",
    "BoundReport",
    "ConvergenceError",
    "DenseFactorization",
    "DiagNormRatio",
    "EngineMismatchError",
    "EntryOracle",
    "Gibbs",
    "Greedy",
    "MissingInformationError",
    "NoValidPivotError",
    "OracleFactorization",
    "PivotContext",
    "PivotedCholesky",
    "PointSet",
    "RpcholError",
    "RunReport",
    "Uniform",
    "active_mask",
    "best_norm_ratio_pivot",
    "beta1_expected_residual",
    "beta1_expected_trace",
    "beta2_chain",
    "cubed_diag",
    "diag_power_distribution",
    "diagonal_decay",
    "engines_agree",
    "enumerate_expected",
    "expected_frobenius_sq",
    "factorize",
    "frobenius_norm",
    "frobenius_norm_sq",
    "gaussian_kernel",
    "indicator_distribution",
    "make_rng",
    "operator_norm",
    "parse_rule",
    "random_orthogonal",
    "random_spd_spectrum",
    "row_norms_sq",
    "rule_from_beta",
    "rule_name",
    "run",
    "schatten_norm",
    "select_pivot",
    "selection_probabilities",
    "single_pivot_bounds",
    "spiral_points",
    "stream_rng",
    "sym_eigenvalues",
    "third_moment_gap",
    "trace",
    "trial_rng",
    "weighted_sample",
    "weighted_sample_many",
]
