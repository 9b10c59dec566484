"""Closed-form expectations and bound chains for a single pivoted downdate.

Everything here is exact arithmetic over the n possible pivot outcomes — no
sampling. The enumeration routine is the brute-force oracle the closed forms
are checked against.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import NoValidPivotError
from .linalg import cubed_diag, frobenius_norm, frobenius_norm_sq, row_norms_sq, trace
from .pivoting import active_mask
from .validation import ACTIVE_TOL, as_matrix, check_symmetric

CHAIN_REL_TOL = 1e-9


@dataclass(frozen=True)
class BoundReport:
    """A chain of values expected to be nondecreasing, with per-link slack."""

    labels: tuple
    values: tuple
    satisfied: tuple
    slacks: tuple
    scale: float

    @property
    def ok(self):
        return all(self.satisfied)


def _chain(pairs, scale, rel_tol=CHAIN_REL_TOL):
    labels = tuple(label for label, _ in pairs)
    values = tuple(float(v) for _, v in pairs)
    slacks = tuple(values[j + 1] - values[j] for j in range(len(values) - 1))
    satisfied = tuple(values[j] <= values[j + 1] + rel_tol * scale for j in range(len(values) - 1))
    return BoundReport(labels, values, satisfied, slacks, float(scale))


def diag_power_distribution(a, beta, *, active_tol=ACTIVE_TOL):
    """Pivot distribution proportional to diagonal**beta, zero off the active set."""
    d = np.diagonal(as_matrix(a)).astype(float)
    mask = active_mask(d, active_tol)
    if not mask.any():
        raise ValueError("all diagonal entries are zero (or excluded)")
    p = np.zeros(d.size)
    ratios = d[mask] / d[mask].max()
    p[mask] = ratios ** float(beta)
    return p / p.sum()


def indicator_distribution(n, i):
    p = np.zeros(int(n))
    p[int(i)] = 1.0
    return p


def validate_distribution(a, p, *, active_tol=ACTIVE_TOL):
    """Check p is a probability vector supported on the active diagonal."""
    a = as_matrix(a)
    p = np.asarray(p, dtype=float)
    if p.shape != (a.shape[0],):
        raise ValueError(f"distribution must have shape ({a.shape[0]},), got {p.shape}")
    if not np.all(np.isfinite(p)) or np.any(p < 0.0):
        raise ValueError("distribution entries must be finite and nonnegative")
    if abs(float(p.sum()) - 1.0) > 1e-12:
        raise ValueError(f"distribution sums to {float(p.sum())!r}, not 1")
    mask = active_mask(np.diagonal(a), active_tol)
    if np.any(p[~mask] > 0.0):
        bad = int(np.flatnonzero((~mask) & (p > 0.0))[0])
        raise ValueError(
            f"distribution puts weight on index {bad} whose diagonal is zero or excluded"
        )
    return p


def expected_frobenius_sq(a, p, *, active_tol=ACTIVE_TOL):
    """Closed-form E|B|_F^2 for one pivot drawn from ``p``:

    |A|_F^2 + sum_i p_i * (|A_i|^4 / A_ii^2 - 2 (A^3)_ii / A_ii).
    """
    a = check_symmetric(a)
    p = validate_distribution(a, p, active_tol=active_tol)
    support = p > 0.0
    if not support.any():
        return frobenius_norm_sq(a)
    d = np.diagonal(a)
    rn_sq = row_norms_sq(a)
    cube = cubed_diag(a)
    terms = rn_sq[support] ** 2 / d[support] ** 2 - 2.0 * cube[support] / d[support]
    return frobenius_norm_sq(a) + float(np.sum(p[support] * terms))


@dataclass(frozen=True)
class ExpectedStep:
    """Exact one-step expectations over every pivot outcome."""

    residual: np.ndarray
    frobenius_sq: float
    trace: float


def enumerate_expected(a, p, *, active_tol=ACTIVE_TOL):
    """Brute-force oracle: average the n possible downdates under ``p``."""
    a = check_symmetric(a)
    p = validate_distribution(a, p, active_tol=active_tol)
    d = np.diagonal(a)
    mean_residual = np.zeros_like(a)
    mean_frob_sq = 0.0
    mean_trace = 0.0
    for i in np.flatnonzero(p > 0.0):
        r = a[i]
        b = a - np.outer(r, r) / d[i]
        mean_residual += p[i] * b
        mean_frob_sq += p[i] * frobenius_norm_sq(b)
        mean_trace += p[i] * trace(b)
    return ExpectedStep(mean_residual, float(mean_frob_sq), float(mean_trace))


def beta1_expected_residual(a):
    """Expected residual under diagonal-proportional (beta=1) sampling: A - A^2/tr A."""
    a = check_symmetric(a)
    t = trace(a)
    if t <= 0.0:
        raise ValueError(f"trace must be positive, got {t!r}")
    return a - (a @ a) / t


def beta1_expected_trace(a):
    """Expected residual trace under beta=1 sampling: (1 - tr(A^2)/tr(A)^2) tr(A)."""
    a = check_symmetric(a)
    t = trace(a)
    if t <= 0.0:
        raise ValueError(f"trace must be positive, got {t!r}")
    # tr(A^2) equals the squared Frobenius norm for symmetric A.
    return (1.0 - frobenius_norm_sq(a) / t**2) * t


def third_moment_gap(a, i=None):
    """A_ii * (A^3)_ii - |A_i|^4; nonnegative for psd input (zero when diagonal)."""
    a = check_symmetric(a)
    d = np.diagonal(a)
    rn_sq = row_norms_sq(a)
    if i is not None:
        i = int(i)
        return float(d[i] * cubed_diag(a, i) - rn_sq[i] ** 2)
    return d * cubed_diag(a) - rn_sq**2


def beta2_chain(a, *, active_tol=ACTIVE_TOL):
    """Bound chain for squared-diagonal (beta=2) sampling.

    exact expectation <= third-moment bound <= row-norm bound <= (1-1/n)|A|_F^2,
    each link verified within 1e-9 times the squared Frobenius norm.
    """
    a = check_symmetric(a)
    n = a.shape[0]
    p = diag_power_distribution(a, 2.0, active_tol=active_tol)
    exact = enumerate_expected(a, p, active_tol=active_tol).frobenius_sq
    d = np.diagonal(a)
    s2 = float(np.sum(d * d))
    base = frobenius_norm_sq(a)
    moment_bound = base - float(np.sum(d * cubed_diag(a))) / s2
    row_norm_bound = base - float(np.sum(row_norms_sq(a) ** 2)) / s2
    flat_bound = (1.0 - 1.0 / n) * base
    return _chain(
        [
            ("expected", exact),
            ("moment_bound", moment_bound),
            ("row_norm_bound", row_norm_bound),
            ("flat_bound", flat_bound),
        ],
        scale=base,
    )


def single_pivot_bounds(a, i, *, active_tol=ACTIVE_TOL):
    """Deterministic pivot at ``i``: actual |B|_F^2 against its two bounds.

    actual <= |A|_F^2 - |A_i|^4/A_ii^2 <= |A|_F^2 - A_ii^2.
    """
    a = check_symmetric(a)
    d = np.diagonal(a)
    mask = active_mask(d, active_tol)
    i = int(i)
    if not mask[i]:
        raise ValueError(f"index {i} has zero (or excluded) diagonal; pivot undefined")
    r = a[i]
    actual = frobenius_norm_sq(a - np.outer(r, r) / d[i])
    base = frobenius_norm_sq(a)
    rn_sq_i = float(row_norms_sq(a)[i])
    bound_row = base - rn_sq_i**2 / float(d[i]) ** 2
    bound_diag = base - float(d[i]) ** 2
    return _chain(
        [("actual", actual), ("row_norm_bound", bound_row), ("diagonal_bound", bound_diag)],
        scale=base,
    )


def best_norm_ratio_pivot(a, *, active_tol=ACTIVE_TOL):
    """Pivot maximizing |A_j|^2 / A_jj (ties to the largest index).

    Returns the index and the chain actual <= (1-1/n)|A|_F^2.
    """
    a = check_symmetric(a)
    n = a.shape[0]
    d = np.diagonal(a)
    mask = active_mask(d, active_tol)
    if not mask.any():
        raise ValueError("all diagonal entries are zero (or excluded)")
    score = np.zeros(n)
    score[mask] = row_norms_sq(a)[mask] / d[mask]
    top = float(score[mask].max())
    ties = mask & (score >= top * (1.0 - 1e-12))
    i = int(np.flatnonzero(ties)[-1])
    r = a[i]
    actual = frobenius_norm_sq(a - np.outer(r, r) / d[i])
    base = frobenius_norm_sq(a)
    report = _chain(
        [("actual", actual), ("flat_bound", (1.0 - 1.0 / n) * base)],
        scale=base,
    )
    return i, report


def diagonal_decay(diag_values, beta, *, active_tol=ACTIVE_TOL):
    """Expected one-step trace removal on a diagonal matrix.

    sum(d^(beta+1)) / sum(d^beta) over active entries; beta=inf returns the
    maximum. Monotonically nondecreasing in beta.
    """
    d = np.asarray(diag_values, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise ValueError("diagonal values must be a non-empty 1-D array")
    if not np.all(np.isfinite(d)) or np.any(d < 0.0):
        raise ValueError("diagonal values must be finite and nonnegative")
    mask = active_mask(d, active_tol)
    if not mask.any():
        raise NoValidPivotError("all diagonal values are zero")
    vals = d[mask]
    top = float(vals.max())
    if np.isinf(beta):
        return top
    beta = float(beta)
    if np.isnan(beta) or beta < 0.0:
        raise ValueError(f"beta must be >= 0, got {beta!r}")
    w = (vals / top) ** beta
    return float(np.sum(vals * w) / np.sum(w))
