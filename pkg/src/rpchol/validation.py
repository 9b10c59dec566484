"""Input validation helpers for dense symmetric positive semi-definite matrices."""

import numpy as np

# Relative slack below zero tolerated by psd checks.
PSD_TOL = 1e-9
# Relative diagonal threshold below which an index is excluded from pivoting.
ACTIVE_TOL = 1e-12
# Relative asymmetry tolerated before input is rejected.
SYM_TOL = 1e-12


def as_matrix(a, name="matrix"):
    """Coerce to a square, finite, float64 2-D array."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square 2-D array, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_symmetric(a, *, tol=SYM_TOL, name="matrix"):
    """Validate symmetry up to ``tol`` (relative) and return an exactly symmetric copy."""
    a = as_matrix(a, name)
    if a.size == 0:
        return a.copy()
    scale = 1.0 + float(np.max(np.abs(a)))
    gap = float(np.max(np.abs(a - a.T)))
    if gap > tol * scale:
        raise ValueError(f"{name} is not symmetric: max |a - a.T| = {gap:.3e}")
    # Bitwise symmetric: float addition commutes entrywise.
    return 0.5 * (a + a.T)


def check_psd_diagonal(a, *, psd_tol=PSD_TOL, name="matrix"):
    """Reject matrices whose diagonal dips below -psd_tol (relative)."""
    d = np.diagonal(a)
    if d.size == 0:
        return a
    scale = 1.0 + float(np.max(np.abs(d)))
    smallest = float(np.min(d))
    if smallest < -psd_tol * scale:
        raise ValueError(
            f"{name} has negative diagonal entry {smallest:.3e}; not positive semi-definite"
        )
    return a


def check_psd(a, *, psd_tol=PSD_TOL, name="matrix"):
    """Eigenvalue-based psd certification (O(n^3); meant for load-time validation)."""
    from .linalg import sym_eigenvalues

    vals = sym_eigenvalues(a)
    if vals.size:
        smallest = float(vals[-1])
        largest = max(float(vals[0]), 0.0)
        if smallest < -psd_tol * (1.0 + largest):
            raise ValueError(
                f"{name} is not positive semi-definite: min eigenvalue {smallest:.3e}"
            )
    return a
