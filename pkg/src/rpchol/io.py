"""Plain-text matrix files: a dimension header, then n rows of n doubles."""

import numpy as np

from .validation import as_matrix, check_psd, check_symmetric


def save_matrix(a, path):
    a = as_matrix(a)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{a.shape[0]}\n")
        for row in a:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def load_matrix(path, *, validate_psd=True):
    """Load and validate a matrix file.

    Symmetry is required within 1e-12 (relative) and then enforced exactly;
    with ``validate_psd`` the spectrum is checked (min eigenvalue above
    -1e-9 relative).
    """
    with open(path, encoding="utf-8") as fh:
        tokens = fh.read().split()
    if not tokens:
        raise ValueError(f"{path}: empty matrix file")
    try:
        n = int(tokens[0])
    except ValueError:
        raise ValueError(f"{path}: first token must be the dimension, got {tokens[0]!r}") from None
    if n < 1:
        raise ValueError(f"{path}: dimension must be >= 1, got {n}")
    if len(tokens) - 1 != n * n:
        raise ValueError(f"{path}: expected {n * n} entries after the header, got {len(tokens) - 1}")
    try:
        values = np.array([float(t) for t in tokens[1:]], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from None
    a = check_symmetric(values.reshape(n, n), name=f"matrix from {path}")
    if validate_psd:
        check_psd(a, name=f"matrix from {path}")
    return a
