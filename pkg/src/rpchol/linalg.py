"""Norms, traces, and a self-contained cyclic-Jacobi eigensolver for dense symmetric matrices."""

import math

import numpy as np

from .exceptions import ConvergenceError

# Largest dimension for which operator norms go through the exact eigensolver.
OP_NORM_EIG_LIMIT = 200
POWER_TOL = 1e-10


def trace(a):
    return float(np.trace(np.asarray(a, dtype=float)))


def frobenius_norm_sq(a):
    a = np.asarray(a, dtype=float)
    return float(np.sum(a * a))


def frobenius_norm(a):
    return math.sqrt(frobenius_norm_sq(a))


def row_norms_sq(a):
    """Squared l2 norms of the rows."""
    a = np.asarray(a, dtype=float)
    return np.einsum("ij,ij->i", a, a)


def cubed_diag(a, i=None):
    """Diagonal of a@a@a for symmetric ``a``.

    With ``i`` given, uses two matrix-vector products (O(n^2)); otherwise one
    matrix product yields the full vector.
    """
    a = np.asarray(a, dtype=float)
    if i is not None:
        return float(a[i] @ (a @ a[:, i]))
    return np.einsum("ij,ij->i", a @ a, a)


def _off_diagonal_sq(w):
    # Summing the squared off-diagonal entries directly; the subtraction
    # sum(w^2) - sum(diag^2) cancels catastrophically near convergence.
    m = w.copy()
    np.fill_diagonal(m, 0.0)
    return float(np.sum(m * m))


def sym_eigenvalues(a, *, max_sweeps=100):
    """All eigenvalues of a symmetric matrix, descending.

    Cyclic Jacobi rotations; sweeping stops once the off-diagonal mass drops
    below 1e-12 times the Frobenius norm of the input. Raises
    ConvergenceError if ``max_sweeps`` full sweeps do not get there.
    """
    w = np.array(a, dtype=float)
    n = w.shape[0]
    if w.ndim != 2 or w.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {w.shape}")
    if n < 2:
        return np.diagonal(w).astype(float).copy()

    stop_sq = (1e-12 ** 2) * float(np.sum(w * w))
    for _ in range(max_sweeps):
        if _off_diagonal_sq(w) <= stop_sq:
            return np.sort(np.diagonal(w))[::-1].copy()
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = w[p, q]
                if apq == 0.0:
                    continue
                diff = w[q, q] - w[p, p]
                if abs(apq) < 1e-300 * abs(diff):
                    # Rotation angle underflows; the entry is negligible
                    # against the diagonal gap, so drop it outright.
                    w[p, q] = 0.0
                    w[q, p] = 0.0
                    continue
                delta = diff / (2.0 * apq)
                if delta == 0.0:
                    t = 1.0
                else:
                    t = 1.0 / (abs(delta) + math.hypot(delta, 1.0))
                    if delta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rp = w[p, :].copy()
                rq = w[q, :].copy()
                w[p, :] = c * rp - s * rq
                w[q, :] = s * rp + c * rq
                cp = w[:, p].copy()
                cq = w[:, q].copy()
                w[:, p] = c * cp - s * cq
                w[:, q] = s * cp + c * cq
                w[p, q] = 0.0
                w[q, p] = 0.0

    off_sq = _off_diagonal_sq(w)
    if off_sq <= stop_sq:
        return np.sort(np.diagonal(w))[::-1].copy()
    raise ConvergenceError(
        f"Jacobi eigensolver did not converge in {max_sweeps} sweeps "
        f"(off-diagonal mass {math.sqrt(off_sq):.3e}, target {math.sqrt(stop_sq):.3e})"
    )


def schatten_norm(a, p):
    """Schatten p-norm of a psd matrix: (sum of eigenvalues^p)^(1/p).

    Eigenvalues are clamped at zero before powering; p=inf gives the largest
    eigenvalue (operator norm for psd input).
    """
    p = float(p)
    if math.isnan(p) or p <= 0.0:
        raise ValueError(f"Schatten order must be positive, got {p!r}")
    vals = np.maximum(sym_eigenvalues(a), 0.0)
    if vals.size == 0:
        return 0.0
    top = float(vals[0])
    if math.isinf(p) or top == 0.0:
        return top
    return float(top * np.sum((vals / top) ** p) ** (1.0 / p))


def operator_norm(a, *, eig_limit=OP_NORM_EIG_LIMIT, tol=POWER_TOL):
    """Largest absolute eigenvalue of a symmetric matrix.

    Exact (Jacobi) up to ``eig_limit``; beyond that, power iteration with a
    relative tolerance of ``tol`` and a 10n iteration cap.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n == 0:
        return 0.0
    if n <= eig_limit:
        vals = sym_eigenvalues(a)
        return float(max(vals[0], -vals[-1]))

    v = 1.0 + np.linspace(0.0, 0.5, n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(10 * n):
        av = a @ v
        norm_av = float(np.linalg.norm(av))
        if norm_av == 0.0:
            return 0.0
        v = av / norm_av
        if abs(norm_av - lam) <= tol * norm_av:
            return norm_av
        lam = norm_av
    return lam
