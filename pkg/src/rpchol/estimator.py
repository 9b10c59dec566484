"""Scikit-learn estimator around the budgeted factorization engine."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .cholesky import EntryOracle, factorize
from .pivoting import as_rule
from .rng import make_rng
from .validation import ACTIVE_TOL, as_matrix, check_symmetric


class PivotedCholesky(TransformerMixin, BaseEstimator):
    """Low-rank approximation of a precomputed psd kernel/Gram matrix.

    ``fit`` selects ``n_components`` pivot columns with the configured rule
    and builds factor rows F with ``X ~= F.T @ F`` while reading only
    (k+1)*n matrix entries. ``transform`` maps cross-kernel rows onto the
    pivot subspace (the column-subset approximation of the fitted matrix),
    so ``Z = fit_transform(K)`` satisfies ``Z @ Z.T ~= K``.

    Parameters
    ----------
    n_components : int or None, default=None
        Pivot steps to take. None runs until the residual diagonal is
        exhausted (at most n steps).
    pivot_rule : str or rule object, default="gibbs:1"
        Pivot selection rule, e.g. ``"uniform"``, ``"gibbs:2"``,
        ``"greedy:last"``, ``"alt:greedy:last+uniform"``.
    random_state : int or None, default=None
        Seed for the pivot-sampling stream.
    active_tol : float, default=1e-12
        Relative diagonal threshold below which an index is never pivoted.

    Attributes
    ----------
    pivots_ : ndarray of shape (k,)
        Selected column indices, in pivot order.
    factor_ : ndarray of shape (k, n)
        Factor rows; ``factor_.T @ factor_`` is the approximation.
    residual_diag_ : ndarray of shape (n,)
        Diagonal of the unexplained residual after fitting.
    n_components_ : int
        Steps actually taken (less than requested on early exhaustion).
    query_count_ : int
        Matrix entries read during fit; at most (k+1)*n.

    Examples
    --------
    >>> import numpy as np
    >>> from rpchol import PivotedCholesky
    >>> rng = np.random.default_rng(0)
    >>> g = rng.standard_normal((30, 30))
    >>> gram = g @ g.T
    >>> est = PivotedCholesky(n_components=10, random_state=0).fit(gram)
    >>> est.factor_.shape
    (10, 30)
    """

    def __init__(self, n_components=None, pivot_rule="gibbs:1", random_state=None,
                 active_tol=ACTIVE_TOL):
        self.n_components = n_components
        self.pivot_rule = pivot_rule
        self.random_state = random_state
        self.active_tol = active_tol

    def fit(self, X, y=None):
        """Factorize a symmetric psd matrix (or an EntryOracle over one)."""
        if isinstance(X, EntryOracle):
            oracle = X
        else:
            oracle = EntryOracle.from_matrix(check_symmetric(as_matrix(X, "X"), name="X"))
        n = oracle.n
        k = n if self.n_components is None else int(self.n_components)
        if not (0 <= k <= n):
            raise ValueError(f"n_components={self.n_components} must be in [0, {n}]")
        state = factorize(
            oracle,
            as_rule(self.pivot_rule),
            k,
            rng=make_rng(self.random_state),
            active_tol=self.active_tol,
        )
        self.n_features_in_ = n
        self.pivots_ = np.asarray(state.pivots, dtype=int)
        self.factor_ = state.factor()
        self.residual_diag_ = state.diag.copy()
        self.n_components_ = state.k
        self.query_count_ = state.query_count
        return self

    def transform(self, X):
        """Project kernel rows against the fitted pivots.

        ``X`` has shape (m, n): kernel evaluations between m query points and
        the n fitted points. Returns (m, k) features Z with
        ``Z @ Z.T`` equal to the column-subset approximation of the
        corresponding kernel block.
        """
        self._check_fitted()
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X must have shape (m, {self.n_features_in_}), got {X.shape}"
            )
        if self.n_components_ == 0:
            return np.zeros((X.shape[0], 0))
        head = self.factor_[:, self.pivots_]
        return np.linalg.solve(head.T, X[:, self.pivots_].T).T

    def approximation(self):
        """F^T F, the rank-k approximation of the fitted matrix."""
        self._check_fitted()
        return self.factor_.T @ self.factor_

    def _check_fitted(self):
        if not hasattr(self, "factor_"):
            raise NotFittedError(
                "This PivotedCholesky instance is not fitted yet; call 'fit' first."
            )
