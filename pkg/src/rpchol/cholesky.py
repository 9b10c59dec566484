"""Partial-Cholesky engines.

Two implementations of the same pivoted rank-one downdate:

* ``DenseFactorization`` is the reference engine. It stores the residual and
  the accumulated approximation as full matrices and can report any norm of
  the residual at every step.
* ``OracleFactorization`` reads matrix entries through an ``EntryOracle`` and
  keeps only the factor rows plus the residual diagonal, so k steps on an
  n x n matrix cost exactly (k+1)*n entry reads and O(k^2 n) arithmetic.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import EngineMismatchError, MissingInformationError, NoValidPivotError
from .generators import PointSet
from .linalg import frobenius_norm, frobenius_norm_sq, operator_norm, row_norms_sq
from .pivoting import PivotContext, active_mask, as_rule, needs_row_norms, rule_name, select_pivot
from .rng import make_rng
from .validation import ACTIVE_TOL, PSD_TOL, as_matrix, check_psd_diagonal, check_symmetric

NORM_NAMES = ("trace", "frobenius", "operator")


class EntryOracle:
    """On-demand access to entries of a symmetric matrix, with query accounting.

    Every entry evaluation counts once; a column or diagonal read of an n x n
    matrix counts n.
    """

    def __init__(self, entry_fn, n, *, column_fn=None, diagonal_fn=None):
        self._entry = entry_fn
        self._column = column_fn
        self._diagonal = diagonal_fn
        self.n = int(n)
        self.query_count = 0

    def entry(self, i, j):
        self.query_count += 1
        return float(self._entry(i, j))

    def diag_entry(self, i):
        return self.entry(i, i)

    def column(self, i):
        self.query_count += self.n
        if self._column is not None:
            return np.asarray(self._column(i), dtype=float)
        return np.array([self._entry(j, i) for j in range(self.n)], dtype=float)

    def diagonal(self):
        self.query_count += self.n
        if self._diagonal is not None:
            return np.asarray(self._diagonal(), dtype=float)
        return np.array([self._entry(i, i) for i in range(self.n)], dtype=float)

    @classmethod
    def from_matrix(cls, a):
        a = check_symmetric(as_matrix(a))
        return cls(
            lambda i, j: a[i, j],
            a.shape[0],
            column_fn=lambda i: a[:, i].copy(),
            diagonal_fn=lambda: np.diagonal(a).copy(),
        )

    @classmethod
    def from_kernel(cls, points, bandwidth=1000.0):
        """Gaussian-kernel oracle over a point cloud; entries computed on demand."""
        x = points.points if isinstance(points, PointSet) else np.asarray(points, dtype=float)
        if not (np.isfinite(bandwidth) and bandwidth > 0.0):
            raise ValueError(f"bandwidth must be positive, got {bandwidth}")
        n = x.shape[0]

        def entry(i, j):
            if i == j:
                return 1.0
            d = x[i] - x[j]
            return math.exp(-float(d @ d) / bandwidth)

        def column(i):
            d = x - x[i]
            col = np.exp(-np.einsum("ij,ij->i", d, d) / bandwidth)
            col[i] = 1.0
            return col

        return cls(entry, n, column_fn=column, diagonal_fn=lambda: np.ones(n))


def _prepare_diagonal(diag, name):
    """Clamp round-off negatives to zero after rejecting genuinely negative diagonals."""
    d = np.asarray(diag, dtype=float).copy()
    scale = 1.0 + (float(np.max(np.abs(d))) if d.size else 0.0)
    if d.size and float(np.min(d)) < -PSD_TOL * scale:
        raise ValueError(f"{name} has negative diagonal entry {float(np.min(d)):.3e}; not psd")
    return np.maximum(d, 0.0)


class DenseFactorization:
    """Reference engine tracking residual and approximation as full matrices.

    Each ``step(i)`` moves the rank-one term (residual row i outer itself,
    divided by the pivot diagonal) from residual to approximation, zeroes the
    pivoted row/column, and clamps round-off negatives on the diagonal.
    Per-step monotonicity of the trace and of the squared Frobenius norm
    (which must drop by at least the squared pivot diagonal) is checked at
    runtime unless ``runtime_checks`` is off.
    """

    def __init__(self, a, *, active_tol=ACTIVE_TOL, runtime_checks=True):
        a = check_symmetric(as_matrix(a))
        check_psd_diagonal(a)
        self.matrix = a
        self.residual = a.copy()
        np.fill_diagonal(self.residual, _prepare_diagonal(np.diagonal(a), "matrix"))
        self.approx = np.zeros_like(a)
        self.pivots = []
        self.active_tol = float(active_tol)
        self.runtime_checks = bool(runtime_checks)
        self._trace_slack = 1e-10 * (1.0 + abs(float(np.trace(a))))
        self._frob_slack = 1e-8 * (1.0 + frobenius_norm_sq(a))

    @property
    def n(self):
        return self.residual.shape[0]

    @property
    def k(self):
        return len(self.pivots)

    def diagonal(self):
        return np.diagonal(self.residual).copy()

    def row_norms(self):
        return np.sqrt(row_norms_sq(self.residual))

    def trace(self):
        return float(np.trace(self.residual))

    def frobenius_sq(self):
        return frobenius_norm_sq(self.residual)

    def operator_norm(self):
        return operator_norm(self.residual)

    def step(self, i):
        i = int(i)
        d = np.diagonal(self.residual)
        if not (0 <= i < self.n):
            raise IndexError(f"pivot index {i} out of range for n={self.n}")
        top = float(d.max()) if d.size else 0.0
        if top <= 0.0 or d[i] <= self.active_tol * top:
            raise NoValidPivotError(
                f"index {i} is excluded: residual diagonal {float(d[i]):.3e}"
            )
        trace_before = self.trace()
        frob_before = self.frobenius_sq()
        pivot_diag = float(d[i])

        r = self.residual[i].copy()
        outer = np.outer(r, r) / pivot_diag
        self.residual -= outer
        self.approx += outer
        self.residual[i, :] = 0.0
        self.residual[:, i] = 0.0
        dg = np.diagonal(self.residual).copy()
        np.fill_diagonal(self.residual, np.where(dg < 0.0, 0.0, dg))
        self.pivots.append(i)

        if self.runtime_checks:
            if self.trace() > trace_before + self._trace_slack:
                raise RuntimeError(
                    f"residual trace increased at step {self.k}: "
                    f"{trace_before!r} -> {self.trace()!r}"
                )
            if self.frobenius_sq() > frob_before - pivot_diag**2 + self._frob_slack:
                raise RuntimeError(
                    f"squared Frobenius norm dropped less than the squared pivot "
                    f"diagonal at step {self.k}"
                )
        return self

    def identity_gap(self):
        """Max entrywise deviation of approx + residual from the input."""
        return float(np.max(np.abs(self.approx + self.residual - self.matrix)))


class OracleFactorization:
    """Budgeted engine: k factor rows plus the residual diagonal.

    Consumes n reads up front (the diagonal) and n reads per step (one
    column), never more. The approximation is F^T F for the (k, n) row
    stack F.
    """

    def __init__(self, oracle_or_matrix, *, active_tol=ACTIVE_TOL):
        if isinstance(oracle_or_matrix, EntryOracle):
            self.oracle = oracle_or_matrix
        else:
            self.oracle = EntryOracle.from_matrix(oracle_or_matrix)
        self.diag = _prepare_diagonal(self.oracle.diagonal(), "matrix")
        self.rows = []
        self.pivots = []
        self.active_tol = float(active_tol)

    @property
    def n(self):
        return self.oracle.n

    @property
    def k(self):
        return len(self.pivots)

    @property
    def query_count(self):
        return self.oracle.query_count

    def trace(self):
        return float(self.diag.sum())

    def step(self, i):
        i = int(i)
        if not (0 <= i < self.n):
            raise IndexError(f"pivot index {i} out of range for n={self.n}")
        top = float(self.diag.max()) if self.diag.size else 0.0
        if top <= 0.0 or self.diag[i] <= self.active_tol * top:
            raise NoValidPivotError(
                f"index {i} is excluded: residual diagonal {float(self.diag[i]):.3e}"
            )
        col = self.oracle.column(i)
        if self.rows:
            f = np.asarray(self.rows)
            col = col - f.T @ f[:, i]
        row = col / math.sqrt(float(self.diag[i]))
        self.rows.append(row)
        self.diag = np.maximum(self.diag - row * row, 0.0)
        self.diag[i] = 0.0
        self.pivots.append(i)
        return self

    def factor(self):
        """The (k, n) stack of factor rows."""
        if not self.rows:
            return np.zeros((0, self.n))
        return np.asarray(self.rows)

    def approximation(self):
        """F^T F, the rank-k approximation accumulated so far."""
        f = self.factor()
        if f.shape[0] == 0:
            return np.zeros((self.n, self.n))
        return f.T @ f


@dataclass
class RunReport:
    """Per-run record: pivots, per-step residual norms, and final/initial ratios."""

    rule: str
    seed: int | None
    n: int
    k: int
    pivots: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    ratios: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "rule": self.rule,
            "seed": self.seed,
            "n": self.n,
            "k": self.k,
            "pivots": [int(p) for p in self.pivots],
            "steps": [dict(s) for s in self.steps],
            "ratios": dict(self.ratios),
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            rule=data["rule"],
            seed=data["seed"],
            n=int(data["n"]),
            k=int(data["k"]),
            pivots=[int(p) for p in data["pivots"]],
            steps=[dict(s) for s in data["steps"]],
            ratios=dict(data["ratios"]),
        )


def _norm_values(engine, norms):
    out = {}
    for name in norms:
        if name == "trace":
            out[name] = engine.trace()
        elif name == "frobenius":
            out[name] = math.sqrt(engine.frobenius_sq())
        else:
            out[name] = engine.operator_norm()
    return out


def run(
    matrix_or_oracle,
    rule,
    k,
    *,
    rng=None,
    seed=None,
    engine="dense",
    norms=NORM_NAMES,
    active_tol=ACTIVE_TOL,
    runtime_checks=True,
):
    """Run ``k`` pivot/downdate cycles and report per-step residual norms.

    ``engine`` is ``"dense"`` (full matrices, any norms, any rule) or
    ``"factored"`` (entry-budgeted; trace norm only, and no rule that needs
    residual row norms). Stops early if the active set empties; the report's
    ``k`` is the number of steps actually taken. ``rng`` takes precedence
    over ``seed``; the seed is recorded in the report either way.
    """
    rule = as_rule(rule)
    norms = tuple(norms)
    for name in norms:
        if name not in NORM_NAMES:
            raise ValueError(f"unknown norm {name!r}; choose from {NORM_NAMES}")
    if not norms:
        raise ValueError("at least one norm must be requested")
    if rng is None:
        rng = make_rng(seed)

    if engine == "dense":
        if isinstance(matrix_or_oracle, EntryOracle):
            raise ValueError("the dense engine needs an explicit matrix, not an entry oracle")
        eng = DenseFactorization(
            matrix_or_oracle, active_tol=active_tol, runtime_checks=runtime_checks
        )
        track_rows = needs_row_norms(rule)
    elif engine == "factored":
        if any(name != "trace" for name in norms):
            raise MissingInformationError(
                "the factored engine only tracks the residual diagonal; request trace only"
            )
        if needs_row_norms(rule):
            raise MissingInformationError(
                f"rule {rule_name(rule)} needs residual row norms; use the dense engine"
            )
        eng = OracleFactorization(matrix_or_oracle, active_tol=active_tol)
        track_rows = False
    else:
        raise ValueError(f"unknown engine {engine!r}; choose 'dense' or 'factored'")

    n = eng.n
    k = int(k)
    if not (0 <= k <= n):
        raise ValueError(f"step count k={k} must satisfy 0 <= k <= n={n}")

    initial = _norm_values(eng, norms)
    steps = [{"k": 0, **initial}]
    for j in range(k):
        diag = eng.diagonal() if engine == "dense" else eng.diag
        if not active_mask(diag, active_tol).any():
            break
        ctx = PivotContext(
            diag=diag,
            row_norms=eng.row_norms() if track_rows else None,
            step_index=j,
            active_tol=active_tol,
        )
        eng.step(select_pivot(rule, ctx, rng))
        steps.append({"k": eng.k, **_norm_values(eng, norms)})

    if engine == "factored" and eng.query_count > (eng.k + 1) * n:
        raise RuntimeError(
            f"entry budget exceeded: {eng.query_count} reads after {eng.k} steps on n={n}"
        )

    ratios = {}
    for name in norms:
        start = initial[name]
        final = steps[-1][name]
        ratios[name] = final / start if start > 0.0 else 0.0
        if not (-1e-12 <= ratios[name] <= 1.0 + 1e-9):
            raise RuntimeError(f"{name} ratio {ratios[name]!r} outside [0, 1]")

    return RunReport(
        rule=rule_name(rule),
        seed=seed,
        n=n,
        k=eng.k,
        pivots=list(eng.pivots),
        steps=steps,
        ratios=ratios,
    )


def factorize(matrix_or_oracle, rule, k, *, rng=None, seed=None, active_tol=ACTIVE_TOL):
    """Budgeted factorization without norm tracking; returns the engine state."""
    rule = as_rule(rule)
    if needs_row_norms(rule):
        raise MissingInformationError(
            f"rule {rule_name(rule)} needs residual row norms; use the dense engine"
        )
    if rng is None:
        rng = make_rng(seed)
    eng = OracleFactorization(matrix_or_oracle, active_tol=active_tol)
    k = int(k)
    if not (0 <= k <= eng.n):
        raise ValueError(f"step count k={k} must satisfy 0 <= k <= n={eng.n}")
    for j in range(k):
        if not active_mask(eng.diag, active_tol).any():
            break
        ctx = PivotContext(diag=eng.diag, step_index=j, active_tol=active_tol)
        eng.step(select_pivot(rule, ctx, rng))
    return eng


def engines_agree(a, rule, k, seed, *, active_tol=ACTIVE_TOL):
    """Run both engines on identical streams and compare.

    Raises EngineMismatchError on the first divergent pivot or on residual
    diagonals drifting apart; otherwise returns ``(agree, deviation)`` where
    ``deviation`` is the Frobenius distance between the two approximations
    and ``agree`` tests it against 1e-8 times the input's Frobenius norm.
    """
    a = check_symmetric(as_matrix(a))
    rule = as_rule(rule)
    if needs_row_norms(rule):
        raise MissingInformationError("rules needing row norms run on the dense engine only")
    dense = DenseFactorization(a, active_tol=active_tol)
    fact = OracleFactorization(EntryOracle.from_matrix(a), active_tol=active_tol)
    rng_dense = make_rng(seed)
    rng_fact = make_rng(seed)
    n = a.shape[0]
    diag_tol = 1e-9 * max(float(np.max(np.diagonal(a))) if n else 0.0, np.finfo(float).tiny)

    for step in range(int(k)):
        d1 = dense.diagonal()
        d2 = fact.diag
        gap = float(np.max(np.abs(d1 - d2))) if n else 0.0
        if gap > diag_tol:
            raise EngineMismatchError(
                f"residual diagonals diverged at step {step}: max gap {gap:.3e}", step=step
            )
        active1 = active_mask(d1, active_tol).any()
        active2 = active_mask(d2, active_tol).any()
        if active1 != active2:
            raise EngineMismatchError(f"active sets diverged at step {step}", step=step)
        if not active1:
            break
        i1 = select_pivot(rule, PivotContext(d1, step_index=step, active_tol=active_tol), rng_dense)
        i2 = select_pivot(rule, PivotContext(d2, step_index=step, active_tol=active_tol), rng_fact)
        if i1 != i2:
            raise EngineMismatchError(
                f"pivot sequences diverged at step {step}: dense chose {i1}, factored {i2}",
                step=step,
            )
        dense.step(i1)
        fact.step(i2)

    if fact.query_count > (fact.k + 1) * n:
        raise RuntimeError(f"entry budget exceeded: {fact.query_count} reads for k={fact.k}")
    deviation = frobenius_norm(dense.approx - fact.approximation())
    agree = deviation <= 1e-8 * frobenius_norm(a)
    return agree, float(deviation)
