"""Pivot-selection rules: diagonal-power sampling, greedy, alternating, and row-norm ratio."""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import MissingInformationError, NoValidPivotError
from .rng import weighted_sample
from .validation import ACTIVE_TOL

# Entries within this relative distance of the maximum count as tied.
TIE_REL = 1e-12


@dataclass(frozen=True)
class Uniform:
    """Uniform over the active set (diagonal power 0)."""


@dataclass(frozen=True)
class Gibbs:
    """Sample with probability proportional to the residual diagonal to the power ``beta``."""

    beta: float

    def __post_init__(self):
        b = float(self.beta)
        if math.isnan(b) or math.isinf(b) or b < 0.0:
            raise ValueError(f"beta must be finite and >= 0, got {self.beta!r}")
        object.__setattr__(self, "beta", b)


@dataclass(frozen=True)
class Greedy:
    """Largest residual diagonal; ties broken by ``tie_break`` ('last' or 'random')."""

    tie_break: str = "last"

    def __post_init__(self):
        if self.tie_break not in ("last", "random"):
            raise ValueError(f"tie_break must be 'last' or 'random', got {self.tie_break!r}")


@dataclass(frozen=True)
class DiagNormRatio:
    """Largest squared residual row norm over diagonal; needs row norms (dense engine)."""


@dataclass(frozen=True)
class Alternating:
    """Use ``first`` on even step indices and ``second`` on odd ones."""

    first: object = Greedy()
    second: object = Uniform()

    def __post_init__(self):
        for sub in (self.first, self.second):
            if isinstance(sub, Alternating):
                raise ValueError("alternating sub-rules must not themselves be alternating")
            if not isinstance(sub, (Uniform, Gibbs, Greedy, DiagNormRatio)):
                raise ValueError(f"not a pivot rule: {sub!r}")


PIVOT_RULE_TYPES = (Uniform, Gibbs, Greedy, Alternating, DiagNormRatio)


@dataclass
class PivotContext:
    """Per-step information a rule may consult.

    ``diag`` is always available; ``row_norms`` (residual row l2 norms) only
    when the dense engine drives the run.
    """

    diag: np.ndarray
    row_norms: np.ndarray | None = None
    step_index: int = 0
    active_tol: float = ACTIVE_TOL


def active_mask(diag, active_tol=ACTIVE_TOL):
    """Indices eligible for pivoting: diagonal above active_tol times the max."""
    d = np.asarray(diag, dtype=float)
    if d.size == 0:
        return np.zeros(0, dtype=bool)
    top = float(d.max())
    if top <= 0.0:
        return np.zeros(d.size, dtype=bool)
    return d > active_tol * top


def needs_row_norms(rule):
    if isinstance(rule, DiagNormRatio):
        return True
    if isinstance(rule, Alternating):
        return needs_row_norms(rule.first) or needs_row_norms(rule.second)
    return False


def _tied_with_max(values, mask):
    top = float(values[mask].max())
    return mask & (values >= top * (1.0 - TIE_REL))


def _norm_ratio_index(d, row_norms, mask):
    score = np.zeros(d.size)
    score[mask] = (row_norms[mask] ** 2) / d[mask]
    ties = _tied_with_max(score, mask)
    return int(np.flatnonzero(ties)[-1])


def selection_probabilities(rule, ctx):
    """Probability vector over indices induced by ``rule`` in ``ctx``.

    Deterministic rules yield indicator vectors; greedy with random tie-break
    yields a uniform law over the tied maxima.
    """
    d = np.asarray(ctx.diag, dtype=float)
    mask = active_mask(d, ctx.active_tol)
    if not mask.any():
        raise NoValidPivotError("no active diagonal entries")
    if isinstance(rule, Alternating):
        sub = rule.first if ctx.step_index % 2 == 0 else rule.second
        return selection_probabilities(sub, PivotContext(d, ctx.row_norms, ctx.step_index, ctx.active_tol))

    p = np.zeros(d.size)
    if isinstance(rule, Uniform):
        p[mask] = 1.0
    elif isinstance(rule, Gibbs):
        # Normalizing by the max keeps exp(beta * log) in range for large beta.
        ratios = d[mask] / d[mask].max()
        p[mask] = np.exp(rule.beta * np.log(ratios))
    elif isinstance(rule, Greedy):
        ties = _tied_with_max(d, mask)
        if rule.tie_break == "last":
            p[int(np.flatnonzero(ties)[-1])] = 1.0
        else:
            p[ties] = 1.0
    elif isinstance(rule, DiagNormRatio):
        if ctx.row_norms is None:
            raise MissingInformationError(
                "DiagNormRatio needs residual row norms; only the dense engine tracks them"
            )
        p[_norm_ratio_index(d, np.asarray(ctx.row_norms, dtype=float), mask)] = 1.0
    else:
        raise TypeError(f"unknown pivot rule: {rule!r}")
    return p / p.sum()


def select_pivot(rule, ctx, rng):
    """Choose the pivot index for the current step.

    Random rules consume exactly one uniform draw from ``rng``; deterministic
    rules consume none.
    """
    d = np.asarray(ctx.diag, dtype=float)
    mask = active_mask(d, ctx.active_tol)
    if not mask.any():
        raise NoValidPivotError("no active diagonal entries")
    if isinstance(rule, Alternating):
        sub = rule.first if ctx.step_index % 2 == 0 else rule.second
        return select_pivot(sub, PivotContext(d, ctx.row_norms, ctx.step_index, ctx.active_tol), rng)
    if isinstance(rule, Greedy):
        ties = _tied_with_max(d, mask)
        if rule.tie_break == "last":
            return int(np.flatnonzero(ties)[-1])
        return int(weighted_sample(ties.astype(float), rng))
    if isinstance(rule, DiagNormRatio):
        if ctx.row_norms is None:
            raise MissingInformationError(
                "DiagNormRatio needs residual row norms; only the dense engine tracks them"
            )
        return _norm_ratio_index(d, np.asarray(ctx.row_norms, dtype=float), mask)
    if isinstance(rule, (Uniform, Gibbs)):
        return int(weighted_sample(selection_probabilities(rule, ctx), rng))
    raise TypeError(f"unknown pivot rule: {rule!r}")


def rule_from_beta(beta):
    """Diagonal power to rule: 0 -> uniform, finite -> Gibbs, inf -> greedy (last)."""
    b = float(beta)
    if math.isnan(b) or b < 0.0:
        raise ValueError(f"beta must be >= 0, got {beta!r}")
    if b == 0.0:
        return Uniform()
    if math.isinf(b):
        return Greedy("last")
    return Gibbs(b)


def parse_rule(text):
    """Parse a rule spelling.

    Accepted: ``uniform``, ``gibbs:<beta>``, ``greedy:last``, ``greedy:random``,
    ``alt:<ruleA>+<ruleB>``, ``diagnormratio`` (plus bare ``greedy``/``alt``
    for the defaults).
    """
    s = str(text).strip().lower()
    if s == "uniform":
        return Uniform()
    if s == "diagnormratio":
        return DiagNormRatio()
    if s == "greedy":
        return Greedy("last")
    if s.startswith("greedy:"):
        kind = s.split(":", 1)[1]
        return Greedy(kind)
    if s.startswith("gibbs:"):
        raw = s.split(":", 1)[1]
        try:
            beta = float(raw)
        except ValueError:
            raise ValueError(f"invalid beta in {text!r}") from None
        return rule_from_beta(beta)
    if s == "alt":
        return Alternating()
    if s.startswith("alt:"):
        body = s.split(":", 1)[1]
        if "+" not in body:
            raise ValueError(f"alternating spelling needs '<ruleA>+<ruleB>', got {text!r}")
        left, right = body.split("+", 1)
        return Alternating(parse_rule(left), parse_rule(right))
    raise ValueError(f"unknown pivot rule spelling {text!r}")


def rule_name(rule):
    """Canonical spelling of a rule (inverse of parse_rule)."""
    if isinstance(rule, Uniform):
        return "uniform"
    if isinstance(rule, Gibbs):
        return f"gibbs:{rule.beta:g}"
    if isinstance(rule, Greedy):
        return f"greedy:{rule.tie_break}"
    if isinstance(rule, DiagNormRatio):
        return "diagnormratio"
    if isinstance(rule, Alternating):
        return f"alt:{rule_name(rule.first)}+{rule_name(rule.second)}"
    raise TypeError(f"unknown pivot rule: {rule!r}")


def as_rule(rule_or_text):
    """Accept a rule instance or a spelling string."""
    if isinstance(rule_or_text, PIVOT_RULE_TYPES):
        return rule_or_text
    if isinstance(rule_or_text, str):
        return parse_rule(rule_or_text)
    raise TypeError(f"expected a pivot rule or spelling, got {rule_or_text!r}")
