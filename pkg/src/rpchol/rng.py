"""Seeded pseudo-randomness (PCG64 streams) and probability-proportional sampling."""

import numpy as np

from .exceptions import NoValidPivotError


def make_rng(seed=None):
    """A deterministic 64-bit generator stream; passes Generators through unchanged."""
    return np.random.default_rng(seed)


def trial_rng(seed, trial):
    """Stream for trial ``trial``, derived as seed + trial index."""
    return np.random.default_rng(int(seed) + int(trial))


def stream_rng(*key):
    """Independent stream keyed by a tuple of integers."""
    return np.random.default_rng(tuple(int(k) for k in key))


def _cumulative(weights):
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty 1-D array")
    if not np.all(np.isfinite(w)) or np.any(w < 0.0):
        raise ValueError("weights must be finite and nonnegative")
    cum = np.cumsum(w)
    total = float(cum[-1])
    if total <= 0.0:
        raise NoValidPivotError("all sampling weights are zero")
    return w, cum, total


def weighted_sample(weights, rng):
    """One index with probability proportional to its weight.

    Cumulative-sum inversion of a single uniform draw; zero-weight indices are
    never returned.
    """
    w, cum, total = _cumulative(weights)
    idx = int(np.searchsorted(cum, float(rng.random()) * total, side="right"))
    if idx >= w.size or w[idx] == 0.0:
        idx = int(np.flatnonzero(w)[-1])
    return idx


def weighted_sample_many(weights, rng, size):
    """Vectorised ``weighted_sample`` for statistics; same inversion, many uniforms."""
    w, cum, total = _cumulative(weights)
    idx = np.searchsorted(cum, rng.random(int(size)) * total, side="right")
    bad = (idx >= w.size) | (w[np.minimum(idx, w.size - 1)] == 0.0)
    if np.any(bad):
        idx[bad] = int(np.flatnonzero(w)[-1])
    return idx.astype(int)
