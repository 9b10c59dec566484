"""Randomized sweeps checking the library's mathematical contracts.

Each check runs over a seeded suite of psd matrices (full-rank, rank
deficient, diagonal, badly scaled) and reports its worst observed margin.
A failing check carries the offending matrix so the caller can persist it.
"""

from dataclasses import dataclass

import numpy as np

from . import analysis
from .cholesky import engines_agree
from .generators import gaussian_kernel, random_spd_spectrum, spiral_points
from .linalg import frobenius_norm_sq, schatten_norm, sym_eigenvalues, trace
from .pivoting import parse_rule
from .rng import make_rng, weighted_sample_many

# 99.9% chi-squared quantiles by degrees of freedom.
CHI2_Q999 = {
    1: 10.828,
    2: 13.816,
    3: 16.266,
    4: 18.467,
    5: 20.515,
    6: 22.458,
    7: 24.322,
    8: 26.124,
    9: 27.877,
}

EQUIVALENCE_RULES = (
    "uniform",
    "gibbs:1",
    "gibbs:2",
    "gibbs:20",
    "greedy:last",
    "greedy:random",
    "alt:greedy:last+uniform",
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    detail: str
    failure: object = None


def random_psd(rng, n, kind=None):
    """One psd test matrix; ``kind`` draws from a mix when unset."""
    kinds = ("wishart", "lowrank", "spectrum", "spectrum_deficient", "diagonal", "scaled")
    if kind is None:
        kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "wishart":
        g = rng.standard_normal((n, n + int(rng.integers(0, n + 1))))
        a = g @ g.T / n
    elif kind == "lowrank":
        r = int(rng.integers(1, n + 1))
        g = rng.standard_normal((n, r))
        a = g @ g.T / n
    elif kind == "spectrum":
        vals = rng.random(n) * 10.0
        a = random_spd_spectrum(n, vals, rng)
    elif kind == "spectrum_deficient":
        vals = rng.random(n) * 10.0
        vals[rng.random(n) < 0.3] = 0.0
        if not np.any(vals > 0.0):
            vals[0] = 1.0
        a = random_spd_spectrum(n, vals, rng)
    elif kind == "diagonal":
        vals = rng.random(n) * 5.0
        vals[rng.random(n) < 0.25] = 0.0
        if not np.any(vals > 0.0):
            vals[0] = 1.0
        a = np.diag(vals)
    elif kind == "scaled":
        g = rng.standard_normal((n, n))
        a = (g @ g.T / n) * 10.0 ** int(rng.integers(-6, 7))
    else:
        raise ValueError(f"unknown matrix kind {kind!r}")
    return 0.5 * (a + a.T)


def sweep_matrices(rng, sizes, count):
    sizes = tuple(int(s) for s in sizes)
    return [random_psd(rng, sizes[j % len(sizes)]) for j in range(count)]


def random_distribution(a, rng):
    """Random probability vector supported on the active diagonal."""
    from .pivoting import active_mask

    mask = active_mask(np.diagonal(a))
    p = np.zeros(a.shape[0])
    p[mask] = rng.random(int(mask.sum())) + 1e-3
    return p / p.sum()


def check_expected_frobenius_identity(matrices, rng, dists_per=5):
    """Closed-form expected squared Frobenius norm vs the enumeration oracle."""
    worst = 0.0
    for a in matrices:
        for _ in range(dists_per):
            p = random_distribution(a, rng)
            closed = analysis.expected_frobenius_sq(a, p)
            enum = analysis.enumerate_expected(a, p).frobenius_sq
            tol = 1e-10 * (1.0 + frobenius_norm_sq(a))
            err = abs(closed - enum) / tol
            if err > worst:
                worst = err
            if err > 1.0:
                return CheckResult(
                    "expected-frobenius-identity", False, worst,
                    f"closed form {closed!r} vs enumeration {enum!r}", failure=a,
                )
    return CheckResult(
        "expected-frobenius-identity", True, worst,
        f"worst |closed-enum| at {worst:.2e} of tolerance",
    )


def _is_diagonal(a):
    return float(np.max(np.abs(a - np.diag(np.diagonal(a))))) == 0.0


def check_third_moment_gap(matrices):
    """Gap A_ii (A^3)_ii - |A_i|^4 nonnegative; exactly zero for diagonals."""
    worst = 0.0
    for a in matrices:
        vals = sym_eigenvalues(a)
        scale = 1.0 + max(float(vals[0]), 0.0) ** 4
        gaps = analysis.third_moment_gap(a)
        low = float(np.min(gaps)) if gaps.size else 0.0
        margin = -low / (1e-9 * scale)
        if margin > worst:
            worst = margin
        if low < -1e-9 * scale:
            return CheckResult(
                "third-moment-gap", False, worst,
                f"gap {low:.3e} below -1e-9*scale", failure=a,
            )
        if _is_diagonal(a) and float(np.max(np.abs(gaps))) > 1e-12 * scale:
            return CheckResult(
                "third-moment-gap", False, worst,
                "diagonal matrix gap not zero", failure=a,
            )
    return CheckResult(
        "third-moment-gap", True, worst,
        f"worst negative excursion at {worst:.2e} of tolerance",
    )


def check_beta2_chain(matrices):
    """Four-term bound chain for squared-diagonal sampling; tight for diagonals."""
    worst = 0.0
    for a in matrices:
        if not np.any(np.diagonal(a) > 0.0):
            continue
        report = analysis.beta2_chain(a)
        if not report.ok:
            return CheckResult(
                "beta2-bound-chain", False, 1.0,
                f"chain violated: {list(zip(report.labels, report.values))}", failure=a,
            )
        tightness = abs(report.values[2] - report.values[0])
        if _is_diagonal(a) and tightness > 1e-12 * report.scale:
            return CheckResult(
                "beta2-bound-chain", False, tightness,
                "diagonal input but expected != row-norm bound", failure=a,
            )
        slack = min(report.slacks)
        if -slack / (1e-9 * report.scale) > worst:
            worst = -slack / (1e-9 * report.scale)
    return CheckResult(
        "beta2-bound-chain", True, worst,
        f"worst link slack at {worst:.2e} of tolerance",
    )


def check_beta1_map(matrices):
    """Closed-form expected residual and trace under beta=1 vs enumeration."""
    worst = 0.0
    for a in matrices:
        t = trace(a)
        if t <= 0.0:
            continue
        p = analysis.diag_power_distribution(a, 1.0)
        enum = analysis.enumerate_expected(a, p)
        closed = analysis.beta1_expected_residual(a)
        gap = float(np.max(np.abs(closed - enum.residual)))
        tol = 1e-10 * max(np.sqrt(frobenius_norm_sq(a)), np.finfo(float).tiny)
        if gap / tol > worst:
            worst = gap / tol
        if gap > tol:
            return CheckResult(
                "beta1-expectation", False, worst,
                f"entrywise gap {gap:.3e} above {tol:.3e}", failure=a,
            )
        tr_closed = analysis.beta1_expected_trace(a)
        tr_gap = abs(tr_closed - trace(closed))
        if tr_gap > 1e-12 * t:
            return CheckResult(
                "beta1-expectation", False, worst,
                f"trace identity off by {tr_gap:.3e}", failure=a,
            )
        n = a.shape[0]
        if tr_closed > (1.0 - 1.0 / n) * t + 1e-12 * t:
            return CheckResult(
                "beta1-expectation", False, worst,
                "expected trace above the (1-1/n) bound", failure=a,
            )
    return CheckResult(
        "beta1-expectation", True, worst,
        f"worst entrywise gap at {worst:.2e} of tolerance",
    )


def check_single_pivot_bounds(matrices):
    """Per-index double bound after a deterministic pivot."""
    from .pivoting import active_mask

    worst = 0.0
    for a in matrices:
        for i in np.flatnonzero(active_mask(np.diagonal(a))):
            report = analysis.single_pivot_bounds(a, int(i))
            if not report.ok:
                return CheckResult(
                    "single-pivot-bounds", False, 1.0,
                    f"index {int(i)}: {list(zip(report.labels, report.values))}", failure=a,
                )
            slack = min(report.slacks)
            if -slack / (1e-9 * report.scale) > worst:
                worst = -slack / (1e-9 * report.scale)
    return CheckResult(
        "single-pivot-bounds", True, worst,
        f"worst link slack at {worst:.2e} of tolerance",
    )


def check_norm_ratio_pivot(matrices):
    """The row-norm-ratio pivot achieves the flat (1-1/n) contraction."""
    worst = 0.0
    for a in matrices:
        if not np.any(np.diagonal(a) > 0.0):
            continue
        _, report = analysis.best_norm_ratio_pivot(a)
        if not report.ok:
            return CheckResult(
                "norm-ratio-pivot", False, 1.0,
                f"{list(zip(report.labels, report.values))}", failure=a,
            )
        slack = min(report.slacks)
        if -slack / (1e-9 * report.scale) > worst:
            worst = -slack / (1e-9 * report.scale)
    return CheckResult(
        "norm-ratio-pivot", True, worst,
        f"worst slack at {worst:.2e} of tolerance",
    )


def check_diagonal_decay(rng, count):
    """Expected trace removal on diagonals is nondecreasing in beta."""
    betas = (0.0, 0.5, 1.0, 2.0, 5.0, 20.0, np.inf)
    worst = 0.0
    for _ in range(count):
        d = rng.random(int(rng.integers(2, 12))) * 0.95 + 0.05
        vals = [analysis.diagonal_decay(d, b) for b in betas]
        tol = 1e-12 * (1.0 + float(d.max()))
        for j in range(len(vals) - 1):
            drop = vals[j] - vals[j + 1]
            if drop / tol > worst:
                worst = drop / tol
            if drop > tol:
                return CheckResult(
                    "diagonal-decay-monotone", False, worst,
                    f"decay decreased between beta={betas[j]} and {betas[j + 1]}",
                    failure=np.diag(d),
                )
    return CheckResult(
        "diagonal-decay-monotone", True, worst,
        f"worst drop at {worst:.2e} of tolerance",
    )


def check_engine_equivalence(rng, count):
    """Dense and factored engines agree on pivots and approximations."""
    worst = 0.0
    for j in range(count):
        n = int(rng.integers(8, 41))
        a = random_psd(rng, n)
        rule = parse_rule(EQUIVALENCE_RULES[j % len(EQUIVALENCE_RULES)])
        k = max(1, n // 2)
        seed = int(rng.integers(0, 2**31))
        agree, deviation = engines_agree(a, rule, k, seed)
        scale = max(np.sqrt(frobenius_norm_sq(a)), np.finfo(float).tiny)
        if deviation / (1e-8 * scale) > worst:
            worst = deviation / (1e-8 * scale)
        if not agree:
            return CheckResult(
                "engine-equivalence", False, worst,
                f"approximations differ by {deviation:.3e}", failure=a,
            )
    return CheckResult(
        "engine-equivalence", True, worst,
        f"worst deviation at {worst:.2e} of tolerance",
    )


def check_core_invariants(matrices):
    """Trace/Frobenius/Schatten consistency for psd matrices."""
    worst = 0.0
    for a in matrices:
        t = trace(a)
        f2 = frobenius_norm_sq(a)
        scale = 1.0 + t
        if t < -1e-9 * scale:
            return CheckResult("core-invariants", False, 1.0, f"negative trace {t!r}", failure=a)
        if f2 > t * t + 1e-9 * (1.0 + t * t):
            return CheckResult(
                "core-invariants", False, 1.0,
                f"|A|_F^2 = {f2!r} above tr(A)^2 = {t * t!r}", failure=a,
            )
        s1 = schatten_norm(a, 1)
        gap = abs(s1 - t) / (1e-8 * scale)
        if gap > worst:
            worst = gap
        if gap > 1.0:
            return CheckResult(
                "core-invariants", False, worst,
                f"Schatten-1 {s1!r} vs trace {t!r}", failure=a,
            )
    return CheckResult(
        "core-invariants", True, worst,
        f"worst Schatten-1/trace gap at {worst:.2e} of tolerance",
    )


def check_spectrum_roundtrip(rng, seeds):
    """Prescribed-spectrum generator returns the prescribed eigenvalues."""
    worst = 0.0
    for _ in range(seeds):
        for n in (5, 50, 100):
            vals = np.sort(rng.random(n) * 10.0)[::-1]
            a = random_spd_spectrum(n, vals, rng)
            got = sym_eigenvalues(a)
            tol = 1e-8 * (1.0 + float(vals.max()))
            gap = float(np.max(np.abs(got - vals)))
            if gap / tol > worst:
                worst = gap / tol
            if gap > tol:
                return CheckResult(
                    "spectrum-roundtrip", False, worst,
                    f"n={n}: eigenvalue mismatch {gap:.3e}", failure=a,
                )
    return CheckResult(
        "spectrum-roundtrip", True, worst,
        f"worst eigenvalue gap at {worst:.2e} of tolerance",
    )


def check_kernel_psd(rng, count):
    """Gaussian kernel matrices are psd within tolerance."""
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(5, 40))
        pts = rng.standard_normal((n, 2)) * 20.0
        k = gaussian_kernel(pts, bandwidth=1000.0)
        low = float(sym_eigenvalues(k)[-1])
        if -low / (1e-9 * n) > worst:
            worst = -low / (1e-9 * n)
        if low < -1e-9 * n:
            return CheckResult(
                "kernel-psd", False, worst, f"min eigenvalue {low:.3e}", failure=k,
            )
    pts = spiral_points(n_total=120, cluster_split=(60, 60), rng=rng)
    k = gaussian_kernel(pts)
    low = float(sym_eigenvalues(k)[-1])
    if low < -1e-9 * pts.count:
        return CheckResult("kernel-psd", False, -low / (1e-9 * pts.count),
                           f"spiral kernel min eigenvalue {low:.3e}", failure=k)
    return CheckResult(
        "kernel-psd", True, worst,
        f"worst min-eigenvalue excursion at {worst:.2e} of tolerance",
    )


def check_weighted_sampling(rng, vectors=10, draws=100_000):
    """Chi-squared goodness of fit for probability-proportional sampling."""
    worst = 0.0
    for _ in range(vectors):
        m = int(rng.integers(4, 10))
        w = rng.random(m) + 0.05
        idx = weighted_sample_many(w, rng, draws)
        counts = np.bincount(idx, minlength=m).astype(float)
        expected = w / w.sum() * draws
        stat = float(np.sum((counts - expected) ** 2 / expected))
        quantile = CHI2_Q999[m - 1]
        if stat / quantile > worst:
            worst = stat / quantile
        if stat > quantile:
            return CheckResult(
                "weighted-sampling-chi2", False, worst,
                f"chi2 {stat:.2f} above the 99.9% quantile {quantile}", failure=w,
            )
    return CheckResult(
        "weighted-sampling-chi2", True, worst,
        f"worst chi2 at {worst:.2e} of the 99.9% quantile",
    )


def check_dense_matches_enumeration(matrices, rng):
    """A dense step with pivot i reproduces the indicator-distribution expectation."""
    from .cholesky import DenseFactorization
    from .pivoting import active_mask

    worst = 0.0
    for a in matrices:
        actives = np.flatnonzero(active_mask(np.diagonal(a)))
        if actives.size == 0:
            continue
        i = int(actives[int(rng.integers(actives.size))])
        expected = analysis.enumerate_expected(
            a, analysis.indicator_distribution(a.shape[0], i)
        ).residual
        eng = DenseFactorization(a)
        eng.step(i)
        tol = 1e-12 * (1.0 + float(np.max(np.abs(a))))
        # The engine zeroes the pivoted row/column; mirror that on the oracle side.
        expected = expected.copy()
        expected[i, :] = 0.0
        expected[:, i] = 0.0
        gap = float(np.max(np.abs(eng.residual - expected)))
        if gap / tol > worst:
            worst = gap / tol
        if gap > tol:
            return CheckResult(
                "dense-step-vs-enumeration", False, worst,
                f"pivot {i}: residual gap {gap:.3e}", failure=a,
            )
    return CheckResult(
        "dense-step-vs-enumeration", True, worst,
        f"worst residual gap at {worst:.2e} of tolerance",
    )


def run_verify(sweep=200, seed=0):
    """Run every verification sweep; returns (results, all_passed).

    ``sweep`` scales suite sizes; 0 skips everything (no checks run).
    """
    if sweep <= 0:
        return [], True
    rng = make_rng(seed)
    small = sweep_matrices(rng, range(3, 13), sweep)
    chain = sweep_matrices(rng, (5, 20, 50), max(2, sweep // 2))
    results = [
        check_expected_frobenius_identity(small, rng),
        check_third_moment_gap(small),
        check_beta2_chain(chain),
        check_beta1_map(small),
        check_single_pivot_bounds(small),
        check_norm_ratio_pivot(chain),
        check_diagonal_decay(rng, max(2, sweep // 4)),
        check_engine_equivalence(rng, max(2, sweep // 4)),
        check_core_invariants(small),
        check_spectrum_roundtrip(rng, max(1, sweep // 10)),
        check_kernel_psd(rng, max(2, sweep // 20)),
        check_weighted_sampling(rng),
        check_dense_matches_enumeration(small, rng),
    ]
    return results, all(r.passed for r in results)
