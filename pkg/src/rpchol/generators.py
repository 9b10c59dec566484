"""Test-matrix and point-cloud generators: Haar rotations, prescribed spectra, spiral kernels."""

from dataclasses import dataclass

import numpy as np

from .rng import make_rng

# Default coordinate scale for the spiral cloud. Keeps the low-t cluster well
# inside the kernel length scale (sqrt(1000) ~ 31.6) so it forms one tight,
# nearly rank-one block, while the sorted high-t tail stays pairwise-distant.
SPIRAL_SCALE = 0.005

SPIRAL_T_MAX = 64.0


@dataclass(frozen=True)
class PointSet:
    """Immutable planar point cloud; rows of ``points`` are (x, y)."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise ValueError(f"points must be a (count, 2) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def count(self):
        return self.points.shape[0]

    def to_csv(self, path):
        """Write ``x,y`` header plus one full-precision row per point."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("x,y\n")
            for x, y in self.points:
                fh.write(f"{x:.17g},{y:.17g}\n")

    @classmethod
    def from_csv(cls, path):
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != "x,y":
                raise ValueError(f"expected header 'x,y', got {header!r}")
            rows = []
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                x, y = line.split(",")
                rows.append((float(x), float(y)))
        return cls(np.array(rows, dtype=float))


def random_orthogonal(n, rng):
    """Haar-distributed orthogonal matrix: QR of an iid Gaussian with the
    signs of R's diagonal folded into Q's columns."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    rng = make_rng(rng)
    z = rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    signs = np.where(np.diagonal(r) < 0.0, -1.0, 1.0)
    return q * signs


def random_spd_spectrum(n, f, rng):
    """Symmetric psd matrix Q^T diag(f(1),...,f(n)) Q with Haar Q.

    ``f`` is either a callable on 1-based indices or an explicit length-n
    sequence of nonnegative values.
    """
    if callable(f):
        values = np.array([float(f(i)) for i in range(1, n + 1)])
    else:
        values = np.asarray(f, dtype=float)
        if values.shape != (n,):
            raise ValueError(f"spectrum must have length {n}, got shape {values.shape}")
    if np.any(values < 0.0) or not np.all(np.isfinite(values)):
        raise ValueError("spectrum values must be finite and nonnegative")
    q = random_orthogonal(n, rng)
    a = q.T @ (values[:, None] * q)
    return 0.5 * (a + a.T)


def spiral_points(
    n_total=500,
    cluster_split=(250, 250),
    t_ranges=((0.0, 6.0), (6.0, 64.0)),
    scale=SPIRAL_SCALE,
    rng=None,
):
    """Two-cluster sample along the curve t -> (e^t cos t, e^t sin t).

    Cluster 1 draws t uniformly from the first range. Cluster 2 maps uniform
    u through t = hi - (hi - lo) * u**2 and sorts ascending, so spatial gaps
    between consecutive points grow toward the end of the index range: the
    final indices are mutually distant while cluster 1 stays tight.
    """
    n1, n2 = cluster_split
    if n1 < 0 or n2 < 0 or n1 + n2 != n_total:
        raise ValueError(f"cluster_split {cluster_split} must be nonnegative and sum to {n_total}")
    if n_total < 1:
        raise ValueError("n_total must be >= 1")
    for lo, hi in t_ranges:
        if not (0.0 <= lo <= hi <= SPIRAL_T_MAX):
            raise ValueError(f"t range ({lo}, {hi}) must satisfy 0 <= lo <= hi <= {SPIRAL_T_MAX}")
    if not (np.isfinite(scale) and scale > 0.0):
        raise ValueError(f"scale must be positive, got {scale}")

    rng = make_rng(rng)
    (lo1, hi1), (lo2, hi2) = t_ranges
    t1 = rng.uniform(lo1, hi1, n1)
    u = rng.random(n2)
    t2 = np.sort(hi2 - (hi2 - lo2) * u * u)
    t = np.concatenate([t1, t2])
    radial = scale * np.exp(t)
    return PointSet(np.column_stack((radial * np.cos(t), radial * np.sin(t))))


def gaussian_kernel(pts, bandwidth=1000.0):
    """Gaussian kernel matrix exp(-|x_i - x_j|^2 / bandwidth) with unit diagonal."""
    if not (np.isfinite(bandwidth) and bandwidth > 0.0):
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    x = pts.points if isinstance(pts, PointSet) else np.asarray(pts, dtype=float)
    diff = x[:, None, :] - x[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    k = np.exp(-sq / bandwidth)
    np.fill_diagonal(k, 1.0)
    return k
