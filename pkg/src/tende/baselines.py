"""Classical reference estimators used to cross-check the learned ones.

`gaussian_cmi` is exact for jointly Gaussian blocks and doubles as the
ground-truth oracle for the linear benchmark system.  `knn_cmi` is a
digamma/nearest-neighbor estimator (max-norm balls in the joint space,
marginal counts within the k-th-neighbor radius) that needs no model at
all.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .systems import TeDataset

__all__ = ["GaussianBlocks", "gaussian_cmi", "digamma", "knn_cmi", "knn_cmi_arrays"]

JITTER_AMPLITUDE = 1e-10


@dataclass(frozen=True)
class GaussianBlocks:
    """A joint covariance with disjoint index sets for the X/Y/Z blocks."""

    covariance: np.ndarray
    idx_x: tuple[int, ...]
    idx_y: tuple[int, ...]
    idx_z: tuple[int, ...]

    def __post_init__(self):
        cov = np.asarray(self.covariance, dtype=float)
        m = cov.shape[0]
        if cov.shape != (m, m) or not np.allclose(cov, cov.T, atol=1e-10):
            raise ValueError("covariance must be square and symmetric")
        if np.linalg.eigvalsh(cov)[0] <= 0:
            raise ValueError("covariance must be positive definite")
        all_idx = sorted((*self.idx_x, *self.idx_y, *self.idx_z))
        if all_idx != list(range(m)):
            raise ValueError("index sets must disjointly cover the covariance")
        object.__setattr__(self, "covariance", cov)


def _logdet(cov: np.ndarray, idx: Sequence[int]) -> float:
    if len(idx) == 0:
        return 0.0
    sign, val = np.linalg.slogdet(cov[np.ix_(idx, idx)])
    if sign <= 0:
        raise ValueError("covariance sub-block is not positive definite")
    return val


def gaussian_cmi(blocks: GaussianBlocks) -> float:
    """Exact conditional mutual information of jointly Gaussian blocks:
    0.5 * log(det S_xz * det S_yz / (det S_z * det S_xyz))."""
    cov = blocks.covariance
    xz = (*blocks.idx_x, *blocks.idx_z)
    yz = (*blocks.idx_y, *blocks.idx_z)
    xyz = (*blocks.idx_x, *blocks.idx_y, *blocks.idx_z)
    return 0.5 * (_logdet(cov, xz) + _logdet(cov, yz)
                  - _logdet(cov, blocks.idx_z) - _logdet(cov, xyz))


def digamma(x):
    """Digamma for positive arguments via recurrence plus the asymptotic
    series; absolute error below 1e-10 for x >= 1."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x).copy()
    if np.any(x <= 0):
        raise ValueError("digamma defined here for positive arguments only")
    acc = np.zeros_like(x)
    small = x < 8.0
    while np.any(small):
        acc[small] -= 1.0 / x[small]
        x[small] += 1.0
        small = x < 8.0
    inv2 = 1.0 / (x * x)
    tail = inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 / 240)))
    res = acc + np.log(x) - 0.5 / x - tail
    return float(res[0]) if scalar else res


def _digamma_combination(k: int, n_yz, n_xz, n_z) -> float:
    return float(digamma(k)
                 - np.mean(digamma(np.asarray(n_yz) + 1)
                           + digamma(np.asarray(n_xz) + 1)
                           - digamma(np.asarray(n_z) + 1)))


def _strict_count(points: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Neighbors strictly inside the per-point max-norm radius, self excluded."""
    tree = cKDTree(points)
    counts = tree.query_ball_point(points, np.nextafter(radii, 0.0),
                                   p=np.inf, return_length=True)
    return np.asarray(counts) - 1


def knn_cmi_arrays(a: np.ndarray, b: np.ndarray, c: np.ndarray,
                   k_neighbors: int = 5) -> float:
    """I(A; B | C) from samples, using max-norm k-th-neighbor statistics."""
    a, b, c = (np.atleast_2d(np.asarray(v, dtype=float)) for v in (a, b, c))
    n = a.shape[0]
    if k_neighbors < 1:
        raise ValueError("k_neighbors must be >= 1")
    if n <= k_neighbors:
        raise ValueError("need more samples than neighbors")
    joint = np.concatenate([a, b, c], axis=1)
    tree = cKDTree(joint)
    dist, _ = tree.query(joint, k=k_neighbors + 1, p=np.inf)
    eps = dist[:, k_neighbors]
    if np.any(eps == 0.0):
        # duplicate rows give zero radii; break ties with a tiny jitter
        jit = np.random.default_rng(0).uniform(-JITTER_AMPLITUDE, JITTER_AMPLITUDE,
                                               size=joint.shape)
        joint = joint + jit
        a = joint[:, :a.shape[1]]
        b = joint[:, a.shape[1]:a.shape[1] + b.shape[1]]
        c = joint[:, a.shape[1] + b.shape[1]:]
        tree = cKDTree(joint)
        dist, _ = tree.query(joint, k=k_neighbors + 1, p=np.inf)
        eps = dist[:, k_neighbors]
    n_ac = _strict_count(np.concatenate([a, c], axis=1), eps)
    n_bc = _strict_count(np.concatenate([b, c], axis=1), eps)
    n_c = _strict_count(c, eps) if c.shape[1] else np.full(n, n - 1)
    return _digamma_combination(k_neighbors, n_ac, n_bc, n_c)


def knn_cmi(dataset: TeDataset, k_neighbors: int = 5) -> float:
    """Model-free estimate of I(target future; source past | target past)."""
    return knn_cmi_arrays(dataset.y, dataset.x, dataset.z, k_neighbors)
