"""Planar point-set primitives.

Points are stored as complex numbers. Every routine that compares a
distance against a radius takes its distances from :func:`pairwise_distances`
so that candidate radii and thresholds agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import EmptyInput, ValidationError

MERGE_TOL = 1e-12


def as_points(points) -> np.ndarray:
    """Coerce complex numbers, ``[re, im]`` pairs or a :class:`PointSet`
    into a 1-d complex array."""
    if isinstance(points, PointSet):
        return points.z
    arr = np.asarray(points)
    if arr.ndim == 2 and arr.shape[1] == 2 and not np.iscomplexobj(arr):
        z = arr[:, 0].astype(float) + 1j * arr[:, 1].astype(float)
    else:
        z = np.asarray(arr, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(z)):
        raise ValidationError("point coordinates must be finite")
    return z


def merge_labels(z: np.ndarray, tol: float = MERGE_TOL) -> np.ndarray:
    """Label points so that points within ``tol`` (transitively) share a label.

    Labels are numbered in order of first occurrence.
    """
    z = as_points(z)
    if len(z) == 0:
        return np.zeros(0, dtype=int)
    d = np.abs(z[:, None] - z[None, :])
    _, raw = connected_components(csr_matrix(d <= tol), directed=False)
    order = {}
    labels = np.empty(len(z), dtype=int)
    for i, c in enumerate(raw):
        labels[i] = order.setdefault(c, len(order))
    return labels


@dataclass(frozen=True)
class PointSet:
    """Finite planar point set with duplicates merged."""

    z: np.ndarray

    def __init__(self, points, tol: float = MERGE_TOL):
        z = as_points(points)
        if len(z) == 0:
            raise EmptyInput("point set must be nonempty")
        labels = merge_labels(z, tol)
        first = [int(np.flatnonzero(labels == k)[0]) for k in range(labels.max() + 1)]
        z = z[first].copy()
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    def __len__(self):
        return len(self.z)

    def to_json(self):
        return [[float(p.real), float(p.imag)] for p in self.z]


def pairwise_distances(X, Y) -> np.ndarray:
    """Matrix of Euclidean distances ``|x_i - y_j|``."""
    x, y = as_points(X), as_points(Y)
    if len(x) == 0 or len(y) == 0:
        raise EmptyInput("pairwise_distances needs nonempty inputs")
    return np.abs(x[:, None] - y[None, :])


def within_radius(A, X, Y, r: float) -> np.ndarray:
    """Indices ``j`` of ``Y`` with ``min_{i in A} |x_i - y_j| <= r``.

    Uses the closed threshold: for finite sets the infimum over open
    dilations is attained at the jump, which is where ``<=`` switches on.
    """
    A = np.asarray(sorted(A), dtype=int)
    if len(A) == 0:
        return np.zeros(0, dtype=int)
    d = pairwise_distances(as_points(X)[A], Y)
    return np.flatnonzero(d.min(axis=0) <= r)


def directed_hausdorff(Y, X) -> float:
    """``sup_{y in Y} dist(y, X)``."""
    return float(pairwise_distances(Y, X).min(axis=1).max())


def hausdorff(X, Y) -> float:
    d = pairwise_distances(X, Y)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def eps_components(X, eps: float) -> list[list[int]]:
    """Blocks of the transitive closure of ``|x_i - x_j| <= eps``.

    Blocks are sorted internally and ordered by their smallest index.
    """
    if eps <= 0:
        raise ValidationError("eps must be positive")
    x = as_points(X)
    d = pairwise_distances(x, x)
    n, labels = connected_components(csr_matrix(d <= eps), directed=False)
    blocks = [sorted(np.flatnonzero(labels == k).tolist()) for k in range(n)]
    return sorted(blocks, key=lambda b: b[0])


def is_connected(X, eps: float) -> bool:
    return len(eps_components(X, eps)) == 1


def set_distance(X, Y) -> float:
    """``min |x - y|`` over both sets."""
    return float(pairwise_distances(X, Y).min())
