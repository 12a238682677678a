"""Kernel functions on 3-component feature vectors.

Three kinds are available:

``rbf3``
    Gaussian RBF, ``exp(-||u - v||^2 / (2 sigma^2))``.
``centroid``
    Rank-one product kernel ``phi(u) * phi(v)`` with
    ``phi(u) = exp(-||u - g||^2 / (2 sigma^2))``, where ``g`` is the
    center of gravity of the training vectors.
``linear``
    Plain dot product; used for analytic solver checks.

Feature vectors are numpy arrays of shape ``(3,)``; collections of them are
``(n, 3)`` arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

KINDS = ("rbf3", "centroid", "linear")

# rows of the left operand processed per block in kernel_matrix
_BLOCK = 2048


def as_vectors(vectors) -> np.ndarray:
    """Coerce input to a finite float64 ``(n, 3)`` array."""
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"feature vectors must have shape (n, 3), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("feature vectors must be finite")
    return arr


@dataclass(frozen=True)
class KernelSpec:
    """Kernel kind plus its parameters.

    ``centroid`` may be left as ``None`` for a centroid kernel that has not
    been fitted yet; :func:`svmedge.svmcore.train` fills it in. Evaluating
    an unfitted centroid kernel raises ``ValueError``.
    """

    kind: str = "rbf3"
    sigma: float = 0.6
    centroid: Optional[tuple[float, float, float]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {KINDS}")
        sigma = float(self.sigma)
        if not (np.isfinite(sigma) and sigma > 0):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma!r}")
        object.__setattr__(self, "sigma", sigma)
        if self.centroid is not None:
            if self.kind != "centroid":
                raise ValueError("a centroid is only meaningful for the centroid kernel")
            g = tuple(float(c) for c in np.asarray(self.centroid, dtype=float).ravel())
            if len(g) != 3 or not all(np.isfinite(g)):
                raise ValueError("centroid must be three finite reals")
            object.__setattr__(self, "centroid", g)

    def with_centroid(self, centroid) -> "KernelSpec":
        return replace(self, centroid=tuple(np.asarray(centroid, dtype=float)))


def centroid_of(vectors) -> np.ndarray:
    """Component-wise mean (center of gravity) of a set of vectors."""
    arr = as_vectors(vectors)
    if arr.shape[0] == 0:
        raise ValueError("centroid of an empty set is undefined")
    return arr.mean(axis=0)


def radius_square(v, g) -> float:
    """Squared Euclidean distance between ``v`` and center ``g``."""
    d = np.asarray(v, dtype=float) - np.asarray(g, dtype=float)
    return float(np.sum(d * d))


def _sqdist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Explicit differences rather than the |a|^2 + |b|^2 - 2ab expansion:
    # keeps k(u, v) == k(v, u) bit-exact and k(u, u) == 1 exactly.
    d = a[:, None, :] - b[None, :, :]
    d *= d
    return d[..., 0] + d[..., 1] + d[..., 2]


def radial_map(spec: KernelSpec, vectors) -> np.ndarray:
    """``phi(u) = exp(-||u - g||^2 / (2 sigma^2))`` for each row of ``vectors``."""
    if spec.centroid is None:
        raise ValueError("centroid kernel has no fitted centroid")
    arr = as_vectors(vectors)
    d = arr - np.asarray(spec.centroid)
    d *= d
    r2 = d[:, 0] + d[:, 1] + d[:, 2]
    return np.exp(-r2 / (2.0 * spec.sigma ** 2))


def kernel_matrix(spec: KernelSpec, a, b=None) -> np.ndarray:
    """Kernel values ``K[i, j] = k(a[i], b[j])``; ``b`` defaults to ``a``."""
    a = as_vectors(a)
    b = a if b is None else as_vectors(b)
    if spec.kind == "linear":
        d = a[:, None, :] * b[None, :, :]
        return d[..., 0] + d[..., 1] + d[..., 2]
    if spec.kind == "centroid":
        return np.multiply.outer(radial_map(spec, a), radial_map(spec, b))
    gamma = 1.0 / (2.0 * spec.sigma ** 2)
    out = np.empty((a.shape[0], b.shape[0]))
    for start in range(0, a.shape[0], _BLOCK):
        stop = start + _BLOCK
        out[start:stop] = np.exp(-_sqdist(a[start:stop], b) * gamma)
    return out


def kernel_eval(spec: KernelSpec, u, v) -> float:
    """Evaluate the kernel on a single pair of feature vectors."""
    return float(kernel_matrix(spec, u, v)[0, 0])


def gram_matrix(spec: KernelSpec, vectors, labels) -> np.ndarray:
    """Label-signed Gram matrix ``H[i, j] = y_i y_j k(x_i, x_j)``."""
    x = as_vectors(vectors)
    y = np.asarray(labels, dtype=np.float64).ravel()
    if y.shape[0] != x.shape[0]:
        raise ValueError(f"{x.shape[0]} vectors but {y.shape[0]} labels")
    if x.shape[0] == 0:
        raise ValueError("gram matrix of an empty set")
    if not np.all(np.abs(y) == 1):
        raise ValueError("labels must be +1 or -1")
    return np.outer(y, y) * kernel_matrix(spec, x)
