"""Sphere normalization and the rotation-training losses.

All four losses measure, per row of the rotated embedding matrix Z, how far
the row is from its sign binarization; they average over rows and sum over
coordinates.  Binarization uses sign(0) = +1 throughout the package so that
codes always lie in {-1, +1}^k.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit, logsumexp, softmax

from .errors import DimensionMismatchError, MissingLabelsError, NonFiniteError, ZeroRowError
from .householder import NORM_FLOOR


class LossKind(Enum):
    """Which per-row quantization penalty the trainer minimizes."""

    L2 = "l2"
    L1 = "l1"
    MIN_ENTRY = "min-entry"
    BIT_VAR = "bit-var"


@dataclass(frozen=True)
class EmbeddingSet:
    """n x k continuous embeddings with optional per-item label-id sets."""

    data: np.ndarray
    labels: list | None = None

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, order="C")
        if arr.ndim != 2:
            raise DimensionMismatchError(f"embeddings must be 2-D, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        if self.labels is not None:
            if len(self.labels) != arr.shape[0]:
                raise DimensionMismatchError(
                    f"{len(self.labels)} label sets for {arr.shape[0]} rows"
                )
            sets = []
            for i, s in enumerate(self.labels):
                s = frozenset(int(v) for v in s)
                if not s:
                    raise MissingLabelsError(f"item {i} has an empty label set")
                if any(v < 0 for v in s):
                    raise ValueError(f"item {i} has a negative label id")
                sets.append(s)
            object.__setattr__(self, "labels", sets)

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def k(self):
        return self.data.shape[1]


def sign_pm1(z):
    """Coordinate-wise sign with sign(0) = +1."""
    return np.where(np.asarray(z) >= 0.0, 1.0, -1.0)


def normalize(embeddings):
    """Scale every row onto the sphere of radius sqrt(k) that holds the codes.

    Row i becomes sqrt(k) * f_i / |f_i|; a row at or below the norm floor
    raises ZeroRowError with the offending index.
    """
    data = embeddings.data
    norms = np.linalg.norm(data, axis=1)
    bad = np.flatnonzero(norms <= NORM_FLOOR)
    if bad.size:
        raise ZeroRowError(int(bad[0]))
    scaled = data * (math.sqrt(embeddings.k) / norms)[:, None]
    return EmbeddingSet(scaled, embeddings.labels)


def _check_rows(z):
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    if not np.isfinite(z).all():
        raise NonFiniteError("loss input contains NaN or infinity")
    return z


def loss_value(kind, z):
    """Mean over rows of the chosen per-row quantization penalty."""
    z = _check_rows(z)
    n = z.shape[0]
    if kind is LossKind.L2:
        r = z - sign_pm1(z)
        return float(np.sum(r * r) / n)
    if kind is LossKind.L1:
        return float(np.sum(np.abs(z - sign_pm1(z))) / n)
    if kind is LossKind.MIN_ENTRY:
        # smooth maximum of -z^2 per row, i.e. a soft penalty on the entry
        # closest to the sign boundary
        return float(np.sum(logsumexp(-z * z, axis=1)) / n)
    if kind is LossKind.BIT_VAR:
        f = expit(z)
        return float(np.sum(f * (1.0 - f)) / n)
    raise ValueError(f"unknown loss kind: {kind!r}")


def loss_grad(kind, z):
    """Gradient of ``loss_value`` w.r.t. Z, with sign(.) treated as constant."""
    z = _check_rows(z)
    n = z.shape[0]
    if kind is LossKind.L2:
        return (2.0 / n) * (z - sign_pm1(z))
    if kind is LossKind.L1:
        # subgradient 0 exactly at the kinks
        return np.sign(z - sign_pm1(z)) / n
    if kind is LossKind.MIN_ENTRY:
        return softmax(-z * z, axis=1) * (-2.0 * z) / n
    if kind is LossKind.BIT_VAR:
        f = expit(z)
        return f * (1.0 - f) * (1.0 - 2.0 * f) / n
    raise ValueError(f"unknown loss kind: {kind!r}")
