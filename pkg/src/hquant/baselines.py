"""Rotation baselines: iterative-Procrustes (ITQ-style) and untrained random.

Both consume the same sqrt(k)-sphere-normalized embeddings as the trained
rotation, so comparisons are input-identical.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .householder import random_orthogonal, random_stack
from .losses import normalize, sign_pm1


@dataclass
class ItqConfig:
    """Alternating-minimization settings; centering is off by default."""

    iterations: int = 50
    seed: int = 0
    center: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


def procrustes_rotation(v, b):
    """Orthogonal R minimizing |V R - B|_F, from the SVD of B^T V."""
    try:
        s, _, s_hat_t = np.linalg.svd(b.T @ v)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed in Procrustes solve: {exc}") from exc
    return s_hat_t.T @ s.T


def itq_fit(embeddings, config, init=None):
    """Alternate binarization and Procrustes solves for a rotation matrix R.

    Embeddings are normalized first (and column-centered when configured).
    Starting from ``init`` or the QR of a seeded Gaussian matrix, each
    iteration sets B = sign(V R) and then replaces R by the exact Procrustes
    minimizer of |V R - B|_F, so the objective never increases.  Returns the
    final R; codes are sign(V R), i.e. the rotation acting on column vectors
    is R^T.
    """
    v = normalize(embeddings).data
    if config.center:
        v = v - v.mean(axis=0)
    k = v.shape[1]
    r = np.array(init, dtype=np.float64) if init is not None else random_orthogonal(k, config.seed)
    for it in range(config.iterations):
        b = sign_pm1(v @ r)
        try:
            r = procrustes_rotation(v, b)
        except NumericalError as exc:
            raise NumericalError(f"ITQ iteration {it}: {exc}") from exc
    return r


def random_rotation_baseline(k, seed):
    """Untrained seeded random stack; the control condition for comparisons."""
    return random_stack(k, seed)
