"""Pure-NumPy implementations of the hot kernels.

Mirrors the compiled module ``hquant._core`` function for function; which of
the two actually runs is decided once, at import, in ``hquant._backend``.
All inputs are C-contiguous float64 / uint8 arrays (the backend wrappers
guarantee this).
"""

import numpy as np


def apply_reflections(vectors, x):
    """Rows of ``x`` become H(v_1)...H(v_m) @ row, v_m acting first. In place."""
    for i in range(vectors.shape[0] - 1, -1, -1):
        v = vectors[i]
        coef = x @ v
        coef *= 2.0 / (v @ v)
        x -= coef[:, None] * v


def record_reflections(vectors, x):
    """Forward pass through the reflection chain, keeping every intermediate.

    Returns ``acts`` of shape (m+1, n, k) with acts[m] = x and
    acts[i] = H(v_{i+1}) applied row-wise to acts[i+1], so acts[0] is the
    fully rotated batch.
    """
    m = vectors.shape[0]
    acts = np.empty((m + 1,) + x.shape)
    acts[m] = x
    for i in range(m - 1, -1, -1):
        v = vectors[i]
        y = acts[i + 1]
        coef = (y @ v) * (2.0 / (v @ v))
        np.subtract(y, coef[:, None] * v, out=acts[i])
    return acts


def backprop_reflections(vectors, acts, grad_out):
    """Reverse-mode pass given recorded activations.

    For one reflection y = x - (2 s / |v|^2) v with s = <v, x>, the vector
    gradient contribution of a row is
        -(2/|v|^2) (<g, v> x + s g) + (4 s <g, v> / |v|^4) v
    and the gradient flows back through H(v) itself (H is symmetric).
    Returns (vector_grads (m, k), grad_in (n, k)).
    """
    m, k = vectors.shape
    vgrads = np.empty((m, k))
    g = grad_out.copy()
    for i in range(m):
        v = vectors[i]
        x = acts[i + 1]
        nv = v @ v
        s = x @ v
        gv = g @ v
        vgrads[i] = -(2.0 / nv) * (gv @ x + s @ g) + (4.0 * (s @ gv) / nv**2) * v
        g -= (gv * (2.0 / nv))[:, None] * v
    return vgrads, g


if hasattr(np, "bitwise_count"):
    _popcount_bytes = np.bitwise_count
else:  # NumPy < 2.0
    _POPCOUNT_TABLE = np.unpackbits(
        np.arange(256, dtype=np.uint8)[:, None], axis=1
    ).sum(axis=1).astype(np.uint8)

    def _popcount_bytes(x):
        return _POPCOUNT_TABLE[x]


def hamming_counts(query, db, last_mask):
    """Hamming distance between one packed code row and every row of ``db``.

    ``last_mask`` zeroes the padding bits of the final byte.
    """
    x = np.bitwise_xor(db, query[None, :])
    x[:, -1] &= last_mask
    return _popcount_bytes(x).sum(axis=1, dtype=np.uint64)
