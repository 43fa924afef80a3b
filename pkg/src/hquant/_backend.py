"""Kernel backend selection: compiled extension with a NumPy fallback.

The Cython module ``hquant._core`` is used when it was built for this
interpreter; otherwise the NumPy twin ``hquant._reference`` takes over.
Setting the environment variable ``HQUANT_PURE_PYTHON=1`` before import
forces the fallback (useful for benchmarking the two side by side).
"""

import os

import numpy as np

from . import _reference

if os.environ.get("HQUANT_PURE_PYTHON", "0") not in ("", "0"):
    _core = None
else:
    try:
        from . import _core
    except ImportError:
        _core = None

HAVE_COMPILED = _core is not None
BACKEND_NAME = "compiled" if HAVE_COMPILED else "numpy"
_impl = _core if HAVE_COMPILED else _reference


def _as_f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def rotate_rows(vectors, x):
    """Apply the reflection chain to the rows of ``x``; returns a new array."""
    out = np.array(x, dtype=np.float64, order="C")
    if vectors.shape[0]:
        _impl.apply_reflections(_as_f64(vectors), out)
    return out


def record_rotation(vectors, x):
    """Forward pass that keeps intermediates; acts[0] is the rotated batch."""
    return _impl.record_reflections(_as_f64(vectors), _as_f64(x))


def rotation_backprop(vectors, acts, grad_out):
    """Gradients of the chain: (per-vector grads, grad w.r.t. input rows)."""
    if vectors.shape[0] == 0:
        return np.zeros_like(np.asarray(vectors, dtype=np.float64)), np.array(
            grad_out, dtype=np.float64, order="C"
        )
    return _impl.backprop_reflections(_as_f64(vectors), acts, _as_f64(grad_out))


def hamming_counts(query, db, last_mask):
    """Hamming distances between one packed row and every packed db row."""
    q = np.ascontiguousarray(query, dtype=np.uint8)
    d = np.ascontiguousarray(db, dtype=np.uint8)
    return _impl.hamming_counts(q, d, last_mask)
