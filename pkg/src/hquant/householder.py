"""Orthogonal transformations as products of Householder reflections.

A reflection about the hyperplane with normal v is H(v) = I - 2 v v^T / |v|^2.
A stack of vectors v_1, ..., v_m represents the orthogonal matrix
U = H(v_1) H(v_2) ... H(v_m); applied to a vector, H(v_m) acts first.  This
one convention is used everywhere: by ``apply_stack``, ``stack_to_matrix``
and ``decompose_orthogonal``.

Products of reflections are exactly orthogonal in exact arithmetic for any
nonzero vectors, so optimizing over the vectors never leaves the orthogonal
group.  A stack of fixed length m reaches only the determinant-(-1)^m
component; for sign binarization this is harmless, because composing with a
coordinate sign flip changes every code in the same bit and leaves all
pairwise Hamming distances unchanged.
"""

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DegenerateVectorError, DimensionMismatchError, NotOrthogonalError

# Norm floor below which a vector no longer defines a reflection.
NORM_FLOOR = 1e-12


@dataclass(frozen=True)
class HouseholderStack:
    """Ordered reflection vectors, stored as an (m, dim) float64 array.

    m = dim for trainable stacks; decompositions may need fewer (m <= dim).
    The array is made read-only so stacks can be shared freely.
    """

    dim: int
    vectors: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        arr = np.array(self.vectors, dtype=np.float64, order="C")
        if arr.ndim != 2 or arr.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"vectors must have shape (m, {self.dim}), got {arr.shape}"
            )
        if arr.shape[0] > self.dim:
            raise ValueError(f"at most {self.dim} reflections allowed, got {arr.shape[0]}")
        if arr.shape[0]:
            norms = np.linalg.norm(arr, axis=1)
            if np.any(norms <= NORM_FLOOR):
                bad = int(np.flatnonzero(norms <= NORM_FLOOR)[0])
                raise DegenerateVectorError(f"reflection vector {bad} has near-zero norm")
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)

    def __len__(self):
        return self.vectors.shape[0]


def empty_stack(dim):
    """The identity transformation (empty product of reflections)."""
    return HouseholderStack(dim=dim, vectors=np.empty((0, dim)))


def reflect(v, x):
    """Reflect ``x`` about the hyperplane with normal ``v``.

    Returns x - 2 (<v, x> / |v|^2) v without forming the k x k matrix.
    """
    v = np.asarray(v, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if v.shape != x.shape or v.ndim != 1:
        raise DimensionMismatchError(f"shape mismatch: v {v.shape} vs x {x.shape}")
    nv = float(v @ v)
    if nv <= NORM_FLOOR**2:
        raise DegenerateVectorError("reflection vector has near-zero norm")
    return x - (2.0 * float(v @ x) / nv) * v


def apply_stack(stack, x):
    """Apply the stack's orthogonal map to a vector or to the rows of a matrix.

    Cost O(n m k); the k x k matrix is never materialized.
    """
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != stack.dim:
        raise DimensionMismatchError(
            f"input has {arr.shape[-1] if arr.ndim else 0} columns, stack dim is {stack.dim}"
        )
    out = _backend.rotate_rows(stack.vectors, arr)
    return out[0] if single else out


def stack_to_matrix(stack):
    """Materialize U = H(v_1) ... H(v_m) as a dense (dim, dim) matrix."""
    # rows of apply_stack(I) are U e_j, i.e. the columns of U
    return apply_stack(stack, np.eye(stack.dim)).T


def decompose_orthogonal(u, tol=1e-8):
    """Factor an orthogonal matrix into at most k Householder reflections.

    Column j of the running residual is reduced onto e_j by reflecting about
    v = x - |x| e_j (computed cancellation-free when x is already nearly
    aligned); columns already reduced within max(tol * k, norm floor) are
    skipped.  The residual is then a diagonal of +1 entries except possibly
    the last; a final reflection about e_k absorbs a trailing -1.

    The returned stack recomposes to ``u`` within ~1e-8 in float64.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {u.shape}")
    k = u.shape[0]
    dev = float(np.max(np.abs(u.T @ u - np.eye(k))))
    if dev > tol:
        raise NotOrthogonalError(
            f"matrix is not orthogonal: max |U^T U - I| = {dev:.3e} > tol = {tol:.3e}"
        )
    skip_tol = max(tol * k, NORM_FLOOR)
    r = u.copy()
    vs = []
    for j in range(k - 1):
        x = r[j:, j]
        norm_x = np.linalg.norm(x)
        v = x.copy()
        if x[0] > 0.0:
            # x[0] - |x| without cancellation
            v[0] = -(x[1:] @ x[1:]) / (x[0] + norm_x)
        else:
            v[0] = x[0] - norm_x
        if np.linalg.norm(v) <= skip_tol:
            continue
        w = (2.0 / (v @ v)) * (v @ r[j:, :])
        r[j:, :] -= np.outer(v, w)
        full = np.zeros(k)
        full[j:] = v
        vs.append(full)
    if r[k - 1, k - 1] < 0.0:
        last = np.zeros(k)
        last[k - 1] = 1.0
        vs.append(last)
    vectors = np.array(vs) if vs else np.empty((0, k))
    return HouseholderStack(dim=k, vectors=vectors)


def random_stack(k, seed):
    """Stack of k i.i.d. standard-normal vectors from a seeded generator.

    Identical seed gives a bitwise-identical stack; vectors below the norm
    floor are redrawn.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    vectors = rng.standard_normal((k, k))
    for i in range(k):
        while np.linalg.norm(vectors[i]) <= NORM_FLOOR:
            vectors[i] = rng.standard_normal(k)
    return HouseholderStack(dim=k, vectors=vectors)


def random_orthogonal(k, seed):
    """Random orthogonal matrix via QR of a seeded Gaussian matrix.

    ``seed`` may be an integer or a ``numpy.random.Generator``.
    """
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((k, k))
    q, r = np.linalg.qr(a)
    return q * np.where(np.diag(r) < 0.0, -1.0, 1.0)
