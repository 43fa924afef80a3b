"""Sign binarization, packed Hamming ranking, and mAP@k evaluation.

Codes live in {-1, +1}^k and are stored bit-packed, MSB-first within each
byte, bit 1 encoding +1; padding bits beyond k are zero.  For such codes the
Hamming distance satisfies d_H(a, b) = (k - <a, b>) / 2 exactly.
"""

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import (
    DimensionMismatchError,
    MissingLabelsError,
    ValidationError,
    ZeroRowError,
)
from .householder import NORM_FLOOR, stack_to_matrix


def _row_bytes(k):
    return (k + 7) // 8


def _pad_mask(k):
    """Mask of the bits of the final byte that belong to the code."""
    used = k % 8
    return 0xFF if used == 0 else (0xFF << (8 - used)) & 0xFF


@dataclass(frozen=True)
class BitCodeSet:
    """n bit-packed hash codes of width k."""

    k: int
    bits: np.ndarray

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        arr = np.array(self.bits, dtype=np.uint8, order="C")
        if arr.ndim != 2 or arr.shape[1] != _row_bytes(self.k):
            raise DimensionMismatchError(
                f"bits must have shape (n, {_row_bytes(self.k)}), got {arr.shape}"
            )
        pad = np.uint8(~_pad_mask(self.k) & 0xFF)
        if arr.shape[0] and np.any(arr[:, -1] & pad):
            raise ValidationError("nonzero padding bits beyond code width")
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @property
    def n(self):
        return self.bits.shape[0]


def pack_codes(values):
    """Pack a (n, k) matrix into a BitCodeSet; entries >= 0 become bit 1 (+1)."""
    values = np.atleast_2d(np.asarray(values))
    bits = np.packbits(values >= 0, axis=1)
    return BitCodeSet(k=values.shape[1], bits=bits)


def unpack_codes(codes):
    """Expand a BitCodeSet back to a (n, k) int8 matrix of -1 / +1."""
    raw = np.unpackbits(codes.bits, axis=1, count=codes.k)
    return (raw.astype(np.int8) * 2 - 1)


def sign_binarize(embeddings, stack=None, block_rows=65536):
    """Hash codes h_i = sign(U f_i), with sign(0) = +1.

    No normalization is applied: a positive per-row scaling cannot change
    any sign.  With ``stack=None`` the embeddings are binarized as-is.
    The rotation is applied blockwise as a dense matrix product, which
    agrees with ``apply_stack`` row-wise to ~1e-8.
    """
    data = embeddings.data
    n, k = data.shape
    if stack is None:
        return pack_codes(data)
    if stack.dim != k:
        raise DimensionMismatchError(f"stack dim {stack.dim} != embedding width {k}")
    ut = stack_to_matrix(stack).T
    bits = np.empty((n, _row_bytes(k)), dtype=np.uint8)
    for lo in range(0, n, block_rows):
        hi = min(lo + block_rows, n)
        bits[lo:hi] = np.packbits(data[lo:hi] @ ut >= 0.0, axis=1)
    return BitCodeSet(k=k, bits=bits)


def hamming_distance(a, b, k):
    """Number of disagreeing bits among the first k, via XOR popcount."""
    a = np.ascontiguousarray(a, dtype=np.uint8)
    b = np.ascontiguousarray(b, dtype=np.uint8)
    if a.shape != b.shape or a.ndim != 1 or a.shape[0] != _row_bytes(k):
        raise DimensionMismatchError(
            f"code rows must both have {_row_bytes(k)} bytes for width {k}"
        )
    return int(_backend.hamming_counts(a, b[None, :], _pad_mask(k))[0])


def rank_database(query_code, db_codes, query_emb, db_emb):
    """Rank database indices for one query.

    Ascending Hamming distance on the codes; equal distances are ordered by
    ascending cosine distance of the continuous embeddings; remaining ties
    fall back to ascending index, so the ranking is a total order.
    """
    k = db_codes.k
    query_code = np.ascontiguousarray(query_code, dtype=np.uint8)
    if query_code.shape != (db_codes.bits.shape[1],):
        raise DimensionMismatchError("query code width does not match database codes")
    query_emb = np.asarray(query_emb, dtype=np.float64)
    if query_emb.shape != (db_emb.k,) or db_emb.k != k or db_emb.n != db_codes.n:
        raise DimensionMismatchError("embeddings and codes disagree on n or k")

    ham = _backend.hamming_counts(query_code, db_codes.bits, _pad_mask(k))

    qn = np.linalg.norm(query_emb)
    dn = np.linalg.norm(db_emb.data, axis=1)
    if qn <= NORM_FLOOR:
        raise ZeroRowError(-1, "query embedding has near-zero norm")
    bad = np.flatnonzero(dn <= NORM_FLOOR)
    if bad.size:
        raise ZeroRowError(int(bad[0]))
    cos_dist = 1.0 - (db_emb.data @ query_emb) / (dn * qn)

    # stable lexsort: primary Hamming, secondary cosine, then original index
    return np.lexsort((cos_dist, ham))


def average_precision_at_k(ranked_relevance, k_eval):
    """AP over the first k_eval entries of a 0/1 relevance list.

    Sum of precision-at-j over relevant positions j <= k_eval, divided by
    the number of relevant items in the top k_eval; 0 when there are none.
    """
    if k_eval < 1:
        raise ValueError("k_eval must be >= 1")
    hits = 0
    ap_sum = 0.0
    for j, rel in enumerate(ranked_relevance[:k_eval], start=1):
        if rel:
            hits += 1
            ap_sum += hits / j
    return ap_sum / hits if hits else 0.0


@dataclass(frozen=True)
class RetrievalResult:
    """Per-query AP values and their mean at the evaluation cutoff."""

    per_query_ap: list
    map_at_k: float
    k_eval: int


def map_at_k(query_emb, query_codes, db_emb, db_codes, k_eval):
    """Mean average precision at k_eval over a labelled query set.

    An item is relevant to a query when their label sets intersect.  Every
    query is ranked with ``rank_database``; APs are averaged in query order.
    """
    if query_emb.labels is None or db_emb.labels is None:
        raise MissingLabelsError("both query and database sets need labels")
    if query_emb.n == 0:
        raise ValidationError("empty query set")
    if query_emb.k != db_emb.k or query_codes.k != db_codes.k or query_codes.k != query_emb.k:
        raise DimensionMismatchError("query and database disagree on width")
    if query_codes.n != query_emb.n or db_codes.n != db_emb.n:
        raise DimensionMismatchError("codes and embeddings disagree on count")

    db_labels = db_emb.labels
    aps = []
    for i in range(query_emb.n):
        order = rank_database(query_codes.bits[i], db_codes, query_emb.data[i], db_emb)
        q_labels = query_emb.labels[i]
        relevance = [1 if q_labels & db_labels[j] else 0 for j in order[:k_eval]]
        aps.append(average_precision_at_k(relevance, k_eval))
    return RetrievalResult(per_query_ap=aps, map_at_k=sum(aps) / len(aps), k_eval=k_eval)
