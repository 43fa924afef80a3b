"""Post-hoc binarization of embeddings via trained Householder rotations.

The pipeline: normalize embeddings onto the sqrt(k) sphere, train an
orthogonal transformation (a product of k Householder reflections, fitted
by mini-batch Adam) that pulls every coordinate toward {-1, +1}, then hash
with the coordinate-wise sign.  Orthogonal maps preserve inner products and
cosine similarity, so the rotation costs nothing in ranking quality while
reducing the binarization error.  Retrieval quality is measured by Hamming
ranking with cosine tie-breaking and mAP@k.

Hot kernels run in a compiled extension when available; see
``hquant.BACKEND_NAME`` and ``python -m hquant.benchmark``.
"""

from . import errors
from ._backend import BACKEND_NAME, HAVE_COMPILED
from .baselines import ItqConfig, itq_fit, procrustes_rotation, random_rotation_baseline
from .dataio import (
    SynthConfig,
    attach_labels,
    generate_rotated_hypercube,
    read_emb1,
    read_hsh1,
    read_labels,
    read_rot1,
    write_emb1,
    write_hsh1,
    write_labels,
    write_rot1,
)
from .householder import (
    NORM_FLOOR,
    HouseholderStack,
    apply_stack,
    decompose_orthogonal,
    empty_stack,
    random_orthogonal,
    random_stack,
    reflect,
    stack_to_matrix,
)
from .losses import EmbeddingSet, LossKind, loss_grad, loss_value, normalize, sign_pm1
from .retrieval import (
    BitCodeSet,
    RetrievalResult,
    average_precision_at_k,
    hamming_distance,
    map_at_k,
    pack_codes,
    rank_database,
    sign_binarize,
    unpack_codes,
)
from .trainer import AdamOptimizer, TrainConfig, TrainReport, fit, stack_backprop

__version__ = "0.1.0"

__all__ = [
    "AdamOptimizer",
    "BACKEND_NAME",
    "BitCodeSet",
    "EmbeddingSet",
    "HAVE_COMPILED",
    "HouseholderStack",
    "ItqConfig",
    "LossKind",
    "NORM_FLOOR",
    "RetrievalResult",
    "SynthConfig",
    "TrainConfig",
    "TrainReport",
    "apply_stack",
    "attach_labels",
    "average_precision_at_k",
    "decompose_orthogonal",
    "empty_stack",
    "errors",
    "fit",
    "generate_rotated_hypercube",
    "hamming_distance",
    "itq_fit",
    "loss_grad",
    "loss_value",
    "map_at_k",
    "normalize",
    "pack_codes",
    "procrustes_rotation",
    "random_orthogonal",
    "random_rotation_baseline",
    "random_stack",
    "rank_database",
    "read_emb1",
    "read_hsh1",
    "read_labels",
    "read_rot1",
    "reflect",
    "sign_binarize",
    "sign_pm1",
    "stack_backprop",
    "stack_to_matrix",
    "unpack_codes",
    "write_emb1",
    "write_hsh1",
    "write_labels",
    "write_rot1",
]
