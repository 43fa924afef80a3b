"""File formats (EMB1 / ROT1 / HSH1 / label text) and synthetic data.

All binary headers are a 4-byte ASCII magic followed by two little-endian
u32 fields; payloads are little-endian IEEE-754 float32 (embeddings,
rotations) or packed code bytes (hashes).  Readers validate structure and
report the byte offset of the first fault; ``write(read(f))`` reproduces a
valid file byte for byte.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, FormatError
from .householder import HouseholderStack, random_orthogonal
from .losses import EmbeddingSet
from .retrieval import BitCodeSet, _row_bytes

EMB_MAGIC = b"EMB1"
ROT_MAGIC = b"ROT1"
HSH_MAGIC = b"HSH1"

_HEADER = struct.Struct("<4sII")


def _parse_header(raw, magic, path):
    if len(raw) < 4:
        raise FormatError(f"{path}: file shorter than the 4-byte magic", offset=len(raw))
    if raw[:4] != magic:
        raise FormatError(
            f"{path}: bad magic {raw[:4]!r}, expected {magic!r}", offset=0
        )
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header", offset=len(raw))
    _, a, b = _HEADER.unpack_from(raw)
    return a, b


def _check_payload(raw, expected, path):
    total = _HEADER.size + expected
    if len(raw) < total:
        raise FormatError(
            f"{path}: truncated payload, need {total} bytes but file has {len(raw)}",
            offset=len(raw),
        )
    if len(raw) > total:
        raise FormatError(f"{path}: trailing bytes after payload", offset=total)


def write_emb1(path, embeddings):
    header = _HEADER.pack(EMB_MAGIC, embeddings.n, embeddings.k)
    payload = embeddings.data.astype("<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_emb1(path):
    raw = Path(path).read_bytes()
    n, k = _parse_header(raw, EMB_MAGIC, path)
    if k == 0:
        raise FormatError(f"{path}: k must be positive", offset=8)
    _check_payload(raw, 4 * n * k, path)
    data = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).reshape(n, k)
    return EmbeddingSet(data.astype(np.float64))


def write_rot1(path, stack):
    header = _HEADER.pack(ROT_MAGIC, stack.dim, len(stack))
    payload = stack.vectors.astype("<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_rot1(path):
    raw = Path(path).read_bytes()
    k, m = _parse_header(raw, ROT_MAGIC, path)
    if k == 0:
        raise FormatError(f"{path}: k must be positive", offset=4)
    if m > k:
        raise FormatError(f"{path}: {m} reflection vectors exceed width {k}", offset=8)
    _check_payload(raw, 4 * m * k, path)
    vectors = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).reshape(m, k)
    return HouseholderStack(dim=k, vectors=vectors.astype(np.float64))


def write_hsh1(path, codes):
    header = _HEADER.pack(HSH_MAGIC, codes.n, codes.k)
    Path(path).write_bytes(header + codes.bits.tobytes())


def read_hsh1(path):
    raw = Path(path).read_bytes()
    n, k = _parse_header(raw, HSH_MAGIC, path)
    if k == 0:
        raise FormatError(f"{path}: k must be positive", offset=8)
    rb = _row_bytes(k)
    _check_payload(raw, n * rb, path)
    bits = np.frombuffer(raw, dtype=np.uint8, offset=_HEADER.size).reshape(n, rb)
    if k % 8:
        pad = np.uint8((1 << (8 - k % 8)) - 1)
        bad = np.flatnonzero(bits[:, -1] & pad)
        if bad.size:
            raise FormatError(
                f"{path}: nonzero padding bits in row {int(bad[0])}",
                offset=_HEADER.size + (int(bad[0]) + 1) * rb - 1,
            )
    return BitCodeSet(k=k, bits=bits)


def write_labels(path, labels):
    """One line per item: comma-separated label ids, ascending."""
    lines = [",".join(str(i) for i in sorted(s)) for s in labels]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_labels(path):
    """Label-id sets, one per line; a blank line yields an empty set."""
    out = []
    for ln, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line:
            out.append(frozenset())
            continue
        try:
            ids = frozenset(int(tok) for tok in line.split(","))
        except ValueError:
            raise FormatError(f"{path}: line {ln} is not a comma-separated id list") from None
        if any(i < 0 for i in ids):
            raise FormatError(f"{path}: line {ln} contains a negative label id")
        out.append(ids)
    return out


def attach_labels(embeddings, labels):
    """Pair an embedding matrix with label sets read from a label file."""
    if len(labels) != embeddings.n:
        raise DimensionMismatchError(
            f"{len(labels)} label lines for {embeddings.n} embedding rows"
        )
    return EmbeddingSet(embeddings.data, labels)


@dataclass
class SynthConfig:
    """Rotated-hypercube generator settings.

    Class centers are distinct corners of {-1, +1}^k; each point is its
    center plus isotropic Gaussian noise, everything rotated by a planted
    random orthogonal matrix.  Split sizes default to one eighth of
    ``n_per_class`` for queries and four times that for the database.
    """

    n_per_class: int
    num_classes: int
    k: int
    noise_sigma: float = 0.0
    planted_rotation_seed: int = 0
    sample_seed: int = 0
    query_per_class: int | None = None
    database_per_class: int | None = None

    def __post_init__(self):
        if self.n_per_class < 1 or self.num_classes < 1 or self.k < 1:
            raise ValueError("n_per_class, num_classes and k must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.num_classes > 2**self.k:
            raise ValueError(
                f"cannot draw {self.num_classes} distinct centers in {{-1,+1}}^{self.k}"
            )
        if self.query_per_class is None:
            self.query_per_class = max(1, self.n_per_class // 8)
        if self.database_per_class is None:
            self.database_per_class = 4 * self.query_per_class


def _draw_centers(rng, num_classes, k):
    seen = set()
    centers = []
    while len(centers) < num_classes:
        c = rng.integers(0, 2, size=k) * 2 - 1
        key = c.tobytes()
        if key not in seen:
            seen.add(key)
            centers.append(c.astype(np.float64))
    return centers


def generate_rotated_hypercube(config):
    """(train, query, database) EmbeddingSets with planted binary structure.

    A pure function of the two seeds.  With ``noise_sigma=0`` the rotation
    that undoes the planted one maps every point back onto its exact
    {-1, +1}^k center, so a quantization loss of zero is attainable.
    """
    rng = np.random.default_rng(config.sample_seed)
    centers = _draw_centers(rng, config.num_classes, config.k)
    q = random_orthogonal(config.k, config.planted_rotation_seed)

    def draw_split(per_class):
        blocks = []
        labels = []
        for c, center in enumerate(centers):
            pts = center + config.noise_sigma * rng.standard_normal((per_class, config.k))
            blocks.append(pts)
            labels.extend([frozenset({c})] * per_class)
        data = np.vstack(blocks) @ q.T
        return EmbeddingSet(data, labels)

    train = draw_split(config.n_per_class)
    query = draw_split(config.query_per_class)
    database = draw_split(config.database_per_class)
    return train, query, database
