"""Embedding matrices: loading, normalization, and whole-vocabulary scoring.

The matrix is the substrate every trained dimension scores against: rows are
unit-norm word vectors, and a word's score is the sigmoid of an affine
projection of its row. Matrices are immutable after construction and safe to
share across threads.
"""

from __future__ import annotations

import hashlib
import logging
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    AlreadyNormalizedError,
    CorruptCacheError,
    DimensionMismatchError,
    EmptyFileError,
    FileUnreadableError,
    FileUnwritableError,
    UnknownWordError,
    VersionMismatchError,
)

logger = logging.getLogger(__name__)

#: Default vocabulary cap when loading text vectors.
DEFAULT_MAX_WORDS = 250_000

#: Rows with L2 norm below this are treated as zero vectors and dropped.
ZERO_NORM_FLOOR = 1e-12

_CACHE_MAGIC = b"LDMC"
_CACHE_VERSION = 1
_CHECKSUM_BYTES = 32

# Probability outputs are clamped to the open interval (0, 1) at machine
# precision so callers can take logs / strict comparisons safely.
_P_MIN = np.nextafter(0.0, 1.0)
_P_MAX = np.nextafter(1.0, 0.0)


def sigmoid(z):
    """Numerically stable logistic function, clamped to the open (0, 1).

    Accepts scalars or arrays; stable for |z| well beyond 1e3 (the large-|z|
    branch never exponentiates a positive argument).
    """
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    out = np.clip(out, _P_MIN, _P_MAX)
    if out.ndim == 0:
        return float(out)
    return out


class Vocab:
    """Ordered list of unique words with dense 0-based ids.

    Lookup is a bijection between the retained words and ``range(len(vocab))``.
    """

    __slots__ = ("words", "_index")

    def __init__(self, words):
        self.words = list(words)
        self._index = {w: i for i, w in enumerate(self.words)}
        if len(self._index) != len(self.words):
            raise ValueError("duplicate words in vocabulary")

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self._index

    def id(self, word: str) -> int:
        """Return the word's id, raising UnknownWordError if absent."""
        try:
            return self._index[word]
        except KeyError:
            raise UnknownWordError(word) from None

    def get(self, word: str):
        """Return the word's id or None."""
        return self._index.get(word)

    def word(self, word_id: int) -> str:
        return self.words[word_id]


@dataclass
class LoadReport:
    """Counters from a text-vector load."""

    rows_loaded: int = 0
    skipped_malformed: int = 0
    skipped_dim_mismatch: int = 0
    duplicates_dropped: int = 0


@dataclass(eq=False)
class EmbeddingMatrix:
    """Vocabulary plus a row-major matrix of word vectors."""

    vocab: Vocab
    dim: int
    rows: np.ndarray
    normalized: bool = False
    load_report: LoadReport | None = field(default=None, repr=False)

    def __post_init__(self):
        self.rows = np.ascontiguousarray(self.rows, dtype=np.float64)
        if self.rows.ndim != 2 or self.rows.shape != (len(self.vocab), self.dim):
            raise DimensionMismatchError(
                f"rows shape {self.rows.shape} does not match "
                f"({len(self.vocab)}, {self.dim})"
            )
        self.rows.setflags(write=False)

    def vector(self, word: str) -> np.ndarray:
        return self.rows[self.vocab.id(word)]


def _parse_header(line: str):
    parts = line.split()
    if len(parts) != 2:
        return None
    try:
        count, dim = int(parts[0]), int(parts[1])
    except ValueError:
        return None
    if count < 0 or dim < 1:
        return None
    return count, dim


def load_text_embeddings(path, max_words: int | None = DEFAULT_MAX_WORDS) -> EmbeddingMatrix:
    """Load word vectors from the text format.

    Format: optional first line ``<count> <dim>``, then one
    ``<word> <v1> ... <vd>`` line per word, space separated. The first
    occurrence of a duplicated word wins; malformed lines are skipped and
    counted in the returned matrix's ``load_report``.
    """
    if max_words is not None and max_words < 1:
        raise ValueError("max_words must be >= 1 or None")
    try:
        fh = open(path, "r", encoding="utf-8", errors="replace")
    except OSError as exc:
        raise FileUnreadableError(f"cannot open {path}: {exc}") from exc

    words: list[str] = []
    vectors: list[np.ndarray] = []
    seen: set[str] = set()
    report = LoadReport()
    dim: int | None = None

    def handle(line: str):
        nonlocal dim
        line = line.rstrip("\r\n").rstrip(" ")
        if not line:
            return
        parts = line.split(" ")
        word = parts[0]
        values = parts[1:]
        if not word or not values:
            report.skipped_malformed += 1
            return
        if dim is not None and len(values) != dim:
            report.skipped_dim_mismatch += 1
            return
        try:
            vec = np.array(values, dtype=np.float64)
        except ValueError:
            report.skipped_malformed += 1
            return
        if not np.isfinite(vec).all():
            report.skipped_malformed += 1
            return
        if word in seen:
            report.duplicates_dropped += 1
            return
        if dim is None:
            dim = len(values)
        seen.add(word)
        words.append(word)
        vectors.append(vec)
        report.rows_loaded += 1

    with fh:
        first = fh.readline()
        header = _parse_header(first)
        if header is not None:
            dim = header[1]
        elif first:
            handle(first)
        for line in fh:
            if max_words is not None and report.rows_loaded >= max_words:
                break
            handle(line)

    if not words:
        if report.skipped_dim_mismatch > 0:
            raise DimensionMismatchError(
                f"all {report.skipped_dim_mismatch} rows skipped: "
                f"value count differs from dim {dim}"
            )
        raise EmptyFileError(f"no valid vector rows in {path}")

    if report.skipped_malformed or report.skipped_dim_mismatch or report.duplicates_dropped:
        logger.warning(
            "loaded %d vectors from %s (%d malformed, %d dim-mismatched, %d duplicates dropped)",
            report.rows_loaded, path, report.skipped_malformed,
            report.skipped_dim_mismatch, report.duplicates_dropped,
        )

    matrix = EmbeddingMatrix(Vocab(words), dim, np.vstack(vectors), normalized=False)
    matrix.load_report = report
    return matrix


def normalize(matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    """Return a copy with every row scaled to unit L2 norm.

    Rows with norm below ZERO_NORM_FLOOR are removed together with their
    vocabulary entries (unit direction is undefined for them).
    """
    if matrix.normalized:
        raise AlreadyNormalizedError("matrix is already normalized")
    norms = np.linalg.norm(matrix.rows, axis=1)
    keep = norms >= ZERO_NORM_FLOOR
    n_dropped = int((~keep).sum())
    if n_dropped:
        logger.warning("dropping %d zero-norm rows during normalization", n_dropped)
    if not keep.any():
        raise EmptyFileError("no rows with nonzero norm")
    rows = matrix.rows[keep] / norms[keep, None]
    kept_words = [w for w, k in zip(matrix.vocab.words, keep) if k]
    out = EmbeddingMatrix(Vocab(kept_words), matrix.dim, rows, normalized=True)
    out.load_report = matrix.load_report
    return out


def score_all(matrix: EmbeddingMatrix, weights, bias: float) -> np.ndarray:
    """Sigmoid of ``rows @ weights + bias`` for the whole vocabulary.

    Output is elementwise strictly inside (0, 1).
    """
    if not matrix.normalized:
        raise ValueError("score_all requires a normalized matrix")
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    if w.shape[0] != matrix.dim:
        raise DimensionMismatchError(
            f"weight length {w.shape[0]} != matrix dim {matrix.dim}"
        )
    return sigmoid(matrix.rows @ w + float(bias))


def save_cache(matrix: EmbeddingMatrix, path) -> None:
    """Write a versioned, checksummed binary cache of a normalized matrix.

    Layout (little-endian): magic ``LDMC``, version byte, uint64 word count,
    uint32 dim, uint64 vocab byte length, newline-joined UTF-8 vocab, raw
    float64 rows, SHA-256 of everything preceding the digest.
    """
    if not matrix.normalized:
        raise ValueError("only normalized matrices are cached")
    vocab_bytes = "\n".join(matrix.vocab.words).encode("utf-8")
    body = b"".join([
        _CACHE_MAGIC,
        bytes([_CACHE_VERSION]),
        struct.pack("<QI", len(matrix.vocab), matrix.dim),
        struct.pack("<Q", len(vocab_bytes)),
        vocab_bytes,
        np.ascontiguousarray(matrix.rows, dtype="<f8").tobytes(),
    ])
    digest = hashlib.sha256(body).digest()
    tmp = str(path) + ".tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(body)
            fh.write(digest)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except OSError as exc:
        raise FileUnwritableError(f"cannot write cache {path}: {exc}") from exc


def load_cache(path) -> EmbeddingMatrix:
    """Load a matrix written by save_cache, verifying version and checksum."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise FileUnreadableError(f"cannot read cache {path}: {exc}") from exc

    if len(data) < len(_CACHE_MAGIC) + 1:
        raise CorruptCacheError("cache file shorter than its header")
    if data[: len(_CACHE_MAGIC)] != _CACHE_MAGIC:
        raise CorruptCacheError("bad magic bytes")
    version = data[len(_CACHE_MAGIC)]
    if version != _CACHE_VERSION:
        raise VersionMismatchError(
            f"cache version {version}, expected {_CACHE_VERSION}"
        )
    if len(data) < len(_CACHE_MAGIC) + 1 + 12 + 8 + _CHECKSUM_BYTES:
        raise CorruptCacheError("truncated cache file")
    body, digest = data[:-_CHECKSUM_BYTES], data[-_CHECKSUM_BYTES:]
    if hashlib.sha256(body).digest() != digest:
        raise CorruptCacheError("checksum mismatch")

    offset = len(_CACHE_MAGIC) + 1
    count, dim = struct.unpack_from("<QI", body, offset)
    offset += 12
    (vocab_len,) = struct.unpack_from("<Q", body, offset)
    offset += 8
    vocab_end = offset + vocab_len
    rows_end = vocab_end + count * dim * 8
    if rows_end != len(body):
        raise CorruptCacheError("cache payload length inconsistent with header")
    vocab_text = body[offset:vocab_end].decode("utf-8")
    words = vocab_text.split("\n") if count else []
    if len(words) != count:
        raise CorruptCacheError("vocabulary entry count inconsistent with header")
    rows = np.frombuffer(body, dtype="<f8", count=count * dim, offset=vocab_end)
    rows = rows.reshape(count, dim).copy()
    return EmbeddingMatrix(Vocab(words), dim, rows, normalized=True)
