"""Apply trained dimensions across languages via aligned embedding spaces.

A dimension trained in one language scores another language directly once
the foreign vectors are mapped into the training space. For unaligned pairs,
an orthogonal map is fit in closed form from a bilingual seed lexicon.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifier import SupervisedDimension
from .curation import Candidate
from .embeddings import EmbeddingMatrix, sigmoid
from .errors import (
    CorruptFileError,
    DegenerateLexiconError,
    DimensionMismatchError,
    FileUnreadableError,
    FileUnwritableError,
    InsufficientPairsError,
    VersionMismatchError,
)

logger = logging.getLogger(__name__)

ALIGNMENT_FORMAT_VERSION = 1

ORTHOGONALITY_TOL = 1e-8


@dataclass(eq=False)
class AlignmentMap:
    """Orthogonal map between embedding spaces, applied as x -> Q x.

    For apply_dimension_foreign the map must carry foreign vectors into the
    space the dimension was trained in, so fit it with the foreign matrix as
    the procrustes_align source and the training matrix as its target.
    """

    q: np.ndarray
    fit_residual: float = 0.0

    def __post_init__(self):
        self.q = np.ascontiguousarray(self.q, dtype=np.float64)
        d = self.q.shape[0]
        if self.q.ndim != 2 or self.q.shape != (d, d):
            raise DimensionMismatchError(f"alignment matrix must be square, got {self.q.shape}")
        err = np.abs(self.q.T @ self.q - np.eye(d)).max()
        if err >= ORTHOGONALITY_TOL:
            raise ValueError(f"alignment matrix is not orthogonal (deviation {err:.3e})")
        self.q.setflags(write=False)

    @classmethod
    def identity(cls, dim: int) -> "AlignmentMap":
        return cls(np.eye(dim), 0.0)


@dataclass
class BilingualLexicon:
    """Seed translation pairs (source word, target word)."""

    pairs: list[tuple[str, str]]


def load_lexicon(path) -> BilingualLexicon:
    """Read one tab-separated source/target pair per line; first source wins."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileUnreadableError(f"cannot read lexicon {path}: {exc}") from exc
    pairs = []
    seen = set()
    skipped = 0
    for line in text.splitlines():
        line = line.strip("\r")
        if not line:
            continue
        if "\t" not in line:
            skipped += 1
            continue
        source, target = line.split("\t", 1)
        if not source or not target or source in seen:
            skipped += 1
            continue
        seen.add(source)
        pairs.append((source, target))
    if skipped:
        logger.warning("skipped %d malformed or duplicate lexicon lines", skipped)
    return BilingualLexicon(pairs)


def procrustes_align(
    source: EmbeddingMatrix,
    target: EmbeddingMatrix,
    lexicon: BilingualLexicon,
) -> AlignmentMap:
    """Closed-form least-squares orthogonal map from source onto target.

    Q minimizes sum ||Q x_i - y_i||^2 over orthogonal matrices: with the
    cross-covariance M = Y^T X = U S V^T, the optimum is Q = U V^T.
    Reflections are permitted (no determinant correction).

    Direction convention: Q maps SOURCE vectors into TARGET space. To score
    a foreign language with a domestically trained dimension, fit with the
    foreign matrix as source and the training matrix as target, then hand
    the result to apply_dimension_foreign.
    """
    if not (source.normalized and target.normalized):
        raise ValueError("both matrices must be normalized before alignment")
    xs, ys = [], []
    for src_word, tgt_word in lexicon.pairs:
        i = source.vocab.get(src_word)
        j = target.vocab.get(tgt_word)
        if i is None or j is None:
            continue
        xs.append(source.rows[i])
        ys.append(target.rows[j])
    if len(xs) < 2:
        raise InsufficientPairsError(
            f"only {len(xs)} lexicon pairs resolve to vectors; need at least 2"
        )
    if len(xs) < source.dim:
        logger.warning(
            "lexicon resolves to %d pairs, below the embedding dim %d; "
            "the fit may be underdetermined",
            len(xs), source.dim,
        )
    x = np.vstack(xs)
    y = np.vstack(ys)
    m = y.T @ x
    u, s, vt = np.linalg.svd(m)
    if s[0] <= np.finfo(np.float64).tiny:
        raise DegenerateLexiconError("cross-covariance has rank 0")
    q = u @ vt
    mapped = x @ q.T
    residual = float(np.sqrt(np.mean(np.sum((mapped - y) ** 2, axis=1))))
    return AlignmentMap(q, residual)


def apply_dimension_foreign(
    dimension: SupervisedDimension,
    foreign: EmbeddingMatrix,
    alignment: AlignmentMap | None = None,
    k: int = 10,
) -> list[Candidate]:
    """Score every foreign word through the alignment and return the top k.

    Mapped vectors are re-normalized before scoring; for an orthogonal map
    this is a numerical no-op since norms are preserved.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not foreign.normalized:
        raise ValueError("foreign matrix must be normalized")
    if alignment is None:
        alignment = AlignmentMap.identity(foreign.dim)
    if alignment.q.shape[1] != foreign.dim:
        raise DimensionMismatchError(
            f"alignment expects dim {alignment.q.shape[1]}, foreign matrix has {foreign.dim}"
        )
    if dimension.dim != alignment.q.shape[0]:
        raise DimensionMismatchError(
            f"dimension has dim {dimension.dim}, alignment maps into {alignment.q.shape[0]}"
        )
    mapped = foreign.rows @ alignment.q.T
    norms = np.linalg.norm(mapped, axis=1)
    mapped = mapped / norms[:, None]
    scores = sigmoid(mapped @ dimension.weights + dimension.bias)
    ids = np.arange(len(foreign.vocab))
    order = np.lexsort((ids, -scores))[: min(k, ids.size)]
    return [
        Candidate(foreign.vocab.word(int(i)), int(i), float(scores[i])) for i in order
    ]


def alignment_to_dict(alignment: AlignmentMap) -> dict:
    return {
        "format_version": ALIGNMENT_FORMAT_VERSION,
        "dim": alignment.q.shape[0],
        "q": [[float(v) for v in row] for row in alignment.q],
        "fit_residual": alignment.fit_residual,
    }


def alignment_from_dict(payload: dict) -> AlignmentMap:
    try:
        version = payload["format_version"]
        if version != ALIGNMENT_FORMAT_VERSION:
            raise VersionMismatchError(
                f"alignment format {version}, expected {ALIGNMENT_FORMAT_VERSION}"
            )
        q = np.array(payload["q"], dtype=np.float64)
        if q.shape != (payload["dim"], payload["dim"]):
            raise CorruptFileError("matrix shape differs from declared dim")
        return AlignmentMap(q, float(payload["fit_residual"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFileError(f"bad alignment payload: {exc}") from exc


def save_alignment(alignment: AlignmentMap, path) -> None:
    try:
        Path(path).write_text(
            json.dumps(alignment_to_dict(alignment)) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise FileUnwritableError(f"cannot write {path}: {exc}") from exc


def load_alignment(path) -> AlignmentMap:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileUnreadableError(f"cannot read {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptFileError(f"bad JSON in {path}: {exc}") from exc
    return alignment_from_dict(payload)
