"""Document featurization over supervised dimensions.

Documents are represented by the mean classifier probability of their
in-vocabulary tokens on each chosen dimension; single words are assigned to
whichever dimension activates them most.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .classifier import SupervisedDimension
from .embeddings import EmbeddingMatrix, sigmoid
from .errors import EmptyDocumentError, FileUnreadableError, FileUnwritableError

STOPWORD_FILE_VERSION = 1

#: Assignment marker for words whose best activation is below the floor.
UNASSIGNED = "UNASSIGNED"
#: Assignment marker for words missing from the vocabulary.
UNKNOWN = "UNKNOWN"

# Token boundary characters keep letters, digits, hyphen, apostrophe.
_KEEP_CHARS = "-'"


def _keep(ch: str) -> bool:
    return ch.isalnum() or ch in _KEEP_CHARS


def tokenize(text: str) -> list[str]:
    """Split on Unicode whitespace, trimming outer punctuation from each token.

    Case is preserved: the embeddings are case-sensitive. Tokens that are
    empty after trimming are dropped.
    """
    tokens = []
    for raw in text.split():
        start, end = 0, len(raw)
        while start < end and not _keep(raw[start]):
            start += 1
        while end > start and not _keep(raw[end - 1]):
            end -= 1
        if end > start:
            tokens.append(raw[start:end])
    return tokens


def load_stopwords(path=None) -> frozenset[str]:
    """Load the bundled English stop word list, or a custom one-per-line file."""
    if path is None:
        ref = resources.files("lexdim.data") / f"stopwords_en_v{STOPWORD_FILE_VERSION}.txt"
        text = ref.read_text(encoding="utf-8")
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise FileUnreadableError(f"cannot read stopword file {path}: {exc}") from exc
    return frozenset(w for w in text.splitlines() if w)


@dataclass
class DocFeatureVector:
    """Per-document mean activations, ordered to match the dimension list."""

    doc_id: str
    values: list[float]
    token_count_used: int


def _eligible_ids(
    tokens: list[str],
    matrix: EmbeddingMatrix,
    stopwords: frozenset[str] | set[str] | None,
    dedupe: bool,
) -> list[int]:
    stop = stopwords or frozenset()
    ids = [
        wid
        for t in tokens
        if t not in stop and (wid := matrix.vocab.get(t)) is not None
    ]
    if dedupe:
        ids = list(dict.fromkeys(ids))
    return ids


def doc_features(
    tokens: list[str],
    dims: list[SupervisedDimension],
    matrix: EmbeddingMatrix,
    stopwords: frozenset[str] | set[str] | None = None,
    dedupe: bool = False,
    *,
    doc_id: str = "",
) -> DocFeatureVector:
    """Mean activation of the document's eligible tokens on each dimension.

    Eligible tokens are those found in the vocabulary and not in the stop
    list; out-of-vocabulary tokens are silently excluded and reflected only
    in token_count_used.
    """
    if not dims:
        raise ValueError("at least one dimension is required")
    if not matrix.normalized:
        raise ValueError("matrix must be normalized")
    ids = _eligible_ids(tokens, matrix, stopwords, dedupe)
    if not ids:
        raise EmptyDocumentError(f"no eligible tokens in document {doc_id!r}")
    x = matrix.rows[np.array(ids, dtype=np.intp)]
    values = [
        float(np.mean(sigmoid(x @ d.weights + d.bias))) for d in dims
    ]
    return DocFeatureVector(doc_id=doc_id, values=values, token_count_used=len(ids))


@dataclass
class WordAssignment:
    word: str
    dimension: str
    score: float | None


def assign_words(
    words: list[str],
    dims: list[SupervisedDimension],
    matrix: EmbeddingMatrix,
    floor: float = 0.5,
) -> list[WordAssignment]:
    """Assign each word to its maximum-activation dimension.

    Words whose best activation falls below the floor are UNASSIGNED; words
    missing from the vocabulary are marked UNKNOWN rather than failing the
    batch. Argmax ties go to the earlier dimension in the list.
    """
    if not dims:
        raise ValueError("at least one dimension is required")
    out = []
    for word in words:
        wid = matrix.vocab.get(word)
        if wid is None:
            out.append(WordAssignment(word, UNKNOWN, None))
            continue
        x = matrix.rows[wid]
        scores = [sigmoid(float(d.weights @ x + d.bias)) for d in dims]
        best = int(np.argmax(scores))
        top = scores[best]
        name = dims[best].name if top >= floor else UNASSIGNED
        out.append(WordAssignment(word, name, float(top)))
    return out


def scatter_export(
    docs: list[tuple[str, str]],
    dim_x: SupervisedDimension,
    dim_y: SupervisedDimension,
    matrix: EmbeddingMatrix,
    stopwords: frozenset[str] | set[str] | None,
    path,
    *,
    dedupe: bool = False,
) -> None:
    """Write a doc_id,x,y,token_count CSV of two-dimension document features.

    Documents with no eligible tokens are emitted with empty coordinates so
    the caller can list them rather than silently lose them.
    """
    if dim_x.name == dim_y.name:
        raise ValueError("scatter export needs two distinct dimensions")
    try:
        fh = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise FileUnwritableError(f"cannot write {path}: {exc}") from exc
    with fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", "x", "y", "token_count"])
        for doc_id, text in docs:
            try:
                fv = doc_features(
                    tokenize(text), [dim_x, dim_y], matrix, stopwords, dedupe,
                    doc_id=doc_id,
                )
            except EmptyDocumentError:
                writer.writerow([doc_id, "", "", 0])
                continue
            writer.writerow([doc_id, repr(fv.values[0]), repr(fv.values[1]), fv.token_count_used])
