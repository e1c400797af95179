"""Export trained dimensions for downstream models.

Dimensions serialize to a dense-layer initialization (weight matrix plus
bias vector) and to a precomputed per-word activation table; a desk-scale
demo measures the benefit of appending supervised activations to plain
bag-of-embedding document features.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifier import SupervisedDimension, TrainConfig, fit_logistic
from .docfeatures import tokenize
from .embeddings import EmbeddingMatrix, sigmoid
from .errors import (
    CorruptFileError,
    DimensionMismatchError,
    FileUnreadableError,
    FileUnwritableError,
    InsufficientClassesError,
    MixedDimensionalityError,
    VersionMismatchError,
)

DENSE_INIT_FORMAT_VERSION = 1

MODE_PLAIN = "plain"
MODE_AUGMENTED = "augmented"


@dataclass(eq=False)
class DenseInit:
    """Dense-layer initialization: row i of the weight matrix is names[i]."""

    names: list[str]
    weight_matrix: np.ndarray
    bias_vector: np.ndarray
    format_version: int = DENSE_INIT_FORMAT_VERSION


def _check_same_dim(dims: list[SupervisedDimension]) -> int:
    if not dims:
        raise ValueError("at least one dimension is required")
    d = dims[0].dim
    for dim in dims[1:]:
        if dim.dim != d:
            raise MixedDimensionalityError(
                f"dimension {dim.name!r} has dim {dim.dim}, expected {d}"
            )
    return d


def dense_init_from_dimensions(dims: list[SupervisedDimension]) -> DenseInit:
    _check_same_dim(dims)
    return DenseInit(
        names=[d.name for d in dims],
        weight_matrix=np.vstack([d.weights for d in dims]),
        bias_vector=np.array([d.bias for d in dims]),
    )


def export_dense_init(dims: list[SupervisedDimension], path) -> DenseInit:
    """Write the dimensions as a dense-layer init JSON; order is preserved."""
    init = dense_init_from_dimensions(dims)
    payload = {
        "format_version": init.format_version,
        "names": init.names,
        "weights": [[float(v) for v in row] for row in init.weight_matrix],
        "biases": [float(v) for v in init.bias_vector],
    }
    try:
        Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8")
    except OSError as exc:
        raise FileUnwritableError(f"cannot write {path}: {exc}") from exc
    return init


def load_dense_init(path) -> DenseInit:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileUnreadableError(f"cannot read {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptFileError(f"bad JSON in {path}: {exc}") from exc
    try:
        version = payload["format_version"]
        if version != DENSE_INIT_FORMAT_VERSION:
            raise VersionMismatchError(
                f"dense init format {version}, expected {DENSE_INIT_FORMAT_VERSION}"
            )
        weights = np.array(payload["weights"], dtype=np.float64)
        biases = np.array(payload["biases"], dtype=np.float64)
        names = list(payload["names"])
        if weights.shape[0] != len(names) or biases.shape[0] != len(names):
            raise CorruptFileError("row count differs from name count")
        return DenseInit(names, weights, biases, version)
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFileError(f"bad dense init payload: {exc}") from exc


@dataclass(eq=False)
class ActivationTable:
    """Precomputed per-word activations for a fixed dimension list."""

    vocab_hash: str
    names: list[str]
    values: np.ndarray


def vocab_hash(matrix: EmbeddingMatrix) -> str:
    h = hashlib.sha256()
    for word in matrix.vocab.words:
        h.update(word.encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def build_activation_table(
    dims: list[SupervisedDimension], matrix: EmbeddingMatrix
) -> ActivationTable:
    """Activation of every vocabulary word on every dimension."""
    d = _check_same_dim(dims)
    if d != matrix.dim:
        raise DimensionMismatchError(
            f"dimensions have dim {d}, matrix has dim {matrix.dim}"
        )
    if not matrix.normalized:
        raise ValueError("matrix must be normalized")
    weight_matrix = np.vstack([dim.weights for dim in dims])
    biases = np.array([dim.bias for dim in dims])
    values = sigmoid(matrix.rows @ weight_matrix.T + biases)
    return ActivationTable(vocab_hash(matrix), [dim.name for dim in dims], values)


def save_activation_table_csv(table: ActivationTable, matrix: EmbeddingMatrix, path) -> None:
    """CSV with one row per word; header carries the dimension names."""
    if table.vocab_hash != vocab_hash(matrix):
        raise DimensionMismatchError("activation table was built for a different vocabulary")
    try:
        fh = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise FileUnwritableError(f"cannot write {path}: {exc}") from exc
    with fh:
        writer = csv.writer(fh)
        writer.writerow(["word", *table.names])
        for i, word in enumerate(matrix.vocab.words):
            writer.writerow([word, *(repr(float(v)) for v in table.values[i])])


@dataclass
class DemoResult:
    mode: str
    accuracy: float
    macro_f1: float
    n_train_used: int
    n_test_used: int
    n_train_skipped: int
    n_test_skipped: int


def _doc_matrix(
    docs: list[tuple[str, str]],
    dims: list[SupervisedDimension],
    matrix: EmbeddingMatrix,
    mode: str,
    stopwords,
):
    """Featurize (text, label) docs; returns (features, labels, skipped count)."""
    weight_matrix = np.vstack([d.weights for d in dims])
    biases = np.array([d.bias for d in dims])
    feats, labels = [], []
    skipped = 0
    for text, label in docs:
        ids = [
            wid
            for t in tokenize(text)
            if (stopwords is None or t not in stopwords)
            and (wid := matrix.vocab.get(t)) is not None
        ]
        if not ids:
            skipped += 1
            continue
        x = matrix.rows[np.array(ids, dtype=np.intp)]
        mean_embedding = x.mean(axis=0)
        if mode == MODE_PLAIN:
            feats.append(mean_embedding)
        else:
            activations = sigmoid(x @ weight_matrix.T + biases).mean(axis=0)
            feats.append(np.concatenate([mean_embedding, activations]))
        labels.append(label)
    return np.array(feats), labels, skipped


def demo_downstream(
    train_docs: list[tuple[str, str]],
    test_docs: list[tuple[str, str]],
    dims: list[SupervisedDimension],
    matrix: EmbeddingMatrix,
    mode: str,
    *,
    stopwords=None,
    config: TrainConfig | None = None,
) -> DemoResult:
    """Bag-of-embeddings document classification, optionally augmented.

    Plain mode trains one-vs-rest logistic classifiers on mean word
    embeddings; augmented mode appends the mean supervised activations to
    the same features. Returns test accuracy and macro F1 for comparison.
    """
    if mode not in (MODE_PLAIN, MODE_AUGMENTED):
        raise ValueError(f"mode must be {MODE_PLAIN!r} or {MODE_AUGMENTED!r}")
    _check_same_dim(dims)
    # class weighting is symmetric for the one-vs-rest comparison
    config = config or TrainConfig(positive_class_weight=1.0)

    x_train, y_train, train_skipped = _doc_matrix(train_docs, dims, matrix, mode, stopwords)
    x_test, y_test, test_skipped = _doc_matrix(test_docs, dims, matrix, mode, stopwords)
    classes = sorted(set(y_train))
    if len(classes) < 2:
        raise InsufficientClassesError("need at least 2 classes in the training docs")
    if x_test.size == 0:
        raise InsufficientClassesError("no usable test documents")

    probs = np.empty((x_test.shape[0], len(classes)))
    for j, cls in enumerate(classes):
        y = np.array([1.0 if label == cls else 0.0 for label in y_train])
        c = np.where(y == 1.0, config.positive_class_weight, 1.0)
        fit = fit_logistic(
            x_train, y, c, config.l2_strength, config.tolerance, config.max_iterations
        )
        probs[:, j] = sigmoid(x_test @ fit.weights + fit.bias)

    predicted = [classes[i] for i in np.argmax(probs, axis=1)]
    correct = sum(1 for p, t in zip(predicted, y_test) if p == t)
    accuracy = correct / len(y_test)

    f1s = []
    for cls in classes:
        tp = sum(1 for p, t in zip(predicted, y_test) if p == cls and t == cls)
        fp = sum(1 for p, t in zip(predicted, y_test) if p == cls and t != cls)
        fn = sum(1 for p, t in zip(predicted, y_test) if p != cls and t == cls)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(2 * precision * recall / (precision + recall) if precision + recall else 0.0)

    return DemoResult(
        mode=mode,
        accuracy=accuracy,
        macro_f1=float(np.mean(f1s)),
        n_train_used=len(y_train),
        n_test_used=len(y_test),
        n_train_skipped=train_skipped,
        n_test_skipped=test_skipped,
    )
