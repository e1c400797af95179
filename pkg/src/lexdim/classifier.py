"""Weighted binary logistic regression on unit-norm embedding rows.

A supervised dimension is the minimizer (w, b) of

    L(w, b) = sum_i c_i * CE(y_i, sigmoid(w . x_i + b)) + (l2/2) * ||w||^2

where c_i is the positive class weight for positives and 1 for negatives,
and the bias is unregularized. The objective is smooth and convex, so
full-batch gradient descent with Armijo backtracking converges
deterministically from the zero start; identical inputs give bit-identical
results on the same platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingMatrix, sigmoid
from .errors import (
    CorruptFileError,
    DimensionMismatchError,
    EmptyClassError,
    FileUnreadableError,
    FileUnwritableError,
    OverlappingLabelsError,
    VersionMismatchError,
)

DIMENSION_FORMAT_VERSION = 1

_ARMIJO_SLOPE = 1e-4
_ARMIJO_SHRINK = 0.5
_MIN_STEP = 1e-30

STOP_GRADIENT = "gradient"
STOP_MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters; defaults follow the standard setup."""

    positive_class_weight: float = 2.0
    l2_strength: float = 1.0
    tolerance: float = 1e-8
    max_iterations: int = 1000

    def __post_init__(self):
        if self.positive_class_weight < 1.0:
            raise ValueError("positive_class_weight must be >= 1")
        if self.l2_strength <= 0.0:
            raise ValueError("l2_strength must be > 0")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class LabeledSet:
    """Expert-confirmed positive and negative word ids."""

    positives: set[int] = field(default_factory=set)
    negatives: set[int] = field(default_factory=set)

    def check_disjoint(self):
        overlap = self.positives & self.negatives
        if overlap:
            raise OverlappingLabelsError(
                f"words labeled both positive and negative: {sorted(overlap)[:5]}"
            )


@dataclass(eq=False)
class SupervisedDimension:
    """A named direction in embedding space with a bias: one linear classifier."""

    name: str
    weights: np.ndarray
    bias: float
    trained_rounds: int
    config_snapshot: TrainConfig
    stop_reason: str = STOP_GRADIENT
    n_iterations: int = 0

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64).reshape(-1)
        self.weights.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class FitResult:
    weights: np.ndarray
    bias: float
    loss: float
    stop_reason: str
    n_iterations: int


def _loss_terms(x, y, c, l2, w, b):
    z = x @ w + b
    # CE(y, sigmoid(z)) = y*softplus(-z) + (1-y)*softplus(z), computed stably
    ce = np.where(y == 1.0, np.logaddexp(0.0, -z), np.logaddexp(0.0, z))
    return z, float(c @ ce + 0.5 * l2 * (w @ w))


def _loss_only(x, y, c, l2, w, b) -> float:
    return _loss_terms(x, y, c, l2, w, b)[1]


def _loss_grad(x, y, c, l2, w, b):
    z, loss = _loss_terms(x, y, c, l2, w, b)
    residual = c * (sigmoid(z) - y)
    grad_w = x.T @ residual + l2 * w
    grad_b = float(residual.sum())
    return loss, grad_w, grad_b


def fit_logistic(x, y, sample_weights, l2_strength, tolerance, max_iterations) -> FitResult:
    """Minimize the weighted, L2-regularized logistic loss over (w, b).

    Full-batch gradient descent; each step backtracks from 1.0 by halving
    until the Armijo condition holds. Starts at w = 0, b = 0.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    c = np.asarray(sample_weights, dtype=np.float64)
    n, d = x.shape
    w = np.zeros(d)
    b = 0.0
    loss, grad_w, grad_b = _loss_grad(x, y, c, l2_strength, w, b)
    stop = STOP_MAX_ITERATIONS
    n_iter = 0
    for it in range(max_iterations + 1):
        grad_inf = max(float(np.abs(grad_w).max(initial=0.0)), abs(grad_b))
        if grad_inf <= tolerance:
            stop = STOP_GRADIENT
            n_iter = it
            break
        if it == max_iterations:
            n_iter = it
            break
        slope = float(grad_w @ grad_w) + grad_b * grad_b
        t = 1.0
        while True:
            w_next = w - t * grad_w
            b_next = b - t * grad_b
            loss_next = _loss_only(x, y, c, l2_strength, w_next, b_next)
            if loss_next <= loss - _ARMIJO_SLOPE * t * slope or t < _MIN_STEP:
                break
            t *= _ARMIJO_SHRINK
        w, b = w_next, b_next
        loss, grad_w, grad_b = _loss_grad(x, y, c, l2_strength, w, b)
    return FitResult(w, b, loss, stop, n_iter)


def _assemble(matrix: EmbeddingMatrix, labels: LabeledSet, config: TrainConfig):
    labels.check_disjoint()
    if not labels.positives or not labels.negatives:
        raise EmptyClassError("both positive and negative label sets must be nonempty")
    n = len(matrix.vocab)
    pos = sorted(labels.positives)
    neg = sorted(labels.negatives)
    for wid in (pos[0], pos[-1], neg[0], neg[-1]):
        if wid < 0 or wid >= n:
            raise ValueError(f"word id {wid} out of range for vocabulary of {n}")
    ids = np.fromiter(pos + neg, dtype=np.intp)
    x = matrix.rows[ids]
    y = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
    c = np.concatenate([
        np.full(len(pos), config.positive_class_weight),
        np.ones(len(neg)),
    ])
    return x, y, c


def train(
    matrix: EmbeddingMatrix,
    labels: LabeledSet,
    config: TrainConfig | None = None,
    *,
    name: str = "",
    trained_rounds: int = 1,
) -> SupervisedDimension:
    """Fit a supervised dimension on the labeled rows of the matrix."""
    config = config or TrainConfig()
    x, y, c = _assemble(matrix, labels, config)
    result = fit_logistic(
        x, y, c, config.l2_strength, config.tolerance, config.max_iterations
    )
    return SupervisedDimension(
        name=name,
        weights=result.weights,
        bias=result.bias,
        trained_rounds=trained_rounds,
        config_snapshot=config,
        stop_reason=result.stop_reason,
        n_iterations=result.n_iterations,
    )


def loss_and_gradient(
    matrix: EmbeddingMatrix,
    labels: LabeledSet,
    config: TrainConfig,
    weights,
    bias: float,
):
    """Exact analytic loss and gradient of the training objective at (weights, bias)."""
    x, y, c = _assemble(matrix, labels, config)
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    if w.shape[0] != matrix.dim:
        raise DimensionMismatchError(
            f"weight length {w.shape[0]} != matrix dim {matrix.dim}"
        )
    return _loss_grad(x, y, c, config.l2_strength, w, float(bias))


def decision_value(dimension: SupervisedDimension, vector) -> float:
    """Raw projection w . x + b; its sigmoid is the probability score."""
    v = np.asarray(vector, dtype=np.float64).reshape(-1)
    if v.shape[0] != dimension.dim:
        raise DimensionMismatchError(
            f"vector length {v.shape[0]} != dimension dim {dimension.dim}"
        )
    return float(dimension.weights @ v + dimension.bias)


def with_rounds(dimension: SupervisedDimension, trained_rounds: int) -> SupervisedDimension:
    return replace(dimension, trained_rounds=trained_rounds)


def dimension_to_dict(dimension: SupervisedDimension) -> dict:
    cfg = dimension.config_snapshot
    return {
        "format_version": DIMENSION_FORMAT_VERSION,
        "name": dimension.name,
        "dim": dimension.dim,
        "weights": [float(v) for v in dimension.weights],
        "bias": float(dimension.bias),
        "trained_rounds": dimension.trained_rounds,
        "stop_reason": dimension.stop_reason,
        "n_iterations": dimension.n_iterations,
        "config": {
            "positive_class_weight": cfg.positive_class_weight,
            "l2_strength": cfg.l2_strength,
            "tolerance": cfg.tolerance,
            "max_iterations": cfg.max_iterations,
        },
    }


def dimension_from_dict(payload: dict) -> SupervisedDimension:
    try:
        version = payload["format_version"]
        if version != DIMENSION_FORMAT_VERSION:
            raise VersionMismatchError(
                f"dimension format {version}, expected {DIMENSION_FORMAT_VERSION}"
            )
        cfg = payload["config"]
        weights = np.array(payload["weights"], dtype=np.float64)
        if weights.shape[0] != payload["dim"]:
            raise CorruptFileError("weight count differs from declared dim")
        return SupervisedDimension(
            name=payload["name"],
            weights=weights,
            bias=float(payload["bias"]),
            trained_rounds=int(payload["trained_rounds"]),
            config_snapshot=TrainConfig(
                positive_class_weight=cfg["positive_class_weight"],
                l2_strength=cfg["l2_strength"],
                tolerance=cfg["tolerance"],
                max_iterations=cfg["max_iterations"],
            ),
            stop_reason=payload.get("stop_reason", STOP_GRADIENT),
            n_iterations=int(payload.get("n_iterations", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFileError(f"bad dimension payload: {exc}") from exc


def save_dimension(dimension: SupervisedDimension, path) -> None:
    try:
        Path(path).write_text(
            json.dumps(dimension_to_dict(dimension), indent=2) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise FileUnwritableError(f"cannot write {path}: {exc}") from exc


def load_dimension(path) -> SupervisedDimension:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileUnreadableError(f"cannot read {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptFileError(f"bad JSON in {path}: {exc}") from exc
    return dimension_from_dict(payload)
