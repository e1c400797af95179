"""Iterative dictionary curation: seed, sample negatives, train, rank, label.

One round trains a dimension on the expert positives against expert plus
auto-sampled negatives, then ranks every unlabeled word by score so the
expert can accept or reject the top candidates. Dictionaries are thresholded
score lists exported from the current dimension.
"""

from __future__ import annotations

import json
import os
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .classifier import (
    LabeledSet,
    SupervisedDimension,
    TrainConfig,
    dimension_from_dict,
    dimension_to_dict,
    train,
)
from .embeddings import EmbeddingMatrix, score_all
from .errors import (
    CorruptFileError,
    EmptySeedsError,
    FileUnreadableError,
    FileUnwritableError,
    InsufficientLabelsError,
    NotTrainedError,
    OverlappingLabelsError,
    UnknownWordError,
    VersionMismatchError,
    VocabularyExhaustedError,
)

SESSION_FORMAT_VERSION = 1

# Auto-negative sample size is clamp(multiplier * |positives|, floor, ceiling).
NEGATIVE_SAMPLE_MULTIPLIER = 10
NEGATIVE_SAMPLE_FLOOR = 100
NEGATIVE_SAMPLE_CEILING = 1000


class Candidate(NamedTuple):
    word: str
    word_id: int
    score: float


class DictionaryEntry(NamedTuple):
    word: str
    score: float


@dataclass
class Dictionary:
    """Thresholded (word, score) list exported from a dimension."""

    dimension_name: str
    threshold: float
    entries: list[DictionaryEntry]

    def words(self) -> list[str]:
        return [e.word for e in self.entries]


@dataclass
class RoundRecord:
    """Append-only record of one train-and-rank round."""

    round_index: int
    n_positives: int
    n_negatives: int
    n_auto_negatives: int
    stop_reason: str
    top_k: list[tuple[str, float]]


@dataclass
class CurationSession:
    """Mutable state of one curation loop; single writer per session."""

    id: str
    dimension_name: str
    labels: LabeledSet
    auto_negatives: set[int] = field(default_factory=set)
    round: int = 0
    rng_seed: int = 0
    current_dimension: SupervisedDimension | None = None
    history: list[RoundRecord] = field(default_factory=list)
    label_history: list[dict] = field(default_factory=list)

    def check_invariants(self):
        self.labels.check_disjoint()
        if self.auto_negatives & (self.labels.positives | self.labels.negatives):
            raise OverlappingLabelsError("auto-negatives overlap labeled words")
        if self.round != len(self.history):
            raise ValueError("round counter out of sync with history")


def init_session(
    matrix: EmbeddingMatrix,
    seed_positives: list[str],
    rng_seed: int,
    *,
    dimension_name: str = "dimension",
    session_id: str | None = None,
) -> CurationSession:
    """Start a session from seed keywords; every seed must be in the vocabulary."""
    if not seed_positives:
        raise EmptySeedsError("at least one seed keyword is required")
    ids = {matrix.vocab.id(w) for w in seed_positives}
    return CurationSession(
        id=session_id or uuid.uuid4().hex,
        dimension_name=dimension_name,
        labels=LabeledSet(positives=ids, negatives=set()),
        rng_seed=int(rng_seed),
    )


def _sample_size(n_positives: int, multiplier: int, floor: int, ceiling: int) -> int:
    return max(floor, min(ceiling, multiplier * n_positives))


def sample_negatives(
    session: CurationSession,
    matrix: EmbeddingMatrix,
    *,
    multiplier: int = NEGATIVE_SAMPLE_MULTIPLIER,
    floor: int = NEGATIVE_SAMPLE_FLOOR,
    ceiling: int = NEGATIVE_SAMPLE_CEILING,
) -> CurationSession:
    """Replace auto-negatives with a fresh seeded uniform sample.

    The sample is drawn without replacement from the vocabulary minus all
    labeled words, seeded by rng_seed XOR round so each round draws fresh
    noise deterministically.
    """
    labeled = session.labels.positives | session.labels.negatives
    pool = np.array(
        sorted(set(range(len(matrix.vocab))) - labeled), dtype=np.intp
    )
    if pool.size == 0:
        raise VocabularyExhaustedError("no unlabeled words left to sample")
    n = min(_sample_size(len(session.labels.positives), multiplier, floor, ceiling), pool.size)
    seed = (session.rng_seed ^ session.round) & 0xFFFFFFFFFFFFFFFF
    rng = np.random.default_rng(seed)
    sample = rng.choice(pool, size=n, replace=False)
    session.auto_negatives = set(int(i) for i in sample)
    return session


def run_round(
    session: CurationSession,
    matrix: EmbeddingMatrix,
    config: TrainConfig | None = None,
    k: int = 25,
    *,
    sample_kwargs: dict | None = None,
) -> tuple[CurationSession, list[Candidate]]:
    """Train on current labels, rank all unlabeled words, record the round.

    Auto-negatives are freshly resampled whenever the session relies on them
    (they are already present, or no negatives exist at all). A session run
    purely on expert negatives is left untouched.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    config = config or TrainConfig()
    uses_auto = bool(session.auto_negatives) or not session.labels.negatives
    if uses_auto:
        sample_negatives(session, matrix, **(sample_kwargs or {}))

    training = LabeledSet(
        positives=set(session.labels.positives),
        negatives=session.labels.negatives | session.auto_negatives,
    )
    dimension = train(
        matrix,
        training,
        config,
        name=session.dimension_name,
        trained_rounds=session.round + 1,
    )

    scores = score_all(matrix, dimension.weights, dimension.bias)
    excluded = session.labels.positives | session.labels.negatives | session.auto_negatives
    candidates = _rank_candidates(matrix, scores, excluded, k)

    session.current_dimension = dimension
    session.history.append(
        RoundRecord(
            round_index=session.round,
            n_positives=len(session.labels.positives),
            n_negatives=len(session.labels.negatives),
            n_auto_negatives=len(session.auto_negatives),
            stop_reason=dimension.stop_reason,
            top_k=[(c.word, c.score) for c in candidates],
        )
    )
    session.round += 1
    return session, candidates


def _rank_candidates(
    matrix: EmbeddingMatrix, scores: np.ndarray, excluded: set[int], k: int
) -> list[Candidate]:
    mask = np.ones(len(matrix.vocab), dtype=bool)
    if excluded:
        mask[np.fromiter(excluded, dtype=np.intp)] = False
    ids = np.nonzero(mask)[0]
    if ids.size == 0:
        return []
    # descending score, ties broken by ascending word id (lexsort: last key primary)
    order = np.lexsort((ids, -scores[ids]))[: min(k, ids.size)]
    picked = ids[order]
    return [
        Candidate(matrix.vocab.word(int(i)), int(i), float(scores[i])) for i in picked
    ]


def apply_labels(
    session: CurationSession,
    matrix: EmbeddingMatrix,
    accept: list[str],
    reject: list[str],
) -> CurationSession:
    """Record expert judgments; last write wins when a word is relabeled."""
    accept_ids = [matrix.vocab.id(w) for w in accept]
    reject_ids = [matrix.vocab.id(w) for w in reject]
    overlap = set(accept_ids) & set(reject_ids)
    if overlap:
        words = [matrix.vocab.word(i) for i in sorted(overlap)]
        raise OverlappingLabelsError(f"words both accepted and rejected: {words}")

    moved = []
    for wid in accept_ids:
        if wid in session.labels.negatives:
            session.labels.negatives.discard(wid)
            moved.append(matrix.vocab.word(wid))
        session.auto_negatives.discard(wid)
        session.labels.positives.add(wid)
    for wid in reject_ids:
        if wid in session.labels.positives:
            session.labels.positives.discard(wid)
            moved.append(matrix.vocab.word(wid))
        session.auto_negatives.discard(wid)
        session.labels.negatives.add(wid)

    session.label_history.append(
        {
            "after_round": session.round,
            "accepted": list(accept),
            "rejected": list(reject),
            "relabeled": moved,
        }
    )
    session.check_invariants()
    return session


def export_dictionary(
    session: CurationSession, matrix: EmbeddingMatrix, threshold: float
) -> Dictionary:
    """All vocabulary words scoring at or above the threshold, best first.

    Expert negatives are excluded even when their score clears the threshold:
    expert intent outranks the model. Labeled positives compete by score like
    any other word.
    """
    if session.current_dimension is None:
        raise NotTrainedError("session has no trained dimension yet")
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be strictly between 0 and 1")
    dim = session.current_dimension
    scores = score_all(matrix, dim.weights, dim.bias)
    mask = scores >= threshold
    if session.labels.negatives:
        mask[np.fromiter(session.labels.negatives, dtype=np.intp)] = False
    ids = np.nonzero(mask)[0]
    order = np.lexsort((ids, -scores[ids]))
    entries = [
        DictionaryEntry(matrix.vocab.word(int(i)), float(scores[i]))
        for i in ids[order]
    ]
    return Dictionary(session.dimension_name, threshold, entries)


@dataclass
class HoldoutResult:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int


@dataclass
class AggregateMetrics:
    micro_precision: float
    micro_recall: float
    micro_f1: float
    macro_precision: float
    macro_recall: float
    macro_f1: float


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    # 0/0 is defined as 0 (conservative)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def evaluate_holdout(
    matrix: EmbeddingMatrix,
    labels: LabeledSet,
    config: TrainConfig | None = None,
    holdout_fraction: float = 0.10,
    rng_seed: int = 0,
    threshold: float = 0.5,
) -> HoldoutResult:
    """Stratified holdout evaluation of a dimension trained on the rest.

    Holds out the given fraction of each class (at least one word per class
    on each side), trains on the remainder, and scores the held-out words at
    the threshold.
    """
    config = config or TrainConfig()
    labels.check_disjoint()
    if len(labels.positives) < 2 or len(labels.negatives) < 2:
        raise InsufficientLabelsError(
            "need at least 2 labeled words per class for a stratified split"
        )
    if not 0.0 < holdout_fraction < 1.0:
        raise ValueError("holdout_fraction must be in (0, 1)")
    rng = np.random.default_rng(int(rng_seed) & 0xFFFFFFFFFFFFFFFF)

    def split(ids: set[int]):
        arr = np.array(sorted(ids), dtype=np.intp)
        rng.shuffle(arr)
        n_hold = int(round(holdout_fraction * arr.size))
        n_hold = max(1, min(n_hold, arr.size - 1))
        return set(arr[n_hold:].tolist()), arr[:n_hold]

    train_pos, held_pos = split(labels.positives)
    train_neg, held_neg = split(labels.negatives)
    dimension = train(
        matrix, LabeledSet(positives=train_pos, negatives=train_neg), config
    )
    scores = score_all(matrix, dimension.weights, dimension.bias)
    pred_pos = scores[held_pos] >= threshold
    pred_neg = scores[held_neg] >= threshold
    tp = int(pred_pos.sum())
    fn = int((~pred_pos).sum())
    fp = int(pred_neg.sum())
    tn = int((~pred_neg).sum())
    precision, recall, f1 = _prf(tp, fp, fn)
    return HoldoutResult(precision, recall, f1, tp, fp, fn, tn)


def aggregate_holdout(results: list[HoldoutResult]) -> AggregateMetrics:
    """Micro (pooled counts) and macro (mean of per-dimension metrics) averages."""
    if not results:
        raise ValueError("no results to aggregate")
    tp = sum(r.tp for r in results)
    fp = sum(r.fp for r in results)
    fn = sum(r.fn for r in results)
    micro_p, micro_r, micro_f1 = _prf(tp, fp, fn)
    macro_p = sum(r.precision for r in results) / len(results)
    macro_r = sum(r.recall for r in results) / len(results)
    macro_f1 = sum(r.f1 for r in results) / len(results)
    return AggregateMetrics(micro_p, micro_r, micro_f1, macro_p, macro_r, macro_f1)


def session_to_dict(session: CurationSession) -> dict:
    session.check_invariants()
    return {
        "format_version": SESSION_FORMAT_VERSION,
        "id": session.id,
        "dimension_name": session.dimension_name,
        "rng_seed": session.rng_seed,
        "round": session.round,
        "positives": sorted(session.labels.positives),
        "negatives": sorted(session.labels.negatives),
        "auto_negatives": sorted(session.auto_negatives),
        "current_dimension": (
            dimension_to_dict(session.current_dimension)
            if session.current_dimension is not None
            else None
        ),
        "history": [
            {
                "round_index": r.round_index,
                "n_positives": r.n_positives,
                "n_negatives": r.n_negatives,
                "n_auto_negatives": r.n_auto_negatives,
                "stop_reason": r.stop_reason,
                "top_k": [[w, s] for w, s in r.top_k],
            }
            for r in session.history
        ],
        "label_history": session.label_history,
    }


def session_from_dict(payload: dict) -> CurationSession:
    try:
        version = payload["format_version"]
        if version != SESSION_FORMAT_VERSION:
            raise VersionMismatchError(
                f"session format {version}, expected {SESSION_FORMAT_VERSION}"
            )
        dim_payload = payload["current_dimension"]
        session = CurationSession(
            id=payload["id"],
            dimension_name=payload["dimension_name"],
            labels=LabeledSet(
                positives=set(payload["positives"]),
                negatives=set(payload["negatives"]),
            ),
            auto_negatives=set(payload["auto_negatives"]),
            round=int(payload["round"]),
            rng_seed=int(payload["rng_seed"]),
            current_dimension=(
                dimension_from_dict(dim_payload) if dim_payload is not None else None
            ),
            history=[
                RoundRecord(
                    round_index=r["round_index"],
                    n_positives=r["n_positives"],
                    n_negatives=r["n_negatives"],
                    n_auto_negatives=r["n_auto_negatives"],
                    stop_reason=r["stop_reason"],
                    top_k=[(w, s) for w, s in r["top_k"]],
                )
                for r in payload["history"]
            ],
            label_history=list(payload["label_history"]),
        )
        session.check_invariants()
        return session
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFileError(f"bad session payload: {exc}") from exc


def save_session(session: CurationSession, path) -> None:
    """Atomically persist the session as versioned JSON."""
    payload = json.dumps(session_to_dict(session), indent=2) + "\n"
    tmp = str(path) + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except OSError as exc:
        raise FileUnwritableError(f"cannot write session {path}: {exc}") from exc


def load_session(path) -> CurationSession:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileUnreadableError(f"cannot read session {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptFileError(f"bad session JSON in {path}: {exc}") from exc
    return session_from_dict(payload)


def dictionary_to_dict(dictionary: Dictionary) -> dict:
    return {
        "dimension_name": dictionary.dimension_name,
        "threshold": dictionary.threshold,
        "entries": [{"word": w, "score": s} for w, s in dictionary.entries],
    }


def dictionary_to_text(dictionary: Dictionary) -> str:
    """Plain-text export: one word<TAB>score line, score with 6 decimals."""
    return "".join(f"{w}\t{s:.6f}\n" for w, s in dictionary.entries)
