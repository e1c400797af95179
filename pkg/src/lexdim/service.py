"""HTTP facade over curation sessions.

A small FastAPI app exposes session creation, rounds, labeling, dictionary
export, and cross-lingual application of trained dimensions. Every mutation
is persisted to disk before the response is sent, so a killed and restarted
service reloads exactly the state its clients were last shown. Embedding
matrices are loaded once at startup and shared read-only.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Query
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .classifier import (
    SupervisedDimension,
    TrainConfig,
    load_dimension,
)
from .crosslingual import AlignmentMap, apply_dimension_foreign, load_alignment
from .docfeatures import doc_features, load_stopwords, tokenize
from .curation import (
    CurationSession,
    apply_labels,
    dictionary_to_dict,
    export_dictionary,
    init_session,
    load_session,
    run_round,
    save_session,
    session_to_dict,
)
from .embeddings import (
    EmbeddingMatrix,
    load_cache,
    load_text_embeddings,
    normalize,
    sigmoid,
)
from .errors import (
    DimensionMismatchError,
    EmptyDocumentError,
    FileUnreadableError,
    LexdimError,
    NotTrainedError,
    OverlappingLabelsError,
    UnknownWordError,
)

DEFAULT_LISTEN = "127.0.0.1:8234"

ENV_LISTEN = "LEXDIM_LISTEN"
ENV_DATA_DIR = "LEXDIM_DATA_DIR"

_TRAIN_KEYS = ("positive_class_weight", "l2_strength", "tolerance", "max_iterations")


@dataclass
class ServiceConfig:
    """Runtime settings; see parse_config for the file format."""

    data_dir: Path
    embeddings: dict[str, Path] = field(default_factory=dict)
    alignments: dict[str, Path] = field(default_factory=dict)
    listen: str = DEFAULT_LISTEN
    primary_language: str | None = None
    train_config: TrainConfig = field(default_factory=TrainConfig)
    static_dir: Path | None = None

    @property
    def host(self) -> str:
        host, _, _ = self.listen.rpartition(":")
        return host or "127.0.0.1"

    @property
    def port(self) -> int:
        _, _, port = self.listen.rpartition(":")
        return int(port)


def parse_config(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment, blanks are skipped."""
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        pairs[key.strip()] = value.strip()
    return pairs


def config_from_pairs(pairs: dict[str, str], base_dir: Path | None = None) -> ServiceConfig:
    """Build a ServiceConfig; relative paths resolve against base_dir."""
    base = Path(base_dir) if base_dir is not None else Path(".")

    def as_path(value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else base / p

    embeddings: dict[str, Path] = {}
    alignments: dict[str, Path] = {}
    train_kwargs: dict = {}
    listen = DEFAULT_LISTEN
    data_dir: Path | None = None
    primary: str | None = None
    static_dir: Path | None = None

    for key, value in pairs.items():
        if key == "listen":
            listen = value
        elif key == "data_dir":
            data_dir = as_path(value)
        elif key == "primary_language":
            primary = value
        elif key == "static_dir":
            static_dir = as_path(value)
        elif key.startswith("embeddings."):
            embeddings[key.removeprefix("embeddings.")] = as_path(value)
        elif key.startswith("alignment."):
            alignments[key.removeprefix("alignment.")] = as_path(value)
        elif key in ("positive_class_weight", "l2_strength", "tolerance"):
            train_kwargs[key] = float(value)
        elif key == "max_iterations":
            train_kwargs[key] = int(value)
        else:
            raise ValueError(f"unknown config key: {key!r}")

    if primary is None and embeddings:
        primary = next(iter(embeddings))
    return ServiceConfig(
        data_dir=data_dir if data_dir is not None else base / "lexdim-data",
        embeddings=embeddings,
        alignments=alignments,
        listen=listen,
        primary_language=primary,
        train_config=TrainConfig(**train_kwargs),
        static_dir=static_dir,
    )


def load_config(path=None) -> ServiceConfig:
    """Read a config file, then apply environment overrides.

    LEXDIM_LISTEN overrides the listen address; LEXDIM_DATA_DIR overrides
    the data directory. With no path, defaults plus overrides are used.
    """
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise FileUnreadableError(f"cannot read config {path}: {exc}") from exc
        config = config_from_pairs(parse_config(text), base_dir=Path(path).parent)
    else:
        config = config_from_pairs({})
    if os.environ.get(ENV_LISTEN):
        config.listen = os.environ[ENV_LISTEN]
    if os.environ.get(ENV_DATA_DIR):
        config.data_dir = Path(os.environ[ENV_DATA_DIR])
    return config


def load_embeddings_any(path) -> EmbeddingMatrix:
    """Load a binary cache or a text vector file; always returns normalized."""
    try:
        with open(path, "rb") as fh:
            magic = fh.read(4)
    except OSError as exc:
        raise FileUnreadableError(f"cannot read {path}: {exc}") from exc
    if magic == b"LDMC":
        return load_cache(path)
    matrix = load_text_embeddings(path)
    return normalize(matrix)


class ApiError(Exception):
    """Error with an explicit HTTP status, rendered as {code, message, detail?}."""

    def __init__(self, status: int, code: str, message: str, detail=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


class CreateSessionRequest(BaseModel):
    dimension_name: str
    seeds: list[str] = Field(min_length=1)
    rng_seed: int = 0


class RoundRequest(BaseModel):
    k: int = Field(default=25, ge=1)


class LabelsRequest(BaseModel):
    accept: list[str] = Field(default_factory=list)
    reject: list[str] = Field(default_factory=list)


class ApplyRequest(BaseModel):
    language_tag: str
    k: int = Field(default=10, ge=1)
    words: list[str] | None = None


class DocItem(BaseModel):
    id: str
    text: str


class DocFeaturesRequest(BaseModel):
    dimension_ids: list[str] = Field(min_length=1)
    docs: list[DocItem] = Field(min_length=1)
    dedupe: bool = False
    keep_stopwords: bool = False


class ServiceState:
    """Mutable service state: loaded matrices, session cache, per-session locks."""

    def __init__(
        self,
        config: ServiceConfig,
        matrices: dict[str, EmbeddingMatrix],
        alignments: dict[str, AlignmentMap],
    ):
        self.config = config
        self.matrices = matrices
        self.alignments = alignments
        self.sessions: dict[str, CurationSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def lock_for(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    @property
    def primary_matrix(self) -> EmbeddingMatrix:
        return self.matrices[self.config.primary_language]

    def session_path(self, session_id: str) -> Path:
        return self.config.data_dir / "sessions" / f"{session_id}.json"

    def dimension_path(self, dimension_id: str) -> Path:
        return self.config.data_dir / "dimensions" / f"{dimension_id}.json"

    def get_session(self, session_id: str) -> CurationSession:
        session = self.sessions.get(session_id)
        if session is None:
            path = self.session_path(session_id)
            if not path.exists():
                raise ApiError(404, "NotFound", f"no session {session_id!r}")
            session = load_session(path)
            self.sessions[session_id] = session
        return session

    def persist(self, session: CurationSession) -> None:
        save_session(session, self.session_path(session.id))

    def get_dimension(self, dimension_id: str) -> SupervisedDimension:
        path = self.dimension_path(dimension_id)
        if path.exists():
            return load_dimension(path)
        session = self.sessions.get(dimension_id)
        if session is None:
            session_file = self.session_path(dimension_id)
            if not session_file.exists():
                raise ApiError(404, "NotFound", f"no dimension {dimension_id!r}")
            session = self.get_session(dimension_id)
        if session.current_dimension is None:
            raise NotTrainedError(f"session {dimension_id!r} has no trained dimension yet")
        return session.current_dimension


def _score_selected_foreign(
    dimension: SupervisedDimension,
    foreign: EmbeddingMatrix,
    alignment: AlignmentMap | None,
    words: list[str],
) -> list[dict]:
    """Score the given foreign words (request order) instead of ranking all."""
    ids = np.array([foreign.vocab.id(w) for w in words], dtype=np.intp)
    q = alignment.q if alignment is not None else np.eye(foreign.dim)
    mapped = foreign.rows[ids] @ q.T
    mapped = mapped / np.linalg.norm(mapped, axis=1)[:, None]
    scores = sigmoid(mapped @ dimension.weights + dimension.bias)
    return [{"word": w, "score": float(s)} for w, s in zip(words, scores)]


def create_app(
    config: ServiceConfig,
    *,
    matrices: dict[str, EmbeddingMatrix] | None = None,
    alignments: dict[str, AlignmentMap] | None = None,
) -> FastAPI:
    """Build the application; matrices may be injected to skip file loading."""
    if matrices is None:
        matrices = {tag: load_embeddings_any(p) for tag, p in config.embeddings.items()}
    if alignments is None:
        alignments = {tag: load_alignment(p) for tag, p in config.alignments.items()}
    if not matrices:
        raise ValueError("at least one embedding source must be configured")
    if config.primary_language is None:
        config.primary_language = next(iter(matrices))
    if config.primary_language not in matrices:
        raise ValueError(f"primary language {config.primary_language!r} has no embeddings")

    (config.data_dir / "sessions").mkdir(parents=True, exist_ok=True)
    (config.data_dir / "dimensions").mkdir(parents=True, exist_ok=True)

    state = ServiceState(config, matrices, alignments)
    stopwords = load_stopwords()
    app = FastAPI(title="lexdim", docs_url=None, redoc_url=None)
    app.state.lexdim = state
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(ApiError)
    def handle_api_error(request, exc: ApiError):
        body = {"code": exc.code, "message": exc.message}
        if exc.detail is not None:
            body["detail"] = exc.detail
        return JSONResponse(status_code=exc.status, content=body)

    @app.exception_handler(LexdimError)
    def handle_module_error(request, exc: LexdimError):
        status = 422 if isinstance(exc, OverlappingLabelsError) else 400
        body = {"code": exc.code, "message": str(exc)}
        if isinstance(exc, UnknownWordError):
            body["detail"] = {"word": exc.word}
        return JSONResponse(status_code=status, content=body)

    @app.exception_handler(RequestValidationError)
    def handle_validation_error(request, exc: RequestValidationError):
        detail = [
            {"loc": [str(part) for part in e["loc"]], "msg": e["msg"]}
            for e in exc.errors()
        ]
        return JSONResponse(
            status_code=400,
            content={"code": "ValidationError", "message": "invalid request", "detail": detail},
        )

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "primary_language": state.config.primary_language,
            "vocab_sizes": {tag: len(m.vocab) for tag, m in state.matrices.items()},
        }

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionRequest):
        session = init_session(
            state.primary_matrix,
            body.seeds,
            body.rng_seed,
            dimension_name=body.dimension_name,
        )
        state.sessions[session.id] = session
        state.persist(session)
        return {"session_id": session.id}

    @app.get("/sessions")
    def list_sessions():
        listed = []
        seen = set()
        for session in state.sessions.values():
            seen.add(session.id)
            listed.append(session)
        sessions_dir = state.config.data_dir / "sessions"
        for path in sorted(sessions_dir.glob("*.json")):
            if path.stem not in seen:
                listed.append(state.get_session(path.stem))
        return {
            "sessions": [
                {
                    "session_id": s.id,
                    "dimension_name": s.dimension_name,
                    "round": s.round,
                    "positives": len(s.labels.positives),
                    "negatives": len(s.labels.negatives),
                }
                for s in sorted(listed, key=lambda s: s.id)
            ]
        }

    @app.post("/sessions/{session_id}/round")
    def post_round(session_id: str, body: RoundRequest):
        lock = state.lock_for(session_id)
        if not lock.acquire(blocking=False):
            raise ApiError(409, "RoundInFlight", f"a round is already running for {session_id!r}")
        try:
            session = state.get_session(session_id)
            session, candidates = run_round(
                session, state.primary_matrix, state.config.train_config, body.k
            )
            state.persist(session)
            return {
                "round": session.round,
                "candidates": [{"word": c.word, "score": c.score} for c in candidates],
            }
        finally:
            lock.release()

    @app.post("/sessions/{session_id}/labels")
    def post_labels(session_id: str, body: LabelsRequest):
        with state.lock_for(session_id):
            session = state.get_session(session_id)
            apply_labels(session, state.primary_matrix, body.accept, body.reject)
            state.persist(session)
            return {
                "round": session.round,
                "positives": len(session.labels.positives),
                "negatives": len(session.labels.negatives),
                "auto_negatives": len(session.auto_negatives),
            }

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = state.get_session(session_id)
        vocab = state.primary_matrix.vocab
        payload = session_to_dict(session)
        payload["positive_words"] = [vocab.word(i) for i in payload["positives"]]
        payload["negative_words"] = [vocab.word(i) for i in payload["negatives"]]
        return payload

    @app.get("/sessions/{session_id}/dictionary")
    def get_dictionary(session_id: str, threshold: float = Query(default=0.5, gt=0.0, lt=1.0)):
        session = state.get_session(session_id)
        dictionary = export_dictionary(session, state.primary_matrix, threshold)
        return dictionary_to_dict(dictionary)

    @app.post("/doc-features")
    def post_doc_features(body: DocFeaturesRequest):
        matrix = state.primary_matrix
        dims = [state.get_dimension(i) for i in body.dimension_ids]
        for dim in dims:
            if dim.dim != matrix.dim:
                raise DimensionMismatchError(
                    f"dimension {dim.name!r} has {dim.dim} weights, vocabulary has {matrix.dim}"
                )
        stop = None if body.keep_stopwords else stopwords
        rows = []
        for doc in body.docs:
            try:
                vec = doc_features(
                    tokenize(doc.text), dims, matrix, stop, body.dedupe, doc_id=doc.id
                )
                rows.append(
                    {"doc_id": doc.id, "values": vec.values, "token_count": vec.token_count_used}
                )
            except EmptyDocumentError:
                rows.append({"doc_id": doc.id, "values": None, "token_count": 0})
        return {"dimension_names": [d.name for d in dims], "rows": rows}

    @app.post("/dimensions/{dimension_id}/apply")
    def post_apply(dimension_id: str, body: ApplyRequest):
        dimension = state.get_dimension(dimension_id)
        matrix = state.matrices.get(body.language_tag)
        if matrix is None:
            raise ApiError(
                400, "UnknownLanguage", f"no embeddings configured for {body.language_tag!r}"
            )
        alignment = state.alignments.get(body.language_tag)
        if body.words is not None:
            scored = _score_selected_foreign(dimension, matrix, alignment, body.words)
        else:
            candidates = apply_dimension_foreign(dimension, matrix, alignment, body.k)
            scored = [{"word": c.word, "score": c.score} for c in candidates]
        return {
            "dimension_name": dimension.name,
            "language_tag": body.language_tag,
            "candidates": scored,
        }

    if config.static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app


def run_service(config: ServiceConfig, app: FastAPI | None = None) -> None:
    """Blocking uvicorn runner for the CLI."""
    import uvicorn

    uvicorn.run(app or create_app(config), host=config.host, port=config.port, log_level="warning")
