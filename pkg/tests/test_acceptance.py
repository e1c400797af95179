"""Acceptance gate: one test per core criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. Two integration criteria need real aligned vector files and are
skipped unless LEXDIM_EN_VECTORS / LEXDIM_DE_VECTORS point at them.
"""

import json
import os
import socket
import subprocess
import time

import numpy as np
import pytest

from lexdim import (
    EmbeddingMatrix,
    LabeledSet,
    TrainConfig,
    Vocab,
    apply_dimension_foreign,
    apply_labels,
    demo_downstream,
    evaluate_holdout,
    export_dictionary,
    fit_logistic,
    init_session,
    load_text_embeddings,
    loss_and_gradient,
    normalize,
    procrustes_align,
    run_round,
    save_cache,
    score_all,
)
from lexdim.crosslingual import BilingualLexicon
from lexdim.transfer import MODE_AUGMENTED, MODE_PLAIN

from corpus import (
    TRANSFER_DOC_CONFIG,
    antipodal_sphere,
    noisy_cluster_labels,
    transfer_docs,
    transfer_world,
)
from oracles import finite_diff_gradient

# Frozen dense-grid minima (w, b on [-5, 5], step 0.01); provenance and the
# in-suite coarse re-derivation live in test_classifier.py.
GRID_A_MIN = 1.5683841672231087
GRID_B_MIN = 1.1860305047999051
GRID_C_MIN = 1.0509310392430407

EN_VECTORS = os.environ.get("LEXDIM_EN_VECTORS")
DE_VECTORS = os.environ.get("LEXDIM_DE_VECTORS")

_matrix_cache: dict = {}


def _report(criterion: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


def test_gradient_oracle():
    rng = np.random.default_rng(1234)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        n, d = 10, 4
        x = rng.standard_normal((n, d))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        y = np.zeros(n)
        y[: n // 2] = 1.0
        c = np.where(y == 1.0, 2.0, 1.0)
        l2 = float(rng.uniform(0.2, 2.0))
        w = rng.standard_normal(d)
        b = float(rng.standard_normal())

        matrix = EmbeddingMatrix(Vocab([f"w{i}" for i in range(n)]), d, x, normalized=True)
        labels = LabeledSet(positives=set(range(n // 2)), negatives=set(range(n // 2, n)))
        cfg = TrainConfig(positive_class_weight=2.0, l2_strength=l2)
        _, grad_w, grad_b = loss_and_gradient(matrix, labels, cfg, w, b)

        fd_w, fd_b = finite_diff_gradient(x.tolist(), y.tolist(), c.tolist(), l2, w.tolist(), b)
        analytic = np.append(grad_w, grad_b)
        numeric = np.append(fd_w, fd_b)
        rel = np.abs(analytic - numeric) / np.maximum(np.abs(numeric), 1e-10)
        worst = max(worst, float(rel.max()))
    elapsed = time.perf_counter() - start
    _report(
        "gradient-oracle",
        worst < 1e-4 and elapsed < 5.0,
        f"50 instances, worst per-component rel err {worst:.3e} (< 1e-4), {elapsed:.2f}s (< 5s)",
    )


def test_optimizer_oracle():
    start = time.perf_counter()
    x2 = np.array([[1.0, 0.0], [0.0, 1.0]])
    y2 = np.array([1.0, 0.0])
    x1 = np.array([[1.0], [-1.0]])
    fit_a = fit_logistic(x2, y2, np.array([2.0, 1.0]), 1.0, 1e-8, 5000)
    fit_b = fit_logistic(x2, y2, np.array([1.0, 1.0]), 1.0, 1e-8, 5000)
    fit_c = fit_logistic(x1, y2, np.array([1.0, 1.0]), 1.0, 1e-8, 5000)
    elapsed = time.perf_counter() - start

    gaps = {
        "A": fit_a.loss - GRID_A_MIN,
        "B": fit_b.loss - GRID_B_MIN,
        "C": fit_c.loss - GRID_C_MIN,
    }
    ok = all(abs(g) < 1e-3 for g in gaps.values())
    ok = ok and abs(fit_c.bias) < 1e-6
    ok = ok and elapsed < 10.0
    detail = ", ".join(f"{k} loss-grid gap {g:+.2e}" for k, g in gaps.items())
    _report(
        "optimizer-oracle",
        ok,
        f"{detail} (|gap| < 1e-3), symmetric |b| {abs(fit_c.bias):.2e} (< 1e-6), "
        f"{elapsed:.2f}s (< 10s)",
    )


def _scripted_curation(matrix):
    session = init_session(
        matrix, ["alpha0", "alpha1", "alpha2"], rng_seed=7, dimension_name="alphas"
    )
    for _ in range(2):
        session, candidates = run_round(session, matrix, k=5)
        apply_labels(session, matrix, [c.word for c in candidates], [])
    return export_dictionary(session, matrix, 0.5)


def test_separable_curation():
    start = time.perf_counter()
    matrix = antipodal_sphere(rng_seed=0)
    first = _scripted_curation(matrix)
    second = _scripted_curation(matrix)
    elapsed = time.perf_counter() - start

    words = first.words()
    n_alpha = sum(1 for w in words if w.startswith("alpha"))
    n_beta = sum(1 for w in words if w.startswith("beta"))
    n_other = len(words) - n_alpha - n_beta
    deterministic = [(e.word, e.score) for e in first.entries] == [
        (e.word, e.score) for e in second.entries
    ]
    ok = n_alpha >= 48 and n_beta == 0 and deterministic and elapsed < 5.0
    _report(
        "separable-curation",
        ok,
        f"dictionary(0.5) holds {n_alpha}/50 cluster-A (>= 48), {n_beta} cluster-B (= 0), "
        f"{n_other} background; rerun identical: {deterministic}; {elapsed:.2f}s (< 5s)",
    )


def test_holdout_harness():
    matrix = antipodal_sphere(rng_seed=0)
    clean = LabeledSet(positives=set(range(50)), negatives=set(range(50, 100)))
    exact = evaluate_holdout(matrix, clean)
    noisy = evaluate_holdout(
        matrix, noisy_cluster_labels(flip_seed=0), holdout_fraction=0.2, rng_seed=1
    )
    ok = exact.f1 == 1.0 and 0.5 < noisy.f1 < 1.0
    _report(
        "holdout-harness",
        ok,
        f"separable F1 {exact.f1} (= 1.0 exactly), "
        f"20%-noise F1 {noisy.f1:.4f} (strictly in (0.5, 1.0))",
    )


def test_procrustes_recovery():
    start = time.perf_counter()
    worst_recovery = 0.0
    worst_orth = 0.0
    for trial in range(20):
        rng = np.random.default_rng(1000 + trial)
        n, d = 60, 10
        rows = rng.standard_normal((n, d))
        rows /= np.linalg.norm(rows, axis=1, keepdims=True)
        training = EmbeddingMatrix(
            Vocab([f"t{i}" for i in range(n)]), d, rows, normalized=True
        )
        q, r = np.linalg.qr(rng.standard_normal((d, d)))
        rot = q * np.sign(np.diag(r))
        foreign = EmbeddingMatrix(
            Vocab([f"f{i}" for i in range(n)]), d, rows @ rot.T, normalized=True
        )
        picked = rng.choice(n, size=30, replace=False)
        lexicon = BilingualLexicon([(f"f{i}", f"t{i}") for i in picked])
        alignment = procrustes_align(foreign, training, lexicon)
        worst_recovery = max(worst_recovery, float(np.abs(alignment.q - rot.T).max()))
        worst_orth = max(
            worst_orth,
            float(np.abs(alignment.q.T @ alignment.q - np.eye(d)).max()),
        )
    elapsed = time.perf_counter() - start
    ok = worst_recovery < 1e-8 and worst_orth < 1e-8 and elapsed < 2.0
    _report(
        "procrustes-recovery",
        ok,
        f"20 random lexicons, worst elementwise recovery err {worst_recovery:.3e} (< 1e-8), "
        f"worst orthogonality dev {worst_orth:.3e} (< 1e-8), {elapsed:.2f}s (< 2s)",
    )


def test_transfer_demo():
    start = time.perf_counter()
    gaps = []
    for seed in range(10):
        matrix, rng, dims = transfer_world(seed)
        train_docs = transfer_docs(rng, 100)
        test_docs = transfer_docs(rng, 100)
        plain = demo_downstream(
            train_docs, test_docs, dims, matrix, MODE_PLAIN, config=TRANSFER_DOC_CONFIG
        )
        augmented = demo_downstream(
            train_docs, test_docs, dims, matrix, MODE_AUGMENTED, config=TRANSFER_DOC_CONFIG
        )
        gaps.append(augmented.accuracy - plain.accuracy)
    elapsed = time.perf_counter() - start
    median_gap = float(np.median(gaps))
    ok = median_gap >= 0.05 and elapsed < 30.0
    _report(
        "transfer-demo",
        ok,
        f"10-seed median accuracy gap {median_gap:+.4f} (>= +0.05), "
        f"min {min(gaps):+.4f}, max {max(gaps):+.4f}, {elapsed:.1f}s (< 30s)",
    )


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _wait_healthy(client, base, deadline=20.0):
    end = time.time() + deadline
    while time.time() < end:
        try:
            if client.get(f"{base}/health", timeout=1.0).status_code == 200:
                return
        except Exception:
            pass
        time.sleep(0.1)
    raise RuntimeError("service did not become healthy")


def _drive_mutations(post, get):
    """Create a session, run one round, send 100 acknowledged label mutations."""
    resp = post(
        "/sessions",
        {"dimension_name": "alphas", "seeds": ["alpha0", "alpha1", "alpha2"], "rng_seed": 7},
    )
    assert resp.status_code == 201
    sid = resp.json()["session_id"]
    assert post(f"/sessions/{sid}/round", {"k": 5}).status_code == 200
    acked = 0
    for i in range(25):
        for body in (
            {"accept": [f"alpha{3 + i}"]},
            {"reject": [f"beta{i}"]},
            {"accept": [f"noise{i}"]},
            {"reject": [f"noise{500 + i}"]},
        ):
            r = post(f"/sessions/{sid}/labels", body)
            assert r.status_code == 200
            acked += 1
    assert acked == 100
    payload = get(f"/sessions/{sid}").json()
    return sid, payload


def test_crash_consistency(tmp_path):
    import httpx
    from fastapi.testclient import TestClient

    from lexdim.service import ServiceConfig, create_app

    matrix = antipodal_sphere(rng_seed=0)
    cache = tmp_path / "en.cache"
    save_cache(matrix, cache)

    # reference run: same mutations, never killed
    ref_config = ServiceConfig(data_dir=tmp_path / "ref-data")
    ref_client = TestClient(create_app(ref_config, matrices={"en": matrix}, alignments={}))
    _, reference = _drive_mutations(
        lambda path, body: ref_client.post(path, json=body),
        lambda path: ref_client.get(path),
    )

    # real server, killed with SIGKILL after the last acknowledged mutation
    data_dir = tmp_path / "data"
    port = _free_port()
    config_file = tmp_path / "svc.conf"
    config_file.write_text(
        f"listen = 127.0.0.1:{port}\ndata_dir = {data_dir}\nembeddings.en = {cache}\n",
        encoding="utf-8",
    )
    proc = subprocess.Popen(
        ["lexdim", "serve", "--config", str(config_file)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    survived = None
    try:
        with httpx.Client() as web:
            base = f"http://127.0.0.1:{port}"
            _wait_healthy(web, base)
            sid, _ = _drive_mutations(
                lambda path, body: web.post(base + path, json=body, timeout=30.0),
                lambda path: web.get(base + path, timeout=30.0),
            )
        proc.kill()
        proc.wait(timeout=10)

        port2 = _free_port()
        config_file.write_text(
            f"listen = 127.0.0.1:{port2}\ndata_dir = {data_dir}\nembeddings.en = {cache}\n",
            encoding="utf-8",
        )
        proc = subprocess.Popen(
            ["lexdim", "serve", "--config", str(config_file)],
            stdout=subprocess.DEVNULL,
            stderr=subprocess.DEVNULL,
        )
        with httpx.Client() as web:
            base = f"http://127.0.0.1:{port2}"
            _wait_healthy(web, base)
            survived = web.get(f"{base}/sessions/{sid}", timeout=30.0).json()
    finally:
        proc.kill()
        proc.wait(timeout=10)

    def strip_id(payload):
        return {k: v for k, v in payload.items() if k != "id"}

    ok = survived is not None and strip_id(survived) == strip_id(reference)
    _report(
        "crash-consistency",
        ok,
        "state after kill -9 at 100 acknowledged mutations + restart equals the "
        f"never-killed reference run: {ok}",
    )


def _load_big(path):
    if path not in _matrix_cache:
        _matrix_cache[path] = normalize(load_text_embeddings(path, max_words=250_000))
    return _matrix_cache[path]


def _top_k_overall(matrix, dimension, k):
    scores = score_all(matrix, dimension.weights, dimension.bias)
    ids = np.arange(len(matrix.vocab))
    order = np.lexsort((ids, -scores))[:k]
    return [matrix.vocab.word(int(i)) for i in order]


PAPER_EN_SMOKING = ["smoking", "smoker", "tobacco", "smokers", "smoke",
                    "cigarettes", "cigarette", "Smoking"]
PAPER_DE_SMOKING = ["Rauchen", "rauchen", "Raucher", "geraucht", "Rauchens",
                    "Zigaretten", "Zigarette", "raucht"]
PAPER_POLYSEMY = {
    "play-bat-run": (
        ["play", "bat", "run"],
        ["playing", "runs", "plays", "played", "running", "paly", "game", "go"],
    ),
    "play-script-art": (
        ["play", "script", "art"],
        ["scripts", "scripting", "plays", "playwriting", "script.", "theatre",
         "playing", "artwork"],
    ),
    "bat-animal-fly": (
        ["bat", "animal", "fly"],
        ["bats", "flies", "bird", "flying", "mammal", "animals", "insect", "Bat"],
    ),
}


@pytest.mark.skipif(
    not (EN_VECTORS and DE_VECTORS),
    reason="network-gated: set LEXDIM_EN_VECTORS and LEXDIM_DE_VECTORS to aligned vector files",
)
def test_table_smoking_replication():
    en = _load_big(EN_VECTORS)
    de = _load_big(DE_VECTORS)
    start = time.perf_counter()
    session = init_session(en, ["smoking", "smoker", "tobacco"], rng_seed=0,
                           dimension_name="smoking")
    session, _ = run_round(session, en, k=25)
    dim = session.current_dimension
    en_top = _top_k_overall(en, dim, 8)
    de_top = [c.word for c in apply_dimension_foreign(dim, de, None, k=8)]
    elapsed = time.perf_counter() - start

    en_overlap = len(set(en_top) & set(PAPER_EN_SMOKING))
    de_overlap = len(set(de_top) & set(PAPER_DE_SMOKING))
    ok = en_overlap >= 6 and de_overlap >= 5 and elapsed < 120.0
    _report(
        "published-list-replication",
        ok,
        f"EN top-8 overlap {en_overlap}/8 (>= 6): {en_top}; "
        f"DE top-8 overlap {de_overlap}/8 (>= 5): {de_top}; {elapsed:.1f}s (< 120s)",
    )


@pytest.mark.skipif(
    not EN_VECTORS,
    reason="network-gated: set LEXDIM_EN_VECTORS to an English vector file",
)
def test_polysemy_lists():
    en = _load_big(EN_VECTORS)
    produced = {}
    overlaps = {}
    for name, (seeds, paper_row) in PAPER_POLYSEMY.items():
        session = init_session(en, seeds, rng_seed=0, dimension_name=name)
        session, candidates = run_round(session, en, k=8)
        produced[name] = [c.word for c in candidates]
        overlaps[name] = len(set(produced[name]) & set(paper_row))

    names = list(PAPER_POLYSEMY)
    inter = {
        (a, b): len(set(produced[a]) & set(produced[b]))
        for i, a in enumerate(names)
        for b in names[i + 1:]
    }
    ok = all(v >= 4 for v in overlaps.values()) and all(v <= 3 for v in inter.values())
    _report(
        "polysemy-lists",
        ok,
        f"per-row overlap {overlaps} (each >= 4/8), "
        f"pairwise inter-list {inter} (each <= 3/8); produced {produced}",
    )
