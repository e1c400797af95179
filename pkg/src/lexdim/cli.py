"""Command line interface.

Subcommands cover the full pipeline: caching embeddings, scripted curation
rounds, dictionary export, cross-lingual alignment and application, document
featurization, dense-layer export, the downstream demo, and the HTTP service.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .classifier import (
    SupervisedDimension,
    TrainConfig,
    dimension_from_dict,
    save_dimension,
)
from .crosslingual import (
    apply_dimension_foreign,
    load_alignment,
    load_lexicon,
    procrustes_align,
    save_alignment,
)
from .curation import (
    apply_labels,
    dictionary_to_dict,
    dictionary_to_text,
    export_dictionary,
    init_session,
    load_session,
    run_round,
    save_session,
)
from .docfeatures import doc_features, load_stopwords, tokenize
from .embeddings import load_text_embeddings, normalize, save_cache
from .errors import CorruptFileError, FileUnreadableError, LexdimError
from .service import load_config, load_embeddings_any, run_service
from .transfer import (
    MODE_AUGMENTED,
    MODE_PLAIN,
    demo_downstream,
    export_dense_init,
)


def _load_dimension_any(path) -> SupervisedDimension:
    """Accept either a dimension JSON or a session JSON holding one."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise FileUnreadableError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CorruptFileError(f"bad JSON in {path}: {exc}") from exc
    if isinstance(payload, dict) and "current_dimension" in payload:
        inner = payload["current_dimension"]
        if inner is None:
            raise CorruptFileError(f"session in {path} has no trained dimension")
        return dimension_from_dict(inner)
    return dimension_from_dict(payload)


def _read_label_file(path) -> dict[str, str]:
    """Lines of '<accept|reject> <word>'; '#' comments and blanks skipped."""
    decisions: dict[str, str] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise FileUnreadableError(f"cannot read labels {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 1)
        if len(parts) != 2 or parts[0] not in ("accept", "reject"):
            raise CorruptFileError(f"labels line {lineno}: expected 'accept|reject <word>'")
        decisions[parts[1]] = parts[0]
    return decisions


def _read_docs(path) -> list[tuple[str, str]]:
    """TSV docs: 'id<TAB>text' per line; lines without a tab get line-number ids."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise FileUnreadableError(f"cannot read docs {path}: {exc}") from exc
    docs = []
    for i, line in enumerate(lines, 1):
        if not line.strip():
            continue
        if "\t" in line:
            doc_id, text = line.split("\t", 1)
        else:
            doc_id, text = str(i), line
        docs.append((doc_id, text))
    return docs


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        positive_class_weight=args.positive_class_weight,
        l2_strength=args.l2_strength,
        tolerance=args.tolerance,
        max_iterations=args.max_iterations,
    )


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--positive-class-weight", type=float, default=2.0)
    parser.add_argument("--l2-strength", type=float, default=1.0)
    parser.add_argument("--tolerance", type=float, default=1e-8)
    parser.add_argument("--max-iterations", type=int, default=1000)


def cmd_cache_embeddings(args) -> int:
    matrix = load_text_embeddings(args.vectors, max_words=args.max_words)
    report = matrix.load_report
    matrix = normalize(matrix)
    save_cache(matrix, args.out)
    print(f"cached {len(matrix.vocab)} words, dim {matrix.dim} -> {args.out}")
    if report is not None:
        print(
            f"loaded {report.rows_loaded}, skipped {report.skipped_malformed} malformed, "
            f"{report.skipped_dim_mismatch} dim-mismatched, "
            f"{report.duplicates_dropped} duplicates"
        )
    return 0


def cmd_curate(args) -> int:
    matrix = load_embeddings_any(args.embeddings)
    config = _train_config(args)
    if args.resume:
        session = load_session(args.resume)
    else:
        if not args.seed:
            print("error: --seed is required unless --resume is given", file=sys.stderr)
            return 2
        session = init_session(
            matrix, args.seed, args.rng_seed, dimension_name=args.dimension_name
        )
    decisions = _read_label_file(args.labels) if args.labels else {}

    for _ in range(args.rounds):
        session, candidates = run_round(session, matrix, config, args.k)
        shown = ", ".join(f"{c.word}:{c.score:.3f}" for c in candidates[:5])
        print(f"round {session.round}: top candidates {shown}")
        accept = [c.word for c in candidates if decisions.get(c.word) == "accept"]
        reject = [c.word for c in candidates if decisions.get(c.word) == "reject"]
        if accept or reject:
            apply_labels(session, matrix, accept, reject)
            print(f"  accepted {len(accept)}, rejected {len(reject)}")

    save_session(session, args.session_out)
    print(f"session saved -> {args.session_out}")
    if args.dimension_out:
        if session.current_dimension is None:
            print("error: no trained dimension to export", file=sys.stderr)
            return 2
        save_dimension(session.current_dimension, args.dimension_out)
        print(f"dimension saved -> {args.dimension_out}")
    return 0


def cmd_export_dict(args) -> int:
    matrix = load_embeddings_any(args.embeddings)
    session = load_session(args.session)
    dictionary = export_dictionary(session, matrix, args.threshold)
    text = (
        json.dumps(dictionary_to_dict(dictionary), indent=2) + "\n"
        if args.json
        else dictionary_to_text(dictionary)
    )
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"{len(dictionary.entries)} entries -> {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_align(args) -> int:
    foreign = load_embeddings_any(args.foreign_embeddings)
    training = load_embeddings_any(args.training_embeddings)
    lexicon = load_lexicon(args.lexicon)
    # foreign as source, training as target: the map carries foreign vectors
    # into the training space, which is what apply-foreign expects
    alignment = procrustes_align(foreign, training, lexicon)
    save_alignment(alignment, args.out)
    print(f"alignment fit residual {alignment.fit_residual:.6f} -> {args.out}")
    return 0


def cmd_apply_foreign(args) -> int:
    dimension = _load_dimension_any(args.dimension)
    foreign = load_embeddings_any(args.foreign_embeddings)
    alignment = load_alignment(args.alignment) if args.alignment else None
    for c in apply_dimension_foreign(dimension, foreign, alignment, args.k):
        print(f"{c.word}\t{c.score:.6f}")
    return 0


def cmd_doc_features(args) -> int:
    matrix = load_embeddings_any(args.embeddings)
    dims = [_load_dimension_any(p) for p in args.dimensions]
    stopwords = None if args.keep_stopwords else load_stopwords()
    docs = _read_docs(args.docs)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", *(d.name for d in dims), "token_count"])
        skipped = 0
        for doc_id, text in docs:
            try:
                fv = doc_features(
                    tokenize(text), dims, matrix, stopwords, args.dedupe, doc_id=doc_id
                )
            except LexdimError:
                writer.writerow([doc_id, *([""] * len(dims)), 0])
                skipped += 1
                continue
            writer.writerow([doc_id, *(repr(v) for v in fv.values), fv.token_count_used])
    print(f"{len(docs) - skipped} docs featurized, {skipped} empty -> {args.out}")
    return 0


def cmd_export_dense(args) -> int:
    dims = [_load_dimension_any(p) for p in args.dimensions]
    init = export_dense_init(dims, args.out)
    print(f"{len(init.names)} x {init.weight_matrix.shape[1]} dense init -> {args.out}")
    return 0


def cmd_demo_downstream(args) -> int:
    matrix = load_embeddings_any(args.embeddings)
    dims = [_load_dimension_any(p) for p in args.dimensions]
    stopwords = None if args.keep_stopwords else load_stopwords()
    train_docs = [(text, doc_id) for doc_id, text in _read_docs(args.train)]
    test_docs = [(text, doc_id) for doc_id, text in _read_docs(args.test)]
    modes = [MODE_PLAIN, MODE_AUGMENTED] if args.mode == "both" else [args.mode]
    for mode in modes:
        result = demo_downstream(
            train_docs, test_docs, dims, matrix, mode, stopwords=stopwords
        )
        print(
            f"{mode}: accuracy {result.accuracy:.4f}, macro F1 {result.macro_f1:.4f} "
            f"({result.n_test_used} test docs)"
        )
    return 0


def cmd_serve(args) -> int:
    config = load_config(args.config)
    if args.listen:
        config.listen = args.listen
    if args.data_dir:
        config.data_dir = Path(args.data_dir)
    run_service(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexdim",
        description="Supervised semantic dimensions over word embeddings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cache-embeddings", help="convert a text vector file to a binary cache")
    p.add_argument("vectors", help="text vector file (word then values, space separated)")
    p.add_argument("out", help="cache file to write")
    p.add_argument("--max-words", type=int, default=250_000)
    p.set_defaults(func=cmd_cache_embeddings)

    p = sub.add_parser("curate", help="run scripted active-learning rounds")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--seed", action="append", default=[], help="seed keyword (repeatable)")
    p.add_argument("--resume", help="existing session JSON to continue")
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--k", type=int, default=25)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--dimension-name", default="dimension")
    p.add_argument("--labels", help="file of 'accept|reject <word>' lines")
    p.add_argument("--session-out", required=True)
    p.add_argument("--dimension-out")
    _add_train_flags(p)
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("export-dict", help="export a dictionary from a session")
    p.add_argument("--session", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out")
    p.add_argument("--json", action="store_true", help="emit JSON instead of word/score lines")
    p.set_defaults(func=cmd_export_dict)

    p = sub.add_parser("align", help="fit an orthogonal map from foreign to training space")
    p.add_argument("--foreign-embeddings", required=True)
    p.add_argument("--training-embeddings", required=True)
    p.add_argument("--lexicon", required=True, help="TSV of foreign<TAB>training pairs")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("apply-foreign", help="score foreign words through an alignment")
    p.add_argument("--dimension", required=True, help="dimension or session JSON")
    p.add_argument("--foreign-embeddings", required=True)
    p.add_argument("--alignment")
    p.add_argument("--k", type=int, default=10)
    p.set_defaults(func=cmd_apply_foreign)

    p = sub.add_parser("doc-features", help="featurize documents on trained dimensions")
    p.add_argument("--docs", required=True, help="TSV of doc_id<TAB>text lines")
    p.add_argument("--dimensions", required=True, nargs="+")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--keep-stopwords", action="store_true")
    p.add_argument("--dedupe", action="store_true", help="count repeated tokens once")
    p.set_defaults(func=cmd_doc_features)

    p = sub.add_parser("export-dense", help="export dimensions as a dense-layer init")
    p.add_argument("--dimensions", required=True, nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_dense)

    p = sub.add_parser("demo-downstream", help="compare plain vs augmented doc classification")
    p.add_argument("--train", required=True, help="TSV of label<TAB>text lines")
    p.add_argument("--test", required=True, help="TSV of label<TAB>text lines")
    p.add_argument("--dimensions", required=True, nargs="+")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--mode", choices=[MODE_PLAIN, MODE_AUGMENTED, "both"], default="both")
    p.add_argument("--keep-stopwords", action="store_true")
    p.set_defaults(func=cmd_demo_downstream)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", help="plain-text key=value config file")
    p.add_argument("--listen", help="host:port (overrides config and environment)")
    p.add_argument("--data-dir", help="session/dimension directory (overrides)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LexdimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
