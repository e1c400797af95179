"""Supervised semantic dimensions over word embeddings.

Train binary logistic classifiers ("dimensions") on unit-normalized word
vectors from a handful of seed keywords, refine them through expert
accept/reject rounds, export score-thresholded dictionaries, carry
dimensions across languages with an orthogonal alignment, featurize
documents, and hand the trained weights to downstream models.
"""

from .classifier import (
    DIMENSION_FORMAT_VERSION,
    FitResult,
    LabeledSet,
    SupervisedDimension,
    TrainConfig,
    decision_value,
    dimension_from_dict,
    dimension_to_dict,
    fit_logistic,
    load_dimension,
    loss_and_gradient,
    save_dimension,
    train,
)
from .crosslingual import (
    AlignmentMap,
    BilingualLexicon,
    apply_dimension_foreign,
    load_alignment,
    load_lexicon,
    procrustes_align,
    save_alignment,
)
from .curation import (
    Candidate,
    CurationSession,
    Dictionary,
    DictionaryEntry,
    aggregate_holdout,
    apply_labels,
    evaluate_holdout,
    export_dictionary,
    init_session,
    load_session,
    run_round,
    sample_negatives,
    save_session,
)
from .docfeatures import (
    assign_words,
    doc_features,
    load_stopwords,
    scatter_export,
    tokenize,
)
from .embeddings import (
    EmbeddingMatrix,
    Vocab,
    load_cache,
    load_text_embeddings,
    normalize,
    save_cache,
    score_all,
    sigmoid,
)
from .errors import LexdimError
from .transfer import (
    build_activation_table,
    demo_downstream,
    export_dense_init,
    load_dense_init,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentMap",
    "BilingualLexicon",
    "Candidate",
    "CurationSession",
    "DIMENSION_FORMAT_VERSION",
    "Dictionary",
    "DictionaryEntry",
    "EmbeddingMatrix",
    "FitResult",
    "LabeledSet",
    "LexdimError",
    "SupervisedDimension",
    "TrainConfig",
    "Vocab",
    "aggregate_holdout",
    "apply_dimension_foreign",
    "apply_labels",
    "assign_words",
    "build_activation_table",
    "decision_value",
    "demo_downstream",
    "dimension_from_dict",
    "dimension_to_dict",
    "doc_features",
    "evaluate_holdout",
    "export_dense_init",
    "export_dictionary",
    "fit_logistic",
    "init_session",
    "load_alignment",
    "load_cache",
    "load_dense_init",
    "load_dimension",
    "load_lexicon",
    "load_session",
    "load_stopwords",
    "load_text_embeddings",
    "loss_and_gradient",
    "normalize",
    "procrustes_align",
    "run_round",
    "sample_negatives",
    "save_alignment",
    "save_cache",
    "save_dimension",
    "save_session",
    "scatter_export",
    "score_all",
    "sigmoid",
    "tokenize",
    "train",
]
