"""Code anomaly detection over syntax trees and bytecode instruction sequences."""

from ._astray import (  # noqa: F401
    AstrayError,
    AnomalyScoreSet,
    AutoencoderModel,
    PcaModel,
    Scaler,
    autoencoder_train,
    build_vocabulary,
    compiler_induced_detect,
    compute_metrics,
    default_config,
    extract_bytecode_ngrams,
    extract_tree_ngrams,
    iforest_fit_score,
    ingest_corpus,
    ingest_source,
    lof_scores,
    metric_names,
    parse,
    pca_fit,
    pretty_print,
    rms_threshold,
    run_pipeline,
    scaler_fit,
    supported_subset,
    tag_vocabulary,
    tokenize,
)

__version__ = "0.1.0"
