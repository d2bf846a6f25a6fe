"""Word-level language identification for code-mixed Kannada-English text.

The package covers the full workflow: corpus ingestion and preprocessing,
byte-pair sub-word tokenization, skipgram embeddings merged into a single
word vector, sparse n-gram features, an ensemble of shallow classifiers, a
bidirectional LSTM sequence tagger, and macro-averaged evaluation. The
``coli`` console script exposes every stage plus a one-shot pipeline.
"""

__version__ = "0.1.0"

from .bilstm import BilstmConfig, BilstmModel, BilstmTagger, train_bilstm
from .bpe import BpeModel, load_bpe, save_bpe, segment, strip_marker, train_bpe
from .corpus import (
    TAG_ORDER,
    AnnotatedDataset,
    AnnotatedToken,
    LanguageTag,
    PreprocessOptions,
    RawComment,
    Sentence,
    dataset_stats,
    ingest,
    preprocess,
    read_dataset,
    split_raw_annotation_pool,
    write_dataset,
)
from .embeddings import (
    EmbeddingSet,
    MergeLayout,
    build_embedding_set,
    load_embeddings,
    merge_vector,
    save_embeddings,
)
from .errors import BpeError, CoLiError, CorpusError, EmbeddingError, FeatureError, ModelError
from .evaluation import (
    ConfusionMatrix,
    MetricsReport,
    confusion_from_pairs,
    evaluate,
    metrics_from_confusion,
    report,
    split_train_test,
)
from .features import FeatureTemplate, FeatureVocabulary, extract_features, fit_vocabulary, vectorize_all
from .linear_models import (
    EnsembleModel,
    LinearOptions,
    MlpOptions,
    WordClassifier,
    soft_vote,
    train_coli_ngrams,
    train_coli_vectors,
)
from .model_io import load_any_model, load_bilstm, load_classifier, save_bilstm, save_classifier
from .skipgram import SkipgramOptions, SkipgramTable, train_skipgram
from .synth import make_synthetic_corpus

__all__ = [
    "__version__",
    "AnnotatedDataset",
    "AnnotatedToken",
    "BilstmConfig",
    "BilstmModel",
    "BilstmTagger",
    "BpeError",
    "BpeModel",
    "CoLiError",
    "ConfusionMatrix",
    "CorpusError",
    "EmbeddingError",
    "EmbeddingSet",
    "EnsembleModel",
    "FeatureError",
    "FeatureTemplate",
    "FeatureVocabulary",
    "LanguageTag",
    "LinearOptions",
    "MergeLayout",
    "MetricsReport",
    "MlpOptions",
    "ModelError",
    "PreprocessOptions",
    "RawComment",
    "Sentence",
    "SkipgramOptions",
    "SkipgramTable",
    "TAG_ORDER",
    "WordClassifier",
    "build_embedding_set",
    "confusion_from_pairs",
    "dataset_stats",
    "evaluate",
    "extract_features",
    "fit_vocabulary",
    "ingest",
    "load_any_model",
    "load_bilstm",
    "load_bpe",
    "load_classifier",
    "load_embeddings",
    "make_synthetic_corpus",
    "merge_vector",
    "metrics_from_confusion",
    "preprocess",
    "read_dataset",
    "report",
    "save_bilstm",
    "save_bpe",
    "save_classifier",
    "save_embeddings",
    "segment",
    "soft_vote",
    "split_raw_annotation_pool",
    "split_train_test",
    "strip_marker",
    "train_bilstm",
    "train_bpe",
    "train_coli_ngrams",
    "train_coli_vectors",
    "train_skipgram",
    "vectorize_all",
    "write_dataset",
]
