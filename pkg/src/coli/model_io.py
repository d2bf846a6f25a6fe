"""Versioned binary containers for trained models.

Two magics: ``CMLM`` for word classifiers (estimator kind, class order,
parameter tensors, and the featurizer needed at prediction time, including
the tokenizer and, for the vectors regime, the embedding tables) and
``CMBL`` for the BiLSTM tagger (config block, vocabulary, float64 parameter
tensors, plus the embedding set used for out-of-vocabulary words). Bundling
the featurization artifacts makes every saved model self-contained: predict
needs only the model file.
"""

import io
import os
import tempfile

import numpy as np

from . import bpe as bpe_mod
from .bilstm import BilstmConfig, BilstmModel, BilstmTagger
from .corpus import TAG_ORDER, LanguageTag
from .embeddings import embeddings_from_bytes, embeddings_to_bytes
from .errors import ModelError
from .features import FeatureTemplate, FeatureVocabulary
from .fileio import atomic_write_bytes, BinaryReader, BinaryWriter
from .linear_models import (
    EnsembleModel,
    LinearModel,
    MlpModel,
    NgramFeaturizer,
    VectorFeaturizer,
    WordClassifier,
)

_MAGIC_CLASSIFIER = b"CMLM"
_MAGIC_BILSTM = b"CMBL"
_VERSION = 1


def _bpe_to_bytes(model: bpe_mod.BpeModel) -> bytes:
    lines = [f"bpe v1 {model.vocab_size}", "alphabet " + " ".join(model.alphabet)]
    lines.extend(f"{left} {right}" for left, right in model.merges)
    return ("\n".join(lines) + "\n").encode("utf-8")


def _bpe_from_bytes(data: bytes) -> bpe_mod.BpeModel:
    # round-trip through the text loader to share its validation
    fd, tmp = tempfile.mkstemp(suffix=".bpe")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        return bpe_mod.load_bpe(tmp)
    finally:
        os.unlink(tmp)


def _write_classes(w: BinaryWriter, classes):
    w.u32(len(classes))
    for tag in classes:
        w.string(tag.value)


def _read_classes(r: BinaryReader):
    n = r.u32()
    return tuple(LanguageTag.from_string(r.string()) for _ in range(n))


def _write_estimator(w: BinaryWriter, estimator):
    if isinstance(estimator, LinearModel):
        w.string(estimator.loss_kind)  # "hinge" | "logistic"
        w.array(np.asarray(estimator.weights, dtype=np.float64))
        w.array(np.asarray(estimator.bias, dtype=np.float64))
    elif isinstance(estimator, MlpModel):
        w.string("mlp")
        w.u32(len(estimator.weights))
        for weight, bias in zip(estimator.weights, estimator.biases):
            w.array(np.asarray(weight, dtype=np.float64))
            w.array(np.asarray(bias, dtype=np.float64))
    elif isinstance(estimator, EnsembleModel):
        w.string("ensemble")
        w.u32(len(estimator.members))
        for name, member in zip(estimator.member_names, estimator.members):
            w.string(name)
            _write_estimator(w, member)
    else:
        raise ModelError(f"cannot serialize estimator of type {type(estimator).__name__}")


def _read_estimator(r: BinaryReader):
    kind = r.string()
    if kind in ("hinge", "logistic"):
        return LinearModel(weights=r.array(), bias=r.array(), loss_kind=kind)
    if kind == "mlp":
        n_layers = r.u32()
        weights, biases = [], []
        for _ in range(n_layers):
            weights.append(r.array())
            biases.append(r.array())
        return MlpModel(weights=weights, biases=biases)
    if kind == "ensemble":
        n = r.u32()
        names, members = [], []
        for _ in range(n):
            names.append(r.string())
            members.append(_read_estimator(r))
        return EnsembleModel(members=members, member_names=names)
    raise ModelError(f"unknown estimator kind {kind!r}")


def classifier_to_bytes(classifier: WordClassifier) -> bytes:
    w = BinaryWriter()
    w.magic(_MAGIC_CLASSIFIER)
    w.u32(_VERSION)
    featurizer = classifier.featurizer
    w.string(featurizer.kind)
    w.string(classifier.name)
    _write_classes(w, classifier.classes)
    _write_estimator(w, classifier.estimator)
    if isinstance(featurizer, NgramFeaturizer):
        template = featurizer.template
        for sizes in (template.affix_lengths, template.word_ngram_sizes, template.subword_ngram_sizes):
            w.u32(len(sizes))
            for n in sizes:
                w.u32(n)
        w.string(template.boundary_marker)
        w.u32(len(featurizer.vocabulary))
        for name in featurizer.vocabulary.names:
            w.string(name)
        w.bytes_block(_bpe_to_bytes(featurizer.bpe))
    elif isinstance(featurizer, VectorFeaturizer):
        w.bytes_block(embeddings_to_bytes(featurizer.embeddings))
        w.bytes_block(_bpe_to_bytes(featurizer.embeddings.bpe))
    else:
        raise ModelError(f"cannot serialize featurizer of type {type(featurizer).__name__}")
    return w.getvalue()


def classifier_from_bytes(data: bytes, name: str = "<bytes>") -> WordClassifier:
    r = BinaryReader(data, name=name)
    r.magic(_MAGIC_CLASSIFIER)
    version = r.u32()
    if version != _VERSION:
        raise ModelError(f"{name}: unsupported model format version {version}")
    kind = r.string()
    clf_name = r.string()
    classes = _read_classes(r)
    estimator = _read_estimator(r)
    if kind == "ngrams":
        sizes = []
        for _ in range(3):
            count = r.u32()
            sizes.append(tuple(r.u32() for _ in range(count)))
        marker = r.string()
        template = FeatureTemplate(
            affix_lengths=sizes[0], word_ngram_sizes=sizes[1],
            subword_ngram_sizes=sizes[2], boundary_marker=marker,
        )
        n_features = r.u32()
        vocabulary = FeatureVocabulary([r.string() for _ in range(n_features)])
        bpe_model = _bpe_from_bytes(r.bytes_block())
        featurizer = NgramFeaturizer(bpe_model, template, vocabulary)
    elif kind == "vectors":
        embedding_set = embeddings_from_bytes(r.bytes_block(), name=name)
        embedding_set.bpe = _bpe_from_bytes(r.bytes_block())
        featurizer = VectorFeaturizer(embedding_set)
    else:
        raise ModelError(f"{name}: unknown featurizer kind {kind!r}")
    r.expect_end()
    return WordClassifier(name=clf_name, estimator=estimator, featurizer=featurizer, classes=classes)


def save_classifier(classifier: WordClassifier, path) -> None:
    atomic_write_bytes(path, classifier_to_bytes(classifier))


def load_classifier(path) -> WordClassifier:
    with open(path, "rb") as handle:
        return classifier_from_bytes(handle.read(), name=str(path))


# ---------------------------------------------------------------------------
# BiLSTM container

_BILSTM_PARAM_ORDER = ("emb", "fw_W", "fw_U", "fw_b", "bw_W", "bw_U", "bw_b", "out_W", "out_b")


def bilstm_to_bytes(model: BilstmModel) -> bytes:
    w = BinaryWriter()
    w.magic(_MAGIC_BILSTM)
    w.u32(_VERSION)
    cfg = model.config
    w.u32(cfg.hidden_per_direction)
    w.u32(cfg.max_seq_len)
    w.u32(cfg.projection_dim or 0)
    w.u8(1 if cfg.trainable_embeddings else 0)
    _write_classes(w, model.classes)
    words = sorted(model.vocab, key=model.vocab.get)
    w.u32(len(words))
    for word in words:
        w.string(word)
    for pname in _BILSTM_PARAM_ORDER:
        w.array(np.asarray(model.params[pname], dtype=np.float64))
    w.u8(1 if "proj_W" in model.params else 0)
    if "proj_W" in model.params:
        w.array(np.asarray(model.params["proj_W"], dtype=np.float64))
    if model.embedding_set is not None:
        w.u8(1)
        w.bytes_block(embeddings_to_bytes(model.embedding_set))
        w.bytes_block(_bpe_to_bytes(model.embedding_set.bpe))
    else:
        w.u8(0)
    return w.getvalue()


def bilstm_from_bytes(data: bytes, name: str = "<bytes>") -> BilstmModel:
    r = BinaryReader(data, name=name)
    r.magic(_MAGIC_BILSTM)
    version = r.u32()
    if version != _VERSION:
        raise ModelError(f"{name}: unsupported model format version {version}")
    hidden = r.u32()
    max_seq_len = r.u32()
    projection = r.u32() or None
    trainable = bool(r.u8())
    classes = _read_classes(r)
    n_words = r.u32()
    vocab = {r.string(): i + 1 for i in range(n_words)}
    params = {pname: r.array() for pname in _BILSTM_PARAM_ORDER}
    if r.u8():
        params["proj_W"] = r.array()
    embedding_set = None
    if r.u8():
        embedding_set = embeddings_from_bytes(r.bytes_block(), name=name)
        embedding_set.bpe = _bpe_from_bytes(r.bytes_block())
    r.expect_end()
    config = BilstmConfig(
        hidden_per_direction=hidden, max_seq_len=max_seq_len,
        projection_dim=projection, trainable_embeddings=trainable,
    )
    return BilstmModel(config=config, vocab=vocab, params=params,
                       classes=classes, embedding_set=embedding_set)


def save_bilstm(model: BilstmModel, path) -> None:
    atomic_write_bytes(path, bilstm_to_bytes(model))


def load_bilstm(path) -> BilstmModel:
    with open(path, "rb") as handle:
        return bilstm_from_bytes(handle.read(), name=str(path))


# ---------------------------------------------------------------------------
# Kind-agnostic loading (the CLI does not know what a model file contains)


def load_any_model(path):
    """Load either container; returns an object with tag_words/tag_sentence."""
    with open(path, "rb") as handle:
        data = handle.read()
    if data[:4] == _MAGIC_CLASSIFIER:
        return classifier_from_bytes(data, name=str(path))
    if data[:4] == _MAGIC_BILSTM:
        return BilstmTagger(bilstm_from_bytes(data, name=str(path)))
    raise ModelError(f"{path}: not a recognized model file (magic {data[:4]!r})")
