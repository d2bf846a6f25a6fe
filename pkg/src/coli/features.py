"""Sparse affix and character n-gram features for word classification.

A word is lowercased and described by four namespaced feature families:
``prefix:``/``suffix:`` affixes of lengths 1..3 (capped at the word length),
``wng:`` character n-grams of sizes {2, 3, 5} over the boundary-marked word,
and ``swng:`` character n-grams of sizes {1, 2, 3} over each boundary-marked
BPE sub-word. Features are counted, not binarized.
"""

from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from . import bpe as bpe_mod
from .errors import FeatureError

NAMESPACE_SEPARATOR = ":"


def _escape(name: str) -> str:
    # Keep the namespace separator unambiguous inside feature names.
    return name.replace("%", "%25").replace(NAMESPACE_SEPARATOR, "%3A")


@dataclass(frozen=True)
class FeatureTemplate:
    affix_lengths: tuple[int, ...] = (1, 2, 3)
    word_ngram_sizes: tuple[int, ...] = (2, 3, 5)
    subword_ngram_sizes: tuple[int, ...] = (1, 2, 3)
    boundary_marker: str = "_"

    def __post_init__(self):
        for group, sizes in (
            ("affix_lengths", self.affix_lengths),
            ("word_ngram_sizes", self.word_ngram_sizes),
            ("subword_ngram_sizes", self.subword_ngram_sizes),
        ):
            if not sizes or any(n < 1 for n in sizes):
                raise FeatureError(f"{group} must be non-empty positive integers")
        if len(self.boundary_marker) != 1 or self.boundary_marker.isspace():
            raise FeatureError("boundary_marker must be a single non-space character")


def _char_ngrams(marked: str, sizes) -> list[str]:
    grams = []
    for n in sizes:
        grams.extend(marked[i : i + n] for i in range(len(marked) - n + 1))
    return grams


def extract_features(word: str, bpe_model: bpe_mod.BpeModel, template: FeatureTemplate | None = None) -> Counter:
    """Feature counts for one word (see module docstring for the families)."""
    if not word:
        raise FeatureError("cannot extract features from an empty word")
    template = template or FeatureTemplate()
    w = word.lower()
    bm = template.boundary_marker
    counts: Counter = Counter()

    for length in template.affix_lengths:
        if length <= len(w):
            counts[f"prefix:{_escape(w[:length])}"] += 1
            counts[f"suffix:{_escape(w[-length:])}"] += 1

    for gram in _char_ngrams(bm + w + bm, template.word_ngram_sizes):
        counts[f"wng:{_escape(gram)}"] += 1

    for sub in bpe_mod.segment(bpe_model, w).sub_words:
        core = sub[len(bpe_model.marker):] if sub.startswith(bpe_model.marker) else sub
        if not core:
            continue  # a bare boundary-marker sub-word carries no characters
        for gram in _char_ngrams(bm + core + bm, template.subword_ngram_sizes):
            counts[f"swng:{_escape(gram)}"] += 1

    return counts


class FeatureVocabulary:
    """Frozen mapping from feature string to dense column index (sorted order)."""

    def __init__(self, feature_names):
        names = sorted(set(feature_names))
        if not names:
            raise FeatureError("cannot build an empty feature vocabulary")
        self.index_of = {name: i for i, name in enumerate(names)}
        self.names = names

    def __len__(self):
        return len(self.names)

    def __eq__(self, other):
        return isinstance(other, FeatureVocabulary) and self.names == other.names


def fit_vocabulary(feature_maps) -> FeatureVocabulary:
    """Collect every feature string seen across the training maps."""
    names = set()
    n = 0
    for fm in feature_maps:
        n += 1
        names.update(fm.keys())
    if n == 0:
        raise FeatureError("cannot fit a vocabulary on empty input")
    return FeatureVocabulary(names)


def vectorize(features: Counter, vocab: FeatureVocabulary) -> sparse.csr_array:
    """One sparse count row (shape ``(1, |vocab|)``); unknown features ignored."""
    return vectorize_all([features], vocab)


def vectorize_all(feature_maps, vocab: FeatureVocabulary) -> sparse.csr_array:
    """Stack sparse count rows for many words into an ``(N, |vocab|)`` matrix."""
    rows, cols, data = [], [], []
    n = 0
    for i, fm in enumerate(feature_maps):
        n += 1
        for name, count in fm.items():
            j = vocab.index_of.get(name)
            if j is not None:
                rows.append(i)
                cols.append(j)
                data.append(float(count))
    return sparse.csr_array(
        (np.array(data), (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))),
        shape=(n, len(vocab)),
    )
