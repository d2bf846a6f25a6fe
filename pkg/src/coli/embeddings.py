"""Word, sub-word and character embeddings merged into one fixed-width vector.

Three skipgram tables are trained over the same raw corpus seen at three
granularities: word sequences per sentence, BPE sub-word sequences per
sentence, and character sequences per word. A word's merged vector is the
concatenation

    word vector | up to max_subwords sub-word vectors | up to max_chars char vectors

where missing or out-of-vocabulary units contribute zero blocks and units
beyond the maxima are truncated. With the default layout (200 + 8*100 +
10*30) every merged vector has exactly 1300 dimensions.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import bpe as bpe_mod
from .errors import EmbeddingError
from .fileio import atomic_write_bytes, BinaryReader, BinaryWriter
from .skipgram import SkipgramOptions, SkipgramTable, train_skipgram

_MAGIC = b"CMEB"
_VERSION = 1


@dataclass(frozen=True)
class MergeLayout:
    word_dim: int = 200
    subword_dim: int = 100
    char_dim: int = 30
    max_subwords: int = 8
    max_chars: int = 10

    def __post_init__(self):
        for name in ("word_dim", "subword_dim", "char_dim", "max_subwords", "max_chars"):
            if getattr(self, name) < 1:
                raise EmbeddingError(f"MergeLayout.{name} must be >= 1")

    @property
    def total_dim(self) -> int:
        return self.word_dim + self.max_subwords * self.subword_dim + self.max_chars * self.char_dim


@dataclass
class EmbeddingSet:
    words: SkipgramTable
    subwords: SkipgramTable
    chars: SkipgramTable
    layout: MergeLayout
    # The tokenizer is a runtime attachment (needed to segment unseen words);
    # it is not part of the embedding file and is ignored for equality.
    bpe: bpe_mod.BpeModel | None = field(default=None, compare=False)


@dataclass(frozen=True)
class MergedVector:
    word: str
    values: np.ndarray


def _tokens_of(sentence):
    return getattr(sentence, "tokens", sentence)


def corpus_unit_maxima(sentences, bpe_model: bpe_mod.BpeModel) -> tuple[int, int]:
    """Largest sub-word count and character count over corpus words."""
    max_sub = 0
    max_chr = 0
    for sentence in sentences:
        for word in _tokens_of(sentence):
            max_sub = max(max_sub, len(bpe_mod.segment(bpe_model, word).sub_words))
            max_chr = max(max_chr, len(word))
    if max_sub == 0:
        raise EmbeddingError("empty corpus: no words to measure")
    return max_sub, max_chr


def build_embedding_set(
    sentences,
    bpe_model: bpe_mod.BpeModel,
    layout: MergeLayout | None = None,
    opts: SkipgramOptions | None = None,
    fit_maxima: bool = False,
) -> EmbeddingSet:
    """Train the three tables over a raw corpus.

    With ``fit_maxima`` the layout's max_subwords/max_chars are replaced by
    the corpus maxima instead of the fixed defaults. Table seeds derive from
    ``opts.seed`` (seed, seed+1, seed+2) so one global seed fixes everything.
    """
    layout = layout or MergeLayout()
    opts = opts or SkipgramOptions()
    sentences = list(sentences)
    if not sentences:
        raise EmbeddingError("cannot build embeddings from an empty corpus")
    if fit_maxima:
        max_sub, max_chr = corpus_unit_maxima(sentences, bpe_model)
        layout = replace(layout, max_subwords=max_sub, max_chars=max_chr)

    word_seqs = [list(_tokens_of(s)) for s in sentences]
    subword_seqs = []
    char_seqs = []
    for seq in word_seqs:
        sub_seq = []
        for word in seq:
            sub_seq.extend(bpe_mod.segment(bpe_model, word).sub_words)
            char_seqs.append(list(word))
        subword_seqs.append(sub_seq)

    words = train_skipgram(word_seqs, layout.word_dim, replace(opts, seed=opts.seed))
    subwords = train_skipgram(subword_seqs, layout.subword_dim, replace(opts, seed=opts.seed + 1))
    chars = train_skipgram(char_seqs, layout.char_dim, replace(opts, seed=opts.seed + 2))
    return EmbeddingSet(words=words, subwords=subwords, chars=chars, layout=layout, bpe=bpe_model)


def merge_vector(embedding_set: EmbeddingSet, word: str) -> MergedVector:
    """Merged fixed-width vector for one word (OOV units become zero blocks)."""
    if not word:
        raise EmbeddingError("cannot embed an empty word")
    if embedding_set.bpe is None:
        raise EmbeddingError("EmbeddingSet has no tokenizer attached; cannot segment words")
    layout = embedding_set.layout
    out = np.zeros(layout.total_dim, dtype=np.float32)

    vec = embedding_set.words.vector(word)
    if vec is not None:
        out[: layout.word_dim] = vec

    sub_words = bpe_mod.segment(embedding_set.bpe, word).sub_words[: layout.max_subwords]
    offset = layout.word_dim
    for i, sub in enumerate(sub_words):
        vec = embedding_set.subwords.vector(sub)
        if vec is not None:
            start = offset + i * layout.subword_dim
            out[start : start + layout.subword_dim] = vec

    chars = word[: layout.max_chars]
    offset = layout.word_dim + layout.max_subwords * layout.subword_dim
    for i, ch in enumerate(chars):
        vec = embedding_set.chars.vector(ch)
        if vec is not None:
            start = offset + i * layout.char_dim
            out[start : start + layout.char_dim] = vec

    return MergedVector(word=word, values=out)


# ---------------------------------------------------------------------------
# Binary container (magic CMEB, little-endian)


def embeddings_to_bytes(embedding_set: EmbeddingSet) -> bytes:
    w = BinaryWriter()
    w.magic(_MAGIC)
    w.u32(_VERSION)
    layout = embedding_set.layout
    for value in (layout.word_dim, layout.subword_dim, layout.char_dim, layout.max_subwords, layout.max_chars):
        w.u32(value)
    for table in (embedding_set.words, embedding_set.subwords, embedding_set.chars):
        tokens = sorted(table.vocab, key=table.vocab.get)
        w.u32(len(tokens))
        w.u32(table.dim)
        for tok in tokens:
            w.string(tok)
        w.array(np.ascontiguousarray(table.vectors, dtype=np.float32))
    return w.getvalue()


def save_embeddings(embedding_set: EmbeddingSet, path) -> None:
    atomic_write_bytes(path, embeddings_to_bytes(embedding_set))


def embeddings_from_bytes(data: bytes, name: str = "<bytes>") -> EmbeddingSet:
    r = BinaryReader(data, name=name)
    r.magic(_MAGIC)
    version = r.u32()
    if version != _VERSION:
        raise EmbeddingError(f"{name}: unsupported embedding format version {version}")
    layout = MergeLayout(
        word_dim=r.u32(), subword_dim=r.u32(), char_dim=r.u32(), max_subwords=r.u32(), max_chars=r.u32()
    )
    tables = []
    for expect_dim in (layout.word_dim, layout.subword_dim, layout.char_dim):
        count = r.u32()
        dim = r.u32()
        if dim != expect_dim:
            raise EmbeddingError(f"{name}: table dim {dim} does not match layout dim {expect_dim}")
        tokens = [r.string() for _ in range(count)]
        vectors = r.array()
        if vectors.shape != (count, dim):
            raise EmbeddingError(
                f"{name}: vector block shape {vectors.shape} does not match header ({count}, {dim})"
            )
        tables.append(
            SkipgramTable(vocab={tok: i for i, tok in enumerate(tokens)}, vectors=vectors, dim=dim)
        )
    r.expect_end()
    return EmbeddingSet(words=tables[0], subwords=tables[1], chars=tables[2], layout=layout)


def load_embeddings(path, bpe_model: bpe_mod.BpeModel | None = None) -> EmbeddingSet:
    with open(path, "rb") as handle:
        data = handle.read()
    embedding_set = embeddings_from_bytes(data, name=str(path))
    embedding_set.bpe = bpe_model
    return embedding_set
