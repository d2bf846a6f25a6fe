"""Byte-pair-encoding sub-word tokenizer, trained from scratch.

Training is the classic greedy procedure: start from characters, repeatedly
merge the most frequent adjacent symbol pair (ties broken lexicographically
by the (left, right) pair), stop once the vocabulary is full or no pair
occurs at least twice. Each word is prefixed with a boundary marker so
word-initial and word-internal sub-words stay distinct.

Segmentation replays the learned merges in training order, so training and
inference agree exactly on every word seen during training.
"""

import heapq
from collections import Counter
from dataclasses import dataclass

from .errors import BpeError
from .fileio import atomic_write_text

#: Word-start marker, prepended to every word before merging (non-alphabetic,
#: same convention as common sub-word tokenizers).
DEFAULT_MARKER = "▁"

_FORMAT_HEADER = "bpe v1"


@dataclass(frozen=True)
class Segmentation:
    word: str
    sub_words: tuple[str, ...]


class BpeModel:
    """Learned merge list plus the derived sub-word vocabulary.

    Immutable after training; `segment` is safe to call concurrently (the
    per-word cache is only ever added to).
    """

    def __init__(self, merges: list[tuple[str, str]], alphabet: list[str], vocab_size: int, marker: str):
        self.merges = list(merges)
        self.alphabet = list(alphabet)  # marker first, remaining symbols sorted
        self.vocab_size = vocab_size
        self.marker = marker
        self.vocab: dict[str, int] = {}
        for symbol in self.alphabet:
            self.vocab.setdefault(symbol, len(self.vocab))
        for left, right in self.merges:
            self.vocab.setdefault(left + right, len(self.vocab))
        if len(self.vocab) > vocab_size:
            raise BpeError(f"vocabulary ({len(self.vocab)}) exceeds vocab_size ({vocab_size})")
        self._ranks = {pair: rank for rank, pair in enumerate(self.merges)}
        self._cache: dict[str, tuple[str, ...]] = {}

    def __eq__(self, other):
        return (
            isinstance(other, BpeModel)
            and self.merges == other.merges
            and self.alphabet == other.alphabet
            and self.vocab_size == other.vocab_size
            and self.marker == other.marker
        )


def _iter_token_lists(sentences):
    for sentence in sentences:
        tokens = getattr(sentence, "tokens", sentence)
        yield tokens


def train_bpe(sentences, vocab_size: int, marker: str = DEFAULT_MARKER) -> BpeModel:
    """Learn a merge list from tokenized sentences.

    `sentences` may be Sentence objects or plain token sequences. The final
    vocabulary (base alphabet + merge products) never exceeds `vocab_size`.
    """
    word_freq = Counter()
    for tokens in _iter_token_lists(sentences):
        word_freq.update(tokens)
    if not word_freq:
        raise BpeError("cannot train BPE on an empty corpus")

    alphabet_set = set()
    for word in word_freq:
        if marker in word:
            raise BpeError(f"word {word!r} contains the boundary marker {marker!r}")
        alphabet_set.update(word)
    alphabet = [marker] + sorted(alphabet_set)
    if vocab_size < len(alphabet):
        raise BpeError(
            f"vocab_size {vocab_size} is smaller than the base alphabet ({len(alphabet)} symbols)"
        )
    max_merges = vocab_size - len(alphabet)

    # One entry per distinct word: mutable symbol sequence plus its corpus
    # frequency. Pair statistics are updated incrementally as merges apply.
    words = [[[marker] + list(word), freq] for word, freq in sorted(word_freq.items())]
    pair_counts: Counter = Counter()
    pair_words: dict[tuple[str, str], set[int]] = {}
    for idx, (symbols, freq) in enumerate(words):
        for pair in zip(symbols, symbols[1:]):
            pair_counts[pair] += freq
            pair_words.setdefault(pair, set()).add(idx)

    # Lazy max-heap keyed by (-count, pair): stale entries are skipped when
    # their recorded count no longer matches the live count.
    heap = [(-count, pair) for pair, count in pair_counts.items()]
    heapq.heapify(heap)

    merges: list[tuple[str, str]] = []
    while len(merges) < max_merges and heap:
        neg_count, pair = heapq.heappop(heap)
        count = pair_counts.get(pair, 0)
        if count != -neg_count:
            continue  # stale
        if count < 2:
            break
        merges.append(pair)
        merged = pair[0] + pair[1]
        affected = pair_words.get(pair, set())
        for idx in sorted(affected):
            symbols, freq = words[idx]
            old_pairs = Counter(zip(symbols, symbols[1:]))
            new_symbols = []
            i = 0
            while i < len(symbols):
                if i + 1 < len(symbols) and symbols[i] == pair[0] and symbols[i + 1] == pair[1]:
                    new_symbols.append(merged)
                    i += 2
                else:
                    new_symbols.append(symbols[i])
                    i += 1
            words[idx][0] = new_symbols
            new_pairs = Counter(zip(new_symbols, new_symbols[1:]))
            for p, n in (new_pairs - old_pairs).items():
                pair_counts[p] += n * freq
                pair_words.setdefault(p, set()).add(idx)
                heapq.heappush(heap, (-pair_counts[p], p))
            for p, n in (old_pairs - new_pairs).items():
                pair_counts[p] -= n * freq
                if pair_counts[p] <= 0:
                    del pair_counts[p]
                    pair_words.get(p, set()).discard(idx)
                else:
                    heapq.heappush(heap, (-pair_counts[p], p))
        pair_words.pop(pair, None)

    return BpeModel(merges=merges, alphabet=alphabet, vocab_size=vocab_size, marker=marker)


def segment(model: BpeModel, word: str) -> Segmentation:
    """Split a word into sub-words by replaying merges in training order.

    Unseen characters simply remain single-character sub-words. The
    concatenation of the sub-words equals the marker followed by the word.
    """
    if not word:
        raise BpeError("cannot segment an empty word")
    cached = model._cache.get(word)
    if cached is not None:
        return Segmentation(word=word, sub_words=cached)

    symbols = [model.marker] + list(word)
    ranks = model._ranks
    pointer = 0
    while len(symbols) > 1:
        best = None
        for pair in zip(symbols, symbols[1:]):
            rank = ranks.get(pair)
            if rank is not None and rank >= pointer and (best is None or rank < best):
                best = rank
        if best is None:
            break
        left, right = model.merges[best]
        merged = left + right
        out = []
        i = 0
        while i < len(symbols):
            if i + 1 < len(symbols) and symbols[i] == left and symbols[i + 1] == right:
                out.append(merged)
                i += 2
            else:
                out.append(symbols[i])
                i += 1
        symbols = out
        pointer = best + 1

    sub_words = tuple(symbols)
    model._cache[word] = sub_words
    return Segmentation(word=word, sub_words=sub_words)


def strip_marker(model: BpeModel, sub_words) -> str:
    """Reassemble the original word from sub-words (drop the leading marker)."""
    joined = "".join(sub_words)
    if not joined.startswith(model.marker):
        raise BpeError("sub-word sequence does not start with the boundary marker")
    return joined[len(model.marker):]


def save_bpe(model: BpeModel, path) -> None:
    """Write the model as versioned UTF-8 text.

    Header line ``bpe v1 <vocab_size>``, an ``alphabet`` line (marker first),
    then one merge pair per line. Symbols never contain whitespace, so
    space-separated fields are unambiguous.
    """
    lines = [f"{_FORMAT_HEADER} {model.vocab_size}"]
    lines.append("alphabet " + " ".join(model.alphabet))
    lines.extend(f"{left} {right}" for left, right in model.merges)
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_bpe(path) -> BpeModel:
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise BpeError(f"{path}: empty BPE model file")
    header = lines[0].split(" ")
    if len(header) != 3 or header[0] != "bpe":
        raise BpeError(f"{path}: invalid header {lines[0]!r}")
    if header[1] != "v1":
        raise BpeError(f"{path}: unsupported BPE format version {header[1]!r}")
    try:
        vocab_size = int(header[2])
    except ValueError:
        raise BpeError(f"{path}: invalid vocab_size in header {lines[0]!r}") from None
    if len(lines) < 2 or not lines[1].startswith("alphabet "):
        raise BpeError(f"{path}: missing alphabet line")
    alphabet = lines[1].split(" ")[1:]
    if not alphabet:
        raise BpeError(f"{path}: empty alphabet")
    marker = alphabet[0]

    known = set(alphabet)
    merges = []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line:
            continue
        parts = line.split(" ")
        if len(parts) != 2:
            raise BpeError(f"{path}:{lineno}: invalid merge line {line!r}")
        left, right = parts
        if left not in known or right not in known:
            raise BpeError(f"{path}:{lineno}: merge {line!r} uses an underivable symbol")
        merges.append((left, right))
        known.add(left + right)
    return BpeModel(merges=merges, alphabet=alphabet, vocab_size=vocab_size, marker=marker)
