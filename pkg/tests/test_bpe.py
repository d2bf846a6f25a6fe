import random
import string

import pytest

from coli.bpe import DEFAULT_MARKER, BpeModel, load_bpe, save_bpe, segment, strip_marker, train_bpe
from coli.corpus import Sentence
from coli.errors import BpeError


def _sents(*token_lists):
    return [Sentence(tokens=tuple(toks)) for toks in token_lists]


TOY = _sents(["low"] * 5 + ["lower"] * 2 + ["lowest"])


def test_toy_corpus_merge_sequence():
    model = train_bpe(TOY, vocab_size=11)
    assert model.alphabet == [DEFAULT_MARKER, "e", "l", "o", "r", "s", "t", "w"]
    assert model.merges == [("l", "o"), ("lo", "w"), (DEFAULT_MARKER, "low")]
    assert segment(model, "lowest").sub_words == (DEFAULT_MARKER + "low", "e", "s", "t")
    assert segment(model, "low").sub_words == (DEFAULT_MARKER + "low",)


def test_vocab_contains_alphabet_then_merge_products():
    model = train_bpe(TOY, vocab_size=11)
    assert set(model.vocab) == set(model.alphabet) | {"lo", "low", DEFAULT_MARKER + "low"}
    assert len(model.vocab) <= model.vocab_size


def test_training_stops_when_no_pair_repeats():
    model = train_bpe(_sents(["ab", "cd"]), vocab_size=100)
    assert model.merges == []
    assert segment(model, "ab").sub_words == (DEFAULT_MARKER, "a", "b")


def test_frequency_ties_break_lexicographically():
    # (a,b) and (c,d) both occur twice; lexicographically smaller pair merges first
    model = train_bpe(_sents(["ab", "ab", "cd", "cd"]), vocab_size=6)
    assert model.merges[0] == ("a", "b")


def test_marker_starts_every_segmentation():
    model = train_bpe(TOY, vocab_size=11)
    for word in ("low", "lowest", "unseen", "xyz"):
        first = segment(model, word).sub_words[0]
        assert first.startswith(DEFAULT_MARKER)


def test_segmentation_of_unseen_characters_falls_back_to_chars():
    model = train_bpe(TOY, vocab_size=11)
    assert segment(model, "zq").sub_words == (DEFAULT_MARKER, "z", "q")


def test_concatenation_invariant_on_random_strings(tiny_bpe):
    rng = random.Random(5)
    alphabet = string.ascii_lowercase + "0123456789"
    for _ in range(1000):
        word = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 14)))
        seg = segment(tiny_bpe, word)
        assert strip_marker(tiny_bpe, seg.sub_words) == word


def test_segmenting_training_words_replays_merges(tiny_bpe, tiny_sentences):
    # every training token must round-trip and reuse learned units
    for sentence in tiny_sentences[:20]:
        for word in sentence.tokens:
            seg = segment(tiny_bpe, word)
            assert strip_marker(tiny_bpe, seg.sub_words) == word
            for unit in seg.sub_words:
                assert unit in tiny_bpe.vocab


def test_word_frequencies_accumulate_across_sentences():
    # "ab" seen once per sentence over 3 sentences -> pair freq 3 -> merged
    model = train_bpe(_sents(["ab"], ["ab"], ["ab"]), vocab_size=10)
    assert ("a", "b") in model.merges


def test_empty_corpus_is_an_error():
    with pytest.raises(BpeError):
        train_bpe([], vocab_size=10)


def test_vocab_size_smaller_than_alphabet_is_an_error():
    with pytest.raises(BpeError):
        train_bpe(TOY, vocab_size=3)


def test_words_containing_the_marker_are_rejected():
    with pytest.raises(BpeError):
        train_bpe(_sents([DEFAULT_MARKER + "x"]), vocab_size=10)


def test_save_load_round_trip(tmp_path, tiny_bpe):
    path = tmp_path / "model.bpe"
    save_bpe(tiny_bpe, path)
    loaded = load_bpe(path)
    assert loaded == tiny_bpe
    assert segment(loaded, "nayigalige") == segment(tiny_bpe, "nayigalige")


def test_load_rejects_bad_header(tmp_path):
    path = tmp_path / "model.bpe"
    path.write_text("not a model\n", encoding="utf-8")
    with pytest.raises(BpeError):
        load_bpe(path)
    path.write_text("bpe v2 10\nalphabet ▁ a b\n", encoding="utf-8")
    with pytest.raises(BpeError):
        load_bpe(path)


def test_load_rejects_underivable_merge(tmp_path):
    path = tmp_path / "model.bpe"
    path.write_text("bpe v1 10\nalphabet ▁ a b\nq b\n", encoding="utf-8")
    with pytest.raises(BpeError, match=r":3:"):
        load_bpe(path)


def test_load_rejects_missing_alphabet(tmp_path):
    path = tmp_path / "model.bpe"
    path.write_text("bpe v1 10\na b\n", encoding="utf-8")
    with pytest.raises(BpeError):
        load_bpe(path)


def test_segment_caches_but_stays_correct(tiny_bpe):
    first = segment(tiny_bpe, "manege")
    second = segment(tiny_bpe, "manege")
    assert first == second


def test_model_equality_and_vocab_size_check():
    model = train_bpe(TOY, vocab_size=11)
    clone = BpeModel(merges=list(model.merges), alphabet=list(model.alphabet),
                     vocab_size=model.vocab_size, marker=model.marker)
    assert clone == model
    with pytest.raises(BpeError):
        BpeModel(merges=list(model.merges), alphabet=list(model.alphabet),
                 vocab_size=4, marker=model.marker)
