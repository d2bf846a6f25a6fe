import math
import random

import numpy as np
import pytest

from coli.errors import EmbeddingError
from coli.skipgram import SkipgramOptions, SkipgramTable, pair_gradients, pair_loss, train_skipgram


def _softplus(x):
    return math.log1p(math.exp(-abs(x))) + max(x, 0.0)


def test_pair_loss_matches_manual_formula():
    rng = np.random.default_rng(0)
    c = rng.normal(size=5)
    ctx = rng.normal(size=5)
    negs = rng.normal(size=(3, 5))
    expected = _softplus(-float(c @ ctx)) + sum(_softplus(float(c @ n)) for n in negs)
    assert abs(pair_loss(c, ctx, negs) - expected) < 1e-12


def test_pair_gradients_match_finite_differences():
    rng = np.random.default_rng(1)
    h = 1e-6
    for _ in range(5):
        c = rng.normal(size=6)
        ctx = rng.normal(size=6)
        negs = rng.normal(size=(4, 6))
        grads = pair_gradients(c, ctx, negs)
        arrays = (c, ctx, negs)
        fd_parts, an_parts = [], []
        for arr, grad in zip(arrays, grads):
            flat = arr.ravel()
            fd = np.empty_like(flat)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + h
                up = pair_loss(c, ctx, negs)
                flat[i] = orig - h
                down = pair_loss(c, ctx, negs)
                flat[i] = orig
                fd[i] = (up - down) / (2 * h)
            fd_parts.append(fd)
            an_parts.append(np.asarray(grad).ravel())
        fd_all = np.concatenate(fd_parts)
        an_all = np.concatenate(an_parts)
        rel = np.linalg.norm(fd_all - an_all) / max(np.linalg.norm(fd_all), 1e-12)
        assert rel <= 1e-4


def _clustered_corpus(seed=0, n=120):
    # two topics that never mix: co-occurrence binds words within a topic
    rng = random.Random(seed)
    topics = [["cat", "dog", "pet", "fur"], ["sun", "sky", "day", "blue"]]
    seqs = []
    for _ in range(n):
        topic = rng.choice(topics)
        seqs.append([rng.choice(topic) for _ in range(rng.randint(4, 8))])
    return seqs


def test_vocabulary_is_ordered_by_count_then_token():
    seqs = [["b", "b", "a", "a", "c"]]
    table = train_skipgram(seqs, dim=4, opts=SkipgramOptions(epochs=1, seed=0))
    assert list(table.vocab) == ["a", "b", "c"]  # counts 2,2,1; tie a<b


def test_min_count_filters_rare_tokens():
    seqs = [["a", "a", "b", "a", "b", "q"]]
    table = train_skipgram(seqs, dim=4, opts=SkipgramOptions(epochs=1, min_count=2, seed=0))
    assert "q" not in table.vocab
    assert table.vector("q") is None
    assert table.vector("a") is not None


def test_table_shapes_and_dtype():
    table = train_skipgram(_clustered_corpus(), dim=8, opts=SkipgramOptions(epochs=1, seed=0))
    assert table.vectors.shape == (len(table.vocab), 8)
    assert table.vectors.dtype == np.float32
    assert table.dim == 8


def test_epoch_losses_decrease_on_structured_corpus():
    opts = SkipgramOptions(epochs=4, seed=0)
    table = train_skipgram(_clustered_corpus(), dim=16, opts=opts)
    assert len(table.epoch_losses) == 4
    assert table.epoch_losses[-1] < table.epoch_losses[0]


def test_training_is_deterministic():
    opts = SkipgramOptions(epochs=2, seed=7)
    t1 = train_skipgram(_clustered_corpus(), dim=8, opts=opts)
    t2 = train_skipgram(_clustered_corpus(), dim=8, opts=opts)
    assert t1 == t2
    t3 = train_skipgram(_clustered_corpus(), dim=8, opts=SkipgramOptions(epochs=2, seed=8))
    assert t3 != t1


def _cosine(a, b):
    return float(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b))


def test_cooccurring_words_end_up_closer_than_unrelated_ones():
    for seed in range(5):
        table = train_skipgram(
            _clustered_corpus(seed), dim=16, opts=SkipgramOptions(epochs=8, seed=seed)
        )
        same = _cosine(table.vector("cat"), table.vector("dog"))
        cross = _cosine(table.vector("cat"), table.vector("sun"))
        assert same > cross


def test_empty_corpus_is_an_error():
    with pytest.raises(EmbeddingError):
        train_skipgram([], dim=4, opts=SkipgramOptions())
    with pytest.raises(EmbeddingError):
        train_skipgram([["a"]], dim=4, opts=SkipgramOptions(min_count=5))


def test_options_validation():
    with pytest.raises(EmbeddingError):
        SkipgramOptions(window=0)
    with pytest.raises(EmbeddingError):
        SkipgramOptions(negative_samples=0)
    with pytest.raises(EmbeddingError):
        SkipgramOptions(epochs=0)


def test_table_equality_ignores_losses():
    t1 = train_skipgram(_clustered_corpus(), dim=4, opts=SkipgramOptions(epochs=1, seed=0))
    t2 = SkipgramTable(vocab=dict(t1.vocab), vectors=t1.vectors.copy(), dim=t1.dim,
                       epoch_losses=[99.0])
    assert t1 == t2
