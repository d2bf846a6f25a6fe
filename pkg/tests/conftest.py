import random

import pytest

from coli.bpe import train_bpe
from coli.corpus import Sentence
from coli.embeddings import MergeLayout, build_embedding_set
from coli.skipgram import SkipgramOptions

WORDS = [
    "mane", "nayi", "beku", "ide", "gottilla", "office", "work", "meeting",
    "nayigalige", "manege", "officege", "meetingalli", "123", "zxqv",
]


def make_sentences(n, seed=0, words=WORDS):
    rng = random.Random(seed)
    return [
        Sentence(tokens=tuple(rng.choice(words) for _ in range(rng.randint(3, 7))))
        for _ in range(n)
    ]


@pytest.fixture(scope="session")
def tiny_sentences():
    return make_sentences(80)


@pytest.fixture(scope="session")
def tiny_bpe(tiny_sentences):
    return train_bpe(tiny_sentences, vocab_size=60)


@pytest.fixture(scope="session")
def tiny_layout():
    return MergeLayout(word_dim=8, subword_dim=4, char_dim=2, max_subwords=3, max_chars=5)


@pytest.fixture(scope="session")
def tiny_embeddings(tiny_sentences, tiny_bpe, tiny_layout):
    opts = SkipgramOptions(epochs=2, seed=0)
    return build_embedding_set(tiny_sentences, tiny_bpe, layout=tiny_layout, opts=opts)
