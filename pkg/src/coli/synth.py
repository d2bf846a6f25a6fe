"""Synthetic code-mixed corpus with suffix-determined tags.

Every generated word's tag follows from its construction: Kannada-like stems
with Kannada suffixes are ``kn``, bare English stems are ``en``, English
stems with Kannada suffixes are ``kn-en``, person and place words carry
class-reserved suffixes (``name``/``location``), and ``other`` words are
digit strings or rare-letter gibberish. Sentences lean toward a sampled
topic so that co-occurrence statistics carry class signal too. Useful for
end-to-end smoke tests of the whole pipeline: a DIY tagger can reach high
macro-F1, so low scores point at real defects.
"""

import random
from dataclasses import dataclass

from .corpus import AnnotatedDataset, AnnotatedToken, LanguageTag, Sentence
from .errors import CoLiError

KN_STEMS = (
    "mane", "huduga", "hudugi", "kelasa", "chennag", "thumba", "swalpa", "bega",
    "matha", "kathe", "oota", "nidde", "haadu", "nagu", "baa", "hogu", "nodu",
    "keli", "madu", "kodu", "baro", "siktu", "gottu", "illa", "ashtu",
)
KN_SUFFIXES = ("alli", "inda", "ige", "annu", "galu", "galige", "agide", "beku", "uthe", "idini")
EN_STEMS = (
    "video", "super", "song", "movie", "nice", "good", "please", "watch", "share",
    "like", "team", "game", "win", "time", "home", "leader", "school", "phone",
    "family", "friend", "work", "play", "start", "end", "best", "comment", "channel",
)
NAME_STEMS = ("ram", "som", "shiv", "raj", "gan", "mah", "vin", "san", "kup", "bas")
NAME_SUFFIXES = ("esha", "appa", "amma", "swamy")
LOC_STEMS = ("benga", "mysu", "tumak", "manga", "hubba", "bella", "chika", "shimo", "dhar", "kopp")
LOC_SUFFIXES = ("looru", "apura", "ahalli", "anagara")
_GIBBERISH_LETTERS = "zxqjvw"

_TOPIC_WEIGHTS = {
    "kn": {"kn": 52, "en": 10, "kn-en": 12, "name": 8, "location": 8, "other": 10},
    "en": {"kn": 10, "en": 52, "kn-en": 12, "name": 8, "location": 8, "other": 10},
    "mixed": {"kn": 27, "en": 27, "kn-en": 18, "name": 9, "location": 9, "other": 10},
}
_CLASS_ORDER = ("kn", "en", "kn-en", "name", "location", "other")


def _make_word(cls: str, rng: random.Random) -> str:
    if cls == "kn":
        return rng.choice(KN_STEMS) + rng.choice(KN_SUFFIXES)
    if cls == "en":
        return rng.choice(EN_STEMS)
    if cls == "kn-en":
        return rng.choice(EN_STEMS) + rng.choice(KN_SUFFIXES)
    if cls == "name":
        return (rng.choice(NAME_STEMS) + rng.choice(NAME_SUFFIXES)).capitalize()
    if cls == "location":
        return (rng.choice(LOC_STEMS) + rng.choice(LOC_SUFFIXES)).capitalize()
    if rng.random() < 0.4:
        return "".join(rng.choice("0123456789") for _ in range(rng.randint(2, 6)))
    return "".join(rng.choice(_GIBBERISH_LETTERS) for _ in range(rng.randint(3, 7)))


def _make_sentence(rng: random.Random) -> list[AnnotatedToken]:
    topic = rng.choices(("kn", "en", "mixed"), weights=(40, 35, 25))[0]
    weights = _TOPIC_WEIGHTS[topic]
    length = rng.randint(3, 9)
    tokens = []
    for _ in range(length):
        cls = rng.choices(_CLASS_ORDER, weights=[weights[c] for c in _CLASS_ORDER])[0]
        tokens.append(AnnotatedToken(word=_make_word(cls, rng), tag=LanguageTag.from_string(cls)))
    return tokens


@dataclass
class SyntheticCorpus:
    raw_sentences: list[Sentence]
    dataset: AnnotatedDataset


def make_synthetic_corpus(n_raw: int, n_annotated: int, seed: int = 0) -> SyntheticCorpus:
    """Generate `n_raw` raw sentences plus `n_annotated` tagged sentences."""
    if n_raw < 1 or n_annotated < 1:
        raise CoLiError("n_raw and n_annotated must be >= 1")
    rng = random.Random(seed)
    raw = [Sentence(tokens=tuple(t.word for t in _make_sentence(rng))) for _ in range(n_raw)]
    annotated = [_make_sentence(rng) for _ in range(n_annotated)]
    return SyntheticCorpus(raw_sentences=raw, dataset=AnnotatedDataset(sentences=annotated))
