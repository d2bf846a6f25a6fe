"""Acceptance checks.

Each test covers one numbered criterion, asserts the stated tolerance and
runtime budget, and prints a single ``ACCEPTANCE n ...: PASS`` line (visible
with ``pytest -v -s`` or in captured output). The pipeline criteria (7, 9)
share two real CLI runs through a module-scoped fixture.
"""

import json
import random
import string
import subprocess
import sys
import time

import numpy as np
import pytest

from coli.bilstm import (
    BilstmConfig,
    BilstmModel,
    PaddedBatch,
    bilstm_param_count,
    embedding_param_count,
    init_params,
    loss_and_grads,
)
from coli.bpe import DEFAULT_MARKER, segment, strip_marker, train_bpe
from coli.corpus import TAG_ORDER, LanguageTag, Sentence
from coli.embeddings import EmbeddingSet, MergeLayout, merge_vector
from coli.evaluation import confusion_from_pairs, metrics_from_confusion, parse_report_tsv
from coli.features import FeatureTemplate, extract_features
from coli.linear_models import (
    LinearModel,
    logistic_loss_and_grad,
    mlp_loss_and_grads,
    _mlp_init,
    soft_vote,
)
from coli.skipgram import SkipgramTable, pair_gradients, pair_loss


def _report(n, name, started, budget):
    elapsed = time.perf_counter() - started
    assert elapsed < budget, f"criterion {n} took {elapsed:.1f}s, budget {budget}s"
    print(f"ACCEPTANCE {n} {name}: PASS ({elapsed:.1f}s < {budget}s)")


def _random_table(tokens, dim, rng):
    vocab = {tok: i for i, tok in enumerate(tokens)}
    vectors = rng.standard_normal((len(tokens), dim)).astype(np.float32) + 0.1
    return SkipgramTable(vocab=vocab, vectors=vectors, dim=dim)


@pytest.fixture(scope="module")
def default_layout_embeddings():
    """Default-layout embedding set over a BPE model where segment("abcdef")
    has exactly 5 sub-words, with every unit vector non-zero."""
    corpus = [Sentence(tokens=("ab",) * 5 + ("abcdef",) * 2)]
    bpe = train_bpe(corpus, vocab_size=9)  # alphabet 7 -> merges (a,b), (marker,ab)
    assert segment(bpe, "abcdef").sub_words == (DEFAULT_MARKER + "ab", "c", "d", "e", "f")
    rng = np.random.default_rng(0)
    layout = MergeLayout()
    letters = list("abcdef")
    words = ["abcdef"] + ["".join(w) for w in
             {tuple(random.Random(i).choices(letters, k=random.Random(i).randint(1, 12)))
              for i in range(200)}]
    subword_units = sorted({u for w in words for u in segment(bpe, w).sub_words})
    return EmbeddingSet(
        words=_random_table(sorted(set(words)), layout.word_dim, rng),
        subwords=_random_table(subword_units, layout.subword_dim, rng),
        chars=_random_table(letters, layout.char_dim, rng),
        layout=layout,
        bpe=bpe,
    )


def test_criterion_1_merged_vector_layout(default_layout_embeddings):
    started = time.perf_counter()
    es = default_layout_embeddings
    layout = es.layout
    assert layout.total_dim == 1300

    rng = random.Random(1)
    for _ in range(1000):
        word = "".join(rng.choice("abcdef") for _ in range(rng.randint(1, 14)))
        assert merge_vector(es, word).values.shape == (1300,)

    # "abcdef": 5 sub-words and 6 chars -> 3 empty sub-word slots, 4 empty char slots
    values = merge_vector(es, "abcdef").values
    sub_base, char_base = layout.word_dim, layout.word_dim + 8 * layout.subword_dim
    sub_blocks = [values[sub_base + i * 100: sub_base + (i + 1) * 100] for i in range(8)]
    char_blocks = [values[char_base + i * 30: char_base + (i + 1) * 30] for i in range(10)]
    assert [not b.any() for b in sub_blocks] == [False] * 5 + [True] * 3
    assert [not b.any() for b in char_blocks] == [False] * 6 + [True] * 4
    assert values[:200].any()
    _report(1, "merged vector layout", started, budget=5.0)


def _fd_check(loss_fn, arrays, grads, h=1e-6, tol=1e-4):
    fd_parts, an_parts = [], []
    for arr, grad in zip(arrays, grads):
        flat = arr.ravel()
        fd = np.empty_like(flat)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = loss_fn()
            flat[i] = orig - h
            down = loss_fn()
            flat[i] = orig
            fd[i] = (up - down) / (2 * h)
        fd_parts.append(fd)
        an_parts.append(np.asarray(grad, dtype=np.float64).ravel())
    fd_all = np.concatenate(fd_parts)
    an_all = np.concatenate(an_parts)
    rel = np.linalg.norm(fd_all - an_all) / max(np.linalg.norm(fd_all), 1e-12)
    assert rel <= tol, f"relative gradient error {rel:.3e} > {tol}"


def test_criterion_2_gradient_oracles():
    started = time.perf_counter()
    rng = np.random.default_rng(42)

    for _ in range(20):  # logistic regression
        n, d = int(rng.integers(2, 9)), int(rng.integers(2, 8))
        x = rng.normal(size=(n, d))
        y = rng.integers(0, 6, size=n)
        w = rng.normal(size=(6, d)) * 0.3
        b = rng.normal(size=6) * 0.3
        _, gw, gb = logistic_loss_and_grad(w, b, x, y, l2=1e-4)
        _fd_check(lambda: logistic_loss_and_grad(w, b, x, y, l2=1e-4)[0], [w, b], [gw, gb])

    for _ in range(20):  # MLP
        n, d = int(rng.integers(2, 7)), int(rng.integers(2, 6))
        dims = [d, int(rng.integers(3, 6)), 6]
        x = rng.normal(size=(n, d))
        y = rng.integers(0, 6, size=n)
        weights, biases = _mlp_init(dims, rng)
        _, gws, gbs = mlp_loss_and_grads(weights, biases, x, y)
        _fd_check(lambda: mlp_loss_and_grads(weights, biases, x, y)[0],
                  weights + biases, gws + gbs)

    for _ in range(20):  # skipgram pair loss
        dim = int(rng.integers(2, 9))
        c = rng.normal(size=dim)
        ctx = rng.normal(size=dim)
        negs = rng.normal(size=(int(rng.integers(1, 6)), dim))
        grads = pair_gradients(c, ctx, negs)
        _fd_check(lambda: pair_loss(c, ctx, negs), [c, ctx, negs], list(grads))

    for trial in range(20):  # BiLSTM, all parameter groups, with masking
        config = BilstmConfig(hidden_per_direction=2, max_seq_len=4, phases=((1, 2),),
                              seed=trial)
        emb = np.zeros((5, 3))
        emb[1:] = rng.normal(size=(4, 3)) * 0.5
        params = init_params(config, emb, rng)
        model = BilstmModel(config=config, vocab={f"w{i}": i for i in range(1, 5)},
                            params=params)
        token_ids = rng.integers(1, 5, size=(2, 3))
        token_ids[1, 2] = 0  # one padded position
        tag_ids = rng.integers(0, 6, size=(2, 3))
        tag_ids[1, 2] = 6
        mask = (token_ids != 0).astype(np.float64)
        batch = PaddedBatch(token_ids=token_ids, tag_ids=tag_ids, mask=mask)
        _, grads = loss_and_grads(model, batch)
        names = sorted(grads)
        _fd_check(lambda: loss_and_grads(model, batch)[0],
                  [model.params[n] for n in names], [grads[n] for n in names])

    _report(2, "gradient oracles (logistic, mlp, skipgram, bilstm)", started, budget=60.0)


def test_criterion_3_bpe_oracle():
    started = time.perf_counter()
    toy = [Sentence(tokens=("low",) * 5 + ("lower",) * 2 + ("lowest",))]
    model = train_bpe(toy, vocab_size=11)
    assert model.merges == [("l", "o"), ("lo", "w"), (DEFAULT_MARKER, "low")]
    assert segment(model, "lowest").sub_words == (DEFAULT_MARKER + "low", "e", "s", "t")

    rng = random.Random(3)
    alphabet = string.ascii_lowercase + string.digits
    for _ in range(10000):
        word = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 16)))
        assert strip_marker(model, segment(model, word).sub_words) == word
    _report(3, "bpe merge sequence and concatenation invariant", started, budget=10.0)


def test_criterion_4_soft_voting_oracle():
    started = time.perf_counter()
    rng = np.random.default_rng(4)
    for _ in range(10000):
        members = [
            LinearModel(weights=rng.normal(size=(6, 3)), bias=rng.normal(size=6),
                        loss_kind="logistic")
            for _ in range(3)
        ]
        x = rng.normal(size=3)
        tag, dist = soft_vote(members, x)
        brute = np.mean([m.predict_proba(x)[0] for m in members], axis=0)
        assert np.abs(dist - brute).max() <= 1e-12
        assert tag is TAG_ORDER[int(np.argmax(brute))]
    _report(4, "soft voting equals brute-force member mean", started, budget=5.0)


def test_criterion_5_feature_extraction():
    started = time.perf_counter()
    corpus = [Sentence(tokens=("nayigalige", "nayi", "mane", "galige"))]
    bpe = train_bpe(corpus, vocab_size=30)
    template = FeatureTemplate()

    feats = extract_features("nayigalige", bpe, template)
    assert {k[len("prefix:"):] for k in feats if k.startswith("prefix:")} == {"n", "na", "nay"}
    assert {k[len("suffix:"):] for k in feats if k.startswith("suffix:")} == {"e", "ge", "ige"}

    def unescaped_len(name):
        return len(name.replace("%3A", ":").replace("%25", "%"))

    rng = random.Random(5)
    for _ in range(1000):
        word = "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(1, 15)))
        feats = extract_features(word, bpe, template)
        for n in template.word_ngram_sizes:
            total = sum(c for name, c in feats.items()
                        if name.startswith("wng:") and unescaped_len(name[4:]) == n)
            assert total == max(0, len(word) + 3 - n)
    _report(5, "affix sets and n-gram count formula", started, budget=5.0)


def test_criterion_6_metrics_oracle():
    started = time.perf_counter()
    kn, en = LanguageTag.KN, LanguageTag.EN
    metrics = metrics_from_confusion(
        confusion_from_pairs([kn, kn, en, en], [kn, en, en, en])
    )
    assert abs(metrics.per_class[kn].precision - 1.0) <= 1e-9
    assert abs(metrics.per_class[kn].recall - 0.5) <= 1e-9
    assert abs(metrics.per_class[kn].f1 - 2 / 3) <= 1e-9
    assert abs(metrics.per_class[en].precision - 2 / 3) <= 1e-9
    assert abs(metrics.per_class[en].recall - 1.0) <= 1e-9
    assert abs(metrics.per_class[en].f1 - 0.8) <= 1e-9
    assert abs(metrics.macro_f1 - (2 / 3 + 0.8) / 6) <= 1e-9

    rng = random.Random(6)
    for _ in range(1000):
        n = rng.randint(1, 50)
        gold = [rng.choice(TAG_ORDER) for _ in range(n)]
        pred = [rng.choice(TAG_ORDER) for _ in range(n)]
        got = metrics_from_confusion(confusion_from_pairs(gold, pred))
        for tag in TAG_ORDER:
            tp = sum(1 for g, p in zip(gold, pred) if g is tag and p is tag)
            fp = sum(1 for g, p in zip(gold, pred) if g is not tag and p is tag)
            fn = sum(1 for g, p in zip(gold, pred) if g is tag and p is not tag)
            precision = tp / (tp + fp) if tp + fp else 0.0
            recall = tp / (tp + fn) if tp + fn else 0.0
            f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
            assert abs(got.per_class[tag].precision - precision) <= 1e-12
            assert abs(got.per_class[tag].recall - recall) <= 1e-12
            assert abs(got.per_class[tag].f1 - f1) <= 1e-12
    _report(6, "metrics hand example and brute-force confusion", started, budget=5.0)


PIPELINE_CONFIG = {
    "seed": 0,
    "synth": {"sentences": 2200, "annotated": 800},
    "bpe": {"vocab_size": 600},
    "embeddings": {"word_dim": 32, "subword_dim": 16, "char_dim": 8,
                   "max_subwords": 4, "max_chars": 8, "epochs": 3},
    "linear": {"epochs": 150},
    "mlp": {"hidden_layers": [64, 32], "max_epochs": 150},
    "bilstm": {"hidden_per_direction": 48, "max_seq_len": 12,
               "phases": [[12, 32]], "learning_rate": 0.003},
    "models": ["ngrams", "vectors", "bilstm"],
}

ARTIFACTS = [
    "raw.txt", "dataset.conll", "preprocessed.txt", "bpe.model", "embeddings.cmeb",
    "train.conll", "test.conll", "ngrams.cmlm", "vectors.cmlm", "bilstm.cmbl",
    "report.txt", "report.tsv", "effective_config.json",
]


@pytest.fixture(scope="module")
def pipeline_runs(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("acceptance")
    config_path = tmp / "config.json"
    config_path.write_text(json.dumps(PIPELINE_CONFIG), encoding="utf-8")
    elapsed = {}
    for run in ("run1", "run2"):
        t0 = time.perf_counter()
        proc = subprocess.run(
            [sys.executable, "-m", "coli.cli", "pipeline",
             "--config", str(config_path), "--workdir", str(tmp / run)],
            capture_output=True, text=True,
        )
        elapsed[run] = time.perf_counter() - t0
        assert proc.returncode == 0, proc.stderr
    return tmp, elapsed


def test_criterion_7_end_to_end_pipeline(pipeline_runs):
    tmp, elapsed = pipeline_runs
    macro, _ = parse_report_tsv((tmp / "run1" / "report.tsv").read_text(encoding="utf-8"))
    f1 = {name: row["f1"] for name, row in macro.items()}
    assert f1["coli-ngrams"] >= 0.90, f1
    assert f1["coli-vectors"] >= 0.70, f1
    assert f1["coli-bilstm"] >= 0.70, f1
    assert elapsed["run1"] < 600.0, f"pipeline took {elapsed['run1']:.0f}s, budget 600s"
    print(
        f"ACCEPTANCE 7 end-to-end pipeline: PASS "
        f"(ngrams {f1['coli-ngrams']:.3f} >= 0.90, vectors {f1['coli-vectors']:.3f} >= 0.70, "
        f"bilstm {f1['coli-bilstm']:.3f} >= 0.70, {elapsed['run1']:.0f}s < 600s)"
    )


def test_criterion_8_parameter_count_arithmetic():
    started = time.perf_counter()
    assert bilstm_param_count(input_dim=1000, hidden=300) == 3_122_400
    assert embedding_param_count(vocab_size=19162, embedding_dim=1000) == 19_162_000
    _report(8, "parameter-count arithmetic", started, budget=1.0)


def test_criterion_9_determinism(pipeline_runs):
    tmp, _ = pipeline_runs
    for name in ARTIFACTS:
        a = (tmp / "run1" / name).read_bytes()
        b = (tmp / "run2" / name).read_bytes()
        assert a == b, f"{name} differs between identical runs"
    print(f"ACCEPTANCE 9 determinism: PASS (all {len(ARTIFACTS)} artifacts byte-identical)")
