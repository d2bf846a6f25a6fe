"""Command-line interface.

Subcommands cover each pipeline stage (preprocess, train-bpe,
train-embeddings, train, predict, evaluate), a synthetic-corpus generator
(synth), and a one-shot orchestration of everything (pipeline) driven by a
JSON config with flag overrides. One global seed makes every stage
deterministic; artifacts are written atomically; summaries contain no
timestamps so identical runs print identical output.

Exit codes: 0 success, 1 failing stage (the message names it), 2 usage
errors (argparse's own convention).
"""

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from . import bilstm as bilstm_mod
from . import bpe as bpe_mod
from . import corpus as corpus_mod
from . import embeddings as embeddings_mod
from . import evaluation as eval_mod
from . import features as features_mod
from . import linear_models as lm
from . import model_io
from . import synth as synth_mod
from .errors import CoLiError
from .fileio import atomic_write_text
from .skipgram import SkipgramOptions


class StageFailure(CoLiError):
    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage


def _read_sentence_file(path) -> list[corpus_mod.Sentence]:
    sentences = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            tokens = line.split()
            if tokens:
                sentences.append(corpus_mod.Sentence(tokens=tuple(tokens)))
    if not sentences:
        raise CoLiError(f"{path}: no sentences found")
    return sentences


def _write_sentence_file(sentences, path) -> None:
    atomic_write_text(path, "".join(s.text + "\n" for s in sentences))


def _emit(args, summary: dict, human_lines):
    if getattr(args, "json_summary", False):
        print(json.dumps(summary, sort_keys=True))
    else:
        for line in human_lines:
            print(line)


# ---------------------------------------------------------------------------
# Individual subcommands


def cmd_preprocess(args) -> int:
    ingest_result = corpus_mod.ingest(args.input)
    wordlist = None
    if args.english_wordlist:
        with open(args.english_wordlist, "r", encoding="utf-8") as handle:
            wordlist = frozenset(w.strip().lower() for w in handle if w.strip())
    opts = corpus_mod.PreprocessOptions(
        min_tokens=args.min_tokens,
        native_script_threshold=args.native_threshold,
        english_wordlist=wordlist,
    )
    result = corpus_mod.preprocess(ingest_result.comments, opts)
    _write_sentence_file(result.sentences, args.output)
    summary = {
        "command": "preprocess",
        "comments": result.report.n_comments,
        "sentences": result.report.n_sentences,
        "replaced_bytes": ingest_result.replacement_count,
        "dropped": {k: result.report.dropped.get(k, 0) for k in corpus_mod.PreprocessReport.DROP_KEYS},
    }
    lines = [
        f"preprocess: {summary['comments']} comments -> {summary['sentences']} sentences",
        "dropped: " + ", ".join(f"{k}={v}" for k, v in summary["dropped"].items()),
    ]
    if args.raw_fraction is not None:
        raw, pool = corpus_mod.split_raw_annotation_pool(
            result.sentences, fraction=args.raw_fraction, seed=args.seed
        )
        _write_sentence_file(raw, str(args.output) + ".raw")
        _write_sentence_file(pool, str(args.output) + ".pool")
        summary["raw_sentences"] = len(raw)
        summary["pool_sentences"] = len(pool)
        lines.append(f"split: {len(raw)} raw / {len(pool)} annotation pool")
    _emit(args, summary, lines)
    return 0


def cmd_train_bpe(args) -> int:
    sentences = _read_sentence_file(args.input)
    model = bpe_mod.train_bpe(sentences, vocab_size=args.vocab_size)
    bpe_mod.save_bpe(model, args.output)
    summary = {
        "command": "train-bpe",
        "merges": len(model.merges),
        "alphabet": len(model.alphabet),
        "vocab": len(model.vocab),
        "vocab_size": model.vocab_size,
    }
    _emit(args, summary, [
        f"train-bpe: {summary['merges']} merges, vocabulary {summary['vocab']}/{summary['vocab_size']}"
    ])
    return 0


def cmd_train_embeddings(args) -> int:
    sentences = _read_sentence_file(args.input)
    bpe_model = bpe_mod.load_bpe(args.bpe)
    layout = embeddings_mod.MergeLayout(
        word_dim=args.word_dim, subword_dim=args.subword_dim, char_dim=args.char_dim,
        max_subwords=args.max_subwords, max_chars=args.max_chars,
    )
    opts = SkipgramOptions(
        window=args.window, negative_samples=args.negative_samples, epochs=args.epochs,
        learning_rate=args.learning_rate, min_count=args.min_count, seed=args.seed,
    )
    embedding_set = embeddings_mod.build_embedding_set(
        sentences, bpe_model, layout=layout, opts=opts, fit_maxima=args.fit_maxima,
    )
    embeddings_mod.save_embeddings(embedding_set, args.output)
    summary = {
        "command": "train-embeddings",
        "words": len(embedding_set.words.vocab),
        "subwords": len(embedding_set.subwords.vocab),
        "chars": len(embedding_set.chars.vocab),
        "merged_dim": embedding_set.layout.total_dim,
    }
    _emit(args, summary, [
        f"train-embeddings: {summary['words']} words, {summary['subwords']} sub-words, "
        f"{summary['chars']} chars; merged dim {summary['merged_dim']}"
    ])
    return 0


def _linear_opts_from_args(args) -> lm.LinearOptions:
    return lm.LinearOptions(epochs=args.linear_epochs, learning_rate=args.linear_learning_rate,
                            l2=args.l2)


def _mlp_opts_from_args(args) -> lm.MlpOptions:
    return lm.MlpOptions(max_epochs=args.mlp_max_epochs, batch_size=args.mlp_batch_size,
                         seed=args.mlp_seed)


def cmd_train(args) -> int:
    train_ds = corpus_mod.read_dataset(args.train)
    bpe_model = bpe_mod.load_bpe(args.bpe)
    if args.model == "ngrams":
        classifier = lm.train_coli_ngrams(
            train_ds, bpe_model,
            linear_opts=_linear_opts_from_args(args), mlp_opts=_mlp_opts_from_args(args),
        )
        model_io.save_classifier(classifier, args.output)
    else:
        if not args.embeddings:
            raise CoLiError(f"--embeddings is required for --model {args.model}")
        embedding_set = embeddings_mod.load_embeddings(args.embeddings, bpe_model=bpe_model)
        if args.model == "vectors":
            classifier = lm.train_coli_vectors(
                train_ds, embedding_set,
                linear_opts=_linear_opts_from_args(args), mlp_opts=_mlp_opts_from_args(args),
            )
            model_io.save_classifier(classifier, args.output)
        else:
            config = bilstm_mod.BilstmConfig(
                hidden_per_direction=args.hidden, max_seq_len=args.max_seq_len,
                phases=_parse_phases(args.phases), learning_rate=args.bilstm_learning_rate,
                seed=args.seed,
            )
            model = bilstm_mod.train_bilstm(train_ds, embedding_set, config)
            model_io.save_bilstm(model, args.output)
    summary = {"command": "train", "model": args.model, "output": str(args.output),
               "train_sentences": train_ds.n_sentences, "train_tokens": train_ds.n_tokens}
    _emit(args, summary, [
        f"train: {args.model} on {train_ds.n_sentences} sentences "
        f"({train_ds.n_tokens} tokens) -> {args.output}"
    ])
    return 0


def cmd_predict(args) -> int:
    model = model_io.load_any_model(args.model)
    sentences = _read_sentence_file(args.input)
    tagged = []
    for sentence in sentences:
        pairs = model.tag_sentence(list(sentence.tokens))
        tagged.append([corpus_mod.AnnotatedToken(word=w, tag=t) for w, t in pairs])
    dataset = corpus_mod.AnnotatedDataset(sentences=tagged)
    corpus_mod.write_dataset(dataset, args.output)
    summary = {"command": "predict", "sentences": dataset.n_sentences, "tokens": dataset.n_tokens}
    _emit(args, summary, [f"predict: tagged {summary['tokens']} tokens -> {args.output}"])
    return 0


def _evaluate_rows(model, test_ds):
    rows = []
    members = model.member_classifiers() if hasattr(model, "member_classifiers") else []
    for member in members:
        metrics, _ = eval_mod.evaluate(member, test_ds)
        rows.append((member.name, metrics))
    metrics, matrix = eval_mod.evaluate(model, test_ds)
    rows.append((model.name, metrics))
    return rows, metrics, matrix


def cmd_evaluate(args) -> int:
    model = model_io.load_any_model(args.model)
    test_ds = corpus_mod.read_dataset(args.test)
    rows, metrics, _ = _evaluate_rows(model, test_ds)
    tables = eval_mod.report(rows)
    if args.output:
        atomic_write_text(args.output, tables.tsv)
    summary = {
        "command": "evaluate",
        "model": model.name,
        "macro_precision": metrics.macro_precision,
        "macro_recall": metrics.macro_recall,
        "macro_f1": metrics.macro_f1,
    }
    _emit(args, summary, [tables.text.rstrip("\n")])
    return 0


def cmd_synth(args) -> int:
    corpus = synth_mod.make_synthetic_corpus(args.sentences, args.annotated, seed=args.seed)
    _write_sentence_file(corpus.raw_sentences, args.output_raw)
    corpus_mod.write_dataset(corpus.dataset, args.output_dataset)
    summary = {
        "command": "synth",
        "raw_sentences": len(corpus.raw_sentences),
        "annotated_sentences": corpus.dataset.n_sentences,
        "annotated_tokens": corpus.dataset.n_tokens,
    }
    _emit(args, summary, [
        f"synth: {summary['raw_sentences']} raw sentences -> {args.output_raw}",
        f"synth: {summary['annotated_sentences']} annotated sentences "
        f"({summary['annotated_tokens']} tokens) -> {args.output_dataset}",
    ])
    return 0


# ---------------------------------------------------------------------------
# Pipeline


DEFAULT_CONFIG = {
    "seed": 0,
    "raw_corpus": None,
    "dataset": None,
    "synth": None,  # {"sentences": N, "annotated": M} generates instead of reading
    "preprocess": {"min_tokens": 3, "native_script_threshold": 0.8, "english_wordlist": None},
    "bpe": {"vocab_size": 10000},
    "embeddings": {
        "word_dim": 200, "subword_dim": 100, "char_dim": 30,
        "max_subwords": 8, "max_chars": 10,
        "window": 5, "negative_samples": 5, "epochs": 5,
        "learning_rate": 0.025, "min_count": 1,
    },
    "features": {
        "affix_lengths": [1, 2, 3],
        "word_ngram_sizes": [2, 3, 5],
        "subword_ngram_sizes": [1, 2, 3],
    },
    "linear": {"epochs": 100, "learning_rate": 1.0, "l2": 1e-4, "tol": 1e-4},
    "mlp": {
        "hidden_layers": [150, 100, 50], "max_epochs": 300, "batch_size": 32,
        "learning_rate": 1e-3, "patience": 10, "seed": 1,
    },
    "bilstm": {
        "hidden_per_direction": 300, "max_seq_len": 100, "projection_dim": None,
        "trainable_embeddings": True, "phases": [[100, 128], [100, 64]],
        "learning_rate": 1e-3, "clip_norm": 5.0,
    },
    "split": {"train_fraction": 0.7},
    "models": ["ngrams", "vectors", "bilstm"],
}


def merge_config(defaults, overrides, path=""):
    """Deep-merge a user config over the defaults; unknown keys are errors."""
    if not isinstance(overrides, dict):
        raise CoLiError(f"config{path or ' root'} must be an object")
    merged = {}
    for key, default in defaults.items():
        if key in overrides and isinstance(default, dict) and overrides[key] is not None:
            merged[key] = merge_config(default, overrides[key], f"{path}.{key}")
        elif key in overrides:
            merged[key] = overrides[key]
        else:
            merged[key] = default
    unknown = set(overrides) - set(defaults)
    if unknown:
        raise CoLiError(f"unknown config key(s){path and ' in ' + path}: {', '.join(sorted(unknown))}")
    return merged


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageFailure:
        raise
    except (CoLiError, OSError) as exc:
        raise StageFailure(name, exc) from exc


def run_pipeline(config: dict, workdir: Path, json_summary: bool = False) -> dict:
    workdir.mkdir(parents=True, exist_ok=True)
    seed = config["seed"]
    atomic_write_text(workdir / "effective_config.json",
                      json.dumps(config, indent=2, sort_keys=True) + "\n")
    summary = {"command": "pipeline", "workdir": str(workdir), "stages": [], "metrics": {}}

    def log(line):
        if not json_summary:
            print(line)

    # -- corpus inputs
    if config["synth"]:
        synth_cfg = config["synth"]
        corpus_data = _stage("synth", synth_mod.make_synthetic_corpus,
                             synth_cfg["sentences"], synth_cfg["annotated"], seed=seed)
        raw_lines = [s.text for s in corpus_data.raw_sentences]
        dataset = corpus_data.dataset
        _write_sentence_file(corpus_data.raw_sentences, workdir / "raw.txt")
        corpus_mod.write_dataset(dataset, workdir / "dataset.conll")
        summary["stages"].append({"stage": "synth", "raw_sentences": len(raw_lines),
                                  "annotated_sentences": dataset.n_sentences})
        log(f"synth: {len(raw_lines)} raw sentences, {dataset.n_sentences} annotated")
    else:
        if not config["raw_corpus"] or not config["dataset"]:
            raise StageFailure("config", "either synth or both raw_corpus and dataset must be set")
        raw_lines = None
        dataset = _stage("read-dataset", corpus_mod.read_dataset, config["dataset"])

    # -- preprocess the raw corpus
    def do_preprocess():
        if raw_lines is not None:
            comments = [corpus_mod.RawComment(text=line, source_id=f"synth:{i}")
                        for i, line in enumerate(raw_lines)]
        else:
            comments = corpus_mod.ingest(config["raw_corpus"]).comments
        pp_cfg = config["preprocess"]
        wordlist = None
        if pp_cfg["english_wordlist"]:
            with open(pp_cfg["english_wordlist"], "r", encoding="utf-8") as handle:
                wordlist = frozenset(w.strip().lower() for w in handle if w.strip())
        opts = corpus_mod.PreprocessOptions(
            min_tokens=pp_cfg["min_tokens"],
            native_script_threshold=pp_cfg["native_script_threshold"],
            english_wordlist=wordlist,
        )
        return corpus_mod.preprocess(comments, opts)

    pp_result = _stage("preprocess", do_preprocess)
    sentences = pp_result.sentences
    _write_sentence_file(sentences, workdir / "preprocessed.txt")
    summary["stages"].append({"stage": "preprocess", "sentences": len(sentences),
                              "dropped": dict(pp_result.report.dropped)})
    log(f"preprocess: {len(sentences)} sentences")

    # -- sub-word tokenizer
    bpe_model = _stage("train-bpe", bpe_mod.train_bpe, sentences, config["bpe"]["vocab_size"])
    bpe_mod.save_bpe(bpe_model, workdir / "bpe.model")
    summary["stages"].append({"stage": "train-bpe", "merges": len(bpe_model.merges),
                              "vocab": len(bpe_model.vocab)})
    log(f"train-bpe: {len(bpe_model.merges)} merges")

    # -- embeddings
    emb_cfg = config["embeddings"]
    layout = embeddings_mod.MergeLayout(
        word_dim=emb_cfg["word_dim"], subword_dim=emb_cfg["subword_dim"],
        char_dim=emb_cfg["char_dim"], max_subwords=emb_cfg["max_subwords"],
        max_chars=emb_cfg["max_chars"],
    )
    sg_opts = SkipgramOptions(
        window=emb_cfg["window"], negative_samples=emb_cfg["negative_samples"],
        epochs=emb_cfg["epochs"], learning_rate=emb_cfg["learning_rate"],
        min_count=emb_cfg["min_count"], seed=seed,
    )
    embedding_set = _stage("train-embeddings", embeddings_mod.build_embedding_set,
                           sentences, bpe_model, layout=layout, opts=sg_opts)
    embeddings_mod.save_embeddings(embedding_set, workdir / "embeddings.cmeb")
    summary["stages"].append({"stage": "train-embeddings",
                              "words": len(embedding_set.words.vocab),
                              "merged_dim": layout.total_dim})
    log(f"train-embeddings: merged dim {layout.total_dim}")

    # -- supervised splits
    train_ds, test_ds = _stage("split", eval_mod.split_train_test, dataset,
                               config["split"]["train_fraction"], seed)
    corpus_mod.write_dataset(train_ds, workdir / "train.conll")
    corpus_mod.write_dataset(test_ds, workdir / "test.conll")
    summary["stages"].append({"stage": "split", "train": train_ds.n_sentences,
                              "test": test_ds.n_sentences})
    log(f"split: {train_ds.n_sentences} train / {test_ds.n_sentences} test sentences")

    feat_cfg = config["features"]
    template = features_mod.FeatureTemplate(
        affix_lengths=tuple(feat_cfg["affix_lengths"]),
        word_ngram_sizes=tuple(feat_cfg["word_ngram_sizes"]),
        subword_ngram_sizes=tuple(feat_cfg["subword_ngram_sizes"]),
    )
    linear_opts = lm.LinearOptions(
        epochs=config["linear"]["epochs"], learning_rate=config["linear"]["learning_rate"],
        l2=config["linear"]["l2"], tol=config["linear"]["tol"],
    )
    mlp_cfg = config["mlp"]
    mlp_opts = lm.MlpOptions(
        hidden_layers=tuple(mlp_cfg["hidden_layers"]), max_epochs=mlp_cfg["max_epochs"],
        batch_size=mlp_cfg["batch_size"], learning_rate=mlp_cfg["learning_rate"],
        patience=mlp_cfg["patience"], seed=mlp_cfg["seed"],
    )

    # -- train and evaluate each requested model
    rows = []
    for model_kind in config["models"]:
        if model_kind == "ngrams":
            classifier = _stage("train-ngrams", lm.train_coli_ngrams, train_ds, bpe_model,
                                template=template, linear_opts=linear_opts, mlp_opts=mlp_opts)
            model_io.save_classifier(classifier, workdir / "ngrams.cmlm")
        elif model_kind == "vectors":
            classifier = _stage("train-vectors", lm.train_coli_vectors, train_ds, embedding_set,
                                linear_opts=linear_opts, mlp_opts=mlp_opts)
            model_io.save_classifier(classifier, workdir / "vectors.cmlm")
        elif model_kind == "bilstm":
            bl_cfg = config["bilstm"]
            bl_config = bilstm_mod.BilstmConfig(
                hidden_per_direction=bl_cfg["hidden_per_direction"],
                max_seq_len=bl_cfg["max_seq_len"],
                projection_dim=bl_cfg["projection_dim"],
                trainable_embeddings=bl_cfg["trainable_embeddings"],
                phases=tuple((int(e), int(b)) for e, b in bl_cfg["phases"]),
                learning_rate=bl_cfg["learning_rate"], clip_norm=bl_cfg["clip_norm"],
                seed=seed,
            )
            model = _stage("train-bilstm", bilstm_mod.train_bilstm, train_ds, embedding_set, bl_config)
            model_io.save_bilstm(model, workdir / "bilstm.cmbl")
            classifier = bilstm_mod.BilstmTagger(model)
        else:
            raise StageFailure("config", f"unknown model kind {model_kind!r}")
        model_rows, metrics, _ = _stage(f"evaluate-{model_kind}", _evaluate_rows, classifier, test_ds)
        rows.extend(model_rows)
        summary["metrics"][classifier.name] = {
            "macro_precision": metrics.macro_precision,
            "macro_recall": metrics.macro_recall,
            "macro_f1": metrics.macro_f1,
        }
        log(f"train+evaluate {classifier.name}: macro-F1 {metrics.macro_f1:.2f}")

    tables = eval_mod.report(rows)
    atomic_write_text(workdir / "report.tsv", tables.tsv)
    atomic_write_text(workdir / "report.txt", tables.text)
    log("")
    log(tables.text.rstrip("\n"))
    return summary


def cmd_pipeline(args) -> int:
    with open(args.config, "r", encoding="utf-8") as handle:
        user_config = json.load(handle)
    config = merge_config(DEFAULT_CONFIG, user_config)
    if args.seed is not None:
        config["seed"] = args.seed
    workdir = Path(args.workdir)
    summary = run_pipeline(config, workdir, json_summary=args.json_summary)
    if args.json_summary:
        print(json.dumps(summary, sort_keys=True))
    return 0


def _parse_phases(text: str):
    """Parse a batch schedule like '100x128,100x64' into ((100,128),(100,64))."""
    phases = []
    for part in text.split(","):
        if "x" not in part:
            raise CoLiError(f"invalid phase {part!r}, expected EPOCHSxBATCH")
        epochs, batch = part.split("x", 1)
        try:
            phases.append((int(epochs), int(batch)))
        except ValueError:
            raise CoLiError(f"invalid phase {part!r}, expected EPOCHSxBATCH") from None
    return tuple(phases)


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coli",
        description="Word-level language identification for code-mixed Kannada-English text.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_json(p):
        p.add_argument("--json-summary", action="store_true",
                       help="print a single machine-readable JSON summary line")

    p = sub.add_parser("preprocess", help="clean raw comments into sentences")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--min-tokens", type=int, default=3)
    p.add_argument("--native-threshold", type=float, default=0.8)
    p.add_argument("--english-wordlist", default=None)
    p.add_argument("--raw-fraction", type=float, default=None,
                   help="also split into OUTPUT.raw / OUTPUT.pool with this raw fraction")
    p.add_argument("--seed", type=int, default=0)
    add_json(p)
    p.set_defaults(fn=cmd_preprocess)

    p = sub.add_parser("train-bpe", help="learn a sub-word tokenizer")
    p.add_argument("--input", required=True, help="preprocessed sentences, one per line")
    p.add_argument("--vocab-size", type=int, default=10000)
    p.add_argument("--output", required=True)
    add_json(p)
    p.set_defaults(fn=cmd_train_bpe)

    p = sub.add_parser("train-embeddings", help="train word/sub-word/char embeddings")
    p.add_argument("--input", required=True, help="preprocessed sentences, one per line")
    p.add_argument("--bpe", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--word-dim", type=int, default=200)
    p.add_argument("--subword-dim", type=int, default=100)
    p.add_argument("--char-dim", type=int, default=30)
    p.add_argument("--max-subwords", type=int, default=8)
    p.add_argument("--max-chars", type=int, default=10)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--negative-samples", type=int, default=5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--learning-rate", type=float, default=0.025)
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--fit-maxima", action="store_true",
                   help="use corpus maxima instead of fixed max sub-word/char slots")
    p.add_argument("--seed", type=int, default=0)
    add_json(p)
    p.set_defaults(fn=cmd_train_embeddings)

    p = sub.add_parser("train", help="train a classifier or the sequence tagger")
    p.add_argument("--model", required=True, choices=["ngrams", "vectors", "bilstm"])
    p.add_argument("--train", required=True)
    p.add_argument("--bpe", required=True)
    p.add_argument("--embeddings", default=None)
    p.add_argument("--output", required=True)
    p.add_argument("--linear-epochs", type=int, default=100)
    p.add_argument("--linear-learning-rate", type=float, default=1.0)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--mlp-max-epochs", type=int, default=300)
    p.add_argument("--mlp-batch-size", type=int, default=32)
    p.add_argument("--mlp-seed", type=int, default=1)
    p.add_argument("--hidden", type=int, default=300)
    p.add_argument("--max-seq-len", type=int, default=100)
    p.add_argument("--phases", default="100x128,100x64")
    p.add_argument("--bilstm-learning-rate", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    add_json(p)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("predict", help="tag tokenized sentences with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="sentences to tag, one per line")
    p.add_argument("--output", required=True)
    add_json(p)
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("evaluate", help="score a trained model on a tagged dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--output", default=None, help="write the report TSV here")
    add_json(p)
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic suffix-determined corpus")
    p.add_argument("--sentences", type=int, default=2000)
    p.add_argument("--annotated", type=int, default=700)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output-raw", required=True)
    p.add_argument("--output-dataset", required=True)
    add_json(p)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("pipeline", help="run every stage end-to-end from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--workdir", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    add_json(p)
    p.set_defaults(fn=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except StageFailure as exc:
        print(f"coli {args.command}: {exc}", file=sys.stderr)
        return 1
    except (CoLiError, OSError) as exc:
        print(f"coli {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
