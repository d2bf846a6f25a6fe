"""Macro-averaged evaluation over the six word-level classes.

Per-class precision, recall and F1 come straight from the confusion matrix
(rows = gold, columns = predicted, fixed class order). Zero denominators
yield zero metrics, and macro averages run over all six classes including
zero-support ones, so reported numbers never silently drop a class.
"""

import random
from dataclasses import dataclass

import numpy as np

from .corpus import TAG_ORDER, AnnotatedDataset
from .errors import CoLiError


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # (6, 6) int64, rows = gold, cols = predicted
    classes: tuple = TAG_ORDER

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        n = len(self.classes)
        if self.counts.shape != (n, n):
            raise CoLiError(f"confusion matrix must be {n}x{n}, got {self.counts.shape}")
        if (self.counts < 0).any():
            raise CoLiError("confusion matrix counts must be non-negative")


@dataclass
class MetricsReport:
    per_class: dict  # LanguageTag -> ClassMetrics
    macro_precision: float
    macro_recall: float
    macro_f1: float
    n_tokens: int
    zero_support: tuple  # classes absent from the gold labels


def confusion_from_pairs(gold_tags, pred_tags) -> ConfusionMatrix:
    gold_tags = list(gold_tags)
    pred_tags = list(pred_tags)
    if len(gold_tags) != len(pred_tags):
        raise CoLiError(f"gold has {len(gold_tags)} tags but predictions have {len(pred_tags)}")
    index = {tag: i for i, tag in enumerate(TAG_ORDER)}
    counts = np.zeros((len(TAG_ORDER), len(TAG_ORDER)), dtype=np.int64)
    for g, p in zip(gold_tags, pred_tags):
        counts[index[g], index[p]] += 1
    return ConfusionMatrix(counts=counts)


def metrics_from_confusion(matrix: ConfusionMatrix) -> MetricsReport:
    counts = matrix.counts
    per_class = {}
    for i, tag in enumerate(TAG_ORDER):
        tp = int(counts[i, i])
        fp = int(counts[:, i].sum()) - tp
        fn = int(counts[i, :].sum()) - tp
        precision = tp / (tp + fp) if (tp + fp) else 0.0
        recall = tp / (tp + fn) if (tp + fn) else 0.0
        f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
        per_class[tag] = ClassMetrics(precision=precision, recall=recall, f1=f1, support=tp + fn)
    n = len(TAG_ORDER)
    return MetricsReport(
        per_class=per_class,
        macro_precision=sum(m.precision for m in per_class.values()) / n,
        macro_recall=sum(m.recall for m in per_class.values()) / n,
        macro_f1=sum(m.f1 for m in per_class.values()) / n,
        n_tokens=int(counts.sum()),
        zero_support=tuple(tag for tag in TAG_ORDER if per_class[tag].support == 0),
    )


def split_train_test(dataset: AnnotatedDataset, train_fraction: float = 0.7,
                     seed: int = 0) -> tuple[AnnotatedDataset, AnnotatedDataset]:
    """Sentence-level split; |train| = round(train_fraction * N), seeded shuffle."""
    n = dataset.n_sentences
    if n < 2:
        raise CoLiError(f"need at least 2 sentences to split, got {n}")
    if not (0.0 < train_fraction < 1.0):
        raise CoLiError("train_fraction must be in (0, 1)")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    n_train = int(round(train_fraction * n))
    train = AnnotatedDataset(sentences=[dataset.sentences[i] for i in order[:n_train]])
    test = AnnotatedDataset(sentences=[dataset.sentences[i] for i in order[n_train:]])
    return train, test


def evaluate(model, test: AnnotatedDataset) -> tuple[MetricsReport, ConfusionMatrix]:
    """Tag every test sentence with `model.tag_words` and score the result."""
    if test.n_sentences == 0:
        raise CoLiError("cannot evaluate on an empty dataset")
    gold, pred = [], []
    for sentence in test.sentences:
        words = [tok.word for tok in sentence]
        tags = model.tag_words(words)
        if len(tags) != len(words):
            raise CoLiError(f"model returned {len(tags)} tags for {len(words)} words")
        gold.extend(tok.tag for tok in sentence)
        pred.extend(tags)
    matrix = confusion_from_pairs(gold, pred)
    return metrics_from_confusion(matrix), matrix


# ---------------------------------------------------------------------------
# Report rendering


@dataclass
class ReportTables:
    text: str
    tsv: str


def _fmt2(value: float) -> str:
    return f"{value:.2f}"


def report(results) -> ReportTables:
    """Render named metric reports as aligned text and machine-readable TSV.

    ``results`` is a list of (model_name, MetricsReport). The text has two
    tables: macro precision/recall/F1 per model, then per-class F1 per model.
    The TSV mirrors both tables (full float precision) separated by a blank
    line, and `parse_report_tsv` reads it back.
    """
    results = list(results)
    if not results:
        raise CoLiError("cannot render an empty report")
    class_names = [tag.value for tag in TAG_ORDER]

    macro_header = ["model", "precision", "recall", "f1"]
    macro_rows = [
        [name, rep.macro_precision, rep.macro_recall, rep.macro_f1] for name, rep in results
    ]
    class_header = ["model"] + class_names
    class_rows = [
        [name] + [rep.per_class[tag].f1 for tag in TAG_ORDER] for name, rep in results
    ]

    def align(header, rows, fmt):
        table = [header] + [[row[0]] + [fmt(v) for v in row[1:]] for row in rows]
        widths = [max(len(r[i]) for r in table) for i in range(len(header))]
        lines = []
        for r in table:
            lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(r)).rstrip())
        return "\n".join(lines)

    text = (
        "Macro-averaged metrics\n"
        + align(macro_header, macro_rows, _fmt2)
        + "\n\nPer-class F1\n"
        + align(class_header, class_rows, _fmt2)
        + "\n"
    )

    def tsv_block(header, rows):
        lines = ["\t".join(header)]
        for row in rows:
            lines.append("\t".join([row[0]] + [f"{v:.6f}" for v in row[1:]]))
        return "\n".join(lines)

    tsv = tsv_block(macro_header, macro_rows) + "\n\n" + tsv_block(class_header, class_rows) + "\n"
    return ReportTables(text=text, tsv=tsv)


def parse_report_tsv(tsv: str) -> tuple[dict, dict]:
    """Read a report TSV back as two dicts keyed by model name.

    Returns (macro, per_class) where macro[name] = {metric: value} and
    per_class[name] = {class_name: f1}.
    """
    blocks = [b for b in tsv.strip().split("\n\n") if b.strip()]
    if len(blocks) != 2:
        raise CoLiError(f"expected 2 TSV blocks, found {len(blocks)}")

    def parse_block(block):
        lines = block.strip().split("\n")
        header = lines[0].split("\t")
        out = {}
        for line in lines[1:]:
            cells = line.split("\t")
            if len(cells) != len(header):
                raise CoLiError(f"TSV row has {len(cells)} cells, header has {len(header)}")
            out[cells[0]] = {key: float(v) for key, v in zip(header[1:], cells[1:])}
        return out

    return parse_block(blocks[0]), parse_block(blocks[1])
