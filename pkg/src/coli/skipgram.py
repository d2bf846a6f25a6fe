"""Skipgram embeddings with negative sampling, trained from scratch.

For each (center, context) pair inside a symmetric window the objective is

    log sigmoid(u_ctx . v_cen) + sum_k log sigmoid(-u_neg_k . v_cen)

with negatives drawn from the unigram distribution raised to 0.75. Center
vectors (the "input" table) are the published embeddings. Training is plain
SGD with a linearly decaying learning rate; updates for one center position
are applied as a block, which keeps the math identical to the per-pair
gradients below while letting numpy do the work. Single-threaded and fully
deterministic under a fixed seed.
"""

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import EmbeddingError


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _softplus(x):
    # log(1 + e^x), stable for large |x|
    return np.logaddexp(0.0, x)


def pair_loss(center_vec, context_vec, negative_vecs) -> float:
    """Negative-sampling loss of a single (center, context, negatives) triple."""
    center_vec = np.asarray(center_vec, dtype=np.float64)
    context_vec = np.asarray(context_vec, dtype=np.float64)
    negative_vecs = np.asarray(negative_vecs, dtype=np.float64)
    s_pos = float(context_vec @ center_vec)
    s_neg = negative_vecs @ center_vec
    return float(_softplus(-s_pos) + _softplus(s_neg).sum())


def pair_gradients(center_vec, context_vec, negative_vecs):
    """Analytic gradients of `pair_loss` w.r.t. all three inputs."""
    center_vec = np.asarray(center_vec, dtype=np.float64)
    context_vec = np.asarray(context_vec, dtype=np.float64)
    negative_vecs = np.asarray(negative_vecs, dtype=np.float64)
    g_pos = _sigmoid(float(context_vec @ center_vec)) - 1.0
    g_neg = _sigmoid(negative_vecs @ center_vec)  # (k,)
    grad_center = g_pos * context_vec + g_neg @ negative_vecs
    grad_context = g_pos * center_vec
    grad_negatives = g_neg[:, None] * center_vec[None, :]
    return grad_center, grad_context, grad_negatives


@dataclass(frozen=True)
class SkipgramOptions:
    window: int = 5
    negative_samples: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    min_count: int = 1
    noise_exponent: float = 0.75
    seed: int = 0

    def __post_init__(self):
        if self.window < 1 or self.negative_samples < 1 or self.epochs < 1 or self.min_count < 1:
            raise EmbeddingError("window, negative_samples, epochs and min_count must be >= 1")
        if self.learning_rate <= 0:
            raise EmbeddingError("learning_rate must be positive")


@dataclass
class SkipgramTable:
    """Token -> row mapping plus the trained vectors (float32, one row per token)."""

    vocab: dict
    vectors: np.ndarray
    dim: int
    epoch_losses: list = field(default_factory=list, compare=False)

    def __eq__(self, other):
        return (
            isinstance(other, SkipgramTable)
            and self.vocab == other.vocab
            and self.dim == other.dim
            and self.vectors.shape == other.vectors.shape
            and bool(np.array_equal(self.vectors, other.vectors))
        )

    def vector(self, token: str):
        idx = self.vocab.get(token)
        return None if idx is None else self.vectors[idx]


def train_skipgram(sequences, dim: int, opts: SkipgramOptions | None = None) -> SkipgramTable:
    """Train one embedding table over token sequences.

    Vocabulary keeps tokens with count >= min_count, ordered by descending
    frequency (ties lexicographic) so row ids are reproducible.
    """
    opts = opts or SkipgramOptions()
    if dim < 1:
        raise EmbeddingError("embedding dim must be >= 1")
    counts = Counter()
    for seq in sequences:
        counts.update(seq)
    kept = [(tok, c) for tok, c in counts.items() if c >= opts.min_count]
    if not kept:
        raise EmbeddingError("no tokens survive min_count; cannot train embeddings")
    kept.sort(key=lambda tc: (-tc[1], tc[0]))
    vocab = {tok: i for i, (tok, _) in enumerate(kept)}
    nv = len(vocab)

    rng = np.random.default_rng(opts.seed)
    # word2vec-style init: small uniform center vectors, zero output vectors.
    V = (rng.random((nv, dim)) - 0.5) / dim
    U = np.zeros((nv, dim))

    freqs = np.array([c for _, c in kept], dtype=np.float64)
    noise = freqs ** opts.noise_exponent
    noise_cdf = np.cumsum(noise / noise.sum())

    id_seqs = []
    for seq in sequences:
        ids = [vocab[tok] for tok in seq if tok in vocab]
        if ids:
            id_seqs.append(np.asarray(ids, dtype=np.int64))
    total_centers = opts.epochs * sum(len(ids) for ids in id_seqs)
    if total_centers == 0:
        return SkipgramTable(vocab=vocab, vectors=V.astype(np.float32), dim=dim, epoch_losses=[])

    w = opts.window
    k = opts.negative_samples
    lr0 = opts.learning_rate
    done = 0
    epoch_losses = []
    for _epoch in range(opts.epochs):
        loss_sum = 0.0
        n_pairs = 0
        for ids in id_seqs:
            length = len(ids)
            for pos in range(length):
                lr = max(opts.min_learning_rate, lr0 * (1.0 - done / total_centers))
                done += 1
                lo = max(0, pos - w)
                hi = min(length, pos + w + 1)
                m = hi - lo - 1
                if m <= 0:
                    continue
                ctx = np.concatenate((ids[lo:pos], ids[pos + 1 : hi]))
                # clamp guards the u ~= 1.0 edge where rounding puts cdf[-1] < 1
                negs = np.minimum(np.searchsorted(noise_cdf, rng.random(m * k)), nv - 1)
                out_idx = np.concatenate((ctx, negs))
                center = ids[pos]
                v_c = V[center]
                rows = U[out_idx]
                scores = rows @ v_c
                sg = _sigmoid(scores)
                coeff = sg.copy()
                coeff[:m] -= 1.0  # positives
                loss_sum += float(_softplus(-scores[:m]).sum() + _softplus(scores[m:]).sum())
                n_pairs += m
                grad_v = coeff @ rows
                np.add.at(U, out_idx, (-lr) * coeff[:, None] * v_c[None, :])
                V[center] = v_c - lr * grad_v
        epoch_losses.append(loss_sum / n_pairs if n_pairs else 0.0)

    return SkipgramTable(vocab=vocab, vectors=V.astype(np.float32), dim=dim, epoch_losses=epoch_losses)
