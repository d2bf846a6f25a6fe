"""Bidirectional LSTM sequence tagger trained from scratch.

Architecture: an embedding lookup initialized from merged word/sub-word/char
vectors (trainable by default, optionally projected to a smaller input width
by a learned linear map), one forward and one backward LSTM whose hidden
states are concatenated per time step, and a shared time-distributed dense
softmax over seven outputs (the six tags plus PAD). Training minimizes
masked categorical cross-entropy (PAD positions contribute exactly zero to
the loss and every gradient) with Adam and global-norm gradient clipping,
following a two-phase batch-size schedule.

All math is numpy float64; batches padded to the longest sentence in the
batch use state passthrough at masked steps, so the backward direction skips
trailing padding instead of folding it into real states.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .corpus import TAG_ORDER, AnnotatedDataset, LanguageTag
from .embeddings import EmbeddingSet, merge_vector
from .errors import ModelError

logger = logging.getLogger(__name__)

PAD_ID = 0            # token id reserved for padding
PAD_CLASS = len(TAG_ORDER)  # output index 6
N_OUTPUTS = len(TAG_ORDER) + 1

# Gate slices inside the fused (·, 4H) matrices: input, forget, cell, output.
def _gate_slices(hidden):
    return (
        slice(0, hidden),
        slice(hidden, 2 * hidden),
        slice(2 * hidden, 3 * hidden),
        slice(3 * hidden, 4 * hidden),
    )


def lstm_param_count(input_dim: int, hidden: int) -> int:
    """Parameters of one LSTM direction: 4 gates of (input+hidden) weights plus bias."""
    return 4 * (hidden * (input_dim + hidden) + hidden)


def bilstm_param_count(input_dim: int, hidden: int) -> int:
    return 2 * lstm_param_count(input_dim, hidden)


def dense_param_count(input_dim: int, output_dim: int) -> int:
    return input_dim * output_dim + output_dim


def embedding_param_count(vocab_size: int, embedding_dim: int) -> int:
    return vocab_size * embedding_dim


@dataclass(frozen=True)
class BilstmConfig:
    hidden_per_direction: int = 300
    max_seq_len: int = 100
    projection_dim: int | None = None  # learned linear map applied to inputs
    trainable_embeddings: bool = True
    phases: tuple[tuple[int, int], ...] = ((100, 128), (100, 64))  # (epochs, batch_size)
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip_norm: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.hidden_per_direction < 1 or self.max_seq_len < 1:
            raise ModelError("hidden_per_direction and max_seq_len must be >= 1")
        if not self.phases:
            raise ModelError("phases must contain at least one (epochs, batch_size) pair")
        for epochs, batch in self.phases:
            if epochs < 0 or batch < 1:
                raise ModelError(f"invalid phase ({epochs}, {batch})")


@dataclass
class PaddedBatch:
    token_ids: np.ndarray  # (B, T) int64, 0 = PAD
    tag_ids: np.ndarray    # (B, T) int64, PAD_CLASS at padding
    mask: np.ndarray       # (B, T) float64 in {0, 1}

    def __post_init__(self):
        if not (self.token_ids.shape == self.tag_ids.shape == self.mask.shape):
            raise ModelError("token_ids, tag_ids and mask must share one shape")
        if not np.isin(self.mask, (0.0, 1.0)).all():
            raise ModelError("mask entries must be 0 or 1")


@dataclass
class BilstmModel:
    config: BilstmConfig
    vocab: dict                 # word -> id (ids 1..V; 0 is PAD)
    params: dict                # name -> float64 ndarray
    classes: tuple = TAG_ORDER
    embedding_set: EmbeddingSet | None = field(default=None, compare=False)
    initial_loss: float = field(default=float("nan"), compare=False)
    epoch_losses: list = field(default_factory=list, compare=False)

    @property
    def embedding_dim(self) -> int:
        return self.params["emb"].shape[1]

    @property
    def input_dim(self) -> int:
        return self.config.projection_dim or self.embedding_dim

    def trainable_param_names(self):
        names = [n for n in self.params if n != "emb"]
        if self.config.trainable_embeddings:
            names.append("emb")
        return sorted(names)


def init_params(config: BilstmConfig, embedding_matrix: np.ndarray, rng) -> dict:
    emb_dim = embedding_matrix.shape[1]
    in_dim = config.projection_dim or emb_dim
    hidden = config.hidden_per_direction

    def glorot(shape):
        bound = np.sqrt(6.0 / (shape[0] + shape[1]))
        return rng.uniform(-bound, bound, size=shape)

    params = {"emb": np.array(embedding_matrix, dtype=np.float64)}
    if config.projection_dim:
        params["proj_W"] = glorot((emb_dim, config.projection_dim))
    for direction in ("fw", "bw"):
        params[f"{direction}_W"] = glorot((in_dim, 4 * hidden))
        params[f"{direction}_U"] = glorot((hidden, 4 * hidden))
        bias = np.zeros(4 * hidden)
        bias[_gate_slices(hidden)[1]] = 1.0  # forget-gate bias starts open
        params[f"{direction}_b"] = bias
    params["out_W"] = glorot((2 * hidden, N_OUTPUTS))
    params["out_b"] = np.zeros(N_OUTPUTS)
    return params


def _lstm_forward(x, mask, w, u, b, reverse):
    """One direction over (B, T, in_dim); returns (B, T, H) states and caches."""
    batch, steps, _ = x.shape
    hidden = u.shape[0]
    sl_i, sl_f, sl_g, sl_o = _gate_slices(hidden)
    pre = x @ w + b  # (B, T, 4H)
    h = np.zeros((batch, hidden))
    c = np.zeros((batch, hidden))
    states = np.zeros((batch, steps, hidden))
    caches = [None] * steps
    order = range(steps - 1, -1, -1) if reverse else range(steps)
    for t in order:
        a = pre[:, t, :] + h @ u
        gi = 1.0 / (1.0 + np.exp(-a[:, sl_i]))
        gf = 1.0 / (1.0 + np.exp(-a[:, sl_f]))
        gg = np.tanh(a[:, sl_g])
        go = 1.0 / (1.0 + np.exp(-a[:, sl_o]))
        c_new = gf * c + gi * gg
        tc = np.tanh(c_new)
        h_raw = go * tc
        m = mask[:, t][:, None]
        caches[t] = (h, c, gi, gf, gg, go, tc)
        c = m * c_new + (1.0 - m) * c
        h = m * h_raw + (1.0 - m) * h
        states[:, t, :] = h
    return states, caches


def _lstm_backward(d_states, x, mask, w, u, caches, reverse):
    """Backpropagate one direction; returns input grads and parameter grads."""
    batch, steps, _ = x.shape
    hidden = u.shape[0]
    sl_i, sl_f, sl_g, sl_o = _gate_slices(hidden)
    d_w = np.zeros_like(w)
    d_u = np.zeros_like(u)
    d_b = np.zeros(4 * hidden)
    d_x = np.zeros_like(x)
    dh_carry = np.zeros((batch, hidden))
    dc_carry = np.zeros((batch, hidden))
    order = range(steps) if reverse else range(steps - 1, -1, -1)
    for t in order:
        h_prev, c_prev, gi, gf, gg, go, tc = caches[t]
        m = mask[:, t][:, None]
        dh = d_states[:, t, :] + dh_carry
        dh_raw = m * dh
        dh_prev = (1.0 - m) * dh
        dc_new = m * dc_carry
        dc_prev = (1.0 - m) * dc_carry
        # h_raw = go * tanh(c_new)
        d_go = dh_raw * tc
        dc_new = dc_new + dh_raw * go * (1.0 - tc * tc)
        # c_new = gf * c_prev + gi * gg
        d_gf = dc_new * c_prev
        dc_prev = dc_prev + dc_new * gf
        d_gi = dc_new * gg
        d_gg = dc_new * gi
        da = np.empty((batch, 4 * hidden))
        da[:, sl_i] = d_gi * gi * (1.0 - gi)
        da[:, sl_f] = d_gf * gf * (1.0 - gf)
        da[:, sl_g] = d_gg * (1.0 - gg * gg)
        da[:, sl_o] = d_go * go * (1.0 - go)
        d_w += x[:, t, :].T @ da
        d_u += h_prev.T @ da
        d_b += da.sum(axis=0)
        d_x[:, t, :] = da @ w.T
        dh_carry = dh_prev + da @ u.T
        dc_carry = dc_prev
    return d_x, d_w, d_u, d_b


def _embed(model: BilstmModel, token_ids: np.ndarray) -> np.ndarray:
    return model.params["emb"][token_ids]


def _core_forward(params, x, mask, hidden):
    xp = x @ params["proj_W"] if "proj_W" in params else x
    h_fw, cache_fw = _lstm_forward(xp, mask, params["fw_W"], params["fw_U"], params["fw_b"], reverse=False)
    h_bw, cache_bw = _lstm_forward(xp, mask, params["bw_W"], params["bw_U"], params["bw_b"], reverse=True)
    h_cat = np.concatenate((h_fw, h_bw), axis=2)
    logits = h_cat @ params["out_W"] + params["out_b"]
    return logits, (xp, mask, h_cat, cache_fw, cache_bw)


def _masked_softmax_loss(logits, tag_ids, mask):
    shifted = logits - logits.max(axis=2, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=2))
    log_p = shifted - log_z[:, :, None]
    picked = np.take_along_axis(log_p, tag_ids[:, :, None], axis=2)[:, :, 0]
    denom = mask.sum()
    if denom == 0:
        return 0.0, np.zeros_like(logits)
    loss = -(picked * mask).sum() / denom
    probs = np.exp(log_p)
    one_hot = np.zeros_like(probs)
    np.put_along_axis(one_hot, tag_ids[:, :, None], 1.0, axis=2)
    d_logits = (probs - one_hot) * mask[:, :, None] / denom
    return float(loss), d_logits


def forward(model: BilstmModel, batch: PaddedBatch) -> np.ndarray:
    """Per-token distributions over the seven outputs, shape (B, T, 7)."""
    x = _embed(model, batch.token_ids)
    logits, _ = _core_forward(model.params, x, batch.mask, model.config.hidden_per_direction)
    shifted = logits - logits.max(axis=2, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=2, keepdims=True)


def loss_and_grads(model: BilstmModel, batch: PaddedBatch):
    """Masked cross-entropy and gradients for every trainable parameter."""
    params = model.params
    x = _embed(model, batch.token_ids)
    logits, (xp, mask, h_cat, cache_fw, cache_bw) = _core_forward(
        params, x, batch.mask, model.config.hidden_per_direction
    )
    loss, d_logits = _masked_softmax_loss(logits, batch.tag_ids, batch.mask)

    batch_n, steps, _ = xp.shape
    grads = {}
    flat_h = h_cat.reshape(batch_n * steps, -1)
    flat_dl = d_logits.reshape(batch_n * steps, -1)
    grads["out_W"] = flat_h.T @ flat_dl
    grads["out_b"] = flat_dl.sum(axis=0)
    d_hcat = d_logits @ params["out_W"].T
    hidden = model.config.hidden_per_direction
    d_fw = d_hcat[:, :, :hidden]
    d_bw = d_hcat[:, :, hidden:]
    dx_fw, grads["fw_W"], grads["fw_U"], grads["fw_b"] = _lstm_backward(
        d_fw, xp, mask, params["fw_W"], params["fw_U"], cache_fw, reverse=False
    )
    dx_bw, grads["bw_W"], grads["bw_U"], grads["bw_b"] = _lstm_backward(
        d_bw, xp, mask, params["bw_W"], params["bw_U"], cache_bw, reverse=True
    )
    d_xp = dx_fw + dx_bw
    if "proj_W" in params:
        grads["proj_W"] = x.reshape(batch_n * steps, -1).T @ d_xp.reshape(batch_n * steps, -1)
        d_x = d_xp @ params["proj_W"].T
    else:
        d_x = d_xp
    if model.config.trainable_embeddings:
        d_emb = np.zeros_like(params["emb"])
        np.add.at(d_emb, batch.token_ids, d_x)
        grads["emb"] = d_emb
    return loss, grads


# ---------------------------------------------------------------------------
# Training


def make_batch(model_vocab, sentences, max_seq_len) -> tuple[PaddedBatch, int]:
    """Pad tagged sentences to a batch; returns the batch and truncation count."""
    truncated = 0
    rows = []
    for sent in sentences:
        if len(sent) > max_seq_len:
            truncated += 1
            sent = sent[:max_seq_len]
        rows.append(sent)
    steps = max(len(s) for s in rows)
    batch_n = len(rows)
    token_ids = np.zeros((batch_n, steps), dtype=np.int64)
    tag_ids = np.full((batch_n, steps), PAD_CLASS, dtype=np.int64)
    mask = np.zeros((batch_n, steps), dtype=np.float64)
    for i, sent in enumerate(rows):
        for t, tok in enumerate(sent):
            token_ids[i, t] = model_vocab.get(tok.word, PAD_ID)
            tag_ids[i, t] = TAG_ORDER.index(tok.tag)
            mask[i, t] = 1.0
    return PaddedBatch(token_ids=token_ids, tag_ids=tag_ids, mask=mask), truncated


def _adam_step(params, grads, state, names, lr, b1, b2, eps, clip):
    norm_sq = 0.0
    for name in names:
        norm_sq += float((grads[name] ** 2).sum())
    norm = np.sqrt(norm_sq)
    scale = clip / norm if (clip > 0 and norm > clip) else 1.0
    state["t"] += 1
    t = state["t"]
    for name in names:
        g = grads[name] * scale
        m = state["m"][name]
        v = state["v"][name]
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * g * g
        m_hat = m / (1 - b1 ** t)
        v_hat = v / (1 - b2 ** t)
        params[name] -= lr * m_hat / (np.sqrt(v_hat) + eps)


def _full_loss(model, dataset_sentences, batch_size=256):
    total = 0.0
    weight = 0.0
    for start in range(0, len(dataset_sentences), batch_size):
        chunk = dataset_sentences[start : start + batch_size]
        batch, _ = make_batch(model.vocab, chunk, model.config.max_seq_len)
        loss, _ = loss_and_grads_no_params(model, batch)
        n = batch.mask.sum()
        total += loss * n
        weight += n
    return total / weight if weight else 0.0


def loss_and_grads_no_params(model, batch):
    # forward-only loss; cheaper than loss_and_grads when gradients are unused
    x = _embed(model, batch.token_ids)
    logits, _ = _core_forward(model.params, x, batch.mask, model.config.hidden_per_direction)
    loss, _ = _masked_softmax_loss(logits, batch.tag_ids, batch.mask)
    return loss, None


def train_bilstm(train: AnnotatedDataset, embedding_set: EmbeddingSet,
                 config: BilstmConfig | None = None) -> BilstmModel:
    """Train the tagger; fully deterministic under config.seed."""
    config = config or BilstmConfig()
    if train.n_sentences == 0:
        raise ModelError("training dataset is empty")
    if embedding_set.bpe is None:
        raise ModelError("embedding set needs its tokenizer attached")

    vocab_words = sorted({tok.word for tok in train.tokens()})
    vocab = {word: i + 1 for i, word in enumerate(vocab_words)}
    emb_dim = embedding_set.layout.total_dim
    emb = np.zeros((len(vocab_words) + 1, emb_dim))
    for word, idx in vocab.items():
        emb[idx] = merge_vector(embedding_set, word).values

    rng = np.random.default_rng(config.seed)
    params = init_params(config, emb, rng)
    model = BilstmModel(config=config, vocab=vocab, params=params, embedding_set=embedding_set)

    n_truncated = sum(1 for s in train.sentences if len(s) > config.max_seq_len)
    if n_truncated:
        logger.warning("%d sentence(s) longer than max_seq_len=%d were truncated",
                       n_truncated, config.max_seq_len)

    names = model.trainable_param_names()
    adam = {"t": 0, "m": {n: np.zeros_like(params[n]) for n in names},
            "v": {n: np.zeros_like(params[n]) for n in names}}

    model.initial_loss = _full_loss(model, train.sentences)
    sentences = train.sentences
    for epochs, batch_size in config.phases:
        for _epoch in range(epochs):
            order = rng.permutation(len(sentences))
            loss_sum = 0.0
            weight = 0.0
            for start in range(0, len(sentences), batch_size):
                chunk = [sentences[i] for i in order[start : start + batch_size]]
                batch, _ = make_batch(vocab, chunk, config.max_seq_len)
                loss, grads = loss_and_grads(model, batch)
                _adam_step(params, grads, adam, names, config.learning_rate,
                           config.beta1, config.beta2, config.eps, config.clip_norm)
                n = batch.mask.sum()
                loss_sum += loss * n
                weight += n
            model.epoch_losses.append(loss_sum / weight if weight else 0.0)
    return model


# ---------------------------------------------------------------------------
# Inference


def _sentence_matrix(model: BilstmModel, words) -> np.ndarray:
    """Embedding rows for one sentence; unseen words fall back to merge_vector."""
    rows = np.zeros((1, len(words), model.embedding_dim))
    for t, word in enumerate(words):
        idx = model.vocab.get(word)
        if idx is not None:
            rows[0, t] = model.params["emb"][idx]
        elif model.embedding_set is not None:
            rows[0, t] = merge_vector(model.embedding_set, word).values
        # else: all-zero input, the fully-OOV embedding
    return rows


def tag_sentence(model: BilstmModel, words) -> list[tuple[str, LanguageTag]]:
    """Tag one tokenized sentence; sentences beyond max_seq_len are truncated
    for the forward pass and the tail repeats the final real prediction."""
    words = list(words)
    if not words:
        raise ModelError("cannot tag an empty sentence")
    capped = words[: model.config.max_seq_len]
    x = _sentence_matrix(model, capped)
    mask = np.ones((1, len(capped)))
    logits, _ = _core_forward(model.params, x, mask, model.config.hidden_per_direction)
    # PAD output is never a valid word tag: restrict argmax to the six classes
    best = logits[0, :, : len(TAG_ORDER)].argmax(axis=1)
    tags = [TAG_ORDER[i] for i in best]
    while len(tags) < len(words):
        tags.append(tags[-1])
    return list(zip(words, tags))


class BilstmTagger:
    """Adapter giving BilstmModel the same tagging surface as WordClassifier."""

    def __init__(self, model: BilstmModel, name: str = "coli-bilstm"):
        self.model = model
        self.name = name
        self.classes = model.classes

    def tag_words(self, words) -> list[LanguageTag]:
        return [tag for _, tag in tag_sentence(self.model, words)]

    def tag_sentence(self, words) -> list[tuple[str, LanguageTag]]:
        return tag_sentence(self.model, words)
