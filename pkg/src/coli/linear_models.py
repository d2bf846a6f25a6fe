"""Shallow word classifiers and their soft-voting ensemble.

Three estimators are trained over the same design matrix and combined by
averaging their class distributions:

* a one-vs-rest linear classifier with L2-regularized hinge loss, trained
  by full-batch sub-gradient descent with step size lr/(1+t);
* multinomial logistic regression with L2, same schedule;
* a multilayer perceptron with hidden layers (150, 100, 50), relu, softmax
  output, trained with Adam, mini-batches of 32 and early stopping.

The hinge model has no native probabilities; its per-class margins are
passed through a softmax, a deliberate departure from Platt scaling that
keeps the ensemble free of a second calibration fit.

Two feature regimes share these estimators: sparse n-gram/affix counts
("ngrams") and merged dense embedding vectors ("vectors"). `WordClassifier`
packages an estimator with its featurizer so both regimes expose the same
tagging interface.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from . import features as features_mod
from .bpe import BpeModel
from .corpus import TAG_ORDER, AnnotatedDataset, LanguageTag
from .embeddings import EmbeddingSet, merge_vector
from .errors import ModelError

logger = logging.getLogger(__name__)

N_CLASSES = len(TAG_ORDER)


def softmax_rows(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _as_matrix(x):
    if sparse.issparse(x):
        return x, x.shape[0]
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr, arr.shape[0]


def _check_finite(x):
    if sparse.issparse(x):
        bad = ~np.isfinite(x.data)
        if bad.any():
            row = int(np.searchsorted(x.indptr, np.flatnonzero(bad)[0], side="right") - 1)
            raise ModelError(f"non-finite feature value in row {row}")
    else:
        finite = np.isfinite(x).all(axis=1)
        if not finite.all():
            raise ModelError(f"non-finite feature value in row {int(np.flatnonzero(~finite)[0])}")


def _encode_labels(tags) -> np.ndarray:
    index = {tag: i for i, tag in enumerate(TAG_ORDER)}
    y = np.array([index[t] for t in tags], dtype=np.int64)
    missing = [t.value for t in TAG_ORDER if index[t] not in set(y.tolist())]
    if missing:
        logger.warning("training data is missing classes: %s", ", ".join(missing))
    return y


# ---------------------------------------------------------------------------
# Linear estimators (hinge / logistic)


@dataclass(frozen=True)
class LinearOptions:
    epochs: int = 100
    learning_rate: float = 1.0
    l2: float = 1e-4
    tol: float = 1e-4  # stop when the relative loss improvement falls below this


@dataclass
class LinearModel:
    weights: np.ndarray  # (C, D)
    bias: np.ndarray     # (C,)
    loss_kind: str       # "hinge" | "logistic"
    classes: tuple = TAG_ORDER

    def decision_function(self, x) -> np.ndarray:
        x, _ = _as_matrix(x)
        if x.shape[1] != self.weights.shape[1]:
            raise ModelError(
                f"feature dimension mismatch: got {x.shape[1]}, model expects {self.weights.shape[1]}"
            )
        return np.asarray(x @ self.weights.T) + self.bias

    def predict_proba(self, x) -> np.ndarray:
        return softmax_rows(self.decision_function(x))


def logistic_loss_and_grad(weights, bias, x, y_idx, l2):
    """Mean cross-entropy + (l2/2)||W||^2 and its gradients (bias unpenalized)."""
    n = x.shape[0]
    logits = np.asarray(x @ weights.T) + bias
    logits -= logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(logits).sum(axis=1))
    loss = float((log_z - logits[np.arange(n), y_idx]).mean()) + 0.5 * l2 * float((weights ** 2).sum())
    p = np.exp(logits - log_z[:, None])
    g = p
    g[np.arange(n), y_idx] -= 1.0
    g /= n
    grad_w = np.asarray((x.T @ g)).T + l2 * weights
    grad_b = g.sum(axis=0)
    return loss, grad_w, grad_b


def hinge_loss_and_grad(weights, bias, x, y_pm, l2):
    """One-vs-rest hinge: mean_i sum_c max(0, 1 - y_ic m_ic) + (l2/2)||W||^2."""
    n = x.shape[0]
    margins = np.asarray(x @ weights.T) + bias
    slack = 1.0 - y_pm * margins
    active = slack > 0.0
    loss = float(slack[active].sum()) / n + 0.5 * l2 * float((weights ** 2).sum())
    g = -(y_pm * active) / n
    grad_w = np.asarray((x.T @ g)).T + l2 * weights
    grad_b = g.sum(axis=0)
    return loss, grad_w, grad_b


def train_linear(x, tags, loss_kind: str, opts: LinearOptions | None = None) -> LinearModel:
    """Train a hinge or logistic linear model over the six classes."""
    if loss_kind not in ("hinge", "logistic"):
        raise ModelError(f"unknown linear loss {loss_kind!r}")
    opts = opts or LinearOptions()
    _check_finite(x)
    y = _encode_labels(tags)
    n, d = x.shape
    if n != len(y):
        raise ModelError(f"X has {n} rows but y has {len(y)} labels")
    weights = np.zeros((N_CLASSES, d))
    bias = np.zeros(N_CLASSES)
    y_pm = -np.ones((n, N_CLASSES))
    y_pm[np.arange(n), y] = 1.0

    prev_loss = None
    for t in range(opts.epochs):
        if loss_kind == "logistic":
            loss, grad_w, grad_b = logistic_loss_and_grad(weights, bias, x, y, opts.l2)
        else:
            loss, grad_w, grad_b = hinge_loss_and_grad(weights, bias, x, y_pm, opts.l2)
        lr = opts.learning_rate / (1.0 + t)
        weights -= lr * grad_w
        bias -= lr * grad_b
        if prev_loss is not None and abs(prev_loss - loss) < opts.tol * max(1.0, abs(prev_loss)):
            break
        prev_loss = loss
    return LinearModel(weights=weights, bias=bias, loss_kind=loss_kind)


# ---------------------------------------------------------------------------
# Multilayer perceptron


@dataclass(frozen=True)
class MlpOptions:
    hidden_layers: tuple[int, ...] = (150, 100, 50)
    max_epochs: int = 300
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    patience: int = 10
    validation_fraction: float = 0.1
    seed: int = 1


@dataclass
class MlpModel:
    weights: list  # per layer, (d_in, d_out)
    biases: list   # per layer, (d_out,)
    classes: tuple = TAG_ORDER

    @property
    def layer_dims(self):
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def decision_function(self, x) -> np.ndarray:
        x, _ = _as_matrix(x)
        if x.shape[1] != self.weights[0].shape[0]:
            raise ModelError(
                f"feature dimension mismatch: got {x.shape[1]}, model expects {self.weights[0].shape[0]}"
            )
        h = x
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(np.asarray(h @ w) + b, 0.0)
        return np.asarray(h @ self.weights[-1]) + self.biases[-1]

    def predict_proba(self, x) -> np.ndarray:
        return softmax_rows(self.decision_function(x))


def mlp_loss_and_grads(weights, biases, x, y_idx):
    """Mean cross-entropy of the relu MLP and gradients for every layer."""
    n = x.shape[0]
    pre = []          # pre-activations per layer
    acts = [x]        # inputs per layer (acts[i] feeds layer i)
    h = x
    for w, b in zip(weights[:-1], biases[:-1]):
        z = np.asarray(h @ w) + b
        pre.append(z)
        h = np.maximum(z, 0.0)
        acts.append(h)
    logits = np.asarray(h @ weights[-1]) + biases[-1]
    logits -= logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(logits).sum(axis=1))
    loss = float((log_z - logits[np.arange(n), y_idx]).mean())

    delta = np.exp(logits - log_z[:, None])
    delta[np.arange(n), y_idx] -= 1.0
    delta /= n
    grad_w = [None] * len(weights)
    grad_b = [None] * len(biases)
    for layer in range(len(weights) - 1, -1, -1):
        grad_w[layer] = np.asarray(acts[layer].T @ delta)
        grad_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ weights[layer].T) * (pre[layer - 1] > 0.0)
    return loss, grad_w, grad_b


def _mlp_init(dims, rng):
    weights, biases = [], []
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        scale = np.sqrt(2.0 / d_in)  # He init, matches relu
        weights.append(rng.standard_normal((d_in, d_out)) * scale)
        biases.append(np.zeros(d_out))
    return weights, biases


def train_mlp(x, tags, opts: MlpOptions | None = None) -> MlpModel:
    """Adam-trained MLP with early stopping on a held-out validation slice.

    Datasets too small for a meaningful split (fewer than 20 rows) fall back
    to monitoring the training loss.
    """
    opts = opts or MlpOptions()
    _check_finite(x)
    y = _encode_labels(tags)
    n, d = x.shape
    if n != len(y):
        raise ModelError(f"X has {n} rows but y has {len(y)} labels")
    dims = [d, *opts.hidden_layers, N_CLASSES]
    rng = np.random.default_rng(opts.seed)
    weights, biases = _mlp_init(dims, rng)

    order = rng.permutation(n)
    n_val = int(round(opts.validation_fraction * n)) if n >= 20 else 0
    val_idx, train_idx = order[:n_val], order[n_val:]
    x_val, y_val = (x[val_idx], y[val_idx]) if n_val else (None, None)
    x_train, y_train = x[train_idx], y[train_idx]
    n_train = len(train_idx)

    params = weights + biases
    adam_m = [np.zeros_like(p) for p in params]
    adam_v = [np.zeros_like(p) for p in params]
    step = 0
    best_loss = np.inf
    best_params = [p.copy() for p in params]
    stale = 0
    for _epoch in range(opts.max_epochs):
        perm = rng.permutation(n_train)
        for start in range(0, n_train, opts.batch_size):
            batch = perm[start : start + opts.batch_size]
            _, grad_w, grad_b = mlp_loss_and_grads(weights, biases, x_train[batch], y_train[batch])
            grads = grad_w + grad_b
            step += 1
            for p, g, m, v in zip(params, grads, adam_m, adam_v):
                m *= opts.beta1
                m += (1 - opts.beta1) * g
                v *= opts.beta2
                v += (1 - opts.beta2) * g * g
                m_hat = m / (1 - opts.beta1 ** step)
                v_hat = v / (1 - opts.beta2 ** step)
                p -= opts.learning_rate * m_hat / (np.sqrt(v_hat) + opts.eps)
        if n_val:
            monitor, _, _ = mlp_loss_and_grads(weights, biases, x_val, y_val)
        else:
            monitor, _, _ = mlp_loss_and_grads(weights, biases, x_train, y_train)
        if monitor < best_loss:
            best_loss = monitor
            best_params = [p.copy() for p in params]
            stale = 0
        else:
            stale += 1
            if stale >= opts.patience:
                break
    k = len(weights)
    return MlpModel(weights=[p for p in best_params[:k]], biases=[p for p in best_params[k:]])


# ---------------------------------------------------------------------------
# Soft-voting ensemble


@dataclass
class EnsembleModel:
    members: list
    member_names: list
    classes: tuple = TAG_ORDER

    def predict_proba(self, x) -> np.ndarray:
        probs = [member.predict_proba(x) for member in self.members]
        return np.mean(probs, axis=0)


def predict_proba(model, x) -> np.ndarray:
    """Class distribution(s) for feature row(s); rows sum to one."""
    return model.predict_proba(x)


def soft_vote(members, x) -> tuple[LanguageTag, np.ndarray]:
    """Average member distributions for one row; ties resolve to class order."""
    if not members:
        raise ModelError("soft_vote needs at least one member")
    dists = [np.asarray(member.predict_proba(x)).reshape(-1) for member in members]
    mean = np.mean(dists, axis=0)
    return TAG_ORDER[int(np.argmax(mean))], mean


# ---------------------------------------------------------------------------
# Featurizers and the uniform word-tagging interface


class NgramFeaturizer:
    kind = "ngrams"

    def __init__(self, bpe_model: BpeModel, template: features_mod.FeatureTemplate,
                 vocabulary: features_mod.FeatureVocabulary):
        self.bpe = bpe_model
        self.template = template
        self.vocabulary = vocabulary

    def transform_words(self, words):
        maps = [features_mod.extract_features(w, self.bpe, self.template) for w in words]
        return features_mod.vectorize_all(maps, self.vocabulary)


class VectorFeaturizer:
    kind = "vectors"

    def __init__(self, embedding_set: EmbeddingSet):
        if embedding_set.bpe is None:
            raise ModelError("embedding set needs its tokenizer attached")
        self.embeddings = embedding_set
        self._cache: dict[str, np.ndarray] = {}

    def transform_words(self, words):
        rows = []
        for w in words:
            vec = self._cache.get(w)
            if vec is None:
                vec = merge_vector(self.embeddings, w).values.astype(np.float64)
                self._cache[w] = vec
            rows.append(vec)
        return np.vstack(rows)


@dataclass
class WordClassifier:
    """An estimator bound to its featurizer; tags words independently."""

    name: str
    estimator: object
    featurizer: object
    classes: tuple = TAG_ORDER

    def predict_proba_words(self, words) -> np.ndarray:
        return self.estimator.predict_proba(self.featurizer.transform_words(list(words)))

    def tag_words(self, words) -> list[LanguageTag]:
        probs = self.predict_proba_words(words)
        return [TAG_ORDER[i] for i in probs.argmax(axis=1)]

    def tag_sentence(self, words) -> list[tuple[str, LanguageTag]]:
        return list(zip(words, self.tag_words(words)))

    def member_classifiers(self) -> list["WordClassifier"]:
        """One WordClassifier per ensemble member (empty for single estimators)."""
        if not isinstance(self.estimator, EnsembleModel):
            return []
        return [
            WordClassifier(name=f"{name} ({self.featurizer.kind})", estimator=member,
                           featurizer=self.featurizer)
            for name, member in zip(self.estimator.member_names, self.estimator.members)
        ]


MEMBER_NAMES = ["linear-svc", "mlp", "logistic-regression"]


def _train_ensemble(x, tags, linear_opts, mlp_opts) -> EnsembleModel:
    hinge = train_linear(x, tags, "hinge", linear_opts)
    mlp = train_mlp(x, tags, mlp_opts)
    logistic = train_linear(x, tags, "logistic", linear_opts)
    return EnsembleModel(members=[hinge, mlp, logistic], member_names=list(MEMBER_NAMES))


def _dataset_words_tags(train: AnnotatedDataset):
    words = [tok.word for tok in train.tokens()]
    tags = [tok.tag for tok in train.tokens()]
    if not words:
        raise ModelError("training dataset is empty")
    return words, tags


def train_coli_ngrams(
    train: AnnotatedDataset,
    bpe_model: BpeModel,
    template: features_mod.FeatureTemplate | None = None,
    linear_opts: LinearOptions | None = None,
    mlp_opts: MlpOptions | None = None,
) -> WordClassifier:
    """Ensemble over sparse affix/n-gram count features."""
    template = template or features_mod.FeatureTemplate()
    words, tags = _dataset_words_tags(train)
    maps = [features_mod.extract_features(w, bpe_model, template) for w in words]
    vocabulary = features_mod.fit_vocabulary(maps)
    x = features_mod.vectorize_all(maps, vocabulary)
    ensemble = _train_ensemble(x, tags, linear_opts, mlp_opts)
    featurizer = NgramFeaturizer(bpe_model, template, vocabulary)
    return WordClassifier(name="coli-ngrams", estimator=ensemble, featurizer=featurizer)


def train_coli_vectors(
    train: AnnotatedDataset,
    embedding_set: EmbeddingSet,
    linear_opts: LinearOptions | None = None,
    mlp_opts: MlpOptions | None = None,
) -> WordClassifier:
    """Ensemble over merged word/sub-word/char embedding vectors."""
    featurizer = VectorFeaturizer(embedding_set)
    words, tags = _dataset_words_tags(train)
    x = featurizer.transform_words(words)
    ensemble = _train_ensemble(x, tags, linear_opts, mlp_opts)
    return WordClassifier(name="coli-vectors", estimator=ensemble, featurizer=featurizer)
