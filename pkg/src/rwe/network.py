"""One-hidden-layer network mapping word pairs to relation vectors.

The input encoding for a pair is (e_w + e_v) concatenated with the
componentwise product (e_w * e_v), which makes every forward pass exactly
symmetric in the two words. The embedding table is trainable and is the
exported product; the layer weights exist only to shape it.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .embeddings import DenseVectorStore
from .errors import DimensionMismatchError, DivergenceError, WordLookupError

CKPT_MAGIC = b"RWECKPT1"
CKPT_VERSION = 1
_ACT_CODES = {"relu": 0, "identity": 1}
_ACT_NAMES = {v: k for k, v in _ACT_CODES.items()}


def _relu(z):
    return np.maximum(z, 0.0)


def _relu_grad(z):
    # subgradient at exactly 0 is defined as 0
    return (z > 0).astype(np.float64)


def _apply(name, z):
    return _relu(z) if name == "relu" else z


def _apply_grad(name, z):
    return _relu_grad(z) if name == "relu" else np.ones_like(z)


@dataclass
class RweModel:
    words: list
    E: np.ndarray  # (n, d) trainable embedding table
    X: np.ndarray  # (h, 2d)
    a: np.ndarray  # (h,)
    Y: np.ndarray  # (d, h)
    b: np.ndarray  # (d,)
    output_activation: str = "relu"
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            self._index = {w: i for i, w in enumerate(self.words)}
        if self.output_activation not in _ACT_CODES:
            raise ValueError(f"unknown activation: {self.output_activation}")

    @property
    def dim(self):
        return self.E.shape[1]

    @property
    def hidden(self):
        return self.X.shape[0]

    def index_of(self, word):
        idx = self._index.get(word)
        if idx is None:
            raise WordLookupError(f"word not in model: {word!r}")
        return idx

    def parameters(self):
        return {"E": self.E, "X": self.X, "a": self.a, "Y": self.Y, "b": self.b}

    def copy_parameters(self):
        return {k: v.copy() for k, v in self.parameters().items()}

    def load_parameters(self, params):
        for k, v in params.items():
            getattr(self, k)[...] = v


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 512
    max_epochs: int = 100
    dev_fraction: float = 0.01
    patience: int = 3
    seed: int = 0
    output_activation: str = "relu"

    def __post_init__(self):
        if not 0.0 < self.dev_fraction < 0.5:
            raise ValueError("dev_fraction must be in (0, 0.5)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def init_model(standard, words, hidden=None, seed=0, output_activation="relu"):
    """Initialize the model with the embedding table copied from ``standard``.

    ``words`` must all have a standard vector. Hidden size defaults to twice
    the embedding dimension (the input width).
    """
    d = standard.dim
    h = 2 * d if hidden is None else hidden
    E = np.vstack([standard[w] for w in words]).astype(np.float64)
    rng = np.random.default_rng(seed)
    limit_x = np.sqrt(6.0 / (2 * d + h))
    limit_y = np.sqrt(6.0 / (h + d))
    X = rng.uniform(-limit_x, limit_x, size=(h, 2 * d))
    Y = rng.uniform(-limit_y, limit_y, size=(d, h))
    return RweModel(
        words=list(words), E=E, X=X, a=np.zeros(h), Y=Y, b=np.zeros(d),
        output_activation=output_activation,
    )


def encode_pair_input(e_w, e_v):
    """(e_w + e_v) concatenated with (e_w * e_v); symmetric in its arguments."""
    e_w = np.asarray(e_w, np.float64)
    e_v = np.asarray(e_v, np.float64)
    if e_w.shape != e_v.shape:
        raise DimensionMismatchError(f"{e_w.shape} vs {e_v.shape}")
    return np.concatenate([e_w + e_v, e_w * e_v])


def _forward_arrays(model, wi, vi):
    ew, ev = model.E[wi], model.E[vi]
    i = np.concatenate([ew + ev, ew * ev], axis=1)
    z1 = i @ model.X.T + model.a
    h1 = _relu(z1)
    z2 = h1 @ model.Y.T + model.b
    o = _apply(model.output_activation, z2)
    return o, (ew, ev, i, z1, h1, z2)


def forward(model, pair):
    """Network output for one word pair."""
    w, v = pair
    wi = np.array([model.index_of(w)])
    vi = np.array([model.index_of(v)])
    o, _ = _forward_arrays(model, wi, vi)
    return o[0]


def _batch_arrays(model, batch, targets):
    wi = np.array([model.index_of(w) for w, _ in batch])
    vi = np.array([model.index_of(v) for _, v in batch])
    r = np.vstack([targets[pair] for pair in batch])
    return wi, vi, r


def batch_loss(model, batch, targets):
    """Sum of squared Euclidean distances between outputs and targets."""
    wi, vi, r = _batch_arrays(model, batch, targets)
    o, _ = _forward_arrays(model, wi, vi)
    return float(np.sum((o - r) ** 2))


def gradients(model, batch, targets):
    """Analytic gradients of batch_loss for every parameter group.

    Embedding gradients are returned sparsely as (row indices, rows); rows
    for the same word are pre-accumulated. Also returns the batch loss.
    """
    wi, vi, r = _batch_arrays(model, batch, targets)
    o, (ew, ev, i, z1, h1, z2) = _forward_arrays(model, wi, vi)
    diff = o - r
    loss = float(np.sum(diff**2))

    dz2 = 2.0 * diff * _apply_grad(model.output_activation, z2)
    dY = dz2.T @ h1
    db = dz2.sum(axis=0)
    dz1 = (dz2 @ model.Y) * _relu_grad(z1)
    dX = dz1.T @ i
    da = dz1.sum(axis=0)
    di = dz1 @ model.X
    d = model.dim
    ds, dp = di[:, :d], di[:, d:]
    dew = ds + dp * ev
    dev = ds + dp * ew

    idx = np.concatenate([wi, vi])
    rows = np.concatenate([dew, dev], axis=0)
    uniq, inverse = np.unique(idx, return_inverse=True)
    acc = np.zeros((len(uniq), d))
    np.add.at(acc, inverse, rows)
    return {"E_idx": uniq, "E_rows": acc, "X": dX, "a": da, "Y": dY, "b": db, "loss": loss}


def apply_gradient_step(model, grads, lr):
    """Plain (non-adaptive) gradient step; used for descent-property checks."""
    model.X -= lr * grads["X"]
    model.a -= lr * grads["a"]
    model.Y -= lr * grads["Y"]
    model.b -= lr * grads["b"]
    model.E[grads["E_idx"]] -= lr * grads["E_rows"]


class _Adam:
    """Adam with lazy (touched-rows-only) updates for the embedding table."""

    def __init__(self, model, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in model.parameters().items()}
        self.v = {k: np.zeros_like(v) for k, v in model.parameters().items()}

    def step(self, model, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1**self.t
        c2 = 1.0 - b2**self.t
        for name in ("X", "a", "Y", "b"):
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            getattr(model, name)[...] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
        idx, rows = grads["E_idx"], grads["E_rows"]
        m = self.m["E"][idx]
        v = self.v["E"][idx]
        m = b1 * m + (1 - b1) * rows
        v = b2 * v + (1 - b2) * rows * rows
        self.m["E"][idx] = m
        self.v["E"][idx] = v
        model.E[idx] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def fit_full_batch(model, pairs, targets, steps, lr=1e-3):
    """Full-batch Adam on a fixed pair list; returns the per-step loss trace.

    Capacity checks use this directly; production training goes through
    :func:`train`, which adds batching, dev splits, and early stopping.
    """
    opt = _Adam(model, lr)
    trace = []
    for _ in range(steps):
        grads = gradients(model, pairs, targets)
        trace.append(grads["loss"])
        opt.step(model, grads)
    trace.append(batch_loss(model, pairs, targets))
    return trace


def training_pairs(store, model):
    """Pairs from the store whose both words are in the model, sorted."""
    return sorted(p for p in store.pairs() if p[0] in model._index and p[1] in model._index)


def train(model, store, config):
    """Minibatch Adam with dev-based early stopping.

    Returns a history dict with per-epoch mean train/dev loss per pair and
    the best dev epoch; the model is left at the best-dev parameters.
    """
    pairs = training_pairs(store, model)
    if not pairs:
        raise ValueError("no trainable pairs in relation-vector store")
    rng = np.random.default_rng(config.seed)
    perm = rng.permutation(len(pairs))
    n_dev = max(1, int(np.floor(config.dev_fraction * len(pairs))))
    dev_pairs = [pairs[i] for i in perm[:n_dev]]
    train_pairs_ = [pairs[i] for i in perm[n_dev:]]
    if not train_pairs_:
        raise ValueError("dev split leaves no training pairs")

    opt = _Adam(model, config.learning_rate)
    history = {"train": [], "dev": [], "best_epoch": -1}
    best_dev = np.inf
    best_params = model.copy_parameters()
    bad_epochs = 0

    for epoch in range(config.max_epochs):
        order = rng.permutation(len(train_pairs_))
        total = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = [train_pairs_[i] for i in order[start : start + config.batch_size]]
            grads = gradients(model, batch, store)
            if not np.isfinite(grads["loss"]):
                raise DivergenceError(epoch)
            total += grads["loss"]
            opt.step(model, grads)
        train_loss = total / len(train_pairs_)
        dev_loss = batch_loss(model, dev_pairs, store) / len(dev_pairs)
        if not (np.isfinite(train_loss) and np.isfinite(dev_loss)):
            raise DivergenceError(epoch)
        history["train"].append(train_loss)
        history["dev"].append(dev_loss)
        if dev_loss < best_dev:
            best_dev = dev_loss
            best_params = model.copy_parameters()
            history["best_epoch"] = epoch
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= config.patience:
                break
    model.load_parameters(best_params)
    return history


def export_relational_embeddings(model):
    """The trained embedding table as a plain vector store."""
    return DenseVectorStore(list(model.words), model.E.copy())


def save_checkpoint(model, path, seed=0):
    """Binary checkpoint: header, f32 parameter blocks, then the word table."""
    with open(path, "wb") as sink:
        sink.write(CKPT_MAGIC)
        sink.write(
            struct.pack(
                "<IQIIBQ", CKPT_VERSION, len(model.words), model.dim, model.hidden,
                _ACT_CODES[model.output_activation], seed,
            )
        )
        for block in (model.E, model.X, model.a, model.Y, model.b):
            sink.write(block.astype("<f4").tobytes())
        blob = "\n".join(model.words).encode("utf-8")
        sink.write(struct.pack("<Q", len(blob)))
        sink.write(blob)


def load_checkpoint(path):
    with open(path, "rb") as source:
        if source.read(len(CKPT_MAGIC)) != CKPT_MAGIC:
            raise ValueError(f"not a checkpoint file: {path}")
        version, n, d, h, act, seed = struct.unpack("<IQIIBQ", source.read(29))
        if version != CKPT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        def block(shape):
            size = int(np.prod(shape)) * 4
            return np.frombuffer(source.read(size), "<f4").astype(np.float64).reshape(shape)
        E = block((n, d))
        X = block((h, 2 * d))
        a = block((h,))
        Y = block((d, h))
        b = block((d,))
        (blob_len,) = struct.unpack("<Q", source.read(8))
        words = source.read(blob_len).decode("utf-8").split("\n") if blob_len else []
    model = RweModel(words, E, X, a, Y, b, output_activation=_ACT_NAMES[act])
    return model, seed
