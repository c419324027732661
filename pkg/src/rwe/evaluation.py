"""Lexical-semantics evaluation harness.

Covers the pair-encoding schemes, a from-scratch one-vs-rest linear
classifier with hinge loss, macro classification metrics, stratified k-fold
cross-validation, ridge regression with Pearson/Spearman reporting, the
QVEC dimension-alignment score, and relation-encoding nearest neighbors.
"""

import collections
from dataclasses import dataclass, field

import numpy as np

from .embeddings import cosine
from .errors import (
    DegenerateTrainingError,
    UndefinedCorrelationError,
    WordLookupError,
)

SCHEMES = ("diff", "multavg", "multconc", "multavg-standard", "multconc-standard")


# ---------------------------------------------------------------------------
# datasets


@dataclass
class LabeledPairDataset:
    records: list  # (word1, word2, label)

    @property
    def labels(self):
        return sorted({r[2] for r in self.records})

    @classmethod
    def load(cls, path):
        records = []
        with open(path, encoding="utf-8") as source:
            for line in source:
                line = line.rstrip("\n")
                if not line:
                    continue
                w1, w2, label = line.split("\t")
                records.append((w1, w2, label))
        return cls(records)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as sink:
            for w1, w2, label in self.records:
                print(f"{w1}\t{w2}\t{label}", file=sink)


@dataclass
class LabeledWordDataset:
    records: list  # (word, feature label)

    @classmethod
    def load(cls, path):
        records = []
        with open(path, encoding="utf-8") as source:
            for line in source:
                line = line.rstrip("\n")
                if not line:
                    continue
                word, label = line.split("\t")
                records.append((word, label))
        return cls(records)


@dataclass
class ScoredPairDataset:
    records: list  # (word1, word2, float score)

    @classmethod
    def load(cls, path):
        records = []
        with open(path, encoding="utf-8") as source:
            for line in source:
                line = line.rstrip("\n")
                if not line:
                    continue
                w1, w2, score = line.split("\t")
                records.append((w1, w2, float(score)))
        return cls(records)

    def word_set(self):
        return {w for r in self.records for w in r[:2]}


@dataclass
class PropertyMatrix:
    properties: list
    words: list
    matrix: np.ndarray  # (n_words, n_properties)
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            self._index = {w: i for i, w in enumerate(self.words)}

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as source:
            header = source.readline().rstrip("\n").split("\t")
            properties = header[1:]
            words, rows = [], []
            for line in source:
                parts = line.rstrip("\n").split("\t")
                words.append(parts[0])
                rows.append([float(x) for x in parts[1:]])
        return cls(properties, words, np.array(rows))


# ---------------------------------------------------------------------------
# encodings


def encode_word_pair(scheme, standard, relational, w1, w2):
    """Feature vector for a word pair under one of the encoding schemes.

    All schemes prepend the standard-vector difference w2 - w1; the mult
    variants append sum/product (or product/concat) blocks computed on the
    relational vectors, or on the standard vectors for the *-standard rows.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme: {scheme}")
    s1, s2 = standard.get(w1), standard.get(w2)
    if s1 is None or s2 is None:
        raise WordLookupError(f"pair ({w1!r}, {w2!r}) not in standard store")
    diff = s2 - s1
    if scheme == "diff":
        return diff
    if scheme.endswith("-standard"):
        e1, e2 = s1, s2
    else:
        e1, e2 = relational.get(w1), relational.get(w2)
        if e1 is None or e2 is None:
            raise WordLookupError(f"pair ({w1!r}, {w2!r}) not in relational store")
    if scheme.startswith("multavg"):
        return np.concatenate([diff, e1 + e2, e1 * e2])
    return np.concatenate([diff, e1 * e2, e1, e2])


def encode_word(standard, relational, w, relational_only=False):
    """Relational vector concatenated with the standard vector (2d)."""
    e = relational.get(w)
    if e is None:
        raise WordLookupError(f"word not in relational store: {w!r}")
    if relational_only:
        return e
    s = standard.get(w)
    if s is None:
        raise WordLookupError(f"word not in standard store: {w!r}")
    return np.concatenate([e, s])


def encode_pair_dataset(dataset, scheme, standard, relational):
    """Encode every resolvable record; returns (X, y, report)."""
    feats, labels = [], []
    dropped = 0
    for w1, w2, label in dataset.records:
        try:
            feats.append(encode_word_pair(scheme, standard, relational, w1, w2))
        except WordLookupError:
            dropped += 1
            continue
        labels.append(label)
    report = {"kept": len(labels), "dropped": dropped}
    if not feats:
        raise DegenerateTrainingError("no resolvable records in dataset")
    return np.vstack(feats), labels, report


# ---------------------------------------------------------------------------
# linear models


class LinearSVM:
    """One-vs-rest L2-regularized hinge-loss classifier.

    Deterministic full-batch subgradient descent on
    lambda/2 ||w||^2 + mean(hinge), lambda = 1 / (C * n), with step size
    1 / (lambda * (t + 1)) and objective-based stopping. Points exactly on
    the margin contribute no hinge subgradient.
    """

    def __init__(self, C=1.0, max_epochs=10_000, tol=1e-6):
        self.C = C
        self.max_epochs = max_epochs
        self.tol = tol
        self.classes_ = None
        self.W = None  # (n_classes, n_features)
        self.bias = None

    def _fit_binary(self, X, y):
        n, d = X.shape
        lam = 1.0 / (self.C * n)
        w = np.zeros(d)
        b = 0.0
        prev = np.inf
        for t in range(self.max_epochs):
            margins = y * (X @ w + b)
            viol = margins < 1.0
            obj = 0.5 * lam * w @ w + np.mean(np.maximum(0.0, 1.0 - margins))
            if abs(prev - obj) < self.tol * max(1.0, abs(obj)):
                break
            prev = obj
            gw = lam * w - (y[viol] @ X[viol]) / n
            gb = -np.sum(y[viol]) / n
            eta = 1.0 / (lam * (t + 1))
            w -= eta * gw
            b -= eta * gb
        return w, b

    def fit(self, X, y):
        X = np.asarray(X, np.float64)
        self.classes_ = sorted(set(y))
        if len(self.classes_) < 2:
            raise DegenerateTrainingError("need at least 2 classes")
        y = np.asarray(y)
        self.W = np.zeros((len(self.classes_), X.shape[1]))
        self.bias = np.zeros(len(self.classes_))
        for k, cls in enumerate(self.classes_):
            yk = np.where(y == cls, 1.0, -1.0)
            self.W[k], self.bias[k] = self._fit_binary(X, yk)
        return self

    def decision_function(self, X):
        return np.asarray(X, np.float64) @ self.W.T + self.bias

    def predict(self, X):
        scores = self.decision_function(X)
        return [self.classes_[i] for i in np.argmax(scores, axis=1)]


def train_linear_classifier(features, labels, C=1.0, max_epochs=10_000, tol=1e-6):
    return LinearSVM(C=C, max_epochs=max_epochs, tol=tol).fit(features, labels)


class RidgeRegressor:
    """Closed-form ridge regression with an unpenalized intercept."""

    def __init__(self, lam=1.0):
        self.lam = lam
        self.w = None
        self.b = 0.0

    def fit(self, X, y):
        X = np.asarray(X, np.float64)
        y = np.asarray(y, np.float64)
        xm = X.mean(axis=0)
        ym = y.mean()
        Xc = X - xm
        A = Xc.T @ Xc + self.lam * np.eye(X.shape[1])
        self.w = np.linalg.solve(A, Xc.T @ (y - ym))
        self.b = ym - xm @ self.w
        return self

    def predict(self, X):
        return np.asarray(X, np.float64) @ self.w + self.b


def train_linear_regressor(features, scores, lam=1.0):
    if len(features) < 2:
        raise DegenerateTrainingError("need at least 2 records")
    scores = np.asarray(scores, np.float64)
    if np.all(scores == scores[0]):
        raise DegenerateTrainingError("gold scores are all equal")
    return RidgeRegressor(lam=lam).fit(features, scores)


# ---------------------------------------------------------------------------
# metrics


def classification_metrics(gold, predicted):
    """Accuracy plus macro-averaged precision, recall, and F1 over the gold
    label set. A class never predicted contributes precision 0.
    """
    if len(gold) != len(predicted):
        raise ValueError("gold and predicted lengths differ")
    if not gold:
        raise ValueError("empty evaluation")
    labels = sorted(set(gold))
    correct = sum(g == p for g, p in zip(gold, predicted))
    precisions, recalls, f1s = [], [], []
    for label in labels:
        tp = sum(g == label and p == label for g, p in zip(gold, predicted))
        fp = sum(g != label and p == label for g, p in zip(gold, predicted))
        fn = sum(g == label and p != label for g, p in zip(gold, predicted))
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        precisions.append(prec)
        recalls.append(rec)
        f1s.append(f1)
    return {
        "accuracy": correct / len(gold),
        "macro_precision": float(np.mean(precisions)),
        "macro_recall": float(np.mean(recalls)),
        "macro_f1": float(np.mean(f1s)),
    }


def _rank_average(values):
    """Average ranks (1-based) with ties averaged."""
    values = np.asarray(values, np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    ranks[order] = np.arange(1, len(values) + 1, dtype=np.float64)
    # average within tie groups
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        if j > i:
            avg = (i + j) / 2.0 + 1.0
            ranks[order[i : j + 1]] = avg
        i = j + 1
    return ranks


def pearson(x, y):
    x = np.asarray(x, np.float64)
    y = np.asarray(y, np.float64)
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt(np.sum(xc**2) * np.sum(yc**2))
    if denom == 0.0:
        raise UndefinedCorrelationError("constant input vector")
    return float(np.dot(xc, yc) / denom)


def spearman(x, y):
    """Pearson correlation of average-ranked data."""
    return pearson(_rank_average(x), _rank_average(y))


def regression_metrics(gold, predicted):
    return {"pearson": pearson(gold, predicted), "spearman": spearman(gold, predicted)}


# ---------------------------------------------------------------------------
# cross-validation


def stratified_folds(labels, k, seed=0):
    """Fold index per record: seeded shuffle within each label, round-robin.

    Labels with fewer than k members cannot be stratified; they are still
    assigned round-robin and reported by the caller via ``small_labels``.
    """
    rng = np.random.default_rng(seed)
    by_label = collections.defaultdict(list)
    for i, label in enumerate(labels):
        by_label[label].append(i)
    assignment = np.zeros(len(labels), np.int64)
    small = []
    for label in sorted(by_label):
        idx = by_label[label]
        if len(idx) < k:
            small.append(label)
        idx = [idx[i] for i in rng.permutation(len(idx))]
        for pos, rec in enumerate(idx):
            assignment[rec] = pos % k
    return assignment, small


def cross_validate(dataset, k, scheme, standard, relational, seed=0, C=1.0):
    """Stratified k-fold CV of the pair classifier; unweighted fold mean."""
    if k < 2:
        raise ValueError("k must be >= 2")
    X, y, report = encode_pair_dataset(dataset, scheme, standard, relational)
    if len(y) < k:
        raise ValueError("fewer records than folds")
    assignment, small = stratified_folds(y, k, seed)
    fold_metrics = []
    y = np.asarray(y)
    for fold in range(k):
        test_mask = assignment == fold
        model = train_linear_classifier(X[~test_mask], list(y[~test_mask]), C=C)
        pred = model.predict(X[test_mask])
        fold_metrics.append(classification_metrics(list(y[test_mask]), pred))
    mean = {
        key: float(np.mean([m[key] for m in fold_metrics]))
        for key in fold_metrics[0]
    }
    mean["folds"] = fold_metrics
    mean["report"] = dict(report, unstratified_labels=small)
    return mean


def evaluate_split(train_ds, test_ds, scheme, standard, relational, C=1.0):
    """Train on a fixed split, evaluate on the test half.

    Test records with labels unseen in training are dropped and reported.
    """
    Xtr, ytr, rep_tr = encode_pair_dataset(train_ds, scheme, standard, relational)
    Xte, yte, rep_te = encode_pair_dataset(test_ds, scheme, standard, relational)
    train_labels = set(ytr)
    keep = [i for i, label in enumerate(yte) if label in train_labels]
    dropped_labels = len(yte) - len(keep)
    if not keep:
        raise DegenerateTrainingError("no evaluable test records")
    model = train_linear_classifier(Xtr, ytr, C=C)
    pred = model.predict(Xte[keep])
    metrics = classification_metrics([yte[i] for i in keep], pred)
    metrics["report"] = {
        "train": rep_tr,
        "test": dict(rep_te, dropped_unknown_label=dropped_labels),
    }
    return metrics


def cross_validate_words(dataset, k, standard, relational, seed=0, C=1.0,
                         relational_only=False):
    """Word-feature classification: k-fold CV over single-word encodings."""
    feats, labels = [], []
    dropped = 0
    for word, label in dataset.records:
        try:
            feats.append(encode_word(standard, relational, word, relational_only))
        except WordLookupError:
            dropped += 1
            continue
        labels.append(label)
    if len(labels) < k:
        raise ValueError("fewer resolvable records than folds")
    X = np.vstack(feats)
    assignment, small = stratified_folds(labels, k, seed)
    y = np.asarray(labels)
    fold_metrics = []
    for fold in range(k):
        test_mask = assignment == fold
        model = train_linear_classifier(X[~test_mask], list(y[~test_mask]), C=C)
        pred = model.predict(X[test_mask])
        fold_metrics.append(classification_metrics(list(y[test_mask]), pred))
    mean = {key: float(np.mean([m[key] for m in fold_metrics])) for key in fold_metrics[0]}
    mean["report"] = {"kept": len(labels), "dropped": dropped, "unstratified_labels": small}
    return mean


# ---------------------------------------------------------------------------
# QVEC


def qvec_score(store, properties, report=None):
    """Sum over embedding dimensions of max(0, best Pearson correlation with
    any property column), over the words shared by store and matrix.

    Alignment is many-to-one (each dimension to at most one property), so the
    total-correlation-maximizing choice is the per-dimension maximum. Pass a
    dict as ``report`` to receive shared-word and zero-variance counts.
    """
    shared = [w for w in properties.words if w in store]
    if len(shared) < 2:
        raise UndefinedCorrelationError("fewer than 2 shared words")
    emb = np.vstack([store[w] for w in shared])
    props = np.vstack([properties.matrix[properties._index[w]] for w in shared])
    score = 0.0
    zero_variance = 0
    prop_ok = props.std(axis=0) > 0
    for i in range(emb.shape[1]):
        col = emb[:, i]
        if col.std() == 0:
            zero_variance += 1
            continue
        best = -np.inf
        for j in range(props.shape[1]):
            if not prop_ok[j]:
                continue
            best = max(best, pearson(col, props[:, j]))
        if best > 0:
            score += best
    if report is not None:
        report.update(shared_words=len(shared), zero_variance_dims=zero_variance)
    return score


# ---------------------------------------------------------------------------
# relation nearest neighbors


def encode_relation(store, w, v):
    """Symmetric relation encoding (e_w + e_v) concat (e_w * e_v)."""
    ew, ev = store.get(w), store.get(v)
    if ew is None or ev is None:
        raise WordLookupError(f"pair ({w!r}, {v!r}) not fully in store")
    return np.concatenate([ew + ev, ew * ev])


def encode_relation_diff(store, w, v):
    """Comparison mode: plain vector difference on standard vectors."""
    ew, ev = store.get(w), store.get(v)
    if ew is None or ev is None:
        raise WordLookupError(f"pair ({w!r}, {v!r}) not fully in store")
    return ev - ew


def relation_knn(standard, relational, query, candidates, k=10,
                 exclude_shared_word=False, mode="relational"):
    """Rank candidate pairs by cosine to the encoded query pair.

    ``mode`` "relational" uses the symmetric sum/product encoding over the
    relational store; "standard-diff" uses the vector-difference encoding
    over the standard store.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if mode == "relational":
        enc = lambda a, b: encode_relation(relational, a, b)
    elif mode == "standard-diff":
        enc = lambda a, b: encode_relation_diff(standard, a, b)
    else:
        raise ValueError(f"unknown mode: {mode}")
    qw, qv = query
    qvec = enc(qw, qv)
    scored = []
    for a, b in candidates:
        if exclude_shared_word and {a, b} & {qw, qv}:
            continue
        try:
            scored.append((-cosine(qvec, enc(a, b)), (a, b)))
        except WordLookupError:
            continue
    scored.sort()
    return [(pair, -neg) for neg, pair in scored[:k]]
