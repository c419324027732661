"""Dense word vector stores: text I/O, cosine similarity, neighbor search."""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmbeddingParseError,
    WordLookupError,
    ZeroNormError,
)


@dataclass
class DenseVectorStore:
    """Immutable word -> dense vector map with a shared (n, dim) matrix."""

    words: list
    matrix: np.ndarray
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            self._index = {w: i for i, w in enumerate(self.words)}

    @property
    def dim(self):
        return self.matrix.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self._index

    def __getitem__(self, word):
        try:
            return self.matrix[self._index[word]]
        except KeyError:
            raise WordLookupError(f"unknown word: {word!r}") from None

    def get(self, word):
        idx = self._index.get(word)
        return None if idx is None else self.matrix[idx]

    def index_of(self, word):
        return self._index.get(word, -1)


def load_text_embeddings(path):
    """Parse the common text interchange format.

    Optional header line "count dim"; body lines "word v1 ... v_dim".
    Duplicate words keep the first occurrence; all-zero vectors are dropped
    with a warning count available on the returned store's ``dropped_zero``
    attribute.
    """
    words, rows = [], []
    seen = set()
    dim = None
    dropped_zero = 0
    with open(path, encoding="utf-8") as source:
        for lineno, line in enumerate(source, 1):
            parts = line.rstrip("\n").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    _count, dim = int(parts[0]), int(parts[1])
                    continue
                except ValueError:
                    pass  # no header; fall through to body parsing
            word, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise EmbeddingParseError(
                    lineno, f"expected {dim} components, got {len(values)}"
                )
            if word in seen:
                continue
            try:
                vec = np.array([float(v) for v in values])
            except ValueError as exc:
                raise EmbeddingParseError(lineno, str(exc)) from None
            if not np.any(vec):
                dropped_zero += 1
                continue
            seen.add(word)
            words.append(word)
            rows.append(vec)
    matrix = np.vstack(rows) if rows else np.empty((0, dim or 0))
    store = DenseVectorStore(words, matrix)
    store.dropped_zero = dropped_zero
    return store


def save_text_embeddings(store, path):
    """Write header "count dim" then one 6-significant-digit line per word."""
    if len(store) == 0:
        raise ValueError("refusing to save an empty vector store")
    with open(path, "w", encoding="utf-8") as sink:
        print(f"{len(store)} {store.dim}", file=sink)
        for word, row in zip(store.words, store.matrix):
            values = " ".join(f"{x:.6g}" for x in row)
            print(f"{word} {values}", file=sink)


def cosine(u, v):
    """Cosine similarity; zero-norm inputs are an error, not NaN."""
    u = np.asarray(u, np.float64)
    v = np.asarray(v, np.float64)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"{u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ZeroNormError("cosine undefined for zero-norm vector")
    return float(np.dot(u, v) / (nu * nv))


def nearest_neighbors(store, query, k=10, exclude=()):
    """Top-k words by cosine similarity, descending; ties lexicographic.

    ``query`` is a word present in the store or an explicit vector. The
    query word itself and any word in ``exclude`` are skipped.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    exclude = set(exclude)
    if isinstance(query, str):
        vec = store[query]
        exclude.add(query)
    else:
        vec = np.asarray(query, np.float64)
        if vec.shape != (store.dim,):
            raise DimensionMismatchError(f"query dim {vec.shape} vs store dim {store.dim}")
    qnorm = np.linalg.norm(vec)
    if qnorm == 0.0:
        raise ZeroNormError("cosine undefined for zero-norm query")
    norms = np.linalg.norm(store.matrix, axis=1)
    scores = store.matrix @ vec / (norms * qnorm)
    ranked = sorted(
        (
            (-s, w)
            for w, s in zip(store.words, scores.tolist())
            if w not in exclude
        ),
    )
    return [(w, -neg) for neg, w in ranked[:k]]
