"""Symmetric relation vectors from weighted averages of in-between words.

For each selected pair, a second streaming pass over the corpus tallies how
often every token occurs strictly between the two words (both orders count;
the resulting vectors are symmetric). The relation vector is the normalized
frequency-weighted average of the middle words' standard embeddings.
"""

import collections
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import NoEvidenceError, ZeroNormError


@dataclass
class MiddleWordBag:
    """Counts of words occurring strictly between a pair's occurrences."""

    pair: tuple  # (word1, word2) strings
    counts: dict  # word -> occurrences


@dataclass
class RelationVectorStore:
    """Unordered word pair -> unit-norm relation vector."""

    dim: int
    vectors: dict = field(default_factory=dict)  # sorted (w1, w2) -> np.ndarray

    @staticmethod
    def _key(w, v):
        return (w, v) if w <= v else (v, w)

    def __len__(self):
        return len(self.vectors)

    def __contains__(self, pair):
        return self._key(*pair) in self.vectors

    def __getitem__(self, pair):
        return self.vectors[self._key(*pair)]

    def get(self, pair):
        return self.vectors.get(self._key(*pair))

    def pairs(self):
        return list(self.vectors)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as sink:
            print(f"{len(self.vectors)} {self.dim}", file=sink)
            for (a, b) in sorted(self.vectors):
                values = " ".join(f"{x:.9g}" for x in self.vectors[(a, b)])
                print(f"{a}\t{b}\t{values}", file=sink)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as source:
            header = source.readline().split()
            _count, dim = int(header[0]), int(header[1])
            vectors = {}
            for line in source:
                a, b, values = line.rstrip("\n").split("\t")
                vectors[(a, b)] = np.array(values.split(), dtype=np.float64)
        return cls(dim, vectors)


def collect_middle_bags(sentences, pairs, window):
    """Tally middle-word bags for every pair in R over a sentence stream.

    ``window`` must match the counting window that produced R. Middle words
    are not restricted to the vocabulary; any corpus token can contribute.
    """
    vocab = pairs.vocab
    n_vocab = pairs.n_vocab
    middle_lexicon = {}
    middle_words = []
    key_counts = collections.Counter()

    def middle_id(token):
        idx = middle_lexicon.get(token)
        if idx is None:
            idx = len(middle_words)
            middle_lexicon[token] = idx
            middle_words.append(token)
        return idx

    # chunked pass: vocab ids drive pair detection, middle ids the bags
    vocab_ids, mids, offsets = [], [], [0]
    total = 0

    def flush():
        nonlocal vocab_ids, mids, offsets, total
        if len(offsets) <= 1:
            return
        # n_middle is fixed per chunk call; remap happens via key decode below
        keys, counts = kernels.count_middle_events(
            np.asarray(vocab_ids, np.int64), np.asarray(mids, np.int64),
            np.asarray(offsets, np.int64), window, pairs.pair_keys,
            n_vocab, len(middle_words),
        )
        n_mid = len(middle_words)
        for key, cnt in zip(keys.tolist(), counts.tolist()):
            key_counts[(key // n_mid, key % n_mid)] += cnt
        vocab_ids, mids, offsets, total = [], [], [0], 0

    for sentence in sentences:
        vocab_ids.extend(vocab.get_id(t) for t in sentence)
        mids.extend(middle_id(t) for t in sentence)
        total += len(sentence)
        offsets.append(total)
        if total >= 200_000:
            flush()
    flush()

    bags = {}
    words = vocab.words
    for (pair_key, mid), cnt in sorted(key_counts.items()):
        a, b = words[pair_key // n_vocab], words[pair_key % n_vocab]
        key = (a, b) if a <= b else (b, a)
        bag = bags.get(key)
        if bag is None:
            bag = bags[key] = MiddleWordBag(key, {})
        bag.counts[middle_words[mid]] = bag.counts.get(middle_words[mid], 0) + cnt
    return bags


def build_relation_vector(bag, standard):
    """Normalized sum of f_i-weighted standard vectors of the bag's words.

    Words without a standard vector are dropped; an empty surviving bag or a
    zero-norm sum is an error (the pair is dropped upstream).
    """
    total = np.zeros(standard.dim)
    survivors = 0
    for word in sorted(bag.counts):
        vec = standard.get(word)
        if vec is None:
            continue
        total += bag.counts[word] * vec
        survivors += 1
    if survivors == 0:
        raise NoEvidenceError(f"no middle word of {bag.pair} has a vector")
    norm = np.linalg.norm(total)
    if norm == 0.0:
        raise ZeroNormError(f"degenerate zero-sum bag for {bag.pair}")
    return total / norm


def build_relation_store(pairs, bags, standard):
    """Build unit relation vectors for every pair with usable evidence.

    Returns (store, drop_reasons) where drop_reasons counts pairs dropped
    for "no middle words", "no surviving words", and "zero-norm sum".
    """
    store = RelationVectorStore(standard.dim)
    drops = collections.Counter()
    words = pairs.vocab.words
    for key in pairs.pair_keys.tolist():
        a, b = words[key // pairs.n_vocab], words[key % pairs.n_vocab]
        pair = (a, b) if a <= b else (b, a)
        bag = bags.get(pair)
        if bag is None or not bag.counts:
            drops["no middle words"] += 1
            continue
        try:
            store.vectors[pair] = build_relation_vector(bag, standard)
        except NoEvidenceError:
            drops["no surviving words"] += 1
        except ZeroNormError:
            drops["zero-norm sum"] += 1
    return store, drops
