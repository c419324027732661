"""Within-sentence co-occurrence statistics, smoothed PMI, and pair selection.

Counting is harmonically weighted: a co-occurrence with k tokens in between
contributes 1/(k+1) to the pair's harmonic count and 1 to its raw event
count. Only position pairs (i, j) with j - i <= window qualify. Integer
events are counted per (pair, distance) and the harmonic weights applied in
a fixed distance order, so shard merges and backend choice cannot perturb
the float results.
"""

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import MissingPairError
from .corpus import Vocabulary

MAGIC = b"RWECOOCT"
VERSION = 1
_RECORD = np.dtype([("w", "<u4"), ("v", "<u4"), ("harmonic", "<f8"), ("raw", "<u8")])

DEFAULT_WINDOW = 10
DEFAULT_ALPHA = 0.5
DEFAULT_TOP_K = 100
DEFAULT_MIN_RAW = 25


@dataclass
class CooccurrenceTable:
    """Sparse symmetric pair statistics keyed by ``lo * |V| + hi``."""

    n_vocab: int
    window: int
    pair_keys: np.ndarray  # sorted int64
    harmonic: np.ndarray   # f64, aligned with pair_keys
    raw: np.ndarray        # int64, aligned with pair_keys
    marginal_n: np.ndarray  # f64, len n_vocab
    alpha: float = DEFAULT_ALPHA
    vocab: Vocabulary | None = None
    _s_star: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self._s_star is None:
            self._s_star = np.power(self.marginal_n, self.alpha)

    @property
    def s_star(self):
        """Smoothed marginals s_v* = (n_v*)^alpha."""
        return self._s_star

    @property
    def s_total(self):
        """s_** = sum of smoothed marginals."""
        return float(self._s_star.sum())

    def __len__(self):
        return len(self.pair_keys)

    def _locate(self, w, v):
        lo, hi = (w, v) if w < v else (v, w)
        key = lo * self.n_vocab + hi
        pos = np.searchsorted(self.pair_keys, key)
        if pos >= len(self.pair_keys) or self.pair_keys[pos] != key:
            return -1
        return pos

    def harmonic_count(self, w, v):
        pos = self._locate(w, v)
        return float(self.harmonic[pos]) if pos >= 0 else 0.0

    def raw_count(self, w, v):
        pos = self._locate(w, v)
        return int(self.raw[pos]) if pos >= 0 else 0


def _sentence_chunks(sentences, vocab, chunk_tokens=200_000):
    """Pack sentences into (ids, offsets) chunks of bounded token count."""
    ids, offsets = [], [0]
    total = 0
    for sentence in sentences:
        ids.extend(vocab.get_id(t) for t in sentence)
        total += len(sentence)
        offsets.append(total)
        if total >= chunk_tokens:
            yield np.asarray(ids, np.int64), np.asarray(offsets, np.int64)
            ids, offsets, total = [], [0], 0
    if len(offsets) > 1:
        yield np.asarray(ids, np.int64), np.asarray(offsets, np.int64)


def count_cooccurrences(sentences, vocab, window=DEFAULT_WINDOW, alpha=DEFAULT_ALPHA, threads=1):
    """Build the co-occurrence table for a sentence stream.

    ``threads`` > 1 processes corpus chunks concurrently; results are merged
    in chunk order by integer addition and are identical to a single-threaded
    run.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    n_vocab = len(vocab)

    def work(chunk):
        ids, offsets = chunk
        return kernels.count_pair_events(ids, offsets, window, n_vocab)

    chunks = _sentence_chunks(sentences, vocab)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    keys, counts = kernels.merge_event_arrays(parts)
    return _finalize_table(keys, counts, n_vocab, window, alpha, vocab)


def _finalize_table(event_keys, event_counts, n_vocab, window, alpha, vocab):
    """Collapse (pair, distance) integer events into the final table."""
    if len(event_keys):
        pair_of_event = event_keys // window
        dist = (event_keys % window + 1).astype(np.float64)
        pair_keys, inverse = np.unique(pair_of_event, return_inverse=True)
        harmonic = np.zeros(len(pair_keys))
        # ascending-distance accumulation order within each pair
        np.add.at(harmonic, inverse, event_counts / dist)
        raw = np.zeros(len(pair_keys), np.int64)
        np.add.at(raw, inverse, event_counts)
    else:
        pair_keys = np.empty(0, np.int64)
        harmonic = np.empty(0)
        raw = np.empty(0, np.int64)
    marginal = np.zeros(n_vocab)
    np.add.at(marginal, pair_keys // n_vocab, harmonic)
    np.add.at(marginal, pair_keys % n_vocab, harmonic)
    return CooccurrenceTable(
        n_vocab=n_vocab, window=window, pair_keys=pair_keys, harmonic=harmonic,
        raw=raw, marginal_n=marginal, alpha=alpha, vocab=vocab,
    )


def pmi_smoothed(table, w, v):
    """Smoothed PMI: log(n_wv * s_** / (n_w* * s_v*)), natural log.

    Raises :class:`MissingPairError` for pairs with no co-occurrence rather
    than returning -inf.
    """
    pos = table._locate(w, v)
    if pos < 0 or table.harmonic[pos] <= 0:
        raise MissingPairError(f"pair ({w}, {v}) not present in table")
    n_wv = table.harmonic[pos]
    return float(np.log(n_wv * table.s_total / (table.marginal_n[w] * table.s_star[v])))


def _pmi_all(table):
    """Vectorized PMI for every stored pair (first-word marginal on lo)."""
    lo = table.pair_keys // table.n_vocab
    hi = table.pair_keys % table.n_vocab
    s_tot = table.s_total
    # PMI is evaluated per direction; log(n*s/(n_w* s_v*)) depends on order
    pmi_lo = np.log(table.harmonic * s_tot / (table.marginal_n[lo] * table.s_star[hi]))
    pmi_hi = np.log(table.harmonic * s_tot / (table.marginal_n[hi] * table.s_star[lo]))
    return lo, hi, pmi_lo, pmi_hi


@dataclass
class RelatedPairSet:
    """The selected pair set R with per-word neighbor lists."""

    vocab: Vocabulary
    n_vocab: int
    pair_keys: np.ndarray            # sorted int64, lo * |V| + hi
    pair_pmi: dict                   # pair key -> PMI score used at selection
    neighbors: dict                  # word id -> [(neighbor id, pmi), ...] desc

    def __len__(self):
        return len(self.pair_keys)

    def __contains__(self, pair):
        w, v = pair
        lo, hi = (w, v) if w < v else (v, w)
        key = lo * self.n_vocab + hi
        pos = np.searchsorted(self.pair_keys, key)
        return pos < len(self.pair_keys) and self.pair_keys[pos] == key

    def id_pairs(self):
        lo = self.pair_keys // self.n_vocab
        hi = self.pair_keys % self.n_vocab
        return list(zip(lo.tolist(), hi.tolist()))

    def save(self, path):
        words = self.vocab.words
        lines = []
        for key in self.pair_keys.tolist():
            a, b = words[key // self.n_vocab], words[key % self.n_vocab]
            if b < a:
                a, b = b, a
            lines.append((a, b, self.pair_pmi[key]))
        lines.sort()
        with open(path, "w", encoding="utf-8") as sink:
            for a, b, pmi in lines:
                print(f"{a}\t{b}\t{pmi:.6f}", file=sink)

    @classmethod
    def load(cls, path, vocab):
        n_vocab = len(vocab)
        keys, pmis = [], {}
        with open(path, encoding="utf-8") as source:
            for line in source:
                a, b, pmi = line.rstrip("\n").split("\t")
                wa, wb = vocab.id_of(a), vocab.id_of(b)
                lo, hi = (wa, wb) if wa < wb else (wb, wa)
                key = lo * n_vocab + hi
                keys.append(key)
                pmis[key] = float(pmi)
        return cls(vocab, n_vocab, np.array(sorted(keys), np.int64), pmis, {})


def select_related_pairs(table, top_k=DEFAULT_TOP_K, min_raw=DEFAULT_MIN_RAW):
    """Select R: pairs with raw count >= min_raw where either word ranks the
    other among its top_k PMI neighbors. PMI ties break lexicographically.
    """
    if top_k < 1 or min_raw < 1:
        raise ValueError("top_k and min_raw must be >= 1")
    if table.vocab is None:
        raise ValueError("pair selection requires a vocabulary-bearing table")
    words = table.vocab.words
    mask = table.raw >= min_raw
    lo, hi, pmi_lo, pmi_hi = _pmi_all(table)
    lo, hi = lo[mask], hi[mask]
    pmi_lo, pmi_hi = pmi_lo[mask], pmi_hi[mask]

    candidates = {}
    for w, n, p in zip(lo.tolist(), hi.tolist(), pmi_lo.tolist()):
        candidates.setdefault(w, []).append((n, p))
    for w, n, p in zip(hi.tolist(), lo.tolist(), pmi_hi.tolist()):
        candidates.setdefault(w, []).append((n, p))

    n_vocab = table.n_vocab
    selected = {}
    neighbors = {}
    for w in sorted(candidates):
        ranked = sorted(candidates[w], key=lambda t: (-t[1], words[t[0]]))[:top_k]
        neighbors[w] = ranked
        for n, p in ranked:
            a, b = (w, n) if w < n else (n, w)
            key = a * n_vocab + b
            if key not in selected:
                selected[key] = p
    pair_keys = np.array(sorted(selected), np.int64)
    return RelatedPairSet(table.vocab, n_vocab, pair_keys, selected, neighbors)


def save_table(table, path):
    """Binary table format: header + sorted pair records + marginals."""
    with open(path, "wb") as sink:
        sink.write(MAGIC)
        sink.write(struct.pack("<IIQd", VERSION, table.n_vocab, len(table.pair_keys), table.alpha))
        records = np.empty(len(table.pair_keys), _RECORD)
        records["w"] = table.pair_keys // table.n_vocab
        records["v"] = table.pair_keys % table.n_vocab
        records["harmonic"] = table.harmonic
        records["raw"] = table.raw
        sink.write(records.tobytes())
        sink.write(table.marginal_n.astype("<f8").tobytes())


def load_table(path, vocab=None, window=DEFAULT_WINDOW):
    with open(path, "rb") as source:
        magic = source.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"not a co-occurrence table file: {path}")
        version, n_vocab, n_pairs, alpha = struct.unpack("<IIQd", source.read(24))
        if version != VERSION:
            raise ValueError(f"unsupported table version {version}")
        records = np.frombuffer(source.read(n_pairs * _RECORD.itemsize), _RECORD)
        marginal = np.frombuffer(source.read(n_vocab * 8), "<f8").copy()
    pair_keys = records["w"].astype(np.int64) * n_vocab + records["v"].astype(np.int64)
    return CooccurrenceTable(
        n_vocab=n_vocab, window=window, pair_keys=pair_keys,
        harmonic=records["harmonic"].astype(np.float64),
        raw=records["raw"].astype(np.int64),
        marginal_n=marginal, alpha=alpha, vocab=vocab,
    )
