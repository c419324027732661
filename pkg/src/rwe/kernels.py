"""Hot counting kernels with numba acceleration and a numpy fallback.

Both backends count integer events keyed by ``(pair, distance)`` so the
results are bit-identical regardless of backend, sharding, or merge order;
harmonic weights are applied once at table-finalization time.

Backend selection: ``RWE_NUMBA=0`` forces the numpy path, ``RWE_NUMBA=1``
requires numba (import error otherwise); unset means "numba if available".
Keys are ``(lo * n_vocab + hi) * window + (distance - 1)`` packed in int64.
"""

import os

import numpy as np

_env = os.environ.get("RWE_NUMBA", "").strip()
if _env == "0":
    HAS_NUMBA = False
else:
    try:
        import numba
        from numba import njit
        from numba.typed import Dict as NumbaDict

        HAS_NUMBA = True
    except ImportError:
        if _env == "1":
            raise
        HAS_NUMBA = False


def active_backend():
    return "numba" if HAS_NUMBA else "numpy"


def _count_pair_events_numpy(ids, offsets, window, n_vocab):
    """Vectorized per-distance pass over the concatenated id array."""
    n = len(ids)
    window = int(window)
    n_vocab = int(n_vocab)
    sent = np.repeat(np.arange(len(offsets) - 1, dtype=np.int64), np.diff(offsets))
    chunks = []
    for dist in range(1, window + 1):
        if n <= dist:
            break
        a = ids[:-dist].astype(np.int64)
        b = ids[dist:].astype(np.int64)
        mask = (a >= 0) & (b >= 0) & (a != b) & (sent[:-dist] == sent[dist:])
        lo = np.minimum(a[mask], b[mask])
        hi = np.maximum(a[mask], b[mask])
        chunks.append((lo * n_vocab + hi) * window + (dist - 1))
    if not chunks:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    keys, counts = np.unique(np.concatenate(chunks), return_counts=True)
    return keys, counts.astype(np.int64)


if HAS_NUMBA:

    @njit(cache=True)
    def _count_pair_events_jit(ids, offsets, window, n_vocab):
        # emit one raw key per qualifying position pair; the caller reduces
        # with np.unique, which beats a hash table for this workload
        events = np.empty(len(ids) * window, np.int64)
        n = 0
        for s in range(len(offsets) - 1):
            start, end = offsets[s], offsets[s + 1]
            for i in range(start, end):
                wi = ids[i]
                if wi < 0:
                    continue
                stop = min(end, i + window + 1)
                for j in range(i + 1, stop):
                    wj = ids[j]
                    if wj < 0 or wj == wi:
                        continue
                    lo, hi = (wi, wj) if wi < wj else (wj, wi)
                    events[n] = (lo * n_vocab + hi) * window + (j - i - 1)
                    n += 1
        return events[:n]

    @njit(cache=True)
    def _count_middles_jit(vocab_ids, middle_ids, offsets, window, pair_keys, n_vocab, n_middle):
        counts = NumbaDict.empty(numba.int64, numba.int64)
        for s in range(len(offsets) - 1):
            start, end = offsets[s], offsets[s + 1]
            for i in range(start, end):
                wi = vocab_ids[i]
                if wi < 0:
                    continue
                stop = min(end, i + window + 1)
                for j in range(i + 2, stop):  # j == i+1 has no middle
                    wj = vocab_ids[j]
                    if wj < 0 or wj == wi:
                        continue
                    lo, hi = (wi, wj) if wi < wj else (wj, wi)
                    pkey = lo * n_vocab + hi
                    pos = np.searchsorted(pair_keys, pkey)
                    if pos >= len(pair_keys) or pair_keys[pos] != pkey:
                        continue
                    for m in range(i + 1, j):
                        # a middle token equal to either pair word is skipped
                        if vocab_ids[m] == wi or vocab_ids[m] == wj:
                            continue
                        mid = middle_ids[m]
                        key = pkey * n_middle + mid
                        counts[key] = counts.get(key, 0) + 1
        out_k = np.empty(len(counts), np.int64)
        out_c = np.empty(len(counts), np.int64)
        idx = 0
        for key, cnt in counts.items():
            out_k[idx] = key
            out_c[idx] = cnt
            idx += 1
        return out_k, out_c


def _count_middles_numpy(vocab_ids, middle_ids, offsets, window, pair_keys, n_vocab, n_middle):
    counts = {}
    for s in range(len(offsets) - 1):
        start, end = int(offsets[s]), int(offsets[s + 1])
        for i in range(start, end):
            wi = vocab_ids[i]
            if wi < 0:
                continue
            stop = min(end, i + window + 1)
            for j in range(i + 2, stop):
                wj = vocab_ids[j]
                if wj < 0 or wj == wi:
                    continue
                lo, hi = (wi, wj) if wi < wj else (wj, wi)
                pkey = int(lo) * n_vocab + int(hi)
                pos = np.searchsorted(pair_keys, pkey)
                if pos >= len(pair_keys) or pair_keys[pos] != pkey:
                    continue
                for m in range(i + 1, j):
                    if vocab_ids[m] == wi or vocab_ids[m] == wj:
                        continue
                    key = pkey * n_middle + int(middle_ids[m])
                    counts[key] = counts.get(key, 0) + 1
    keys = np.fromiter(counts.keys(), np.int64, len(counts))
    vals = np.fromiter(counts.values(), np.int64, len(counts))
    return keys, vals


def count_pair_events(ids, offsets, window, n_vocab):
    """Count qualifying position pairs per (unordered pair, distance).

    Returns sorted ``(keys, counts)`` int64 arrays. ``ids`` holds vocab ids
    with -1 for out-of-vocabulary tokens; ``offsets`` delimits sentences.
    """
    ids = np.ascontiguousarray(ids, np.int64)
    offsets = np.ascontiguousarray(offsets, np.int64)
    if HAS_NUMBA:
        events = _count_pair_events_jit(ids, offsets, np.int64(window), np.int64(n_vocab))
        keys, counts = np.unique(events, return_counts=True)
        return keys, counts.astype(np.int64)
    return _count_pair_events_numpy(ids, offsets, window, n_vocab)


def count_middle_events(vocab_ids, middle_ids, offsets, window, pair_keys, n_vocab, n_middle):
    """Count middle-token occurrences for selected pairs.

    ``pair_keys`` is a sorted int64 array of ``lo * n_vocab + hi`` keys for
    the pair set of interest; ``middle_ids`` indexes tokens in the middle
    lexicon (every corpus token type). Returns sorted (keys, counts) with
    keys ``pair_key * n_middle + middle_id``.
    """
    vocab_ids = np.ascontiguousarray(vocab_ids, np.int64)
    middle_ids = np.ascontiguousarray(middle_ids, np.int64)
    offsets = np.ascontiguousarray(offsets, np.int64)
    pair_keys = np.ascontiguousarray(pair_keys, np.int64)
    fn = _count_middles_jit if HAS_NUMBA else _count_middles_numpy
    keys, counts = fn(
        vocab_ids, middle_ids, offsets, np.int64(window), pair_keys,
        np.int64(n_vocab), np.int64(n_middle),
    )
    order = np.argsort(keys, kind="stable")
    return keys[order], counts[order]


def merge_event_arrays(parts):
    """Merge per-shard sorted (keys, counts) arrays by key-wise addition."""
    parts = [p for p in parts if len(p[0])]
    if not parts:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    keys = np.concatenate([p[0] for p in parts])
    counts = np.concatenate([p[1] for p in parts])
    uniq, inverse = np.unique(keys, return_inverse=True)
    merged = np.zeros(len(uniq), np.int64)
    np.add.at(merged, inverse, counts)
    return uniq, merged
