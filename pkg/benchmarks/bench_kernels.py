"""Benchmark the counting kernels: numba JIT path vs pure-numpy fallback.

Generates a synthetic corpus in memory, runs pair-event counting under both
backends, verifies the outputs are bit-identical, and reports wall times.

Usage:
    python benchmarks/bench_kernels.py [--sentences N] [--vocab V] [--window W]
"""

import argparse
import time

import numpy as np

from rwe import kernels


def make_corpus(rng, n_sentences, vocab_size):
    ids, offsets = [], [0]
    # Zipf-ish token frequencies, like real text
    weights = 1.0 / np.arange(1, vocab_size + 1)
    weights /= weights.sum()
    for _ in range(n_sentences):
        length = int(rng.integers(5, 25))
        ids.extend(int(x) for x in rng.choice(vocab_size, length, p=weights))
        offsets.append(len(ids))
    return np.array(ids, np.int64), np.array(offsets, np.int64)


def run_backend(use_numba, ids, offsets, window, vocab_size, repeats):
    kernels.HAS_NUMBA = use_numba
    # warm-up run (pays JIT compilation for the numba path)
    kernels.count_pair_events(ids, offsets, window, vocab_size)
    best = np.inf
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = kernels.count_pair_events(ids, offsets, window, vocab_size)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sentences", type=int, default=20_000)
    parser.add_argument("--vocab", type=int, default=5_000)
    parser.add_argument("--window", type=int, default=10)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    ids, offsets = make_corpus(rng, args.sentences, args.vocab)
    print(f"corpus: {len(ids):,} tokens, {args.sentences:,} sentences, "
          f"vocab {args.vocab:,}, window {args.window}")

    had_numba = kernels.HAS_NUMBA
    try:
        t_np, r_np = run_backend(False, ids, offsets, args.window, args.vocab,
                                 args.repeats)
        print(f"numpy : {t_np:8.3f}s  ({len(ids) / t_np / 1e6:.2f} Mtok/s)")
        if had_numba:
            t_nb, r_nb = run_backend(True, ids, offsets, args.window, args.vocab,
                                     args.repeats)
            print(f"numba : {t_nb:8.3f}s  ({len(ids) / t_nb / 1e6:.2f} Mtok/s)")
            print(f"speedup: {t_np / t_nb:.1f}x")
            same = (np.array_equal(r_np[0], r_nb[0])
                    and np.array_equal(r_np[1], r_nb[1]))
            print(f"bit-identical outputs: {same}")
            if not same:
                raise SystemExit("backend outputs differ")
        else:
            print("numba not available; skipped the JIT path")
    finally:
        kernels.HAS_NUMBA = had_numba


if __name__ == "__main__":
    main()
