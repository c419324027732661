"""Corpus streaming and vocabulary construction.

The corpus contract is deliberately minimal: UTF-8 text, one pre-tokenized
sentence per line, tokens separated by whitespace. Sentence splitting and
phrase merging belong to external preprocessing.
"""

import collections
import os
from dataclasses import dataclass, field

from .errors import CorpusDecodeError, EmptyVocabularyError

# Tokens longer than this are considered corpus corruption and skipped.
MAX_TOKEN_BYTES = 256

Sentence = list  # list[str]; positions are 0-based indices


@dataclass
class StreamStats:
    sentences: int = 0
    tokens: int = 0
    long_tokens_skipped: int = 0


def stream_sentences(source, lowercase=False, stats=None):
    """Yield one token list per non-empty line of ``source``.

    ``source`` is a path or a binary file object. Peak memory is constant in
    the corpus size. Invalid UTF-8 raises :class:`CorpusDecodeError` with the
    absolute byte offset of the offending byte.
    """
    if stats is None:
        stats = StreamStats()
    own = False
    if isinstance(source, (str, os.PathLike)):
        source = open(source, "rb")
        own = True
    try:
        offset = 0
        for raw in source:
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise CorpusDecodeError(offset + exc.start) from exc
            offset += len(raw)
            if lowercase:
                line = line.lower()
            tokens = line.split()
            if not tokens:
                continue
            kept = [t for t in tokens if len(t.encode("utf-8")) <= MAX_TOKEN_BYTES]
            stats.long_tokens_skipped += len(tokens) - len(kept)
            if not kept:
                continue
            stats.sentences += 1
            stats.tokens += len(kept)
            yield kept
    finally:
        if own:
            source.close()


@dataclass
class Vocabulary:
    """Word <-> dense id map with corpus frequencies.

    Ids are dense in [0, len); id 0 is the most frequent word, frequency
    ties broken lexicographically ascending.
    """

    words: list
    counts: list
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            self._index = {w: i for i, w in enumerate(self.words)}

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self._index

    def id_of(self, word):
        return self._index[word]

    def get_id(self, word, default=-1):
        return self._index.get(word, default)

    def count_of(self, word):
        return self.counts[self._index[word]]

    def save(self, path):
        with open(path, "w", encoding="utf-8") as sink:
            for word, count in zip(self.words, self.counts):
                print(f"{word}\t{count}", file=sink)

    @classmethod
    def load(cls, path):
        words, counts = [], []
        with open(path, encoding="utf-8") as source:
            for line in source:
                word, _, count = line.rstrip("\n").partition("\t")
                words.append(word)
                counts.append(int(count))
        if not words:
            raise EmptyVocabularyError(f"empty vocabulary file: {path}")
        return cls(words, counts)


def count_tokens(sentences):
    """Tally token frequencies over a sentence stream."""
    freqs = collections.Counter()
    for sentence in sentences:
        freqs.update(sentence)
    return freqs


def build_vocabulary(sentences, max_size=100_000, min_count=1):
    """Build the working vocabulary from a sentence stream.

    Keeps the ``max_size`` most frequent tokens with count >= ``min_count``.
    Determinism: ties in frequency are broken lexicographically ascending.
    """
    if max_size < 1 or min_count < 1:
        raise ValueError("max_size and min_count must be >= 1")
    freqs = count_tokens(sentences)
    if not freqs:
        raise EmptyVocabularyError("corpus contains no tokens")
    ranked = sorted(
        (item for item in freqs.items() if item[1] >= min_count),
        key=lambda item: (-item[1], item[0]),
    )[:max_size]
    if not ranked:
        raise EmptyVocabularyError(f"no token reaches min_count={min_count}")
    words = [w for w, _ in ranked]
    counts = [c for _, c in ranked]
    return Vocabulary(words, counts)


def build_vocabulary_sharded(path, max_size=100_000, min_count=1, lowercase=False, n_shards=1):
    """Shard the corpus by line ranges, count per shard, merge by addition.

    The merged result is identical to the single-pass output because counter
    addition is order-independent on integers.
    """
    if n_shards <= 1:
        return build_vocabulary(stream_sentences(path, lowercase=lowercase), max_size, min_count)
    with open(path, "rb") as f:
        lines = f.readlines()
    chunk = (len(lines) + n_shards - 1) // n_shards
    total = collections.Counter()
    for s in range(n_shards):
        part = lines[s * chunk : (s + 1) * chunk]
        total.update(count_tokens(stream_sentences(iter(part), lowercase=lowercase)))
    if not total:
        raise EmptyVocabularyError("corpus contains no tokens")
    ranked = sorted(
        (item for item in total.items() if item[1] >= min_count),
        key=lambda item: (-item[1], item[0]),
    )[:max_size]
    if not ranked:
        raise EmptyVocabularyError(f"no token reaches min_count={min_count}")
    return Vocabulary([w for w, _ in ranked], [c for _, c in ranked])
