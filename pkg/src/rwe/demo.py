"""Deterministic synthetic demo fixture: corpus, toy vectors, pair dataset.

The corpus mixes four templated relation families (capital-of, hypernym,
eats, color-of) with Zipf-weighted filler sentences, sized to roughly 1 MB.
Every generated artifact is a pure function of the seed.
"""

import numpy as np

from .embeddings import DenseVectorStore, save_text_embeddings
from .evaluation import LabeledPairDataset

N_CITIES = 50
N_BEASTS = 50
N_GROUPS = 10
N_ITEMS = 50
N_HUES = 12
N_FOODS = 50
N_FILLER = 1200
REPEATS = 6

_CAPITAL_TEMPLATES = [
    "{c} is the capital of {n}",
    "today {c} is the capital of {n} again",
    "reportedly {c} is the capital of {n}",
]
_HYPERNYM_TEMPLATES = [
    "the {b} is a kind of {g}",
    "clearly the {b} is a kind of {g} too",
]
_EATS_TEMPLATES = [
    "the {b} often eats fresh {f}",
    "a {b} often eats fresh {f} daily",
]
_COLOR_TEMPLATES = [
    "the {i} is usually colored {h}",
    "every {i} is usually colored {h} here",
]


def _entities():
    cities = [f"city{i:02d}" for i in range(N_CITIES)]
    nations = [f"nation{i:02d}" for i in range(N_CITIES)]
    beasts = [f"beast{i:02d}" for i in range(N_BEASTS)]
    groups = [f"group{i:02d}" for i in range(N_GROUPS)]
    items = [f"item{i:02d}" for i in range(N_ITEMS)]
    hues = [f"hue{i:02d}" for i in range(N_HUES)]
    foods = [f"food{i:02d}" for i in range(N_FOODS)]
    return cities, nations, beasts, groups, items, hues, foods


def relation_pairs():
    """The 200 labeled pairs implied by the templates."""
    cities, nations, beasts, groups, items, hues, foods = _entities()
    records = []
    for i in range(N_CITIES):
        records.append((cities[i], nations[i], "capital-of"))
    for i in range(N_BEASTS):
        records.append((beasts[i], groups[i % N_GROUPS], "hypernym"))
    for i in range(N_BEASTS):
        records.append((beasts[i], foods[i], "eats"))
    for i in range(N_ITEMS):
        records.append((items[i], hues[i % N_HUES], "color-of"))
    return records


def generate_corpus_lines(seed=7):
    """All corpus sentences (relational plus filler), shuffled by seed."""
    rng = np.random.default_rng(seed)
    cities, nations, beasts, groups, items, hues, foods = _entities()
    lines = []
    for rep in range(REPEATS):
        for i in range(N_CITIES):
            t = _CAPITAL_TEMPLATES[rep % len(_CAPITAL_TEMPLATES)]
            lines.append(t.format(c=cities[i], n=nations[i]))
        for i in range(N_BEASTS):
            t = _HYPERNYM_TEMPLATES[rep % len(_HYPERNYM_TEMPLATES)]
            lines.append(t.format(b=beasts[i], g=groups[i % N_GROUPS]))
        for i in range(N_BEASTS):
            t = _EATS_TEMPLATES[rep % len(_EATS_TEMPLATES)]
            lines.append(t.format(b=beasts[i], f=foods[i]))
        for i in range(N_ITEMS):
            t = _COLOR_TEMPLATES[rep % len(_COLOR_TEMPLATES)]
            lines.append(t.format(i=items[i], h=hues[i % N_HUES]))
    filler = [f"filler{i:04d}" for i in range(N_FILLER)]
    weights = 1.0 / np.arange(1, N_FILLER + 1)
    weights /= weights.sum()
    for _ in range(6000):
        length = int(rng.integers(8, 19))
        idx = rng.choice(N_FILLER, size=length, p=weights)
        lines.append(" ".join(filler[i] for i in idx))
    order = rng.permutation(len(lines))
    return [lines[i] for i in order]


def write_demo_corpus(path, seed=7):
    lines = generate_corpus_lines(seed)
    with open(path, "w", encoding="utf-8") as sink:
        for line in lines:
            print(line, file=sink)
    return len(lines)


def write_demo_vectors(corpus_path, out_path, dim=16, seed=7):
    """Random unit-scale vectors for every token type in the corpus."""
    rng = np.random.default_rng(seed + 1)
    words = set()
    with open(corpus_path, encoding="utf-8") as source:
        for line in source:
            words.update(line.split())
    words = sorted(words)
    matrix = rng.standard_normal((len(words), dim)) / np.sqrt(dim)
    save_text_embeddings(DenseVectorStore(words, matrix), out_path)
    return len(words)


def write_demo_pair_dataset(path):
    LabeledPairDataset(relation_pairs()).save(path)
    return len(relation_pairs())
