import numpy as np
import pytest

from rwe.corpus import Vocabulary, build_vocabulary
from rwe.embeddings import DenseVectorStore

# the hand-checkable toy corpus used throughout
TOY_CORPUS = [
    "paris is the capital of france",
    "berlin is the capital of germany",
    "paris and berlin are cities",
]


@pytest.fixture
def toy_sentences():
    return [line.split() for line in TOY_CORPUS]


@pytest.fixture
def toy_vocab(toy_sentences):
    return build_vocabulary(iter(toy_sentences), max_size=100, min_count=1)


@pytest.fixture
def toy_store(toy_sentences):
    words = sorted({w for s in toy_sentences for w in s})
    rng = np.random.default_rng(42)
    return DenseVectorStore(words, rng.standard_normal((len(words), 2)))
