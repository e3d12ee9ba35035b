import numpy as np
import pytest

from cohort_augment.corpus import (Sample, SyntheticSpec, Token, Utterance,
                                   generate_synthetic_cohort, parse_treebank)
from cohort_augment.features import load_demo_lexicons


def make_sample(utterance_words, trees=None, participant_id="p1",
                sample_id="s1", diagnosis="Control", mmse=None):
    """Sample from lists of words, optionally aligned bracketed trees."""
    parsed = [parse_treebank(t)[0] if isinstance(t, str) else t
              for t in trees] if trees else [None] * len(utterance_words)
    utterances = tuple(
        Utterance(tokens=tuple(Token(surface=w) for w in words), tree=tree)
        for words, tree in zip(utterance_words, parsed))
    return Sample(participant_id=participant_id, sample_id=sample_id,
                  utterances=utterances, diagnosis=diagnosis, mmse=mmse)


def sample_from_trees(bracketed, **kwargs):
    """Sample whose utterances are exactly the yields of the given trees."""
    trees = [parse_treebank(t)[0] for t in bracketed]
    words = [t.yield_words() for t in trees]
    return make_sample(words, trees=trees, **kwargs)


@pytest.fixture(scope="session")
def lexicons():
    return load_demo_lexicons()


@pytest.fixture(scope="session")
def small_cohort():
    return generate_synthetic_cohort(
        SyntheticSpec(n_control=30, n_impaired=12, effect=1.0), seed=101)


def blobs(n_per_class=100, centers=((-2.5, 0.0), (2.5, 0.0)), sigma=0.1, seed=0,
          labels=("a", "b")):
    """Well-separated Gaussian blobs, shuffled."""
    rng = np.random.default_rng(seed)
    xs, ys = [], []
    for center, label in zip(centers, labels):
        xs.append(rng.normal(center, sigma, (n_per_class, len(center))))
        ys += [label] * n_per_class
    X = np.vstack(xs)
    y = np.array(ys)
    perm = rng.permutation(len(y))
    return X[perm], y[perm]
