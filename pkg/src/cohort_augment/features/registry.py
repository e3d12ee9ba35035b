"""Feature registry: the fixed column order and name resolution.

The named features below are always available. Beyond them, any name of the
form ``prod_<PARENT>_to_<CHILD>_<CHILD>...`` resolves to that production's
ratio, which lets the registry grow automatically to every production
observed in a dataset (``auto_production_names``).
"""

from __future__ import annotations

from ..corpus.model import CohortDataset
from .extractors import (NAMED_PRODUCTIONS, parse_production_name,
                         production_name)
from .lexicons import LexiconSet


class RegistryError(ValueError):
    pass


LEXICAL_NAMES = ["mean_syl_per_word", "mean_word_length", "adverb_ratio", "prp_ratio"]
SYNTACTIC_NAMES = ["sentence_count", "t_unit_ratio"] + list(NAMED_PRODUCTIONS)
SIMILARITY_NAMES = ["mean_cos_dist", "min_cos_dist", "cos_cutoff_05"]
READABILITY_NAMES = ["flesch", "flesch_kincaid"]


def named_features(lexicons: LexiconSet) -> list[str]:
    """The always-present registry, in fixed column order."""
    lexicon_names = ["apostro"] + [f"lex_{c}" for c in lexicons.categories]
    return (LEXICAL_NAMES + SYNTACTIC_NAMES + SIMILARITY_NAMES
            + READABILITY_NAMES + lexicon_names + ["mean_neg_valence"])


def validate_registry(names: list[str], lexicons: LexiconSet) -> None:
    """Raise RegistryError for any name that resolves to no implemented feature."""
    known = set(named_features(lexicons))
    seen = set()
    for name in names:
        if name in seen:
            raise RegistryError(f"duplicate feature name {name!r}")
        seen.add(name)
        if name in known:
            continue
        if parse_production_name(name) is not None:
            continue
        raise RegistryError(f"unknown feature name {name!r}")


def auto_production_names(dataset: CohortDataset) -> list[str]:
    """Names for every production observed in the dataset, minus the named
    ones, in sorted order."""
    observed: set[tuple[str, tuple[str, ...]]] = set()
    for sample in dataset.samples:
        trees = sample.all_trees()
        if trees is None:
            continue
        for tree in trees:
            observed.update(tree.productions())
    named = set(NAMED_PRODUCTIONS.values())
    return [production_name(p, cs) for p, cs in sorted(observed - named)]
