"""Feature families computed over a single sample.

Each function returns an ordered dict mapping feature name to a float, or
to None where the feature is not computable for the sample (missing trees,
too few utterances, ...). Missing values are resolved later by train-fitted
imputation, never here.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from ..corpus.model import ParseTree, Sample
from .lexicons import LexiconSet
from .syllables import count_syllables


class FeatureError(ValueError):
    pass


ADVERB_TAGS = {"RB", "RBR", "RBS"}
PRONOUN_TAGS = {"PRP", "PRP$"}
NOUN_TAGS = {"NN", "NNS", "NNP", "NNPS"}


def _preterminal_tags(trees: list[ParseTree]) -> list[str]:
    tags: list[str] = []

    def walk(node: ParseTree):
        if node.is_preterminal:
            tags.append(node.label)
            return
        for child in node.children:
            walk(child)

    for tree in trees:
        walk(tree)
    return tags


def lexical_features(sample: Sample) -> dict[str, float | None]:
    words = [w for u in sample.utterances for w in u.words]
    if not words:
        raise FeatureError(f"sample {sample.sample_id!r} has no word tokens")

    out: dict[str, float | None] = {
        "mean_syl_per_word": sum(count_syllables(w) for w in words) / len(words),
        "mean_word_length": sum(len(w) for w in words) / len(words),
    }

    trees = sample.all_trees()
    if trees is None:
        out["adverb_ratio"] = None
        out["prp_ratio"] = None
        return out

    tags = _preterminal_tags(trees)
    adverbs = sum(1 for t in tags if t in ADVERB_TAGS)
    pronouns = sum(1 for t in tags if t in PRONOUN_TAGS)
    nouns = sum(1 for t in tags if t in NOUN_TAGS)
    out["adverb_ratio"] = adverbs / len(words)
    out["prp_ratio"] = pronouns / (pronouns + nouns) if pronouns + nouns else None
    return out


@dataclass
class ProductionHistogram:
    counts: dict[tuple[str, tuple[str, ...]], int] = field(default_factory=dict)
    total_constituents: int = 0


def production_histogram(trees: list[ParseTree]) -> ProductionHistogram:
    """Count every internal expansion; preterminal -> word is excluded."""
    if not trees:
        raise FeatureError("no trees to build a production histogram from")
    hist = ProductionHistogram()
    for tree in trees:
        for prod in tree.productions():
            hist.counts[prod] = hist.counts.get(prod, 0) + 1
            hist.total_constituents += 1
    return hist


# Table-anchored production features, always in the registry.
NAMED_PRODUCTIONS: dict[str, tuple[str, tuple[str, ...]]] = {
    "prod_ROOT_to_S": ("ROOT", ("S",)),
    "prod_NP_to_PRP": ("NP", ("PRP",)),
    "prod_ADVP_to_RB": ("ADVP", ("RB",)),
    "prod_S_to_ADVP_NP_VP": ("S", ("ADVP", "NP", "VP")),
    "prod_S_to_CC_NP_VP": ("S", ("CC", "NP", "VP")),
    "prod_S_to_NP_VP": ("S", ("NP", "VP")),
    "prod_VP_to_VBZ_VP": ("VP", ("VBZ", "VP")),
}


def production_name(parent: str, children: tuple[str, ...]) -> str:
    return f"prod_{parent}_to_{'_'.join(children)}"


def parse_production_name(name: str) -> tuple[str, tuple[str, ...]] | None:
    if not name.startswith("prod_") or "_to_" not in name:
        return None
    body = name[len("prod_"):]
    parent, _, rest = body.partition("_to_")
    children = tuple(c for c in rest.split("_") if c)
    if not parent or not children:
        return None
    return parent, children


def count_t_units(trees: list[ParseTree]) -> int:
    """Main clauses plus dependent clauses: ROOT-child S nodes, except that
    S nodes directly conjoined via CC under a ROOT-child S count instead of
    their parent."""
    total = 0
    for tree in trees:
        for child in tree.children:
            if child.is_preterminal or child.label != "S":
                continue
            conjunct_s = [g for g in child.children
                          if not g.is_preterminal and g.label == "S"]
            has_cc = any(g.label == "CC" for g in child.children)
            if has_cc and conjunct_s:
                total += len(conjunct_s)
            else:
                total += 1
    return total


def syntactic_features(sample: Sample,
                       extra_productions: list[str] | None = None
                       ) -> dict[str, float | None]:
    names = ["sentence_count", "t_unit_ratio"] + list(NAMED_PRODUCTIONS)
    if extra_productions:
        names += extra_productions

    trees = sample.all_trees()
    if trees is None:
        return {n: None for n in names}

    words = sum(len(u.words) for u in sample.utterances)
    if words == 0:
        raise FeatureError(f"sample {sample.sample_id!r} has no word tokens")
    hist = production_histogram(trees)
    total = hist.total_constituents

    out: dict[str, float | None] = {
        "sentence_count": float(len(trees)),
        "t_unit_ratio": count_t_units(trees) / words,
    }
    for name in names[2:]:
        prod = NAMED_PRODUCTIONS.get(name) or parse_production_name(name)
        out[name] = hist.counts.get(prod, 0) / total
    return out


def _tf_bag(words: list[str]) -> Counter:
    return Counter(words)


def _cosine_distance(a: Counter, b: Counter) -> float:
    dot = sum(count * b[word] for word, count in a.items())
    norm_a = math.sqrt(sum(c * c for c in a.values()))
    norm_b = math.sqrt(sum(c * c for c in b.values()))
    return 1.0 - dot / (norm_a * norm_b)


def semantic_similarity_features(sample: Sample) -> dict[str, float | None]:
    missing = {"mean_cos_dist": None, "min_cos_dist": None, "cos_cutoff_05": None}
    if len(sample.utterances) < 2:
        return missing
    bags = [_tf_bag(u.words) for u in sample.utterances]
    bags = [b for b in bags if b]      # zero-vector utterances drop out of pairing
    if len(bags) < 2:
        return missing
    distances = [_cosine_distance(bags[i], bags[j])
                 for i in range(len(bags)) for j in range(i + 1, len(bags))]
    n_pairs = len(distances)
    return {
        "mean_cos_dist": sum(distances) / n_pairs,
        "min_cos_dist": min(distances),
        "cos_cutoff_05": sum(1 for d in distances if d < 0.5) / n_pairs,
    }


def readability_features(sample: Sample, fk_plus: bool = False) -> dict[str, float | None]:
    """Reading-ease and grade-level scores over utterances-as-sentences.

    ``fk_plus`` switches the grade-level constant from the standard -15.59
    to +15.59 for compatibility with sources that print the flipped sign.
    """
    sentences = len(sample.utterances)
    words = [w for u in sample.utterances for w in u.words]
    if sentences == 0 or not words:
        raise FeatureError(f"sample {sample.sample_id!r}: readability needs "
                           "at least one sentence and one word")
    syllables = sum(count_syllables(w) for w in words)
    wps = len(words) / sentences
    spw = syllables / len(words)
    constant = 15.59 if fk_plus else -15.59
    return {
        "flesch": 206.835 - 1.015 * wps - 84.6 * spw,
        "flesch_kincaid": 0.39 * wps + 11.8 * spw + constant,
    }


APOSTROPHES = ("'", "’")


def lexicon_features(sample: Sample, lexicons: LexiconSet) -> dict[str, float | None]:
    words = [w for u in sample.utterances for w in u.words]
    if not words:
        raise FeatureError(f"sample {sample.sample_id!r} has no word tokens")
    out: dict[str, float | None] = {
        "apostro": float(sum(t.surface.count(a)
                             for u in sample.utterances for t in u.tokens
                             for a in APOSTROPHES)),
    }
    for category in lexicons.categories:
        out[f"lex_{category}"] = lexicons.match_count(category, words) / len(words)
    return out


def valence_features(sample: Sample, lexicons: LexiconSet) -> dict[str, float | None]:
    """Mean over utterances of the mean negative polarity of matched words."""
    per_utterance = []
    for utt in sample.utterances:
        matched = [lexicons.valence[w] for w in utt.words if w in lexicons.valence]
        if matched:
            per_utterance.append(sum(max(0.0, -v) for v in matched) / len(matched))
        else:
            per_utterance.append(0.0)
    return {"mean_neg_valence": sum(per_utterance) / len(per_utterance)}
