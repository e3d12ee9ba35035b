"""User-supplied lexicons standing in for proprietary dictionaries.

File format (plain text, UTF-8): one category per ``[section]``, one pattern
per line. A trailing ``*`` makes the pattern a prefix wildcard; anything
else matches a word exactly. The reserved section ``[valence]`` holds
``word score`` pairs with scores in [-1, 1]. ``#`` starts a comment.

A small demo lexicon ships with the package (``demo_lexicons_path``); scores
from it will not numerically match LIWC, Receptiviti, or any other licensed
tool. Users holding licenses can point the pipeline at their own files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path


class LexiconError(ValueError):
    pass


@dataclass
class LexiconSet:
    categories: dict[str, list[str]] = field(default_factory=dict)
    valence: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for word, score in self.valence.items():
            if not -1.0 <= score <= 1.0:
                raise LexiconError(f"valence for {word!r} is {score}, outside [-1, 1]")

    def match_count(self, category: str, words: list[str]) -> int:
        """Number of words matching the category's patterns."""
        if category not in self.categories:
            raise LexiconError(f"unknown lexicon category {category!r}")
        patterns = self.categories[category]
        exact = {p for p in patterns if not p.endswith("*")}
        prefixes = [p[:-1] for p in patterns if p.endswith("*")]
        count = 0
        for w in words:
            if w in exact or any(w.startswith(pre) for pre in prefixes):
                count += 1
        return count


def parse_lexicons(text: str) -> LexiconSet:
    categories: dict[str, list[str]] = {}
    valence: dict[str, float] = {}
    section = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if not section:
                raise LexiconError(f"line {line_no}: empty section name")
            if section != "valence" and section in categories:
                raise LexiconError(f"line {line_no}: duplicate category {section!r}")
            if section != "valence":
                categories[section] = []
            continue
        if section is None:
            raise LexiconError(f"line {line_no}: pattern before any [section]")
        if section == "valence":
            parts = line.split()
            if len(parts) != 2:
                raise LexiconError(f"line {line_no}: valence lines are 'word score'")
            try:
                valence[parts[0].lower()] = float(parts[1])
            except ValueError:
                raise LexiconError(f"line {line_no}: bad valence score {parts[1]!r}")
        else:
            if " " in line:
                raise LexiconError(f"line {line_no}: one pattern per line")
            categories[section].append(line.lower())
    return LexiconSet(categories=categories, valence=valence)


def load_lexicons(path: str | Path) -> LexiconSet:
    return parse_lexicons(Path(path).read_text(encoding="utf-8"))


def demo_lexicons_path() -> Path:
    return Path(resources.files("cohort_augment").joinpath("data/demo_lexicons.txt"))


def load_demo_lexicons() -> LexiconSet:
    return load_lexicons(demo_lexicons_path())
