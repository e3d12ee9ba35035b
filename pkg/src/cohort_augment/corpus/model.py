"""Canonical data model: tokens, utterances, parse trees, samples, cohorts."""

from __future__ import annotations

from dataclasses import dataclass, field


class CorpusError(Exception):
    """Malformed transcript, tree, or manifest input."""


@dataclass(frozen=True)
class Token:
    surface: str                  # lowercased at ingestion, never re-normalized
    is_word: bool = True          # False for fillers, event codes, unintelligible markers

    def __post_init__(self):
        if not self.surface:
            raise CorpusError("empty token surface")


@dataclass(frozen=True)
class ParseTree:
    """Constituency node: either internal (children) or preterminal (word).

    Preterminals (POS nodes) carry exactly one terminal word; every other
    node carries at least one child node.
    """

    label: str
    children: tuple["ParseTree", ...] = ()
    word: str | None = None

    def __post_init__(self):
        if self.word is not None and self.children:
            raise CorpusError(f"node {self.label!r} has both children and a terminal")
        if self.word is None and not self.children:
            raise CorpusError(f"node {self.label!r} has neither children nor a terminal")

    @property
    def is_preterminal(self) -> bool:
        return self.word is not None

    def yield_words(self) -> list[str]:
        """Terminal words, left to right."""
        if self.is_preterminal:
            return [self.word]
        out: list[str] = []
        for child in self.children:
            out.extend(child.yield_words())
        return out

    def productions(self) -> list[tuple[str, tuple[str, ...]]]:
        """All internal expansions parent -> child labels, preterminal->word excluded."""
        if self.is_preterminal:
            return []
        out = [(self.label, tuple(c.label for c in self.children))]
        for child in self.children:
            out.extend(child.productions())
        return out

    def to_bracketed(self) -> str:
        if self.is_preterminal:
            return f"({self.label} {self.word})"
        return "(" + self.label + " " + " ".join(c.to_bracketed() for c in self.children) + ")"


@dataclass(frozen=True)
class Utterance:
    tokens: tuple[Token, ...]
    tree: ParseTree | None = None

    def __post_init__(self):
        if not self.tokens:
            raise CorpusError("utterance with no tokens")
        if self.tree is not None:
            words = [t.surface for t in self.tokens if t.is_word]
            if self.tree.yield_words() != words:
                raise CorpusError(
                    f"tree yield {self.tree.yield_words()} does not match word tokens {words}"
                )

    @property
    def words(self) -> list[str]:
        return [t.surface for t in self.tokens if t.is_word]


CONTROL = "Control"
AD = "AD"
DIAGNOSES = (CONTROL, AD)

SOURCE_TAGS = ("DB", "WLS", "T2M", "SYNTH")


@dataclass(frozen=True)
class Sample:
    participant_id: str
    sample_id: str
    utterances: tuple[Utterance, ...]
    diagnosis: str                      # CONTROL or AD
    mmse: int | None = None             # 0..30, required for AD in the trinary task
    source: str = "DB"

    def __post_init__(self):
        if self.diagnosis not in DIAGNOSES:
            raise CorpusError(f"unknown diagnosis {self.diagnosis!r}")
        if self.source not in SOURCE_TAGS:
            raise CorpusError(f"unknown source tag {self.source!r}")
        if self.mmse is not None and not 0 <= self.mmse <= 30:
            raise CorpusError(f"MMSE {self.mmse} outside [0, 30]")

    @property
    def n_words(self) -> int:
        return sum(len(u.words) for u in self.utterances)

    def all_trees(self) -> list[ParseTree] | None:
        """Trees for every utterance, or None if any utterance lacks one."""
        trees = [u.tree for u in self.utterances]
        if any(t is None for t in trees):
            return None
        return trees


@dataclass
class CohortDataset:
    samples: list[Sample] = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    def validate(self):
        seen_ids: set[str] = set()
        diag_by_participant: dict[str, str] = {}
        for s in self.samples:
            if s.sample_id in seen_ids:
                raise CorpusError(f"duplicate sample_id {s.sample_id!r}")
            seen_ids.add(s.sample_id)
            prev = diag_by_participant.get(s.participant_id)
            if prev is not None and prev != s.diagnosis:
                raise CorpusError(
                    f"participant {s.participant_id!r} carries two diagnoses "
                    f"({prev} and {s.diagnosis})"
                )
            diag_by_participant[s.participant_id] = s.diagnosis

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def participant_ids(self) -> list[str]:
        return [s.participant_id for s in self.samples]

    @property
    def diagnoses(self) -> list[str]:
        return [s.diagnosis for s in self.samples]

    def merged_with(self, other: "CohortDataset") -> "CohortDataset":
        """Concatenate two cohorts, re-running the consistency checks."""
        return CohortDataset(self.samples + other.samples)
