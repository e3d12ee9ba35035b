"""Parser for a documented subset of the CHAT transcript format.

Supported lines:
  ``@...``          header / trailer lines, ignored
  ``*PAR:`` tiers   participant speech, kept
  ``*INV:`` (or any other ``*XXX:`` speaker) non-participant speech, dropped
  ``%...`` tiers    dependent annotation tiers, ignored
  tab-indented continuation lines of the current tier

Within a participant tier:
  - ``&``-prefixed codes (fillers like ``&uh``, events like ``&=laughs``)
    become non-word tokens;
  - ``[...]`` event/error codes (possibly spanning several space-separated
    atoms) become one non-word token each;
  - ``xxx``/``yyy``/``www`` unintelligible markers become non-word tokens;
  - terminator punctuation (``.``, ``?``, ``!``, ``+...`` codes) closes an
    utterance and is not kept as a token;
  - everything else is a word: lowercased once, with CHAT shortening
    parentheses and retracing angle brackets stripped. Apostrophes are kept
    (they feed the apostrophe-count feature downstream).

Plain ``.txt`` transcripts (one utterance per line, no tiers) are handled by
:func:`parse_plain`.
"""

from __future__ import annotations

import re

from .model import CorpusError, Sample, Token, Utterance


class ChatParseError(CorpusError):
    """Raised with a 1-based line number for malformed transcript input."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


_TIER_RE = re.compile(r"^\*([A-Za-z0-9]+):\s*(.*)$")
_UNINTELLIGIBLE = {"xxx", "yyy", "www"}
# Terminators: plain sentence punctuation or CHAT +-codes such as +... +//. +!?
_TERMINATOR_RE = re.compile(r"^(\.|\?|!|\+[./!?\"+]*)$")


def parse_chat(text: str, participant_id: str = "", sample_id: str = "",
               diagnosis: str = "Control", mmse: int | None = None,
               source: str = "DB") -> Sample:
    """Parse CHAT text into a Sample holding only ``*PAR:`` utterances."""
    par_chunks: list[tuple[str, int]] = []  # (tier content, line number)
    current_speaker = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            current_speaker = None
            continue
        if line.startswith("@"):
            current_speaker = None
            continue
        if line.startswith("%"):
            current_speaker = "%"
            continue
        if line.startswith("*"):
            m = _TIER_RE.match(line)
            if m is None:
                raise ChatParseError(f"malformed speaker tier {line.split()[0]!r}", line_no)
            current_speaker = m.group(1).upper()
            if current_speaker == "PAR":
                par_chunks.append((m.group(2), line_no))
            continue
        if line.startswith("\t") or line.startswith(" "):
            # continuation of the current tier
            if current_speaker == "PAR":
                par_chunks.append((line.strip(), line_no))
            continue
        raise ChatParseError(f"unrecognized line prefix {line.split()[0]!r}", line_no)

    utterances: list[Utterance] = []
    pending: list[Token] = []
    for chunk, line_no in par_chunks:
        for token in _chunk_tokens(chunk, line_no):
            if token is _BOUNDARY:
                if pending:
                    utterances.append(Utterance(tokens=tuple(pending)))
                    pending = []
            else:
                pending.append(token)
    if pending:
        utterances.append(Utterance(tokens=tuple(pending)))

    if not utterances:
        raise CorpusError(f"transcript {sample_id or '<unnamed>'} has no participant content")
    return Sample(participant_id=participant_id, sample_id=sample_id,
                  utterances=tuple(utterances), diagnosis=diagnosis,
                  mmse=mmse, source=source)


# Sentinel separating utterances inside a tier.
_BOUNDARY = object()


def _chunk_tokens(chunk: str, line_no: int):
    """Yield Tokens and _BOUNDARY markers for one tier chunk."""
    atoms = chunk.split()
    i = 0
    while i < len(atoms):
        atom = atoms[i]
        if atom.startswith("["):
            # collect through the matching close bracket
            group = [atom]
            while not group[-1].endswith("]"):
                i += 1
                if i >= len(atoms):
                    raise ChatParseError(f"unclosed event code starting {atom!r}", line_no)
                group.append(atoms[i])
            yield Token(surface=" ".join(group).lower(), is_word=False)
            i += 1
            continue
        i += 1
        if _TERMINATOR_RE.match(atom):
            yield _BOUNDARY
            continue
        if atom.startswith("&"):
            yield Token(surface=atom.lower(), is_word=False)
            continue
        word = _normalize_word(atom)
        if word is None:
            continue
        if word in _UNINTELLIGIBLE:
            yield Token(surface=word, is_word=False)
        else:
            yield Token(surface=word, is_word=True)


def _normalize_word(atom: str) -> str | None:
    """Lowercase and strip CHAT in-word markup; None for pure punctuation."""
    word = atom.lower()
    word = re.sub(r"[()<>]", "", word)       # (be)cause, <retraced spans>
    word = word.strip(",;:\"")
    if not word or not any(ch.isalnum() for ch in word):
        return None
    return word


def parse_plain(text: str, participant_id: str = "", sample_id: str = "",
                diagnosis: str = "Control", mmse: int | None = None,
                source: str = "DB") -> Sample:
    """Parse a plain transcript: one utterance per non-empty line."""
    utterances = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        tokens = [tok for tok in _chunk_tokens(line.strip(), line_no)
                  if tok is not _BOUNDARY]
        if tokens:
            utterances.append(Utterance(tokens=tuple(tokens)))
    if not utterances:
        raise CorpusError(f"transcript {sample_id or '<unnamed>'} has no content")
    return Sample(participant_id=participant_id, sample_id=sample_id,
                  utterances=tuple(utterances), diagnosis=diagnosis,
                  mmse=mmse, source=source)
