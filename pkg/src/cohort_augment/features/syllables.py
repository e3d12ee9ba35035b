"""Heuristic syllable counting for readability and lexical features."""

from __future__ import annotations

import logging

logger = logging.getLogger(__name__)

_VOWELS = set("aeiouy")


def count_syllables(word: str) -> int:
    """Count syllables as maximal vowel groups (a, e, i, o, u, y).

    A trailing silent 'e' (an 'e' that forms its own final vowel group) is
    not counted unless removing it would leave zero. Words with no letters
    after normalization count as one syllable and are logged.
    """
    letters = "".join(ch for ch in word.lower() if ch.isalpha())
    if not letters:
        logger.debug("non-alphabetic word %r counted as 1 syllable", word)
        return 1

    groups = 0
    last_group_start = -1
    in_group = False
    for i, ch in enumerate(letters):
        if ch in _VOWELS:
            if not in_group:
                groups += 1
                last_group_start = i
                in_group = True
        else:
            in_group = False

    if groups == 0:
        return 1
    # silent final e: the last character is 'e' and it begins its own group
    if letters[-1] == "e" and last_group_start == len(letters) - 1 and groups > 1:
        groups -= 1
    return groups
