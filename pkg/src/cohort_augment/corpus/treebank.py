"""Reader for bracketed Penn-Treebank-style constituency trees.

Input is whitespace-insensitive S-expressions, one ``(ROOT ...)`` per
utterance. A top-level tree with an empty label, as emitted by some PTB
exports (``( (S ...))``), is read as ROOT; a labeled non-ROOT top-level
tree is wrapped in a ROOT node so the root-label invariant always holds.
"""

from __future__ import annotations

from .model import CorpusError, ParseTree


class TreeSyntaxError(CorpusError):
    """Bracketing or structure error, carrying the character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at character {position})")
        self.position = position


def _tokenize(text: str):
    """Yield (kind, value, position) with kind in {'(', ')', 'atom'}."""
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            yield c, c, i
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            yield "atom", text[i:j], i
            i = j


def parse_treebank(text: str) -> list[ParseTree]:
    """Parse bracketed tree text into one ParseTree per top-level expression."""
    trees: list[ParseTree] = []
    # Stack of in-progress nodes: [label, children, atoms, open_position]
    stack: list[list] = []
    last_pos = 0
    for kind, value, pos in _tokenize(text):
        last_pos = pos
        if kind == "(":
            stack.append(["", [], [], pos])
        elif kind == ")":
            if not stack:
                raise TreeSyntaxError("unbalanced ')'", pos)
            label, children, atoms, open_pos = stack.pop()
            node = _close_node(label, children, atoms, open_pos)
            if stack:
                stack[-1][1].append(node)
            else:
                trees.append(_normalize_root(node))
        else:
            if not stack:
                raise TreeSyntaxError(f"bare terminal {value!r} outside any node", pos)
            if not stack[-1][0]:
                stack[-1][0] = value
            else:
                stack[-1][2].append(value)
    if stack:
        raise TreeSyntaxError("unbalanced at end of input", len(text))
    return trees


def _close_node(label: str, children: list[ParseTree], atoms: list[str], pos: int) -> ParseTree:
    if children and atoms:
        raise TreeSyntaxError(
            f"node {label!r} mixes terminal words with child nodes; every leaf "
            "must be enclosed in a preterminal", pos)
    if atoms:
        if len(atoms) > 1:
            raise TreeSyntaxError(
                f"preterminal {label!r} has {len(atoms)} terminals; expected one", pos)
        if not label:
            raise TreeSyntaxError("terminal without a preterminal label", pos)
        return ParseTree(label=label, word=atoms[0])
    if not children:
        raise TreeSyntaxError(f"empty node {label!r}", pos)
    if not label:
        # PTB-style unlabeled top node
        label = "ROOT"
    return ParseTree(label=label, children=tuple(children))


def _normalize_root(node: ParseTree) -> ParseTree:
    if node.label == "ROOT":
        return node
    if node.is_preterminal:
        raise TreeSyntaxError(f"top-level preterminal {node.label!r}", 0)
    return ParseTree(label="ROOT", children=(node,))


def format_trees(trees: list[ParseTree]) -> str:
    """Serialize trees back to bracketed text, one per line."""
    return "\n".join(t.to_bracketed() for t in trees) + "\n"
