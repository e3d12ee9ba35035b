from .chat import ChatParseError, parse_chat, parse_plain
from .manifest import ManifestError, load_manifest
from .model import (AD, CONTROL, CohortDataset, CorpusError, ParseTree,
                    Sample, Token, Utterance)
from .synthetic import SyntheticSpec, generate_synthetic_cohort, sample_to_chat
from .treebank import TreeSyntaxError, format_trees, parse_treebank

__all__ = [
    "AD", "CONTROL", "ChatParseError", "CohortDataset", "CorpusError",
    "ManifestError", "ParseTree", "Sample", "SyntheticSpec", "Token",
    "TreeSyntaxError", "Utterance", "format_trees", "generate_synthetic_cohort",
    "load_manifest", "parse_chat", "parse_plain", "parse_treebank",
    "sample_to_chat",
]
