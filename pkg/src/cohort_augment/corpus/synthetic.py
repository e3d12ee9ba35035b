"""Synthetic picture-description cohorts with controllable planted effects.

Samples are drawn from template utterance grammars (bracketed trees with
vocabulary slots). The impaired group differs from controls along three
planted axes, each scaled by ``effect`` in [0, 1]:

  - shorter utterances (short templates chosen more often),
  - higher pronoun ratio (the short templates carry pronoun subjects),
  - higher inter-utterance similarity (vocabulary restricted to a small
    slice, so word bags repeat).

At ``effect=0`` both groups share one generative process, so every feature
is distributed identically across groups. Generation is a pure function of
(spec, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CohortDataset, Sample, Token, Utterance
from .treebank import parse_treebank

NOUNS = ["boy", "girl", "mother", "woman", "sink", "water", "cookie", "jar",
         "stool", "curtain", "window", "dish", "plate", "cup", "towel",
         "kitchen", "floor", "counter", "cabinet", "garden"]
VERBS_Z = ["falls", "runs", "spills", "reaches", "stands", "smiles", "looks",
           "dries", "washes", "laughs"]
VERBS_ING = ["stealing", "washing", "drying", "reaching", "falling",
             "looking", "running", "taking", "holding", "spilling"]
ADVERBS = ["evidently", "quietly", "really", "slowly", "clearly", "certainly"]
PRONOUNS = ["he", "she", "it", "they"]
PREPOSITIONS = ["in", "on", "near", "by", "under"]

# Long, noun-subject templates (control-flavored).
LONG_TEMPLATES = [
    "(ROOT (S (NP (DT the) (NN {n1})) (VP (VBZ {vz}) (NP (DT the) (NN {n2}))"
    " (PP (IN {prep}) (NP (DT the) (NN {n3}))))))",
    "(ROOT (S (NP (DT the) (NN {n1})) (VP (VBZ is) (VP (VBG {ving})"
    " (NP (DT the) (NN {n2}))))))",
    "(ROOT (S (ADVP (RB {adv})) (NP (DT the) (NN {n1})) (VP (VBZ {vz})"
    " (NP (DT the) (NN {n2})))))",
    "(ROOT (S (CC and) (NP (DT the) (NN {n1})) (VP (VBZ {vz}) (PP (IN {prep})"
    " (NP (DT the) (NN {n2}))))))",
    "(ROOT (S (S (NP (DT the) (NN {n1})) (VP (VBZ {vz}))) (CC and)"
    " (S (NP (DT the) (NN {n2})) (VP (VBZ {vz2})))))",
]

# Short, pronoun-heavy templates (impaired-flavored).
SHORT_TEMPLATES = [
    "(ROOT (S (NP (PRP {prp})) (VP (VBZ {vz}))))",
    "(ROOT (S (NP (PRP {prp})) (VP (VBZ {vz}) (NP (PRP it)))))",
    "(ROOT (S (NP (DT the) (NN {n1})) (VP (VBZ {vz}))))",
    "(ROOT (S (NP (PRP {prp})) (VP (VBZ {vz}) (NP (DT the) (NN {n1})))))",
]

BASE_SHORT_PROB = 0.25      # shared by both groups at effect 0
MAX_EXTRA_SHORT = 0.65      # impaired short-template boost at effect 1
MIN_VOCAB = 4               # impaired vocabulary floor at effect 1
FILLER_PROB = 0.15          # "&uh" openers, identical for both groups


@dataclass(frozen=True)
class SyntheticSpec:
    n_control: int
    n_impaired: int
    effect: float                 # 0 = null, 1 = large planted effect
    utterances_min: int = 8
    utterances_max: int = 14
    repeat_rate: float = 0.3      # chance a participant contributes two samples

    def __post_init__(self):
        if self.n_control < 1 or self.n_impaired < 1:
            raise ValueError("group sizes must be >= 1")
        if not np.isfinite(self.effect):
            raise ValueError("effect size must be finite")
        if self.utterances_min < 1 or self.utterances_max < self.utterances_min:
            raise ValueError("bad utterance count range")


def generate_synthetic_cohort(spec: SyntheticSpec, seed: int) -> CohortDataset:
    rng = np.random.default_rng(seed)
    samples: list[Sample] = []
    samples.extend(_generate_group(spec, rng, impaired=False))
    samples.extend(_generate_group(spec, rng, impaired=True))
    return CohortDataset(samples)


def _generate_group(spec: SyntheticSpec, rng: np.random.Generator,
                    impaired: bool) -> list[Sample]:
    effect = float(np.clip(spec.effect, 0.0, 1.0))
    n_target = spec.n_impaired if impaired else spec.n_control
    tag = "i" if impaired else "c"
    if impaired:
        p_short = BASE_SHORT_PROB + MAX_EXTRA_SHORT * effect
        vocab_frac = 1.0 - 0.85 * effect
    else:
        p_short = BASE_SHORT_PROB
        vocab_frac = 1.0

    nouns = _slice(NOUNS, vocab_frac)
    verbs_z = _slice(VERBS_Z, vocab_frac)
    verbs_ing = _slice(VERBS_ING, vocab_frac)

    samples = []
    pid_counter = 0
    while len(samples) < n_target:
        pid_counter += 1
        pid = f"synth-{tag}{pid_counter:04d}"
        n_for_participant = 1
        if rng.random() < spec.repeat_rate and len(samples) + 2 <= n_target:
            n_for_participant = 2
        lo, hi = (4, 24) if impaired else (26, 30)
        mmse = int(rng.integers(lo, hi + 1))
        for visit in range(n_for_participant):
            n_utt = int(rng.integers(spec.utterances_min, spec.utterances_max + 1))
            utterances = tuple(
                _make_utterance(rng, p_short, nouns, verbs_z, verbs_ing)
                for _ in range(n_utt))
            visit_mmse = int(np.clip(mmse + visit * rng.integers(-1, 2), lo, hi))
            samples.append(Sample(
                participant_id=pid,
                sample_id=f"{pid}-s{visit + 1}",
                utterances=utterances,
                diagnosis="AD" if impaired else "Control",
                mmse=visit_mmse,
                source="SYNTH"))
    return samples


def _slice(pool: list[str], frac: float) -> list[str]:
    k = max(MIN_VOCAB, int(round(len(pool) * frac)))
    return pool[:min(k, len(pool))]


def _make_utterance(rng: np.random.Generator, p_short: float,
                    nouns: list[str], verbs_z: list[str],
                    verbs_ing: list[str]) -> Utterance:
    if rng.random() < p_short:
        template = SHORT_TEMPLATES[int(rng.integers(len(SHORT_TEMPLATES)))]
    else:
        template = LONG_TEMPLATES[int(rng.integers(len(LONG_TEMPLATES)))]
    pick = lambda pool: pool[int(rng.integers(len(pool)))]
    n1 = pick(nouns)
    filled = template.format(
        n1=n1,
        n2=pick(nouns),
        n3=pick(nouns),
        vz=pick(verbs_z),
        vz2=pick(verbs_z),
        ving=pick(verbs_ing),
        adv=pick(ADVERBS),
        prp=pick(PRONOUNS),
        prep=pick(PREPOSITIONS),
    )
    tree = parse_treebank(filled)[0]
    tokens = [Token(surface=w, is_word=True) for w in tree.yield_words()]
    if rng.random() < FILLER_PROB:
        tokens.insert(0, Token(surface="&uh", is_word=False))
    return Utterance(tokens=tuple(tokens), tree=tree)


def sample_to_chat(sample: Sample) -> str:
    """Serialize a sample to the supported CHAT subset."""
    lines = ["@Begin", "@Languages:\teng", "@Participants:\tPAR Participant"]
    for utt in sample.utterances:
        lines.append("*PAR:\t" + " ".join(t.surface for t in utt.tokens) + " .")
    lines.append("@End")
    return "\n".join(lines) + "\n"
