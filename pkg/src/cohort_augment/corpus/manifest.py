"""Dataset manifests: a JSON document listing sample records.

Schema::

    {
      "samples": [
        {
          "transcript": "relative/or/absolute.cha",   # .cha or .txt
          "trees": "relative/or/absolute.trees",       # optional, bracketed
          "participant_id": "p001",
          "sample_id": "p001-v1",                      # optional, defaults to
                                                       # participant_id-<index>
          "diagnosis": "AD",                           # "AD" or "Control"
          "mmse": 18,                                  # optional
          "source": "DB"                               # DB | WLS | T2M | SYNTH
        },
        ...
      ]
    }

Relative paths resolve against the manifest's own directory. Tree files
hold one ``(ROOT ...)`` per utterance, aligned with transcript order.
"""

from __future__ import annotations

import json
from pathlib import Path

from .chat import parse_chat, parse_plain
from .model import CohortDataset, CorpusError, Sample, Utterance
from .treebank import parse_treebank


class ManifestError(CorpusError):
    pass


def load_manifest(path: str | Path) -> CohortDataset:
    """Load and validate a cohort described by a manifest file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ManifestError(f"manifest not found: {path}")
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest {path} is not valid JSON: {exc}")

    records = doc.get("samples")
    if not isinstance(records, list) or not records:
        raise ManifestError(f"manifest {path} lists no samples")

    base = path.parent
    samples = []
    for idx, rec in enumerate(records):
        samples.append(_load_record(rec, idx, base))
    return CohortDataset(samples)


def _load_record(rec: dict, idx: int, base: Path) -> Sample:
    for key in ("transcript", "participant_id", "diagnosis"):
        if key not in rec:
            raise ManifestError(f"sample record {idx} missing field {key!r}")
    participant_id = str(rec["participant_id"])
    sample_id = str(rec.get("sample_id") or f"{participant_id}-{idx}")

    tpath = _resolve(rec["transcript"], base)
    try:
        text = tpath.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"sample {sample_id!r}: cannot read transcript {tpath}: {exc}")

    parse = parse_chat if tpath.suffix == ".cha" else parse_plain
    sample = parse(text, participant_id=participant_id, sample_id=sample_id,
                   diagnosis=str(rec["diagnosis"]),
                   mmse=rec.get("mmse"), source=rec.get("source", "DB"))

    if rec.get("trees"):
        wpath = _resolve(rec["trees"], base)
        try:
            tree_text = wpath.read_text(encoding="utf-8")
        except OSError as exc:
            raise ManifestError(f"sample {sample_id!r}: cannot read trees {wpath}: {exc}")
        trees = parse_treebank(tree_text)
        if len(trees) != len(sample.utterances):
            raise ManifestError(
                f"sample {sample_id!r}: {len(trees)} trees for "
                f"{len(sample.utterances)} utterances")
        utterances = tuple(Utterance(tokens=u.tokens, tree=t)
                           for u, t in zip(sample.utterances, trees))
        sample = Sample(participant_id=sample.participant_id,
                        sample_id=sample.sample_id, utterances=utterances,
                        diagnosis=sample.diagnosis, mmse=sample.mmse,
                        source=sample.source)
    return sample


def _resolve(p: str, base: Path) -> Path:
    path = Path(p)
    return path if path.is_absolute() else base / path
