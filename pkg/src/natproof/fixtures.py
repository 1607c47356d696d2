"""Bundled knowledge-store fixture and hand-built claim corpus."""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Dict, List

from .kb import KbStore, build_store
from .records import ClaimRecord, read_jsonl

KB_FILES = {
    "paraphrase_file": "paraphrases.tsv",
    "alias_file": "aliases.tsv",
    "relation_file": "relations.tsv",
    "hierarchy_file": "hierarchy.tsv",
    "negation_file": "negations.tsv",
}


def data_dir() -> Path:
    return Path(str(resources.files("natproof") / "data"))


def kb_paths() -> Dict[str, Path]:
    root = data_dir() / "kb"
    return {arg: root / name for arg, name in KB_FILES.items()}


def fixture_store() -> KbStore:
    return build_store(**kb_paths())


def corpus_path() -> Path:
    return data_dir() / "corpus.jsonl"


def corpus() -> List[ClaimRecord]:
    return [ClaimRecord.from_json(obj) for _, obj in read_jsonl(corpus_path())]
