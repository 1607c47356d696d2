"""JSONL record formats shared by the command-line tools."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator, List, Optional, Tuple

from .errors import SchemaError
from .natlog import EvidenceSentence, HyperlinkMention, Tokens, VeracityLabel, tokenize

MAX_EVIDENCE = 5


@dataclass(frozen=True)
class ClaimRecord:
    id: str
    claim: Tokens
    evidence: Tuple[EvidenceSentence, ...] = ()
    label: Optional[VeracityLabel] = None
    transformation: Optional[dict] = None
    factoid: Optional[Tokens] = None

    @classmethod
    def from_json(cls, obj, max_evidence: Optional[int] = MAX_EVIDENCE) -> "ClaimRecord":
        if not isinstance(obj, dict):
            raise SchemaError("record must be a JSON object")
        for key in ("id", "claim"):
            if key not in obj:
                raise SchemaError(f"record lacks {key!r}")
        if not isinstance(obj["claim"], (str, list)):
            raise SchemaError("'claim' must be a string or a token list")
        evidence = obj.get("evidence") or []
        if not isinstance(evidence, list):
            raise SchemaError("'evidence' must be a list")
        if max_evidence is not None and len(evidence) > max_evidence:
            raise SchemaError(f"{len(evidence)} evidence sentences, at most {max_evidence} allowed")
        sentences = [_sentence(e, i) for i, e in enumerate(evidence)]
        label = obj.get("label")
        try:
            label = None if label is None else VeracityLabel.parse(label)
        except ValueError:
            raise SchemaError(f"unknown label {label!r}") from None
        transformation = obj.get("transformation")
        if isinstance(transformation, str):
            transformation = {"type": transformation, "source": "gold"}
        if transformation is not None and (not isinstance(transformation, dict) or "type" not in transformation):
            raise SchemaError("'transformation' must be a string or an object with 'type'")
        factoid = obj.get("factoid")
        return cls(
            id=str(obj["id"]),
            claim=tokenize(obj["claim"]),
            evidence=tuple(sentences),
            label=label,
            transformation=transformation,
            factoid=None if factoid is None else tokenize(factoid),
        )


def _sentence(obj, index: int) -> EvidenceSentence:
    if isinstance(obj, str):
        return EvidenceSentence(str(index), tokenize(obj))
    if not isinstance(obj, dict) or "text" not in obj:
        raise SchemaError("evidence items must be strings or objects with 'text'")
    sid = str(obj.get("id", index))
    mentions = []
    for m in obj.get("mentions") or ():
        if not isinstance(m, dict) or "text" not in m or "target" not in m:
            raise SchemaError("mentions must be objects with 'text' and 'target'")
        mentions.append(HyperlinkMention(tokenize(m["text"]), sid, str(m["target"])))
    return EvidenceSentence(sid, tokenize(obj["text"]), tuple(mentions))


def evidence_to_json(sentences: Iterable[EvidenceSentence]) -> List[dict]:
    out = []
    for s in sentences:
        d = {"id": s.id, "text": " ".join(s.tokens)}
        if s.mentions:
            d["mentions"] = [{"text": " ".join(m.tokens), "target": m.target} for m in s.mentions]
        out.append(d)
    return out


def read_jsonl(path) -> Iterator[Tuple[int, object]]:
    """Yield ``(line_number, value)``; undecodable lines yield the exception."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                yield lineno, exc


def dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def write_jsonl(records: Iterable[dict], fh: IO[str]) -> None:
    for rec in records:
        fh.write(dumps(rec) + "\n")
