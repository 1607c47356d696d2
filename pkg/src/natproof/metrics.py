"""Evaluation metrics: label accuracy, FEVER score, SER and rationale F1."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import FrozenSet, Hashable, Iterable, List, Optional, Sequence, Set, Tuple

from .errors import EmptyInput, NoEligible
from .natlog import DEL, NatOp, Proof, VeracityLabel, tokenize


def _evidence_id(item) -> Hashable:
    if isinstance(item, (list, tuple)):
        return tuple(_evidence_id(x) for x in item)
    return item


@dataclass(frozen=True)
class PredictionRecord:
    id: str
    predicted_label: VeracityLabel
    predicted_evidence: Tuple[Hashable, ...] = ()
    label: Optional[VeracityLabel] = None
    evidence: Tuple[FrozenSet[Hashable], ...] = ()

    @classmethod
    def from_json(cls, obj: dict) -> "PredictionRecord":
        def lab(x):
            return None if x is None else VeracityLabel.parse(x)

        return cls(
            id=str(obj["id"]),
            predicted_label=lab(obj["predicted_label"]),
            predicted_evidence=tuple(_evidence_id(e) for e in obj.get("predicted_evidence") or ()),
            label=lab(obj.get("label")),
            evidence=tuple(frozenset(_evidence_id(e) for e in group) for group in obj.get("evidence") or ()),
        )

    @property
    def label_correct(self) -> bool:
        return self.label is not None and self.predicted_label is self.label


def label_accuracy(records: Sequence[PredictionRecord]) -> float:
    if not records:
        raise EmptyInput("label accuracy of no records")
    return sum(r.label_correct for r in records) / len(records)


def fever_score(records: Sequence[PredictionRecord], max_evidence: Optional[int] = None) -> float:
    """Accuracy where S/R predictions also need one complete gold evidence set.

    ``max_evidence`` truncates each predicted evidence list first (the
    official scorer uses 5).
    """
    if not records:
        raise EmptyInput("FEVER score of no records")
    hits = 0
    for r in records:
        if not r.label_correct:
            continue
        if r.label is VeracityLabel.NOT_ENOUGH_INFO:
            hits += 1
            continue
        predicted = set(r.predicted_evidence if max_evidence is None else r.predicted_evidence[:max_evidence])
        if any(group <= predicted for group in r.evidence):
            hits += 1
    return hits / len(records)


@dataclass(frozen=True)
class SerPair:
    id: str
    base: VeracityLabel
    augmented: VeracityLabel


_DECISIVE = (VeracityLabel.SUPPORTS, VeracityLabel.REFUTES)


def ser(pairs: Sequence[SerPair], denominator: str = "eligible") -> float:
    """Share of Support/Refute decisions that change once evidence is added.

    ``denominator="eligible"`` divides by the pairs whose base decision is
    Support or Refute; ``"all"`` divides by every pair.
    """
    if not pairs:
        raise EmptyInput("SER of no pairs")
    if denominator not in ("eligible", "all"):
        raise ValueError(f"denominator must be 'eligible' or 'all', not {denominator!r}")
    eligible = [p for p in pairs if p.base in _DECISIVE]
    if not eligible:
        raise NoEligible("no pair has a Support or Refute base decision")
    flips = sum(p.augmented is not p.base for p in eligible)
    return flips / (len(eligible) if denominator == "eligible" else len(pairs))


def pair_predictions(base: Iterable[PredictionRecord], augmented: Iterable[PredictionRecord]) -> List[SerPair]:
    """Join two prediction sets on claim id, keeping the base order."""
    aug = {r.id: r for r in augmented}
    return [SerPair(r.id, r.predicted_label, aug[r.id].predicted_label) for r in base if r.id in aug]


def extract_rationale(proof: Proof, claim=None) -> Set[str]:
    """Evidence words from non-equivalence, non-deletion steps that the claim lacks."""
    claim_words = {w.casefold() for w in tokenize(proof.claim if claim is None else claim)}
    out = set()
    for step in proof.steps:
        if step.op is NatOp.EQUIVALENCE or step.is_deletion:
            continue
        out.update(w for w in step.evidence_span if w != DEL and w.casefold() not in claim_words)
    return out


def token_f1(predicted: Iterable[str], human: Iterable[str]) -> Tuple[float, float, float]:
    pred, gold = set(predicted), set(human)
    if not pred and not gold:
        return 1.0, 1.0, 1.0
    if not pred or not gold:
        return 0.0, 0.0, 0.0
    overlap = len(pred & gold)
    if overlap == 0:
        return 0.0, 0.0, 0.0
    p, r = overlap / len(pred), overlap / len(gold)
    return p, r, 2 * p * r / (p + r)
