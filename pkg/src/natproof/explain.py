"""Plain-English rendering of proof steps."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import List

from .errors import CoverUnrenderable
from .natlog import NatOp, Proof, ProofStep

EQUIVALENT = "Equivalent Spans"
CONTRADICTS = "Evidence span contradicts the claim span"
FOLLOWS = "Claim span follows from evidence span"
INSERT = "(Insert) New information from evidence"
INCOMPLETE = "Incomplete Evidence"
REFUTES = "Evidence span refutes claim span"
NEGATED = "Claim span negated (Deletion)"
UNRELATED = "Unrelated claim span and evidence span"
NOTHING_FOUND = "No related evidence found (Deletion)"


@dataclass(frozen=True)
class RenderedStep:
    claim_span: str
    evidence_span: str
    paraphrase: str

    def to_json(self) -> dict:
        return asdict(self)


def paraphrase(step: ProofStep) -> str:
    op = step.op
    if op is NatOp.EQUIVALENCE:
        return EQUIVALENT
    if op is NatOp.ALTERNATION:
        return CONTRADICTS
    if op is NatOp.FORWARD:
        return INSERT if step.is_insertion else FOLLOWS
    if op is NatOp.REVERSE:
        return INCOMPLETE
    if op is NatOp.NEGATION:
        return NEGATED if step.is_deletion else REFUTES
    if op is NatOp.INDEPENDENCE:
        return NOTHING_FOUND if step.is_deletion else UNRELATED
    raise CoverUnrenderable("the cover relation has no plain-English rendering")


def render(proof: Proof) -> List[RenderedStep]:
    return [
        RenderedStep(" ".join(s.claim_span), " ".join(s.evidence_span), paraphrase(s)) for s in proof.steps
    ]


def render_text(proof: Proof) -> str:
    lines = []
    for i, r in enumerate(render(proof), 1):
        lines.append(f"{i}. {{ {r.claim_span} }} -> [ {r.evidence_span} ]: {r.paraphrase}")
    return "\n".join(lines)
