"""Natural-logic proofs for fact verification."""

from .natlog import (
    DEL,
    INS,
    EvidenceSentence,
    HyperlinkMention,
    NatOp,
    Proof,
    ProofStep,
    RelationState,
    SetModel,
    VeracityLabel,
    join,
    relation_of,
    verdict,
    verdict_of_proof,
)
from .markup import parse, serialize, to_string

__version__ = "0.1.0"

__all__ = [
    "DEL",
    "INS",
    "EvidenceSentence",
    "HyperlinkMention",
    "NatOp",
    "Proof",
    "ProofStep",
    "RelationState",
    "SetModel",
    "VeracityLabel",
    "join",
    "parse",
    "relation_of",
    "serialize",
    "to_string",
    "verdict",
    "verdict_of_proof",
]
