"""Natural-logic relations, their join, and the verdict automaton.

A proof is read as a chain of sentences, each obtained from the previous
one by a single mutation. Every mutation carries one of seven relations;
folding those relations with :func:`join` gives the relation between the
claim and the final sentence, which is then projected onto a task label.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import reduce
from typing import AbstractSet, Iterable, Optional, Sequence, Tuple

INS = "<INS>"
DEL = "<DEL>"


class NatOp(enum.Enum):
    """The seven natural-logic relations.

    The value is the canonical serialization token.
    """

    EQUIVALENCE = "≡"
    FORWARD = "<"
    REVERSE = ">"
    NEGATION = "!"
    ALTERNATION = "|"
    COVER = "~"
    INDEPENDENCE = "#"

    @property
    def token(self) -> str:
        return self.value

    @classmethod
    def from_token(cls, token: str) -> "NatOp":
        try:
            return _TOKEN_TO_OP[token]
        except KeyError:
            raise ValueError(f"not a NatOp token: {token!r}") from None

    @property
    def inverse(self) -> "NatOp":
        """Relation obtained by swapping the two sides."""
        if self is NatOp.FORWARD:
            return NatOp.REVERSE
        if self is NatOp.REVERSE:
            return NatOp.FORWARD
        return self

    def __str__(self) -> str:
        return self.value


_TOKEN_TO_OP = {op.value: op for op in NatOp}
_TOKEN_TO_OP["=="] = NatOp.EQUIVALENCE

#: Relations the annotation pipeline and the decoder may emit.  Cover is
#: only ever produced internally by :func:`join`.
EMITTABLE = (
    NatOp.EQUIVALENCE,
    NatOp.FORWARD,
    NatOp.REVERSE,
    NatOp.ALTERNATION,
    NatOp.NEGATION,
    NatOp.INDEPENDENCE,
)
EMITTABLE_TOKENS = frozenset(op.token for op in EMITTABLE)


def is_natop_token(token: str) -> bool:
    return token in _TOKEN_TO_OP


class VeracityLabel(enum.Enum):
    SUPPORTS = "SUPPORTS"
    REFUTES = "REFUTES"
    NOT_ENOUGH_INFO = "NOT ENOUGH INFO"

    @classmethod
    def parse(cls, text: str) -> "VeracityLabel":
        key = text.strip().upper().replace("_", " ")
        aliases = {"S": "SUPPORTS", "R": "REFUTES", "N": "NOT ENOUGH INFO", "NEI": "NOT ENOUGH INFO"}
        return cls(aliases.get(key, key))

    def __str__(self) -> str:
        return self.value


# Join table: rows are the relation so far, columns the next relation.
# Compositions that leave more than one relation possible collapse to #.
_E, _F, _R, _N, _A, _C, _I = (
    NatOp.EQUIVALENCE,
    NatOp.FORWARD,
    NatOp.REVERSE,
    NatOp.NEGATION,
    NatOp.ALTERNATION,
    NatOp.COVER,
    NatOp.INDEPENDENCE,
)
_ORDER = (_E, _F, _R, _N, _A, _C, _I)
_TABLE_ROWS = {
    _E: (_E, _F, _R, _N, _A, _C, _I),
    _F: (_F, _F, _I, _A, _A, _I, _I),
    _R: (_R, _I, _R, _C, _I, _C, _I),
    _N: (_N, _C, _A, _E, _R, _F, _I),
    _A: (_A, _I, _A, _F, _I, _F, _I),
    _C: (_C, _C, _I, _R, _R, _I, _I),
    _I: (_I, _I, _I, _I, _I, _I, _I),
}
JOIN_TABLE = {
    (left, right): result
    for left, row in _TABLE_ROWS.items()
    for right, result in zip(_ORDER, row)
}


def join(current: NatOp, nxt: NatOp) -> NatOp:
    """Compose the running relation with the relation of the next mutation."""
    return JOIN_TABLE[current, nxt]


_PROJECTION = {
    _E: VeracityLabel.SUPPORTS,
    _F: VeracityLabel.SUPPORTS,
    _N: VeracityLabel.REFUTES,
    _A: VeracityLabel.REFUTES,
    _R: VeracityLabel.NOT_ENOUGH_INFO,
    _C: VeracityLabel.NOT_ENOUGH_INFO,
    _I: VeracityLabel.NOT_ENOUGH_INFO,
}


def project(rel: NatOp) -> VeracityLabel:
    return _PROJECTION[rel]


@dataclass(frozen=True)
class RelationState:
    """Running relation between the claim and the current mutated sentence."""

    rel: NatOp = NatOp.EQUIVALENCE

    def advance(self, op: NatOp) -> "RelationState":
        return RelationState(join(self.rel, op))

    @property
    def label(self) -> VeracityLabel:
        return project(self.rel)


def fold(ops: Iterable[NatOp]) -> NatOp:
    return reduce(join, ops, NatOp.EQUIVALENCE)


def verdict(ops: Iterable[NatOp]) -> VeracityLabel:
    """Label reached by the automaton after consuming ``ops``."""
    return project(fold(ops))


# ---------------------------------------------------------------------------
# Set-theoretic model of the relations (used as an independent oracle)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SetModel:
    universe: AbstractSet
    x: AbstractSet
    y: AbstractSet

    def __post_init__(self):
        if not (self.x <= self.universe and self.y <= self.universe):
            raise ValueError("x and y must be subsets of the universe")


def relation_of(model: SetModel) -> NatOp:
    """Relation between two denotations, checked in table order.

    Equality wins over the entailments, and exhaustive exclusion (negation)
    wins over alternation and cover; anything left is independence.
    """
    x, y, u = frozenset(model.x), frozenset(model.y), frozenset(model.universe)
    if x == y:
        return NatOp.EQUIVALENCE
    if x < y:
        return NatOp.FORWARD
    if x > y:
        return NatOp.REVERSE
    disjoint = not (x & y)
    exhaustive = (x | y) == u
    if disjoint and exhaustive:
        return NatOp.NEGATION
    if disjoint:
        return NatOp.ALTERNATION
    if exhaustive:
        return NatOp.COVER
    return NatOp.INDEPENDENCE


# ---------------------------------------------------------------------------
# Proofs
# ---------------------------------------------------------------------------

Tokens = Tuple[str, ...]


@dataclass(frozen=True)
class ProofStep:
    """One mutation: a claim span replaced by an evidence span.

    An insertion has ``claim_span == (INS,)`` and a deletion has
    ``evidence_span == (DEL,)``.  ``evidence_source`` is provenance only and
    does not take part in equality.
    """

    claim_span: Tokens
    evidence_span: Tokens
    op: NatOp
    evidence_source: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "claim_span", tuple(self.claim_span))
        object.__setattr__(self, "evidence_span", tuple(self.evidence_span))
        if not self.claim_span or not self.evidence_span:
            raise ValueError("spans must be non-empty")
        if self.is_insertion and self.is_deletion:
            raise ValueError("a step cannot be both an insertion and a deletion")
        if INS in self.claim_span and not self.is_insertion:
            raise ValueError(f"{INS} must be the only token of a claim span")
        if DEL in self.evidence_span and not self.is_deletion:
            raise ValueError(f"{DEL} must be the only token of an evidence span")

    @property
    def is_insertion(self) -> bool:
        return self.claim_span == (INS,)

    def sentinel_op_is_usual(self) -> bool:
        """Whether an Ins/Del step carries a relation the annotator would assign."""
        if self.is_deletion:
            return self.op in (NatOp.REVERSE, NatOp.NEGATION)
        if self.is_insertion:
            return self.op in (NatOp.FORWARD, NatOp.NEGATION)
        return True

    @property
    def is_deletion(self) -> bool:
        return self.evidence_span == (DEL,)


@dataclass(frozen=True)
class Proof:
    claim: Tokens
    steps: Tuple[ProofStep, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "claim", tuple(self.claim))
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def ops(self) -> Tuple[NatOp, ...]:
        return tuple(s.op for s in self.steps)

    def covered_claim(self) -> Tokens:
        out: list = []
        for s in self.steps:
            if not s.is_insertion:
                out.extend(s.claim_span)
        return tuple(out)

    def covers_claim(self) -> bool:
        return self.covered_claim() == self.claim


@dataclass(frozen=True)
class HyperlinkMention:
    """An entity mention in one evidence sentence linking to another."""

    tokens: Tokens
    source: str
    target: str

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))


@dataclass(frozen=True)
class EvidenceSentence:
    id: str
    tokens: Tokens
    mentions: Tuple[HyperlinkMention, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "mentions", tuple(self.mentions))


def as_sentences(evidence) -> Tuple[EvidenceSentence, ...]:
    """Normalise evidence given as sentences, token lists or strings.

    Bare token lists and strings get their position as id.
    """
    out = []
    for i, sent in enumerate(evidence):
        if isinstance(sent, EvidenceSentence):
            out.append(sent)
        elif isinstance(sent, str):
            out.append(EvidenceSentence(str(i), tuple(sent.split())))
        else:
            out.append(EvidenceSentence(str(i), tuple(sent)))
    return tuple(out)


def tokenize(text) -> Tokens:
    if isinstance(text, str):
        return tuple(text.split())
    return tuple(text)


def find_span(tokens: Sequence[str], span: Sequence[str], start: int = 0) -> int:
    """Index of the first contiguous occurrence of ``span`` in ``tokens``, or -1."""
    n = len(span)
    if n == 0:
        return -1
    for i in range(start, len(tokens) - n + 1):
        if tuple(tokens[i : i + n]) == tuple(span):
            return i
    return -1


def verdict_of_proof(proof: Proof) -> VeracityLabel:
    return verdict(proof.ops)


def parse_ops(tokens: Sequence[str]) -> Tuple[NatOp, ...]:
    return tuple(NatOp.from_token(t) for t in tokens)
