"""Reading and writing the bracketed proof markup.

A proof is written as a flat sequence of whitespace-separated tokens::

    { The Trial } [ The Trial ] ≡ { is a short story } [ is a novel ] | ...

Braces hold a claim span, brackets an evidence span, and the token after
each closing bracket is the relation of that mutation.
"""

from __future__ import annotations

import enum
import logging
import warnings
from typing import List, Sequence, Union

from .errors import CoverageError, GrammarError, SpanNotFound, UnknownOp
from .natlog import (
    DEL,
    INS,
    NatOp,
    Proof,
    ProofStep,
    as_sentences,
    find_span,
    is_natop_token,
    tokenize,
)

log = logging.getLogger(__name__)

OPEN_CLAIM = "{"
CLOSE_CLAIM = "}"
OPEN_EVIDENCE = "["
CLOSE_EVIDENCE = "]"
DELIMITERS = frozenset({OPEN_CLAIM, CLOSE_CLAIM, OPEN_EVIDENCE, CLOSE_EVIDENCE})
RESERVED = DELIMITERS | {INS, DEL}

MAX_SPAN = 7


class TokenKind(enum.Enum):
    OPEN_CLAIM = OPEN_CLAIM
    CLOSE_CLAIM = CLOSE_CLAIM
    OPEN_EVIDENCE = OPEN_EVIDENCE
    CLOSE_EVIDENCE = CLOSE_EVIDENCE
    NATOP = "natop"
    WORD = "word"


def classify(token: str, after_close_evidence: bool = False) -> TokenKind:
    """Kind of a markup token; relation tokens are only recognised after ``]``."""
    if token in DELIMITERS:
        return TokenKind(token)
    if after_close_evidence and is_natop_token(token):
        return TokenKind.NATOP
    return TokenKind.WORD


def check_words(tokens: Sequence[str], what: str = "text") -> None:
    """Reject text containing reserved markup tokens."""
    bad = sorted(set(tokens) & RESERVED)
    if bad:
        raise GrammarError(f"{what} contains reserved markup tokens: {bad}")


def _read_span(tokens: Sequence[str], i: int, close: str) -> tuple:
    start = i
    while i < len(tokens) and tokens[i] != close:
        if tokens[i] in DELIMITERS:
            raise GrammarError(f"unexpected {tokens[i]!r} at position {i} inside span (missing {close!r}?)")
        i += 1
    if i >= len(tokens):
        raise GrammarError(f"span opened at position {start - 1} is never closed with {close!r}")
    if i == start:
        raise GrammarError(f"empty span at position {start}")
    return tuple(tokens[start:i]), i + 1


def parse(
    markup: Union[str, Sequence[str]],
    claim: Union[str, Sequence[str]],
    evidence=(),
    *,
    strict: bool = True,
    max_span: int = MAX_SPAN,
) -> Proof:
    """Parse proof markup and validate it against the claim and evidence.

    With ``strict`` (the default) the parser accepts exactly the sequences the
    decoding automaton can emit: spans of at most ``max_span`` words, no cover
    relation, and no insertion after the last claim token has been copied.

    Raises:
        GrammarError: malformed delimiter structure or misplaced sentinels.
        CoverageError: claim spans are not an in-order partition of the claim.
        SpanNotFound: an evidence span occurs in none of the sentences.
        UnknownOp: the token after ``]`` is not an acceptable relation.
    """
    tokens = tokenize(markup)
    claim = tokenize(claim)
    sentences = as_sentences(evidence)
    steps: List[ProofStep] = []
    cursor = 0
    i = 0
    while i < len(tokens):
        if tokens[i] != OPEN_CLAIM:
            raise GrammarError(f"expected {OPEN_CLAIM!r} at position {i}, got {tokens[i]!r}")
        claim_span, i = _read_span(tokens, i + 1, CLOSE_CLAIM)
        if i >= len(tokens) or tokens[i] != OPEN_EVIDENCE:
            got = tokens[i] if i < len(tokens) else "end of input"
            raise GrammarError(f"expected {OPEN_EVIDENCE!r} at position {i}, got {got!r}")
        evidence_span, i = _read_span(tokens, i + 1, CLOSE_EVIDENCE)
        if i >= len(tokens):
            raise GrammarError("markup ends before the relation token")
        op_token = tokens[i]
        if op_token in DELIMITERS:
            raise GrammarError(f"expected a relation token at position {i}, got {op_token!r}")
        if not is_natop_token(op_token):
            raise UnknownOp(f"unknown relation token {op_token!r} at position {i}")
        op = NatOp.from_token(op_token)
        if strict and op is NatOp.COVER:
            raise UnknownOp(f"cover relation is not emittable (position {i})")
        i += 1

        if INS in claim_span and claim_span != (INS,):
            raise GrammarError(f"{INS} must stand alone in a claim span")
        if DEL in evidence_span and evidence_span != (DEL,):
            raise GrammarError(f"{DEL} must stand alone in an evidence span")
        if claim_span == (INS,) and evidence_span == (DEL,):
            raise GrammarError("a step cannot pair an insertion with a deletion")
        if strict and (len(claim_span) > max_span or len(evidence_span) > max_span):
            raise GrammarError(f"span longer than {max_span} words in step {len(steps) + 1}")

        if claim_span == (INS,):
            if strict and cursor >= len(claim):
                raise CoverageError("insertion after the claim has been fully copied")
        else:
            if tuple(claim[cursor : cursor + len(claim_span)]) != claim_span:
                raise CoverageError(
                    f"claim span {' '.join(claim_span)!r} does not continue the claim at token {cursor}"
                )
            cursor += len(claim_span)

        source = None
        if evidence_span != (DEL,):
            for sent in sentences:
                if find_span(sent.tokens, evidence_span) >= 0:
                    source = sent.id
                    break
            else:
                raise SpanNotFound(f"evidence span {' '.join(evidence_span)!r} not found in any sentence")

        step = ProofStep(claim_span, evidence_span, op, evidence_source=source)
        if not step.sentinel_op_is_usual():
            warnings.warn(f"step {len(steps) + 1}: sentinel step carries {op.name}", stacklevel=2)
        steps.append(step)

    if cursor != len(claim):
        raise CoverageError(f"proof covers {cursor} of {len(claim)} claim tokens")
    return Proof(claim, tuple(steps))


def serialize(proof: Proof) -> List[str]:
    out: List[str] = []
    for step in proof.steps:
        out.append(OPEN_CLAIM)
        out.extend(step.claim_span)
        out.append(CLOSE_CLAIM)
        out.append(OPEN_EVIDENCE)
        out.extend(step.evidence_span)
        out.append(CLOSE_EVIDENCE)
        out.append(step.op.token)
    return out


def to_string(proof: Proof) -> str:
    return " ".join(serialize(proof))
