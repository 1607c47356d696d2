"""Constrained markup decoding.

The automaton here tells an external generator which tokens may come next
while it writes proof markup.  Claim spans are copied monotonically from the
claim, evidence spans are walked through a trie of evidence n-grams, and a
relation token follows every closing bracket.  Any sequence it accepts
parses as a well-formed proof.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, TextIO, Tuple

from .errors import EmptyClaim, IllegalToken
from .markup import CLOSE_CLAIM, CLOSE_EVIDENCE, MAX_SPAN, OPEN_CLAIM, OPEN_EVIDENCE, check_words
from .natlog import DEL, EMITTABLE_TOKENS, INS, NatOp, as_sentences, is_natop_token, tokenize


class _Node:
    __slots__ = ("children", "terminal")

    def __init__(self):
        self.children: Dict[str, "_Node"] = {}
        self.terminal = False


class SpanTrie:
    """Trie over all contiguous n-grams (1 to ``max_len`` words) of some texts."""

    def __init__(self, texts: Iterable[Sequence[str]] = (), max_len: int = MAX_SPAN, sentinel: Optional[str] = None):
        self.root = _Node()
        self.max_len = max_len
        for text in texts:
            self._add_ngrams(tuple(text))
        if sentinel is not None:
            self._insert((sentinel,))

    def _insert(self, seq: Sequence[str]) -> None:
        node = self.root
        for tok in seq:
            node = node.children.setdefault(tok, _Node())
        node.terminal = True

    def _add_ngrams(self, text: Tuple[str, ...]) -> None:
        # inserting the longest n-gram from each start marks every prefix
        for start in range(len(text)):
            node = self.root
            for tok in text[start : start + self.max_len]:
                node = node.children.setdefault(tok, _Node())
                node.terminal = True

    def walk(self, seq: Sequence[str]) -> Optional[_Node]:
        node = self.root
        for tok in seq:
            node = node.children.get(tok)
            if node is None:
                return None
        return node

    def __contains__(self, seq) -> bool:
        node = self.walk(tuple(seq))
        return node is not None and node.terminal

    def __iter__(self) -> Iterator[Tuple[str, ...]]:
        stack: List[Tuple[_Node, Tuple[str, ...]]] = [(self.root, ())]
        while stack:
            node, prefix = stack.pop()
            if node.terminal:
                yield prefix
            for tok, child in node.children.items():
                stack.append((child, prefix + (tok,)))

    def __len__(self) -> int:
        return sum(1 for _ in self)


def build_tries(claim, evidence, max_len: int = MAX_SPAN) -> Tuple[SpanTrie, SpanTrie]:
    """Claim trie (with ``<INS>``) and evidence trie (with ``<DEL>``)."""
    claim = tokenize(claim)
    if not claim:
        raise EmptyClaim("cannot build tries for an empty claim")
    sentences = as_sentences(evidence)
    check_words(claim, "claim")
    for sent in sentences:
        check_words(sent.tokens, f"evidence sentence {sent.id}")
    claim_trie = SpanTrie([claim], max_len, sentinel=INS)
    evidence_trie = SpanTrie([s.tokens for s in sentences], max_len, sentinel=DEL)
    return claim_trie, evidence_trie


class Phase(enum.Enum):
    EXPECT_OPEN_CLAIM = "ExpectOpenClaim"
    IN_CLAIM = "InClaim"
    EXPECT_OPEN_EVIDENCE = "ExpectOpenEvidence"
    IN_EVIDENCE = "InEvidence"
    EXPECT_NATOP = "ExpectNatOp"
    DONE = "Done"


@dataclass(frozen=True)
class ConstraintState:
    phase: Phase = Phase.EXPECT_OPEN_CLAIM
    claim_cursor: int = 0
    trie_node: Optional[_Node] = field(default=None, compare=False)
    emitted: Tuple[str, ...] = ()
    span_len: int = 0
    insertion: bool = False

    @property
    def done(self) -> bool:
        return self.phase is Phase.DONE


def _evidence_options(node: _Node, insertion: bool, at_root: bool) -> FrozenSet[str]:
    options = set(node.children)
    if insertion and at_root:
        options.discard(DEL)
    if node.terminal:
        options.add(CLOSE_EVIDENCE)
    return frozenset(options)


def _has_evidence_words(tries) -> bool:
    return any(tok != DEL for tok in tries[1].root.children)


def allowed_next(state: ConstraintState, claim, tries) -> FrozenSet[str]:
    """Tokens the generator may emit from ``state``.  Empty only when done."""
    claim = tokenize(claim)
    phase = state.phase
    if phase is Phase.DONE:
        return frozenset()
    if phase is Phase.EXPECT_OPEN_CLAIM:
        return frozenset({OPEN_CLAIM})
    if phase is Phase.EXPECT_OPEN_EVIDENCE:
        return frozenset({OPEN_EVIDENCE})
    if phase is Phase.EXPECT_NATOP:
        return EMITTABLE_TOKENS
    if phase is Phase.IN_CLAIM:
        if state.span_len == 0:
            options = {claim[state.claim_cursor]}
            if _has_evidence_words(tries):
                options.add(INS)
            return frozenset(options)
        options = {CLOSE_CLAIM}
        if not state.insertion and state.claim_cursor < len(claim) and state.span_len < tries[0].max_len:
            options.add(claim[state.claim_cursor])
        return frozenset(options)
    # IN_EVIDENCE
    node = state.trie_node if state.trie_node is not None else tries[1].root
    return _evidence_options(node, state.insertion, at_root=state.span_len == 0)


def step(state: ConstraintState, token: str, claim, tries) -> ConstraintState:
    """Successor state after emitting ``token``.

    Raises:
        IllegalToken: ``token`` is not in ``allowed_next(state, ...)``.
    """
    claim = tokenize(claim)
    phase = state.phase
    if phase is Phase.EXPECT_NATOP and is_natop_token(token):
        token = NatOp.from_token(token).token
    allowed = allowed_next(state, claim, tries)
    if token not in allowed:
        raise IllegalToken(token, allowed)
    emitted = state.emitted + (token,)
    if phase is Phase.EXPECT_OPEN_CLAIM:
        return ConstraintState(Phase.IN_CLAIM, state.claim_cursor, None, emitted)
    if phase is Phase.IN_CLAIM:
        if token == CLOSE_CLAIM:
            return ConstraintState(
                Phase.EXPECT_OPEN_EVIDENCE, state.claim_cursor, None, emitted, insertion=state.insertion
            )
        if token == INS:
            return ConstraintState(Phase.IN_CLAIM, state.claim_cursor, None, emitted, 1, insertion=True)
        return ConstraintState(Phase.IN_CLAIM, state.claim_cursor + 1, None, emitted, state.span_len + 1)
    if phase is Phase.EXPECT_OPEN_EVIDENCE:
        return ConstraintState(
            Phase.IN_EVIDENCE, state.claim_cursor, tries[1].root, emitted, insertion=state.insertion
        )
    if phase is Phase.IN_EVIDENCE:
        if token == CLOSE_EVIDENCE:
            return ConstraintState(Phase.EXPECT_NATOP, state.claim_cursor, None, emitted)
        node = (state.trie_node or tries[1].root).children[token]
        return ConstraintState(
            Phase.IN_EVIDENCE, state.claim_cursor, node, emitted, state.span_len + 1, state.insertion
        )
    # EXPECT_NATOP
    if state.claim_cursor >= len(claim):
        return ConstraintState(Phase.DONE, state.claim_cursor, None, emitted)
    return ConstraintState(Phase.EXPECT_OPEN_CLAIM, state.claim_cursor, None, emitted)


class ConstraintAutomaton:
    """Claim, evidence and tries bundled for repeated decoding."""

    def __init__(self, claim, evidence, max_len: int = MAX_SPAN):
        self.claim = tokenize(claim)
        self.evidence = as_sentences(evidence)
        self.tries = build_tries(self.claim, self.evidence, max_len)

    def initial(self) -> ConstraintState:
        return ConstraintState()

    def allowed(self, state: ConstraintState) -> FrozenSet[str]:
        return allowed_next(state, self.claim, self.tries)

    def step(self, state: ConstraintState, token: str) -> ConstraintState:
        return step(state, token, self.claim, self.tries)

    def run(self, tokens: Iterable[str]) -> ConstraintState:
        state = self.initial()
        for tok in tokens:
            state = self.step(state, tok)
        return state

    def accepts(self, tokens: Iterable[str]) -> bool:
        """Whether the full token sequence is accepted and ends in Done."""
        try:
            return self.run(tokens).done
        except IllegalToken:
            return False

    def random_walk(self, rng: random.Random) -> List[str]:
        state = self.initial()
        while not state.done:
            options = sorted(self.allowed(state))
            state = self.step(state, rng.choice(options))
        return list(state.emitted)


def model_input(claim, evidence, sep: str = "</s>") -> str:
    """Claim followed by every evidence sentence, joined by ``sep``."""
    parts = [" ".join(tokenize(claim))] + [" ".join(s.tokens) for s in as_sentences(evidence)]
    return f" {sep} ".join(parts)


def serve(automaton: ConstraintAutomaton, instream: TextIO, outstream: TextIO) -> ConstraintState:
    """Drive ``automaton`` through a line protocol.

    ``NEXT?`` answers the allowed tokens (space-separated, sorted; an empty
    line once done); ``STEP <tok>`` answers ``OK`` or ``ERR``.  Also
    understood: ``DONE?``, ``MARKUP?``, ``RESET`` and ``QUIT``.
    """
    state = automaton.initial()
    for raw in instream:
        line = raw.strip()
        if not line:
            continue
        cmd, _, arg = line.partition(" ")
        arg = arg.strip()
        if cmd == "NEXT?":
            reply = " ".join(sorted(automaton.allowed(state)))
        elif cmd == "STEP" and arg and " " not in arg:
            try:
                state = automaton.step(state, arg)
                reply = "OK"
            except IllegalToken:
                reply = "ERR"
        elif cmd == "DONE?":
            reply = "YES" if state.done else "NO"
        elif cmd == "MARKUP?":
            reply = " ".join(state.emitted)
        elif cmd == "RESET":
            state = automaton.initial()
            reply = "OK"
        elif cmd == "QUIT":
            outstream.write("OK\n")
            outstream.flush()
            break
        else:
            reply = "ERR"
        outstream.write(reply + "\n")
        outstream.flush()
    return state
