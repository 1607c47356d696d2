"""Heuristic construction of training proofs.

The pipeline chunks the claim, aligns every chunk against each evidence
sentence, turns the alignments into a mutation sequence (bridging switches
between evidence sentences with hyperlinked mentions), assigns relations to
the mutations it can judge in isolation, and finally searches the remaining
completions for sequences whose verdict matches the gold label and, when
known, the claim's transformation type.
"""

from __future__ import annotations

import dataclasses
import difflib
import enum
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .errors import EmptyClaim, Identical, NoCandidates, RegionRequired
from .kb import HierarchyKind, KbStore
from .markup import MAX_SPAN, check_words, parse, serialize
from .natlog import (
    DEL,
    EMITTABLE,
    INS,
    EvidenceSentence,
    HyperlinkMention,
    NatOp,
    Proof,
    ProofStep,
    Tokens,
    VeracityLabel,
    as_sentences,
    find_span,
    join,
    project,
    tokenize,
    verdict,
)

log = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

#: Order in which unfilled slots are tried when enumerating completions.
FILL_PRIORITY = (
    NatOp.EQUIVALENCE,
    NatOp.FORWARD,
    NatOp.REVERSE,
    NatOp.ALTERNATION,
    NatOp.NEGATION,
    NatOp.INDEPENDENCE,
)

RULES = ("lexical", "negation", "sentinel", "paraphrase", "word", "alias", "relation", "hierarchy")


@dataclass(frozen=True)
class AnnotationConfig:
    threshold: float = 0.5
    word_threshold: float = 0.5
    max_span: int = MAX_SPAN
    filtering: str = "strict"
    fill_priority: Tuple[NatOp, ...] = FILL_PRIORITY
    rules: Tuple[str, ...] = RULES

    def __post_init__(self):
        if self.filtering not in ("strict", "relaxed"):
            raise ValueError(f"filtering must be 'strict' or 'relaxed', not {self.filtering!r}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")
        if self.max_span < 1:
            raise ValueError("max_span must be positive")
        prio = tuple(p if isinstance(p, NatOp) else NatOp.from_token(p) for p in self.fill_priority)
        if sorted(p.name for p in prio) != sorted(p.name for p in EMITTABLE):
            raise ValueError("fill_priority must order exactly the six emittable relations")
        object.__setattr__(self, "fill_priority", prio)
        unknown = set(self.rules) - set(RULES)
        if unknown:
            raise ValueError(f"unknown rules: {sorted(unknown)}")
        object.__setattr__(self, "rules", tuple(self.rules))

    @property
    def strict(self) -> bool:
        return self.filtering == "strict"

    def replace(self, **changes) -> "AnnotationConfig":
        return dataclasses.replace(self, **changes)

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "word_threshold": self.word_threshold,
            "max_span": self.max_span,
            "filtering": self.filtering,
            "fill_priority": [op.token for op in self.fill_priority],
            "rules": list(self.rules),
        }

    @classmethod
    def from_mapping(cls, data: Mapping) -> "AnnotationConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        for key in ("fill_priority", "rules"):
            if key in kwargs and isinstance(kwargs[key], str):
                kwargs[key] = [p for p in kwargs[key].replace(",", " ").split()]
        if "fill_priority" in kwargs:
            kwargs["fill_priority"] = tuple(kwargs["fill_priority"])
        for key, typ in (("threshold", float), ("word_threshold", float), ("max_span", int)):
            if key in kwargs:
                kwargs[key] = typ(kwargs[key])
        return cls(**kwargs)

    @classmethod
    def load(cls, path=None, overrides: Sequence[str] = ()) -> "AnnotationConfig":
        """Config from an optional JSON file plus ``key=value`` overrides."""
        data: Dict = {}
        if path is not None:
            data.update(json.loads(Path(path).read_text(encoding="utf-8")))
        for item in overrides:
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"override must look like key=value, got {item!r}")
            data[key.strip()] = value.strip()
        return cls.from_mapping(data)


# ---------------------------------------------------------------------------
# chunking
# ---------------------------------------------------------------------------

DETERMINERS = frozenset(
    "a an the this that these those some any each every no all both either neither "
    "my your his her its our their".split()
)
PREPOSITIONS = frozenset(
    "of in on at by for with from to into onto over under about after before between through "
    "during without within against among upon across behind beyond near since until toward "
    "towards via per like as".split()
)
AUXILIARIES = frozenset(
    "is are was were be been being am has have had do does did will would shall should can "
    "could may might must".split()
)
CONJUNCTIONS = frozenset("and or but nor so yet".split())
RELATIVES = frozenset("which who whom whose where when".split())
PRONOUNS = frozenset("i you he she it we they me him us them itself themselves".split())
PARTICLES = frozenset("not n't to than".split())
FUNCTION_WORDS = DETERMINERS | PREPOSITIONS | AUXILIARIES | CONJUNCTIONS | RELATIVES | PRONOUNS | PARTICLES
SPLIT_BEFORE = PREPOSITIONS | AUXILIARIES | CONJUNCTIONS | RELATIVES


def is_punct(token: str) -> bool:
    return not any(ch.isalnum() for ch in token)


def is_content_word(token: str) -> bool:
    return not is_punct(token) and token.casefold() not in FUNCTION_WORDS


@dataclass(frozen=True)
class ClaimChunk:
    start: int
    end: int
    tokens: Tokens

    @property
    def has_content_word(self) -> bool:
        return any(is_content_word(t) for t in self.tokens)

    @property
    def span(self) -> Tuple[int, int]:
        return self.start, self.end


Chunker = Callable[[Tokens], List[Tuple[int, int]]]


def rule_chunker(tokens: Tokens) -> List[Tuple[int, int]]:
    """Split before prepositions, auxiliaries, conjunctions, relatives and punctuation."""
    bounds = [0]
    for i in range(1, len(tokens)):
        tok = tokens[i]
        if tok.casefold() in SPLIT_BEFORE or is_punct(tok):
            bounds.append(i)
    bounds.append(len(tokens))
    return [(a, b) for a, b in zip(bounds, bounds[1:]) if b > a]


def chunk_claim(claim, chunker: Optional[Chunker] = None, max_span: int = MAX_SPAN) -> List[ClaimChunk]:
    """Partition the claim into chunks that each hold a content word.

    A chunk without content words is merged into the chunk after it (the
    last one into the chunk before it); chunks longer than ``max_span`` are
    then cut into pieces.
    """
    claim = tokenize(claim)
    if not claim:
        raise EmptyClaim("cannot chunk an empty claim")
    spans = (chunker or rule_chunker)(claim)
    if [i for a, b in spans for i in range(a, b)] != list(range(len(claim))):
        raise ValueError("chunker output does not partition the claim")

    merged: List[List[int]] = []
    pending: Optional[int] = None
    for a, b in spans:
        start = a if pending is None else pending
        if any(is_content_word(t) for t in claim[start:b]):
            merged.append([start, b])
            pending = None
        else:
            pending = start
    if pending is not None:
        if merged:
            merged[-1][1] = len(claim)
        else:
            merged.append([pending, len(claim)])

    out: List[ClaimChunk] = []
    for a, b in merged:
        for s in range(a, b, max_span):
            e = min(s + max_span, b)
            out.append(ClaimChunk(s, e, claim[s:e]))
    return out


# ---------------------------------------------------------------------------
# alignment
# ---------------------------------------------------------------------------


def _lemma(word: str) -> str:
    w = word
    low = w.lower()
    if len(w) > 4 and low.endswith("ies"):
        return w[:-3] + "y"
    if len(w) > 4 and low.endswith(("ches", "shes", "sses", "xes")):
        return w[:-2]
    if len(w) > 3 and low.endswith("s") and not low.endswith(("ss", "us", "is")):
        return w[:-1]
    return w


def _trigrams(word: str) -> frozenset:
    padded = f"#{word.lower()}#"
    return frozenset(padded[i : i + 3] for i in range(len(padded) - 2))


def word_similarity(a: str, b: str) -> float:
    """Lemma match 1.0, case-insensitive match 0.9, else character-trigram Jaccard."""
    if a == b or _lemma(a) == _lemma(b):
        return 1.0
    if a.lower() == b.lower() or _lemma(a).lower() == _lemma(b).lower():
        return 0.9
    ga, gb = _trigrams(a), _trigrams(b)
    return len(ga & gb) / len(ga | gb)


Similarity = Callable[[str, str], float]


@dataclass(frozen=True)
class Candidate:
    """Best span one evidence sentence offers for a chunk."""

    sentence_id: str
    start: int
    end: int
    score: float
    tokens: Tokens
    word_pairs: Tuple[Tuple[int, int], ...] = ()

    def is_del(self, threshold: float) -> bool:
        return self.score < threshold


@dataclass(frozen=True)
class Alignment:
    chunk_index: int
    chunk: ClaimChunk
    candidates: Tuple[Candidate, ...]
    chosen: Optional[Candidate]  # None means Del
    threshold: float

    @property
    def is_del(self) -> bool:
        return self.chosen is None

    def dels(self) -> Tuple[str, ...]:
        """Ids of sentences whose own best span falls below the threshold."""
        return tuple(c.sentence_id for c in self.candidates if c.is_del(self.threshold))


def _span_score(chunk: Tokens, span: Tokens, sim: Similarity) -> float:
    if not span:
        return 0.0
    return sum(max(sim(c, e) for e in span) for c in chunk) / len(chunk)


def _evidence_chunk_bounds(tokens: Tokens, chunker: Optional[Chunker]) -> List[Tuple[int, int]]:
    return (chunker or rule_chunker)(tokens) if tokens else []


def _align_in_sentence(
    chunk: ClaimChunk,
    sent: EvidenceSentence,
    sim: Similarity,
    word_threshold: float,
    max_span: int,
    chunker: Optional[Chunker],
) -> Candidate:
    ev = sent.tokens
    if not ev:
        return Candidate(sent.id, 0, 0, 0.0, ())
    words = chunk.tokens
    scores = [[sim(c, e) for e in ev] for c in words]

    def best(i: int, allowed=None) -> Optional[int]:
        positions = range(len(ev)) if allowed is None else allowed
        top, arg = word_threshold, None
        for j in positions:
            if scores[i][j] > top or (arg is None and scores[i][j] >= top):
                top, arg = scores[i][j], j
        return arg

    pairs: Dict[int, int] = {}
    for i, w in enumerate(words):
        if is_content_word(w):
            j = best(i)
            if j is not None:
                pairs[i] = j
    if pairs:
        lo, hi = min(pairs.values()), max(pairs.values())
        changed = True
        while changed:
            changed = False
            for i, w in enumerate(words):
                if i in pairs:
                    continue
                window = [j for j in range(max(0, lo - 2), min(len(ev), hi + 3))]
                window.sort(key=lambda j: (0 if lo <= j <= hi else min(abs(j - lo), abs(j - hi)), j))
                j = best(i, window)
                if j is not None:
                    pairs[i] = j
                    lo, hi = min(lo, j), max(hi, j)
                    changed = True
    else:
        for i in range(len(words)):
            j = best(i)
            if j is not None:
                pairs[i] = j
    if not pairs:
        return Candidate(sent.id, 0, 0, 0.0, ())

    lo, hi = min(pairs.values()), max(pairs.values())
    aligned = sorted(pairs)
    bounds = _evidence_chunk_bounds(ev, chunker)
    if any(is_content_word(w) for w in words[aligned[-1] + 1 :]):
        hi = max(hi, next(b for a, b in bounds if a <= hi < b) - 1)
        # trailing function words may sit just past the extended span
        for i in range(aligned[-1] + 1, len(words)):
            if not is_content_word(words[i]):
                j = best(i, range(hi + 1, min(len(ev), hi + 3)))
                if j is not None:
                    pairs[i] = j
                    hi = j
    if any(is_content_word(w) for w in words[: aligned[0]]):
        lo = min(lo, next(a for a, b in bounds if a <= lo < b))
    if hi - lo + 1 > max_span:
        hits = set(pairs.values())
        lo = max(range(lo, hi - max_span + 2), key=lambda s: (sum(1 for j in hits if s <= j < s + max_span), -s))
        hi = lo + max_span - 1
    span = ev[lo : hi + 1]
    kept = tuple(sorted((i, j) for i, j in pairs.items() if lo <= j <= hi))
    return Candidate(sent.id, lo, hi + 1, _span_score(words, span, sim), span, kept)


def align(
    chunks: Sequence[ClaimChunk],
    evidence,
    similarity: Optional[Similarity] = None,
    threshold: float = 0.5,
    *,
    word_threshold: float = 0.5,
    max_span: int = MAX_SPAN,
    chunker: Optional[Chunker] = None,
) -> List[Alignment]:
    """Align every chunk against each sentence and pick the best-scoring span.

    Each sentence contributes the contiguous range covering the words aligned
    to the chunk.  The chosen span is the highest-scoring one over all
    sentences (earliest sentence on ties); below ``threshold`` it is a Del.
    """
    sim = similarity or word_similarity
    sentences = as_sentences(evidence)
    out = []
    for k, chunk in enumerate(chunks):
        cands = tuple(_align_in_sentence(chunk, s, sim, word_threshold, max_span, chunker) for s in sentences)
        chosen = None
        for c in cands:
            if c.score >= threshold and (chosen is None or c.score > chosen.score):
                chosen = c
        out.append(Alignment(k, chunk, cands, chosen, threshold))
    return out


# ---------------------------------------------------------------------------
# mutation sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Mutation:
    claim_span: Tokens  # (INS,) for insertions
    evidence_span: Tokens  # (DEL,) for deletions
    claim_range: Optional[Tuple[int, int]] = None
    source: Optional[str] = None
    op: Optional[NatOp] = None
    rule: Optional[str] = None
    word_pairs: Tuple[Tuple[int, int], ...] = ()

    @property
    def is_insertion(self) -> bool:
        return self.claim_span == (INS,)

    @property
    def is_deletion(self) -> bool:
        return self.evidence_span == (DEL,)


@dataclass(frozen=True)
class MutationSeq:
    claim: Tokens
    mutations: Tuple[Mutation, ...]

    @property
    def slots(self) -> Tuple[Optional[NatOp], ...]:
        return tuple(m.op for m in self.mutations)

    def with_ops(self, ops: Sequence[NatOp]) -> "MutationSeq":
        return MutationSeq(self.claim, tuple(dataclasses.replace(m, op=o) for m, o in zip(self.mutations, ops)))

    def to_proof(self, ops: Optional[Sequence[NatOp]] = None) -> Proof:
        ops = self.slots if ops is None else tuple(ops)
        if any(o is None for o in ops):
            raise ValueError("cannot build a proof with unfilled relations")
        steps = [
            ProofStep(m.claim_span, m.evidence_span, o, evidence_source=m.source)
            for m, o in zip(self.mutations, ops)
        ]
        return Proof(self.claim, tuple(steps))


def _mention_chosen(mention: HyperlinkMention, chosen: Sequence[Candidate]) -> bool:
    return any(find_span(c.tokens, mention.tokens) >= 0 for c in chosen)


def build_mutation_seq(
    alignments: Sequence[Alignment],
    hyperlink_mentions: Sequence[HyperlinkMention] = (),
    claim=None,
    evidence=(),
    max_span: int = MAX_SPAN,
) -> MutationSeq:
    """Mutations in claim order, with a linking insertion at each evidence switch."""
    if claim is None:
        claim = tuple(t for a in alignments for t in a.chunk.tokens)
    claim = tokenize(claim)
    sentences = {s.id: s for s in as_sentences(evidence)}
    chosen = [a.chosen for a in alignments if a.chosen is not None]

    out: List[Mutation] = []
    inserted = set()
    previous: Optional[str] = None
    for a in alignments:
        if a.chosen is not None:
            src = a.chosen.sentence_id
            if previous is not None and src != previous:
                ins = _linking_insertion(previous, src, hyperlink_mentions, chosen, sentences, inserted, max_span)
                if ins is not None:
                    out.append(ins)
            previous = src
            out.append(
                Mutation(a.chunk.tokens, a.chosen.tokens, a.chunk.span, src, word_pairs=a.chosen.word_pairs)
            )
        else:
            out.append(Mutation(a.chunk.tokens, (DEL,), a.chunk.span))
    return MutationSeq(claim, tuple(out))


def _linking_insertion(prev, cur, mentions, chosen, sentences, inserted, max_span) -> Optional[Mutation]:
    links = [m for m in mentions if (m.source, m.target) == (prev, cur)]
    links += [m for m in mentions if (m.source, m.target) == (cur, prev)]
    for m in links:
        key = (m.tokens, m.source, m.target)
        if key in inserted or _mention_chosen(m, chosen):
            continue
        if len(m.tokens) > max_span:
            log.warning("mention %r longer than %d words, not inserted", " ".join(m.tokens), max_span)
            continue
        src = m.source
        if src in sentences and find_span(sentences[src].tokens, m.tokens) < 0:
            src = m.target if m.target in sentences and find_span(sentences[m.target].tokens, m.tokens) >= 0 else None
        if src is None:
            log.warning("mention %r does not occur in its sentences", " ".join(m.tokens))
            continue
        inserted.add(key)
        return Mutation((INS,), m.tokens, None, src)
    return None


# ---------------------------------------------------------------------------
# initial relation assignment
# ---------------------------------------------------------------------------


def _low(tokens: Sequence[str]) -> List[str]:
    return [t.casefold() for t in tokens]


def _strip_one_negation(longer: List[str], shorter: List[str], store: KbStore) -> bool:
    if len(longer) != len(shorter) + 1:
        return False
    return any(store.is_negation(w) and longer[:i] + longer[i + 1 :] == shorter for i, w in enumerate(longer))


def _word_relation(c: Sequence[str], e: Sequence[str], store: KbStore) -> Optional[NatOp]:
    if len(c) != 1 or len(e) != 1:
        return None
    op = store.paraphrase(c, e)
    if op is None:
        op = store.paraphrase([_lemma(c[0])], [_lemma(e[0])])
    return op


def _alias(c, e, store: KbStore) -> Optional[NatOp]:
    return NatOp.EQUIVALENCE if store.same_entity(c, e) else None


def _hierarchy(c, e, store: KbStore) -> Optional[NatOp]:
    v = store.hierarchy_relation(c, e)
    return None if v.kind is HierarchyKind.NO_INFO else v.op


_LOOKUPS = {
    "paraphrase": lambda c, e, s: s.paraphrase(c, e),
    "word": _word_relation,
    "alias": _alias,
    "relation": lambda c, e, s: s.kb_relation(c, e),
    "hierarchy": _hierarchy,
}


ARTICLES = frozenset({"a", "an", "the"})


def _diff_blocks(c: List[str], e: List[str]) -> List[Tuple[List[str], List[str]]]:
    """Differing regions of two token lists.

    A region with one empty side borrows the neighbouring shared token
    (right first) so that e.g. ``kafka`` vs ``franz kafka`` becomes a
    substitution rather than a bare insertion.
    """
    matcher = difflib.SequenceMatcher(None, c, e, autojunk=False)
    blocks = []
    for tag, i1, i2, j1, j2 in matcher.get_opcodes():
        if tag == "equal":
            continue
        if i1 == i2 or j1 == j2:
            if i2 < len(c) and j2 < len(e) and c[i2] == e[j2]:
                i2, j2 = i2 + 1, j2 + 1
            elif i1 > 0 and j1 > 0 and c[i1 - 1] == e[j1 - 1]:
                i1, j1 = i1 - 1, j1 - 1
        blocks.append((c[i1:i2], e[j1:j2]))
    return blocks


def _resolve_block(bc: List[str], be: List[str], store: KbStore, lookups: Sequence[str]) -> Optional[NatOp]:
    if not bc or not be:
        return None
    for rule in lookups:
        op = _LOOKUPS[rule](bc, be, store)
        if op is not None:
            return op
    if len(bc) == len(be) and len(bc) > 1:
        result = NatOp.EQUIVALENCE
        for wc, we in zip(bc, be):
            if wc == we:
                continue
            op = _resolve_block([wc], [we], store, lookups)
            if op is None:
                return None
            result = join(result, op)
        return result
    if len(bc) == len(be) == 1 and bc[0] in ARTICLES and be[0] in ARTICLES:
        return NatOp.EQUIVALENCE
    return None


def initial_op(m: Mutation, store: KbStore, rules: Sequence[str] = RULES) -> Tuple[Optional[NatOp], Optional[str]]:
    """Relation for one mutation judged in isolation, and the rule that fired.

    Lookup rules are tried on the whole span pair first, then on each
    differing region, whose relations are joined left to right.
    """
    if m.is_insertion or m.is_deletion:
        if "sentinel" not in rules:
            return None, None
        words = m.evidence_span if m.is_insertion else m.claim_span
        if any(store.is_negation(w) for w in words):
            return NatOp.NEGATION, "sentinel"
        return (NatOp.FORWARD if m.is_insertion else NatOp.REVERSE), "sentinel"

    c, e = _low(m.claim_span), _low(m.evidence_span)
    if "lexical" in rules and c == e:
        return NatOp.EQUIVALENCE, "lexical"
    if "negation" in rules and (_strip_one_negation(c, e, store) or _strip_one_negation(e, c, store)):
        return NatOp.NEGATION, "negation"

    lookups = [r for r in rules if r in _LOOKUPS]
    for rule in lookups:
        op = _LOOKUPS[rule](c, e, store)
        if op is not None:
            return op, rule
    if not lookups:
        return None, None

    result = NatOp.EQUIVALENCE
    for bc, be in _diff_blocks(c, e):
        op = _resolve_block(bc, be, store, lookups)
        if op is None:
            return None, None
        result = join(result, op)
    return result, "blocks"


def assign_initial_natops(seq: MutationSeq, store: KbStore, rules: Sequence[str] = RULES) -> MutationSeq:
    """Fill every slot a rule can decide on its own; the rest stay ``None``."""
    out = []
    for m in seq.mutations:
        op, rule = initial_op(m, store, rules)
        out.append(dataclasses.replace(m, op=op, rule=rule))
    return MutationSeq(seq.claim, tuple(out))


# ---------------------------------------------------------------------------
# filtering
# ---------------------------------------------------------------------------

Slots = Sequence[Optional[NatOp]]


def _domains(slots: Slots, priority: Sequence[NatOp]) -> List[Tuple[NatOp, ...]]:
    return [tuple(priority) if s is None else (s,) for s in slots]


def _reachable(domains: List[Tuple[NatOp, ...]], gold: VeracityLabel) -> List[frozenset]:
    """``ok[i]``: running relations at slot ``i`` from which gold is still reachable."""
    ok = [frozenset()] * (len(domains) + 1)
    ok[-1] = frozenset(r for r in NatOp if project(r) is gold)
    for i in range(len(domains) - 1, -1, -1):
        ok[i] = frozenset(r for r in NatOp if any(join(r, op) in ok[i + 1] for op in domains[i]))
    return ok


def iter_label_candidates(
    slots: Slots, gold: VeracityLabel, priority: Sequence[NatOp] = FILL_PRIORITY
) -> Iterator[Tuple[NatOp, ...]]:
    """Completions of ``slots`` whose verdict is ``gold``, lexicographic in ``priority``.

    Backward reachability over the seven relation states prunes every dead
    branch, so each yielded candidate costs at most ``len(slots)`` steps.
    """
    domains = _domains(slots, priority)
    ok = _reachable(domains, gold)
    if NatOp.EQUIVALENCE not in ok[0]:
        return
    prefix: List[NatOp] = []

    def walk(i: int, rel: NatOp):
        if i == len(domains):
            yield tuple(prefix)
            return
        for op in domains[i]:
            nxt = join(rel, op)
            if nxt in ok[i + 1]:
                prefix.append(op)
                yield from walk(i + 1, nxt)
                prefix.pop()

    yield from walk(0, NatOp.EQUIVALENCE)


def count_label_candidates(slots: Slots, gold: VeracityLabel, priority: Sequence[NatOp] = FILL_PRIORITY) -> int:
    domains = _domains(slots, priority)
    counts = {r: 1 if project(r) is gold else 0 for r in NatOp}
    for dom in reversed(domains):
        counts = {r: sum(counts[join(r, op)] for op in dom) for r in NatOp}
    return counts[NatOp.EQUIVALENCE]


def filter_by_label(
    slots, gold: VeracityLabel, priority: Sequence[NatOp] = FILL_PRIORITY
) -> List[Tuple[NatOp, ...]]:
    """All completions of the partially filled sequence that end in ``gold``.

    Raises:
        NoCandidates: no completion reaches the gold label.
    """
    if isinstance(slots, MutationSeq):
        slots = slots.slots
    out = list(iter_label_candidates(slots, gold, priority))
    if not out:
        raise NoCandidates(f"no completion of {len(slots)} slots reaches {gold}")
    return out


class TransformationKind(enum.Enum):
    SUBSTITUTE_SIMILAR = "SubstituteSimilar"
    SUBSTITUTE_DISSIMILAR = "SubstituteDissimilar"
    PARAPHRASING = "Paraphrasing"
    NEGATION = "Negation"
    TO_SPECIFIC = "ToSpecific"
    TO_GENERAL = "ToGeneral"

    @classmethod
    def parse(cls, text: str) -> "TransformationKind":
        key = "".join(ch for ch in text.casefold() if ch.isalnum())
        for kind in cls:
            if kind.value.casefold() == key or kind.name.replace("_", "").casefold() == key:
                return kind
        aliases = {
            "substitutewithsimilarinfo": cls.SUBSTITUTE_SIMILAR,
            "substitutewithdissimilarinfo": cls.SUBSTITUTE_DISSIMILAR,
            "paraphrase": cls.PARAPHRASING,
            "transformtospecific": cls.TO_SPECIFIC,
            "transformtogeneral": cls.TO_GENERAL,
            "specific": cls.TO_SPECIFIC,
            "general": cls.TO_GENERAL,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown transformation {text!r}") from None


_S, _R, _N = VeracityLabel.SUPPORTS, VeracityLabel.REFUTES, VeracityLabel.NOT_ENOUGH_INFO
TRANSFORMATION_NATOP: Dict[Tuple[TransformationKind, VeracityLabel], NatOp] = {
    (TransformationKind.SUBSTITUTE_SIMILAR, _S): NatOp.FORWARD,
    (TransformationKind.SUBSTITUTE_SIMILAR, _R): NatOp.ALTERNATION,
    (TransformationKind.SUBSTITUTE_SIMILAR, _N): NatOp.REVERSE,
    (TransformationKind.SUBSTITUTE_DISSIMILAR, _S): NatOp.FORWARD,
    (TransformationKind.SUBSTITUTE_DISSIMILAR, _R): NatOp.ALTERNATION,
    (TransformationKind.SUBSTITUTE_DISSIMILAR, _N): NatOp.INDEPENDENCE,
    (TransformationKind.PARAPHRASING, _S): NatOp.EQUIVALENCE,
    (TransformationKind.PARAPHRASING, _R): NatOp.ALTERNATION,
    (TransformationKind.PARAPHRASING, _N): NatOp.INDEPENDENCE,
    **{(TransformationKind.NEGATION, g): NatOp.NEGATION for g in VeracityLabel},
    **{(TransformationKind.TO_SPECIFIC, g): NatOp.FORWARD for g in VeracityLabel},
    **{(TransformationKind.TO_GENERAL, g): NatOp.REVERSE for g in VeracityLabel},
}


@dataclass(frozen=True)
class Transformation:
    kind: TransformationKind
    source: str = "gold"

    def __post_init__(self):
        if self.source not in ("gold", "predicted"):
            raise ValueError(f"transformation source must be 'gold' or 'predicted', not {self.source!r}")

    def required_natop(self, gold: VeracityLabel) -> NatOp:
        return TRANSFORMATION_NATOP[self.kind, gold]

    @classmethod
    def coerce(cls, value) -> Optional["Transformation"]:
        if value is None or isinstance(value, Transformation):
            return value
        if isinstance(value, TransformationKind):
            return cls(value)
        if isinstance(value, str):
            return cls(TransformationKind.parse(value))
        return cls(TransformationKind.parse(value["type"]), value.get("source", "gold"))


class Status(enum.Enum):
    RESOLVED = "Resolved"
    UNRESOLVED = "Unresolved"


@dataclass(frozen=True)
class AnnotationOutcome:
    status: Status
    ops: Optional[Tuple[NatOp, ...]] = None
    proof: Optional[Proof] = None
    candidates: Tuple[Tuple[NatOp, ...], ...] = ()
    reason: str = ""
    seq: Optional[MutationSeq] = field(default=None, compare=False)

    @property
    def resolved(self) -> bool:
        return self.status is Status.RESOLVED


def locate_mutated_region(claim, factoid) -> Tuple[int, int]:
    """Claim token range left after stripping the common prefix and suffix.

    Raises:
        Identical: claim and factoid are the same token sequence.
    """
    claim, factoid = tokenize(claim), tokenize(factoid)
    if claim == factoid:
        raise Identical("claim and factoid are identical")
    limit = min(len(claim), len(factoid))
    p = 0
    while p < limit and claim[p] == factoid[p]:
        p += 1
    s = 0
    while s < limit - p and claim[-1 - s] == factoid[-1 - s]:
        s += 1
    return p, len(claim) - s


def _overlapping_slots(seq: MutationSeq, region: Tuple[int, int]) -> List[int]:
    rs, re_ = region
    out = []
    for k, m in enumerate(seq.mutations):
        if m.claim_range is None:
            continue
        s, e = m.claim_range
        hit = (s < re_ and rs < e) if re_ > rs else (s <= rs <= e)
        if hit:
            out.append(k)
    return out


def filter_by_transformation(
    candidates: Sequence[Tuple[NatOp, ...]],
    transformation,
    gold: VeracityLabel,
    mutated_region: Optional[Tuple[int, int]] = None,
    *,
    seq: Optional[MutationSeq] = None,
    strict: bool = True,
) -> AnnotationOutcome:
    """Keep candidates consistent with the claim's transformation type.

    Strict mode looks for the required relation on a mutation overlapping
    ``mutated_region``; relaxed mode accepts it anywhere in the sequence.
    The first survivor (in input order) is selected.

    Raises:
        RegionRequired: strict mode without a region or mutation sequence.
    """
    t = Transformation.coerce(transformation)
    required = t.required_natop(gold)
    candidates = [tuple(c) for c in candidates]
    if strict:
        if mutated_region is None or seq is None:
            raise RegionRequired("strict transformation filtering needs the mutated region and the mutations")
        slots = _overlapping_slots(seq, mutated_region)
        survivors = [c for c in candidates if any(c[k] is required for k in slots)]
    else:
        survivors = [c for c in candidates if required in c]
    if not survivors:
        return AnnotationOutcome(
            Status.UNRESOLVED,
            candidates=tuple(candidates),
            reason=f"no candidate carries {required.token} for {t.kind.value}/{gold}",
            seq=seq,
        )
    ops = survivors[0]
    proof = seq.to_proof(ops) if seq is not None else None
    return AnnotationOutcome(Status.RESOLVED, ops, proof, tuple(survivors), seq=seq)


# ---------------------------------------------------------------------------
# end to end
# ---------------------------------------------------------------------------


def annotate(
    claim,
    evidence,
    gold,
    transformation=None,
    factoid=None,
    store: Optional[KbStore] = None,
    config: Optional[AnnotationConfig] = None,
    *,
    chunker: Optional[Chunker] = None,
    similarity: Optional[Similarity] = None,
) -> AnnotationOutcome:
    """Build a proof for one claim whose verdict equals ``gold``.

    Hyperlinked mentions are read from the evidence sentences.
    """
    config = config or AnnotationConfig()
    store = store if store is not None else KbStore()
    gold = gold if isinstance(gold, VeracityLabel) else VeracityLabel.parse(gold)
    claim = tokenize(claim)
    sentences = as_sentences(evidence)
    check_words(claim, "claim")
    for s in sentences:
        check_words(s.tokens, f"evidence sentence {s.id}")

    chunks = chunk_claim(claim, chunker, config.max_span)
    alignments = align(
        chunks,
        sentences,
        similarity,
        config.threshold,
        word_threshold=config.word_threshold,
        max_span=config.max_span,
        chunker=chunker,
    )
    mentions = [m for s in sentences for m in s.mentions]
    seq = build_mutation_seq(alignments, mentions, claim, sentences, config.max_span)
    seq = assign_initial_natops(seq, store, config.rules)

    try:
        candidates = filter_by_label(seq.slots, gold, config.fill_priority)
    except NoCandidates as exc:
        return AnnotationOutcome(Status.UNRESOLVED, reason=str(exc), seq=seq)

    t = Transformation.coerce(transformation)
    if t is not None:
        region = locate_mutated_region(claim, factoid) if factoid is not None else None
        outcome = filter_by_transformation(candidates, t, gold, region, seq=seq, strict=config.strict)
    else:
        ops = candidates[0]
        outcome = AnnotationOutcome(Status.RESOLVED, ops, seq.to_proof(ops), tuple(candidates), seq=seq)

    if outcome.resolved:
        proof = outcome.proof
        if verdict(proof.ops) is not gold:
            raise AssertionError("resolved proof does not reach the gold label")
        reparsed = parse(serialize(proof), claim, sentences, max_span=config.max_span)
        if reparsed != proof:
            raise AssertionError("resolved proof does not survive a markup round trip")
    return outcome
