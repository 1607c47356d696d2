"""Read-only lexical knowledge used to assign relations to mutations.

Five tab-separated inputs (UTF-8, ``#`` starts a comment line):

* paraphrases ``lhs<TAB>rhs<TAB>OP`` where OP is a relation token, a
  relation name (``FWD``, ``REV``, ...) or a word-relation flag
  (``synonym``, ``hypernym``, ``hyponym``, ``antonym``).  The relation is
  the one assigned when ``lhs`` is on the claim side.
* aliases ``canonical<TAB>alias``
* relations ``relation_id<TAB>op_claim_to_evidence<TAB>op_evidence_to_claim``
* graph edges ``child<TAB>parent<TAB>edge_type``; ``instance_of``,
  ``part_of`` and ``subclass_of`` edges form the concept hierarchy, every
  other edge type is a KB relation looked up through the relations map.
* negation words, one per line.
"""

from __future__ import annotations

import enum
import json
import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple, Union

from .errors import CycleError, SchemaError
from .natlog import NatOp

log = logging.getLogger(__name__)

PathLike = Union[str, Path]

HIERARCHY_EDGE_TYPES = frozenset(
    {"instance_of", "part_of", "subclass_of", "instance of", "part of", "subclass of", "P31", "P361", "P279"}
)
MAX_HIERARCHY_DEPTH = 3
SNAPSHOT_VERSION = 1

_OP_NAMES = {
    "EQ": NatOp.EQUIVALENCE,
    "EQUIVALENCE": NatOp.EQUIVALENCE,
    "FWD": NatOp.FORWARD,
    "FORWARD": NatOp.FORWARD,
    "REV": NatOp.REVERSE,
    "REVERSE": NatOp.REVERSE,
    "NEG": NatOp.NEGATION,
    "NEGATION": NatOp.NEGATION,
    "ALT": NatOp.ALTERNATION,
    "ALTERNATION": NatOp.ALTERNATION,
    "COV": NatOp.COVER,
    "COVER": NatOp.COVER,
    "IND": NatOp.INDEPENDENCE,
    "INDEPENDENCE": NatOp.INDEPENDENCE,
    # word relations: rhs relative to lhs
    "SYNONYM": NatOp.EQUIVALENCE,
    "HYPERNYM": NatOp.REVERSE,
    "HYPONYM": NatOp.FORWARD,
    "ANTONYM": NatOp.ALTERNATION,
}


def parse_op(text: str) -> NatOp:
    text = text.strip()
    try:
        return NatOp.from_token(text)
    except ValueError:
        pass
    try:
        return _OP_NAMES[text.upper()]
    except KeyError:
        raise SchemaError(f"unknown relation {text!r}") from None


def norm(text: Union[str, Iterable[str]]) -> str:
    if not isinstance(text, str):
        text = " ".join(text)
    return " ".join(text.casefold().split())


class HierarchyKind(enum.Enum):
    PARENT_CHILD = "ParentChild"
    SIBLING = "Sibling"
    UNRELATED_CONNECTED = "UnrelatedConnected"
    NO_INFO = "NoInfo"


@dataclass(frozen=True)
class HierarchyVerdict:
    kind: HierarchyKind
    op: Optional[NatOp] = None


NO_INFO = HierarchyVerdict(HierarchyKind.NO_INFO)


@dataclass
class KbStore:
    """Lookup tables; keys are case-folded.  Treat as immutable once built."""

    paraphrases: Dict[Tuple[str, str], NatOp] = field(default_factory=dict)
    aliases: Dict[str, FrozenSet[str]] = field(default_factory=dict)
    relation_natop: Dict[str, Tuple[Optional[NatOp], Optional[NatOp]]] = field(default_factory=dict)
    hierarchy: Dict[str, FrozenSet[str]] = field(default_factory=dict)
    edges: Dict[Tuple[str, str], Tuple[str, ...]] = field(default_factory=dict)
    negation_lexicon: FrozenSet[str] = frozenset()

    def __post_init__(self):
        self._alias_index: Dict[str, FrozenSet[str]] = {}
        index: Dict[str, Set[str]] = defaultdict(set)
        for canonical, forms in self.aliases.items():
            index[canonical].add(canonical)
            for form in forms:
                index[form].add(canonical)
        self._alias_index = {k: frozenset(v) for k, v in index.items()}
        children: Dict[str, Set[str]] = defaultdict(set)
        for child, parents in self.hierarchy.items():
            for parent in parents:
                children[parent].add(child)
        self._children = {k: frozenset(v) for k, v in children.items()}

    # -- lookups ----------------------------------------------------------

    def is_negation(self, word: str) -> bool:
        return word.casefold() in self.negation_lexicon

    def paraphrase(self, claim_side, evidence_side) -> Optional[NatOp]:
        """Stored relation for the pair, using the inverse row if only that exists."""
        a, b = norm(claim_side), norm(evidence_side)
        op = self.paraphrases.get((a, b))
        if op is not None:
            return op
        op = self.paraphrases.get((b, a))
        return op.inverse if op is not None else None

    def entities(self, surface) -> FrozenSet[str]:
        """Canonical entities a surface form may refer to (itself included)."""
        key = norm(surface)
        return self._alias_index.get(key, frozenset()) | {key}

    def same_entity(self, a, b) -> bool:
        a, b = norm(a), norm(b)
        if a == b:
            return True
        return bool(self._alias_index.get(a, frozenset()) & self._alias_index.get(b, frozenset()))

    def kb_relation(self, claim_side, evidence_side) -> Optional[NatOp]:
        """Relation from a mapped KB edge between the two entities, if any."""
        for c in sorted(self.entities(claim_side)):
            for e in sorted(self.entities(evidence_side)):
                for rel in self.edges.get((c, e), ()):
                    op = self.relation_natop.get(rel, (None, None))[0]
                    if op is not None:
                        return op
                for rel in self.edges.get((e, c), ()):
                    op = self.relation_natop.get(rel, (None, None))[1]
                    if op is not None:
                        return op
        return None

    def _ancestors(self, concept: str, limit: Optional[int]) -> Dict[str, int]:
        """Ancestors reachable upward within ``limit`` edges, with distances."""
        dist = {concept: 0}
        queue = deque([concept])
        while queue:
            node = queue.popleft()
            if limit is not None and dist[node] >= limit:
                continue
            for parent in self.hierarchy.get(node, ()):
                if parent not in dist:
                    dist[parent] = dist[node] + 1
                    queue.append(parent)
        return dist

    def _connected(self, a: str, b: str) -> bool:
        seen = {a}
        queue = deque([a])
        while queue:
            node = queue.popleft()
            if node == b:
                return True
            for nxt in self.hierarchy.get(node, frozenset()) | self._children.get(node, frozenset()):
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return False

    def hierarchy_relation(self, claim_concept, evidence_concept) -> HierarchyVerdict:
        """Classify two concepts by their position in the hierarchy.

        A claim concept below the evidence concept (within three edges) is a
        generalisation and gets ``>``; the other direction gets ``<``.
        """
        best = NO_INFO
        for a in sorted(self.entities(claim_concept)):
            for b in sorted(self.entities(evidence_concept)):
                verdict = self._hierarchy_pair(a, b)
                if _RANK[verdict.kind] < _RANK[best.kind]:
                    best = verdict
        return best

    def _hierarchy_pair(self, a: str, b: str) -> HierarchyVerdict:
        if a == b or (a not in self.hierarchy and a not in self._children) or (
            b not in self.hierarchy and b not in self._children
        ):
            return NO_INFO
        up_a = self._ancestors(a, MAX_HIERARCHY_DEPTH)
        if b in up_a:
            return HierarchyVerdict(HierarchyKind.PARENT_CHILD, NatOp.REVERSE)
        up_b = self._ancestors(b, MAX_HIERARCHY_DEPTH)
        if a in up_b:
            return HierarchyVerdict(HierarchyKind.PARENT_CHILD, NatOp.FORWARD)
        if (set(up_a) - {a}) & (set(up_b) - {b}):
            return HierarchyVerdict(HierarchyKind.SIBLING, NatOp.ALTERNATION)
        if self._connected(a, b):
            return HierarchyVerdict(HierarchyKind.UNRELATED_CONNECTED, NatOp.INDEPENDENCE)
        return NO_INFO

    # -- persistence ------------------------------------------------------

    def to_json(self) -> dict:
        def op(o):
            return None if o is None else o.token

        return {
            "version": SNAPSHOT_VERSION,
            "paraphrases": sorted([a, b, o.token] for (a, b), o in self.paraphrases.items()),
            "aliases": {k: sorted(v) for k, v in sorted(self.aliases.items())},
            "relation_natop": {k: [op(v[0]), op(v[1])] for k, v in sorted(self.relation_natop.items())},
            "hierarchy": {k: sorted(v) for k, v in sorted(self.hierarchy.items())},
            "edges": sorted([a, b, list(r)] for (a, b), r in self.edges.items()),
            "negation_lexicon": sorted(self.negation_lexicon),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "KbStore":
        if data.get("version") != SNAPSHOT_VERSION:
            raise SchemaError(f"unsupported snapshot version {data.get('version')!r}")

        def op(t):
            return None if t is None else NatOp.from_token(t)

        return cls(
            paraphrases={(a, b): NatOp.from_token(o) for a, b, o in data["paraphrases"]},
            aliases={k: frozenset(v) for k, v in data["aliases"].items()},
            relation_natop={k: (op(v[0]), op(v[1])) for k, v in data["relation_natop"].items()},
            hierarchy={k: frozenset(v) for k, v in data["hierarchy"].items()},
            edges={(a, b): tuple(r) for a, b, r in data["edges"]},
            negation_lexicon=frozenset(data["negation_lexicon"]),
        )

    def save(self, path: PathLike) -> None:
        text = json.dumps(self.to_json(), ensure_ascii=False, sort_keys=True, indent=1)
        Path(path).write_text(text + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: PathLike) -> "KbStore":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


_RANK = {
    HierarchyKind.PARENT_CHILD: 0,
    HierarchyKind.SIBLING: 1,
    HierarchyKind.UNRELATED_CONNECTED: 2,
    HierarchyKind.NO_INFO: 3,
}


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------


def _rows(path: Optional[PathLike], ncols: Tuple[int, ...]) -> Iterable[Tuple[int, List[str]]]:
    if path is None:
        return
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            cols = [c.strip() for c in line.split("\t")]
            if len(cols) not in ncols or not all(cols):
                raise SchemaError(f"{path}:{lineno}: expected {' or '.join(map(str, ncols))} non-empty columns")
            yield lineno, cols


def _put(table: dict, key, value, where: str) -> None:
    if key in table and table[key] != value:
        log.warning("%s: duplicate key %r, last value wins", where, key)
    table[key] = value


def build_store(
    paraphrase_file: Optional[PathLike] = None,
    alias_file: Optional[PathLike] = None,
    relation_file: Optional[PathLike] = None,
    hierarchy_file: Optional[PathLike] = None,
    negation_file: Optional[PathLike] = None,
) -> KbStore:
    """Ingest the TSV files; any of them may be omitted.

    Raises:
        SchemaError: malformed rows, unknown relations, or a relation whose two
            directions are not inverses of each other.
        CycleError: the concept hierarchy contains a cycle.
    """
    paraphrases: Dict[Tuple[str, str], NatOp] = {}
    for lineno, (lhs, rhs, op) in _rows(paraphrase_file, (3,)):
        _put(paraphrases, (norm(lhs), norm(rhs)), parse_op(op), f"{paraphrase_file}:{lineno}")

    aliases: Dict[str, Set[str]] = defaultdict(set)
    for _, (canonical, alias) in _rows(alias_file, (2,)):
        aliases[norm(canonical)].add(norm(alias))

    relation_natop: Dict[str, Tuple[Optional[NatOp], Optional[NatOp]]] = {}
    for lineno, cols in _rows(relation_file, (2, 3)):
        fwd = parse_op(cols[1])
        back = parse_op(cols[2]) if len(cols) == 3 else None
        if back is not None and fwd.inverse is not back:
            raise SchemaError(
                f"{relation_file}:{lineno}: directions {fwd.token} and {back.token} are not inverses"
            )
        _put(relation_natop, cols[0], (fwd, back), f"{relation_file}:{lineno}")

    hierarchy: Dict[str, Set[str]] = defaultdict(set)
    edges: Dict[Tuple[str, str], List[str]] = defaultdict(list)
    for _, (child, parent, edge_type) in _rows(hierarchy_file, (3,)):
        child, parent = norm(child), norm(parent)
        if edge_type in HIERARCHY_EDGE_TYPES:
            hierarchy[child].add(parent)
        elif edge_type not in edges[child, parent]:
            edges[child, parent].append(edge_type)
    _check_acyclic(hierarchy)

    negations: Set[str] = set()
    for _, (word,) in _rows(negation_file, (1,)):
        negations.add(word.casefold())

    return KbStore(
        paraphrases=paraphrases,
        aliases={k: frozenset(v) for k, v in aliases.items()},
        relation_natop=relation_natop,
        hierarchy={k: frozenset(v) for k, v in hierarchy.items()},
        edges={k: tuple(v) for k, v in edges.items()},
        negation_lexicon=frozenset(negations),
    )


def _check_acyclic(graph: Mapping[str, Iterable[str]]) -> None:
    white, grey, black = 0, 1, 2
    color: Dict[str, int] = defaultdict(int)
    for root in sorted(graph):
        if color[root] != white:
            continue
        stack = [(root, iter(sorted(graph.get(root, ()))))]
        color[root] = grey
        while stack:
            node, it = stack[-1]
            for nxt in it:
                if color[nxt] == grey:
                    raise CycleError(f"hierarchy cycle through {nxt!r} and {node!r}")
                if color[nxt] == white:
                    color[nxt] = grey
                    stack.append((nxt, iter(sorted(graph.get(nxt, ())))))
                    break
            else:
                color[node] = black
                stack.pop()


def is_negation(store: KbStore, word: str) -> bool:
    return store.is_negation(word)


def hierarchy_relation(store: KbStore, a, b) -> HierarchyVerdict:
    return store.hierarchy_relation(a, b)
