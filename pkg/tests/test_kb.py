import json
import logging

import pytest
from hypothesis import given, settings, strategies as st

from natproof.errors import CycleError, SchemaError
from natproof.kb import HierarchyKind, KbStore, build_store, hierarchy_relation, is_negation, parse_op
from natproof.fixtures import fixture_store, kb_paths
from natproof.natlog import NatOp


def write(tmp_path, name, lines):
    path = tmp_path / name
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


def test_alias_lookup(tmp_path):
    store = build_store(alias_file=write(tmp_path, "a.tsv", ["The Trial\tDer Prozess"]))
    assert store.same_entity("Der Prozess", "The Trial")
    assert store.same_entity("der prozess", "THE TRIAL")
    assert not store.same_entity("Der Prozess", "The Castle")


def test_empty_files(tmp_path):
    paths = {k: write(tmp_path, f"{k}.tsv", []) for k in kb_paths()}
    store = build_store(**paths)
    assert store.hierarchy_relation("a", "b").kind is HierarchyKind.NO_INFO
    assert store.paraphrase("a", "b") is None and store.kb_relation("a", "b") is None
    assert not store.is_negation("not")


def test_genre_relation(tmp_path):
    store = build_store(
        relation_file=write(tmp_path, "r.tsv", ["genre\tREV\tFWD"]),
        hierarchy_file=write(tmp_path, "h.tsv", ["The Trial\tnovel\tgenre"]),
    )
    assert store.kb_relation("The Trial", "novel") is NatOp.REVERSE
    assert store.kb_relation("novel", "The Trial") is NatOp.FORWARD


def test_relation_directions_must_be_inverse(tmp_path):
    with pytest.raises(SchemaError):
        build_store(relation_file=write(tmp_path, "r.tsv", ["genre\tREV\tREV"]))


@pytest.mark.parametrize(
    "name,lines",
    [
        ("paraphrase_file", ["only two\tcolumns"]),
        ("paraphrase_file", ["a\tb\tnonsense"]),
        ("alias_file", ["a\tb\tc"]),
        ("hierarchy_file", ["a\tb"]),
        ("relation_file", ["genre\t\tFWD"]),
    ],
)
def test_schema_errors(tmp_path, name, lines):
    with pytest.raises(SchemaError):
        build_store(**{name: write(tmp_path, "x.tsv", lines)})


def test_cycle_rejected(tmp_path):
    lines = ["a\tb\tsubclass_of", "b\tc\tpart_of", "c\ta\tinstance_of"]
    with pytest.raises(CycleError):
        build_store(hierarchy_file=write(tmp_path, "h.tsv", lines))
    # non-hierarchy edges may loop
    build_store(hierarchy_file=write(tmp_path, "h2.tsv", ["a\tb\tspouse", "b\ta\tspouse"]))


def test_duplicate_last_wins(tmp_path, caplog):
    lines = ["big\tlarge\t≡", "big\tlarge\t<"]
    with caplog.at_level(logging.WARNING, logger="natproof.kb"):
        store = build_store(paraphrase_file=write(tmp_path, "p.tsv", lines))
    assert store.paraphrase("big", "large") is NatOp.FORWARD
    assert "duplicate" in caplog.text


def test_comments_and_ops(tmp_path):
    store = build_store(paraphrase_file=write(tmp_path, "p.tsv", ["# comment", "", "big\tlarge\tsynonym"]))
    assert store.paraphrase("Big", "LARGE") is NatOp.EQUIVALENCE
    assert parse_op("==") is NatOp.EQUIVALENCE
    assert parse_op("FWD") is NatOp.FORWARD
    assert parse_op("hyponym") is NatOp.FORWARD
    assert parse_op("antonym") is NatOp.ALTERNATION


def test_paraphrase_inverse_row(store):
    assert store.paraphrase("dog", "animal") is NatOp.REVERSE
    assert store.paraphrase("animal", "dog") is NatOp.FORWARD


def test_hierarchy_examples(store):
    v = hierarchy_relation(store, "Rashomon", "work of art")
    assert v.kind is HierarchyKind.PARENT_CHILD and v.op is NatOp.REVERSE
    v = hierarchy_relation(store, "work of art", "Rashomon")
    assert v.kind is HierarchyKind.PARENT_CHILD and v.op is NatOp.FORWARD
    v = hierarchy_relation(store, "Rashomon", "Inception")
    assert v.kind is HierarchyKind.SIBLING and v.op is NatOp.ALTERNATION
    v = hierarchy_relation(store, "novel", "Rashomon")
    assert v.kind is HierarchyKind.UNRELATED_CONNECTED and v.op is NatOp.INDEPENDENCE
    assert hierarchy_relation(store, "Rashomon", "zebra").kind is HierarchyKind.NO_INFO


def test_parent_child_depth_bound(tmp_path):
    lines = ["a\tb\tsubclass_of", "b\tc\tsubclass_of", "c\td\tsubclass_of", "d\te\tsubclass_of"]
    store = build_store(hierarchy_file=write(tmp_path, "h.tsv", lines))
    assert store.hierarchy_relation("a", "d").kind is HierarchyKind.PARENT_CHILD
    assert store.hierarchy_relation("a", "e").kind is HierarchyKind.UNRELATED_CONNECTED


def test_negation(store):
    assert is_negation(store, "not") and is_negation(store, "Never")
    assert not is_negation(store, "novel")


def test_negation_lexicon_round_trip(store):
    lines = [l.strip() for l in kb_paths()["negation_file"].read_text(encoding="utf-8").splitlines()]
    words = {l.casefold() for l in lines if l and not l.startswith("#")}
    assert store.negation_lexicon == words


def test_snapshot_round_trip_and_determinism(store, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    store.save(a)
    build_store(**kb_paths()).save(b)
    assert a.read_bytes() == b.read_bytes()
    assert KbStore.load(a).to_json() == store.to_json()
    data = json.loads(a.read_text(encoding="utf-8"))
    data["version"] = 99
    with pytest.raises(SchemaError):
        KbStore.from_json(data)


STORE = fixture_store()
concepts = st.sampled_from(
    ["rashomon", "inception", "film", "work of art", "novel", "dog", "animal", "paris", "lyon", "france", "europe", "zebra"]
)


@settings(max_examples=200)
@given(concepts, concepts)
def test_hierarchy_symmetries(a, b):
    x, y = STORE.hierarchy_relation(a, b), STORE.hierarchy_relation(b, a)
    if x.kind is HierarchyKind.PARENT_CHILD:
        assert y.kind is HierarchyKind.PARENT_CHILD and y.op is x.op.inverse
    else:
        assert x == y

