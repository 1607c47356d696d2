import random
import warnings

import pytest

from conftest import TRIAL_CLAIM, TRIAL_EVIDENCE, TRIAL_MARKUP
from natproof.constraints import ConstraintAutomaton
from natproof.errors import CoverageError, GrammarError, MarkupError, SpanNotFound, UnknownOp
from natproof.markup import TokenKind, check_words, classify, parse, serialize, to_string
from natproof.natlog import DEL, INS, NatOp, Proof, ProofStep
from oracles import random_instance, random_proof

CLAIM = TRIAL_CLAIM.split()
EVIDENCE = [TRIAL_EVIDENCE.split()]


def test_parse_trial_novel():
    proof = parse(TRIAL_MARKUP, CLAIM, EVIDENCE)
    assert len(proof.steps) == 3
    assert proof.steps[1] == ProofStep(("is", "a", "short", "story"), ("is", "a", "novel"), NatOp.ALTERNATION)
    assert proof.ops == (NatOp.EQUIVALENCE, NatOp.ALTERNATION, NatOp.EQUIVALENCE)
    assert proof.steps[0].evidence_source == "0"


def test_serialize_trial_novel():
    proof = parse(TRIAL_MARKUP, CLAIM, EVIDENCE)
    assert to_string(proof) == TRIAL_MARKUP
    assert serialize(proof) == TRIAL_MARKUP.split()


def test_ascii_alias_accepted_canonical_emitted():
    proof = parse(TRIAL_MARKUP.replace("≡", "=="), CLAIM, EVIDENCE)
    assert to_string(proof) == TRIAL_MARKUP


def test_empty():
    assert parse("", "", []) == Proof((), ())
    assert to_string(Proof(())) == ""


def test_sentinels():
    claim = "Rex barks loudly".split()
    proof = parse("{ Rex } [ Rex ] ≡ { <INS> } [ dog ] < { barks loudly } [ <DEL> ] >", claim, ["Rex the dog"])
    assert proof.steps[1].is_insertion and proof.steps[2].is_deletion
    assert proof.steps[2].evidence_source is None


def test_unusual_sentinel_op_warns():
    with pytest.warns(UserWarning):
        parse("{ a } [ <DEL> ] |", ["a"], [])


@pytest.mark.parametrize(
    "text,error",
    [
        ("{ The Trial } [ The Trial ≡", GrammarError),
        ("{ The Trial } [ The Trial ] ≡ { is a short story } [ is a novel |", GrammarError),
        ("The Trial } [ The Trial ] ≡", GrammarError),
        ("{ The Trial } The Trial ] ≡", GrammarError),
        ("{ } [ The Trial ] ≡", GrammarError),
        ("{ The Trial } [ ] ≡", GrammarError),
        ("{ The Trial } [ The Trial ]", GrammarError),
        ("{ The Trial } [ The Trial ] {", GrammarError),
        ("{ The <INS> } [ The ] ≡", GrammarError),
        ("{ The } [ The <DEL> ] ≡", GrammarError),
        ("{ <INS> } [ <DEL> ] >", GrammarError),
        ("{ The Trial } [ The Trial ] =", UnknownOp),
        ("{ The Trial } [ The Trial ] ~", UnknownOp),
        ("{ Trial The } [ The Trial ] ≡", CoverageError),
        ("{ The Trial } [ The Trial ] ≡", CoverageError),
        ("{ The Trial } [ The Film ] ≡", SpanNotFound),
    ],
)
def test_grammar_violations(text, error):
    with pytest.raises(error):
        parse(text, CLAIM, EVIDENCE)


def test_strict_mode_extras():
    claim = "a b c d e f g h".split()
    long_markup = "{ a b c d e f g h } [ <DEL> ] >"
    with pytest.raises(GrammarError):
        parse(long_markup, claim, [])
    assert len(parse(long_markup, claim, [], strict=False).steps) == 1
    with pytest.raises(CoverageError):
        parse("{ a } [ <DEL> ] > { <INS> } [ x ] <", ["a"], [["x"]])
    assert len(parse("{ a } [ <DEL> ] > { <INS> } [ x ] <", ["a"], [["x"]], strict=False).steps) == 2
    assert parse("{ a } [ a ] ~", ["a"], [["a"]], strict=False).ops == (NatOp.COVER,)


def test_errors_share_base():
    for cls in (GrammarError, CoverageError, SpanNotFound, UnknownOp):
        assert issubclass(cls, MarkupError)


def test_classify_and_reserved_words():
    assert classify("{") is TokenKind.OPEN_CLAIM
    assert classify("|", after_close_evidence=True) is TokenKind.NATOP
    assert classify("|") is TokenKind.WORD
    with pytest.raises(GrammarError):
        check_words(["a", "]"])


def test_random_round_trips():
    rng = random.Random(7)
    for _ in range(1000):
        claim, evidence = random_instance(rng)
        proof = random_proof(rng, claim, evidence)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert parse(serialize(proof), claim, evidence) == proof


def _mutate(rng, tokens, pool):
    tokens = list(tokens)
    kind = rng.randrange(3)
    pos = rng.randrange(len(tokens) + (kind == 1))
    if kind == 0 and tokens:
        del tokens[pos]
    elif kind == 1:
        tokens.insert(pos, rng.choice(pool))
    elif tokens:
        tokens[pos] = rng.choice(pool)
    return tokens


def test_parse_agrees_with_automaton_on_fuzzed_markup():
    rng = random.Random(11)
    pool = ["{", "}", "[", "]", INS, DEL, "≡", "<", ">", "!", "|", "#", "~", "alpha", "beta", "gamma"]
    checked = 0
    for _ in range(1500):
        claim, evidence = random_instance(rng, max_claim=6, max_sentences=2, max_sentence=6)
        tokens = serialize(random_proof(rng, claim, evidence))
        if rng.random() < 0.8:
            tokens = _mutate(rng, tokens, pool)
        auto = ConstraintAutomaton(claim, evidence)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                parse(tokens, claim, evidence)
            parsed = True
        except MarkupError:
            parsed = False
        assert auto.accepts(tokens) == parsed, (claim, evidence, tokens)
        checked += 1
    assert checked == 1500
