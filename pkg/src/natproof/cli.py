"""Command-line entry points.

Subcommands: ``kb-build``, ``annotate``, ``verify``, ``evaluate``,
``explain`` and ``constrain``.  Batch commands read and write JSONL; a bad
record produces an error record and the run carries on.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence

from . import __version__
from .annotation import AnnotationConfig, annotate
from .constraints import ConstraintAutomaton, serve
from .errors import NatProofError
from .explain import render, render_text
from .kb import KbStore, build_store
from .markup import parse, to_string
from .metrics import (
    PredictionRecord,
    extract_rationale,
    fever_score,
    label_accuracy,
    pair_predictions,
    ser,
    token_f1,
)
from .natlog import verdict_of_proof
from .records import ClaimRecord, dumps, evidence_to_json, read_jsonl

log = logging.getLogger("natproof")


@contextlib.contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _error_record(rec_id, exc: BaseException, lineno: int) -> dict:
    return {"id": rec_id, "line": lineno, "error": str(exc), "error_type": type(exc).__name__}


def _map_ordered(fn, items: Sequence, jobs: int) -> Iterable:
    if jobs <= 1:
        yield from map(fn, items)
        return
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        yield from pool.map(fn, items)


# -- kb-build ---------------------------------------------------------------


def cmd_kb_build(args) -> int:
    store = build_store(args.paraphrases, args.aliases, args.relations, args.hierarchy, args.negations)
    store.save(args.out)
    log.info("wrote knowledge store to %s", args.out)
    return 0


def _load_store(path: Optional[str]) -> KbStore:
    if path is None:
        return KbStore()
    if path == "builtin":
        from .fixtures import fixture_store

        return fixture_store()
    return KbStore.load(path)


# -- annotate ---------------------------------------------------------------


def annotate_record(obj, lineno: int, store: KbStore, config: AnnotationConfig, max_evidence: Optional[int]) -> dict:
    rec_id = obj.get("id") if isinstance(obj, dict) else None
    try:
        if isinstance(obj, Exception):
            raise obj
        rec = ClaimRecord.from_json(obj, max_evidence)
        if rec.label is None:
            raise NatProofError("annotation needs a gold label")
        outcome = annotate(
            rec.claim, rec.evidence, rec.label, rec.transformation, rec.factoid, store=store, config=config
        )
    except (NatProofError, ValueError, KeyError) as exc:
        return _error_record(rec_id, exc, lineno)
    out = {
        "id": rec.id,
        "claim": " ".join(rec.claim),
        "evidence": evidence_to_json(rec.evidence),
        "label": rec.label.value,
        "status": outcome.status.value,
        "proof": to_string(outcome.proof) if outcome.proof is not None else None,
        "candidates": [[op.token for op in c] for c in outcome.candidates],
    }
    if outcome.reason:
        out["reason"] = outcome.reason
    if outcome.seq is not None:
        out["slots"] = [None if op is None else op.token for op in outcome.seq.slots]
    return out


def cmd_annotate(args) -> int:
    store = _load_store(args.kb)
    config = AnnotationConfig.load(args.config, args.set or ())
    items = list(read_jsonl(args.input))

    def run(item):
        lineno, obj = item
        return annotate_record(obj, lineno, store, config, args.max_evidence)

    with _output(args.out) as fh:
        for rec in _map_ordered(run, items, args.jobs):
            fh.write(dumps(rec) + "\n")
    return 0


# -- verify -----------------------------------------------------------------


def verify_record(obj, lineno: int) -> dict:
    rec_id = obj.get("id") if isinstance(obj, dict) else None
    try:
        if isinstance(obj, Exception):
            raise obj
        rec = ClaimRecord.from_json(obj, max_evidence=None)
        markup = obj.get("proof")
        if not isinstance(markup, str):
            raise NatProofError("record has no proof markup")
        proof = parse(markup, rec.claim, rec.evidence)
    except (NatProofError, ValueError, KeyError) as exc:
        return _error_record(rec_id, exc, lineno)
    sources = []
    for step in proof.steps:
        if step.evidence_source is not None and step.evidence_source not in sources:
            sources.append(step.evidence_source)
    out = {
        "id": rec.id,
        "predicted_label": verdict_of_proof(proof).value,
        "predicted_evidence": sources,
        "rationale": sorted(extract_rationale(proof)),
    }
    if rec.label is not None:
        out["label"] = rec.label.value
    if "gold_evidence" in obj:
        out["evidence"] = obj["gold_evidence"]
    return out


def cmd_verify(args) -> int:
    with _output(args.out) as fh:
        for lineno, obj in read_jsonl(args.input):
            fh.write(dumps(verify_record(obj, lineno)) + "\n")
    return 0


# -- evaluate ---------------------------------------------------------------


def _load_predictions(path: str) -> List[PredictionRecord]:
    out = []
    for lineno, obj in read_jsonl(path):
        if isinstance(obj, Exception) or "error" in obj:
            log.warning("%s:%d: skipping error record", path, lineno)
            continue
        out.append(PredictionRecord.from_json(obj))
    return out


def _merge_gold(records: List[PredictionRecord], gold_path: str) -> List[PredictionRecord]:
    gold: Dict[str, PredictionRecord] = {}
    for _, obj in read_jsonl(gold_path):
        if isinstance(obj, Exception):
            continue
        obj = dict(obj)
        obj.setdefault("predicted_label", obj.get("label"))
        g = PredictionRecord.from_json(obj)
        gold[g.id] = g
    merged = []
    for r in records:
        g = gold.get(r.id)
        if g is None:
            log.warning("no gold record for %s", r.id)
            continue
        merged.append(PredictionRecord(r.id, r.predicted_label, r.predicted_evidence, g.label, g.evidence))
    return merged


def evaluate_report(args) -> Dict[str, float]:
    records = _load_predictions(args.predictions)
    if args.gold:
        records = _merge_gold(records, args.gold)
    report = {
        "label_accuracy": label_accuracy(records),
        "fever_score": fever_score(records, args.max_evidence),
        "n": len(records),
    }
    if args.augmented:
        pairs = pair_predictions(records, _load_predictions(args.augmented))
        report["ser"] = ser(pairs, args.ser_denominator)
    if args.rationales:
        predicted = {}
        for _, obj in read_jsonl(args.predictions):
            if isinstance(obj, dict) and "rationale" in obj:
                predicted[str(obj["id"])] = obj["rationale"]
        scores = []
        for _, obj in read_jsonl(args.rationales):
            if isinstance(obj, dict) and str(obj.get("id")) in predicted:
                scores.append(token_f1(predicted[str(obj["id"])], obj.get("rationale") or ()))
        if scores:
            report["rationale_precision"] = sum(s[0] for s in scores) / len(scores)
            report["rationale_recall"] = sum(s[1] for s in scores) / len(scores)
            report["rationale_f1"] = sum(s[2] for s in scores) / len(scores)
    return report


def cmd_evaluate(args) -> int:
    report = evaluate_report(args)
    if args.json:
        print(json.dumps(report, sort_keys=True))
    else:
        for key in sorted(report):
            value = report[key]
            print(f"{key}\t{value:.4f}" if isinstance(value, float) else f"{key}\t{value}")
    return 0


# -- explain ----------------------------------------------------------------


def cmd_explain(args) -> int:
    with _output(args.out) as fh:
        for lineno, obj in read_jsonl(args.input):
            rec_id = obj.get("id") if isinstance(obj, dict) else None
            try:
                if isinstance(obj, Exception):
                    raise obj
                rec = ClaimRecord.from_json(obj, max_evidence=None)
                proof = parse(obj.get("proof") or "", rec.claim, rec.evidence)
                if args.format == "json":
                    fh.write(dumps({"id": rec.id, "steps": [r.to_json() for r in render(proof)]}) + "\n")
                else:
                    fh.write(f"# {rec.id}: {' '.join(rec.claim)}\n{render_text(proof)}\n\n")
            except (NatProofError, ValueError) as exc:
                if args.format == "json":
                    fh.write(dumps(_error_record(rec_id, exc, lineno)) + "\n")
                else:
                    fh.write(f"# {rec_id}: error: {exc}\n\n")
    return 0


# -- constrain --------------------------------------------------------------


def cmd_constrain(args) -> int:
    if args.record:
        wanted = None
        for _, obj in read_jsonl(args.record):
            if isinstance(obj, dict) and (args.id is None or str(obj.get("id")) == args.id):
                wanted = ClaimRecord.from_json(obj, max_evidence=None)
                break
        if wanted is None:
            raise NatProofError(f"no record {args.id!r} in {args.record}")
        claim, evidence = wanted.claim, wanted.evidence
    else:
        if not args.claim:
            raise NatProofError("give --claim and --evidence, or --record")
        claim, evidence = args.claim, args.evidence or []
    automaton = ConstraintAutomaton(claim, evidence, args.max_span)
    serve(automaton, sys.stdin, sys.stdout)
    return 0


# -- entry point ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="natproof", description="Natural-logic proofs for fact verification.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    kb = sub.add_parser("kb-build", help="ingest TSV resources into a store snapshot")
    kb.add_argument("--paraphrases")
    kb.add_argument("--aliases")
    kb.add_argument("--relations")
    kb.add_argument("--hierarchy")
    kb.add_argument("--negations")
    kb.add_argument("-o", "--out", required=True)
    kb.set_defaults(func=cmd_kb_build)

    an = sub.add_parser("annotate", help="build training proofs for labelled claims")
    an.add_argument("input")
    an.add_argument("--kb", help="store snapshot from kb-build, or 'builtin' for the bundled fixture")
    an.add_argument("--config", help="JSON config file")
    an.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    an.add_argument("--max-evidence", type=int, default=5)
    an.add_argument("--jobs", type=int, default=1)
    an.add_argument("-o", "--out")
    an.set_defaults(func=cmd_annotate)

    ve = sub.add_parser("verify", help="derive verdicts from proof markup")
    ve.add_argument("input")
    ve.add_argument("-o", "--out")
    ve.set_defaults(func=cmd_verify)

    ev = sub.add_parser("evaluate", help="label accuracy, FEVER score, SER, rationale F1")
    ev.add_argument("predictions")
    ev.add_argument("--gold", help="JSONL with gold label and evidence per id")
    ev.add_argument("--augmented", help="predictions made with additional evidence (enables SER)")
    ev.add_argument("--ser-denominator", choices=("eligible", "all"), default="eligible")
    ev.add_argument("--rationales", help="JSONL with human rationale word lists per id")
    ev.add_argument("--max-evidence", type=int, default=None)
    ev.add_argument("--json", action="store_true")
    ev.set_defaults(func=cmd_evaluate)

    ex = sub.add_parser("explain", help="render proofs in plain English")
    ex.add_argument("input")
    ex.add_argument("--format", choices=("text", "json"), default="text")
    ex.add_argument("-o", "--out")
    ex.set_defaults(func=cmd_explain)

    co = sub.add_parser("constrain", help="serve the decoding constraints over stdin/stdout")
    co.add_argument("--claim")
    co.add_argument("--evidence", action="append", help="an evidence sentence (repeatable)")
    co.add_argument("--record", help="JSONL file to take claim and evidence from")
    co.add_argument("--id", help="record id within --record")
    co.add_argument("--max-span", type=int, default=7)
    co.set_defaults(func=cmd_constrain)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (NatProofError, ValueError, OSError) as exc:
        print(f"natproof {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
