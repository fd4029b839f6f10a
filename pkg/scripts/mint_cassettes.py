"""Record the committed cassettes under tests/data/cassettes.

Every exchange is answered by the oracle backend except where a scripted
fault is injected: extractor sessions start from deliberately wrong drafts
so the repair loop does real work, and validator sessions start from broken
SMT programs.  The manifest freezes what a replay must reproduce.

    python scripts/mint_cassettes.py
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import sys

from synflow.detectors import BUILTIN_KINDS, reference_extractor
from synflow.evaluate import evaluate, load_truth
from synflow.feasibility import ShimProver, validate_path
from synflow.feasibility.encoder import encode_path
from synflow.harness import RunConfig, run
from synflow.llm import Cassette, LlmClient, RecordingBackend, ScriptedBackend
from synflow.llm.answers import fence
from synflow.oracle import OracleBackend
from synflow.paths import PathInfo

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA = os.path.join(ROOT, "tests", "data")
OUT = os.path.join(DATA, "cassettes")
SUITE = os.path.join(DATA, "suite")


def _edit(text: str, old: str, new: str) -> str:
    if old not in text:
        raise SystemExit(f"draft edit failed: {old!r} not in reference")
    return text.replace(old, new, 1)


def extractor_drafts() -> dict[tuple[str, str], list[str]]:
    """Wrong programs offered before the reference, per (kind, role)."""
    ref = {(k, r): reference_extractor(k, r) for k in BUILTIN_KINDS for r in ("source", "sink")}
    min_value_source = _edit(
        ref["dbz", "source"], "        elif is_zero(value):",
        "        elif value.type == \"field_access\" and value.source().startswith(\"Integer.\"):\n"
        "            found.append(target)\n"
        "        elif is_zero(value):")
    int_zero_only = _edit(ref["dbz", "source"], "    if node.type not in ZERO_LITERALS:",
                          "    if node.type != \"decimal_integer_literal\":")
    return {
        ("dbz", "source"): [min_value_source, int_zero_only],
        ("dbz", "sink"): [],
        ("xss", "source"): [_edit(ref["xss", "source"], '"getHeader", ', "")],
        ("xss", "sink"): [
            _edit(ref["xss", "sink"], "def extract(root):", "def extract(root)"),
            _edit(ref["xss", "sink"], "root.walk()", "root.descendants()"),
            _edit(ref["xss", "sink"], '"getWriter" not in receiver.source()', "False"),
        ],
        ("osci", "source"): [],
        ("osci", "sink"): [_edit(ref["osci", "sink"], ', "command"', "")],
    }


def scripted_suite(drafts) -> ScriptedBackend:
    oracle = OracleBackend()

    def respond(request) -> str:
        if request.template_id in ("extractor_synthesis", "extractor_repair"):
            b = request.binding_map
            offered = drafts.get((b["kind"], b["role"]), [])
            round_no = int(b.get("round", "0"))
            if round_no < len(offered):
                return f"Here is the extractor.\n{fence(offered[round_no], 'python')}"
        return oracle.complete(request).text

    return ScriptedBackend(respond)


BROKEN_SMT = [
    ("unbalanced", "(declare-const v Int)\n(assert (= v 0)\n"),
    ("undeclared", "(assert (> missing_value 0))\n"),
    ("sort", "(declare-const v Int)\n(assert (+ v 1))\n"),
    ("prose", None),
]


def scripted_validator(errors: int, fallback: str) -> ScriptedBackend:
    def respond(request) -> str:
        b = request.binding_map
        round_no = 0 if request.template_id == "validator_synthesis" else int(b.get("round", "0"))
        if request.template_id in ("validator_synthesis", "validator_repair"):
            if round_no < errors:
                label, program = BROKEN_SMT[round_no % len(BROKEN_SMT)]
                if program is None:
                    return "The path looks infeasible to me, so no program is needed."
                return f"Encoding ({label}).\n{fence(program, 'smt2')}"
            return f"Corrected encoding.\n{fence(encode_path(PathInfo.from_json(b['path_json'])), 'smt2')}"
        if request.template_id == "feasibility_fallback":
            return fallback
        raise RuntimeError(f"unexpected template {request.template_id}")

    return ScriptedBackend(respond)


def fault_path() -> PathInfo:
    """The demo path whose guard Math.abs(b) > 1 contradicts b == 0."""
    with open(os.path.join(DATA, "fault_path.json"), encoding="utf-8") as fh:
        return PathInfo.from_json(fh.read())


def mint_suite(manifest: dict) -> None:
    path = os.path.join(OUT, "suite.json")
    drafts = extractor_drafts()
    client = LlmClient(RecordingBackend(scripted_suite(drafts), Cassette(path=path)))
    result = run(RunConfig(corpus=SUITE, bug=",".join(BUILTIN_KINDS)), client=client)
    client.backend.cassette.save()
    metrics = evaluate(result.reports, load_truth(os.path.join(SUITE, "truth.yaml")))
    fixes = {f"{e['kind']}/{e['role']}": e["fix_count"] for e in result.log.extractors}
    planned = {f"{k}/{r}": len(v) for (k, r), v in drafts.items()}
    if fixes != planned:
        raise SystemExit(f"extractor fix counts {fixes} differ from the planned drafts {planned}")
    manifest["suite"] = {
        "cassette": "suite.json",
        "bug": ",".join(BUILTIN_KINDS),
        "extractor_fix_counts": fixes,
        "reports": [f"{r.kind} {r.source.unit}:{r.source.line} -> {r.sink.unit}:{r.sink.line}"
                    for r in result.reports],
        "metrics": metrics.to_json(),
        "prompts": result.log.usage.get("total_prompts", 0),
    }
    print(f"suite: {len(result.reports)} reports, {metrics.render()}, fixes {fixes}")


def mint_validator(manifest: dict) -> None:
    info = fault_path()
    prover = ShimProver()
    sessions = []
    cases = [(n, "The guard excludes zero.\nAnswer: No") for n in range(5)]
    cases.append((4, "It depends on the runtime input."))
    for errors, fallback in cases:
        name = f"validator_faults_{errors}.json" if fallback.endswith("No") else f"validator_faults_{errors}_unparsed.json"
        path = os.path.join(OUT, name)
        client = LlmClient(RecordingBackend(scripted_validator(errors, fallback), Cassette(path=path)))
        verdict = validate_path(info, client, prover)
        client.backend.cassette.save()
        sessions.append({
            "cassette": name, "errors": errors, "method": verdict.method, "fix_count": verdict.fix_count,
            "feasible": verdict.feasible, "outcome": verdict.outcome, "prompts": client.usage.total_prompts,
        })
        print(f"{name}: {verdict.method} fix_count={verdict.fix_count} feasible={verdict.feasible}")
    manifest["validator"] = {"path": "fault_path.json", "sessions": sessions}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--keep", action="store_true", help="add to existing cassettes instead of starting fresh")
    args = parser.parse_args(argv)
    if not args.keep and os.path.isdir(OUT):
        shutil.rmtree(OUT)
    os.makedirs(OUT, exist_ok=True)
    manifest: dict = {"prover": "shim"}
    mint_suite(manifest)
    mint_validator(manifest)
    with open(os.path.join(OUT, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
