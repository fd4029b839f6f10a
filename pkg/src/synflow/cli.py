"""Command-line entry point: ``synflow analyze | evaluate | preprocess``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Optional, Sequence

from .detectors import BUILTIN_KINDS
from .evaluate import evaluate, evaluate_values, load_truth
from .extractors import SpecError
from .harness import BACKENDS, BugReport, PhaseError, RunConfig, load_run, run
from .llm.client import DEFAULT_MODEL, BackendError
from .paths import StitchConfig
from .preprocess import DEFAULT_BLOCKLIST, preprocess_corpus

EXIT_OK, EXIT_USAGE, EXIT_PHASE, EXIT_BACKEND = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="synflow", description="Compilation-free source-to-sink dataflow bug detection.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="detect bugs in a source tree")
    a.add_argument("--corpus", required=True, help="directory of source files")
    what = a.add_mutually_exclusive_group(required=True)
    what.add_argument("--bug", help=f"bundled bug kind(s), comma-separated: {', '.join(BUILTIN_KINDS)}")
    what.add_argument("--spec", help="custom source-sink pair file")
    a.add_argument("--backend", choices=BACKENDS, default="oracle")
    a.add_argument("--model", default=DEFAULT_MODEL)
    a.add_argument("--temperature", type=float, default=0.0)
    a.add_argument("--cassette", help="cassette file to replay from or record into")
    a.add_argument("--record", action="store_true", help="record every exchange into --cassette")
    a.add_argument("--out", help="write the JSON report document here")
    a.add_argument("--max-extractor-fixes", type=int, default=10)
    a.add_argument("--max-depth", type=int, default=StitchConfig.max_depth, help="call depth bound for stitching")
    a.add_argument("--max-paths", type=int, default=StitchConfig.max_paths, help="paths kept per source-sink pair")
    a.add_argument("--prover", help="SMT solver executable (default: z3 through its Python bindings)")
    a.add_argument("--prover-timeout", type=float, default=10.0)
    a.add_argument("--extractor-cache", help="directory caching accepted extractors")

    e = sub.add_parser("evaluate", help="score a report document against labeled bugs")
    e.add_argument("--reports", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--json", action="store_true", help="print metrics as JSON")

    p = sub.add_parser("preprocess", help="strip comments and rename label-leaking identifiers")
    p.add_argument("--in", dest="src", required=True)
    p.add_argument("--out", dest="dst", required=True)
    p.add_argument("--blocklist", default=",".join(DEFAULT_BLOCKLIST),
                   help="comma-separated substrings that mark leaking identifiers")
    return parser


def _analyze(args) -> int:
    try:
        config = RunConfig(
            corpus=args.corpus, bug=args.bug, spec_path=args.spec, backend=args.backend, model=args.model,
            temperature=args.temperature, max_extractor_fixes=args.max_extractor_fixes,
            stitch=StitchConfig(max_depth=args.max_depth, max_paths=args.max_paths), out=args.out,
            cassette=args.cassette, record=args.record, prover=args.prover,
            prover_timeout=args.prover_timeout, extractor_cache=args.extractor_cache,
        )
        config.check()
    except (ValueError, SpecError) as exc:
        print(f"synflow: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = run(config)
    except SpecError as exc:
        print(f"synflow: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PhaseError as exc:
        print(f"synflow: {exc}", file=sys.stderr)
        return EXIT_PHASE
    except BackendError as exc:
        print(f"synflow: backend failure: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    for report in result.reports:
        print(report.render())
    log = result.log
    print(f"{len(result.reports)} report(s); {log.paths} path(s), {log.infeasible} infeasible, "
          f"{log.restricted} filtered by restriction; {log.usage.get('total_prompts', 0)} prompt(s)")
    return EXIT_OK


def _evaluate(args) -> int:
    try:
        data = load_run(args.reports)
        truth = load_truth(args.truth)
    except (OSError, ValueError, KeyError) as exc:
        print(f"synflow: {exc}", file=sys.stderr)
        return EXIT_USAGE
    metrics = {"bugs": evaluate([BugReport.from_json(r) for r in data["reports"]], truth)}
    for role, expected in (("sources", truth.sources), ("sinks", truth.sinks)):
        if expected is not None and role in data:
            found = [tuple(v.rsplit(":", 2)) for v in data[role]]
            metrics[role] = evaluate_values(((f, int(l), i) for f, l, i in found), expected)
    if args.json:
        print(json.dumps({k: m.to_json() for k, m in metrics.items()}, indent=1, sort_keys=True))
    else:
        for name, m in metrics.items():
            print(f"{name}: {m.render()}")
    return EXIT_OK


def _preprocess(args) -> int:
    blocklist = tuple(w.strip() for w in args.blocklist.split(",") if w.strip())
    result = preprocess_corpus(args.src, args.dst, blocklist)
    print(f"{result.files} file(s) written, {len(result.renames)} identifier(s) renamed, "
          f"{len(result.copied_verbatim)} copied unchanged")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    handler = {"analyze": _analyze, "evaluate": _evaluate, "preprocess": _preprocess}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
