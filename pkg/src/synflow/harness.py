"""End-to-end runs: extraction, summarization, stitching, feasibility, reporting."""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Optional

from . import __version__, proc
from .detectors import BUILTIN_KINDS, DetectorSpec, builtin_spec, load_custom_specs, restriction_check
from .extractors import ExtractorStore, SandboxRunner, SynthesisFailedError, obtain_extractor, run_extractor
from .extractors.runner import ExtractorExecutionError
from .feasibility import ExecutableProver, FeasibilityVerdict, ShimProver, validate_path
from .feasibility.validator import SOLVER
from .llm import Cassette, CassetteBackend, LiveBackend, LlmClient, RecordingBackend
from .llm.client import DEFAULT_MODEL
from .oracle import OracleBackend
from .paths import DataflowPath, PathInfoError, StitchConfig, collect_path_info, stitch
from .program import ProgramIndex
from .summarizer import SummaryStore, candidate_pairs, summarize_function
from .syntax.parsing import ParseError, SyntaxTree, discover_sources, load_unit
from .syntax.values import ValueRef, sort_refs

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
BACKENDS = ("oracle", "cassette", "live")
MAX_VALIDATOR_FIXES = 3


class PhaseError(RuntimeError):
    def __init__(self, phase: str, message: str):
        super().__init__(f"[{phase}] {message}")
        self.phase = phase


@dataclass(frozen=True)
class RunConfig:
    corpus: str
    bug: Optional[str] = None
    spec_path: Optional[str] = None
    backend: str = "oracle"
    model: str = DEFAULT_MODEL
    temperature: float = 0.0
    max_extractor_fixes: int = 10
    max_validator_fixes: int = MAX_VALIDATOR_FIXES
    stitch: StitchConfig = field(default_factory=StitchConfig)
    out: Optional[str] = None
    cassette: Optional[str] = None
    record: bool = False
    prover: Optional[str] = None
    prover_timeout: float = 10.0
    extractor_cache: Optional[str] = None

    @property
    def bug_kinds(self) -> tuple[str, ...]:
        """``bug`` may name several bundled kinds separated by commas."""
        return tuple(k.strip().lower() for k in (self.bug or "").split(",") if k.strip())

    def check(self) -> None:
        if (self.bug is None) == (self.spec_path is None):
            raise ValueError("give exactly one of a bug kind or a custom spec file")
        if self.bug is not None:
            kinds = self.bug_kinds
            unknown = [k for k in kinds if k not in BUILTIN_KINDS]
            if not kinds or unknown:
                raise ValueError(f"unknown bug kind {', '.join(unknown) or repr(self.bug)}; "
                                 f"supported kinds: {', '.join(BUILTIN_KINDS)}")
            if len(set(kinds)) != len(kinds):
                raise ValueError("a bug kind is listed twice")
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must lie in [0, 2]")
        if not 0 <= self.max_validator_fixes <= MAX_VALIDATOR_FIXES:
            raise ValueError(f"validator fixes are capped at {MAX_VALIDATOR_FIXES}")
        if self.max_extractor_fixes < 0:
            raise ValueError("max extractor fixes must be non-negative")
        if self.backend == "cassette" and not self.cassette:
            raise ValueError("the cassette backend needs a cassette file")
        if self.record and not self.cassette:
            raise ValueError("record mode needs a cassette file to write")
        if self.record and self.backend == "cassette":
            raise ValueError("record mode wraps the oracle or live backend, not a cassette")
        if not os.path.isdir(self.corpus):
            raise ValueError(f"corpus {self.corpus!r} is not a directory")


@dataclass(frozen=True)
class BugReport:
    kind: str
    source: ValueRef
    sink: ValueRef
    hops: tuple[ValueRef, ...]
    method: str
    fix_count: int
    message: str
    path_id: str
    program_id: str = ""

    def key(self) -> tuple:
        return (self.kind, self.source.key, self.sink.key)

    def sort_key(self) -> tuple:
        return (self.sink.unit, self.sink.line, self.source.unit, self.source.line,
                self.kind, self.sink.identifier, self.source.identifier)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "source": self.source.to_json(),
            "sink": self.sink.to_json(),
            "hops": [h.to_json() for h in self.hops],
            "method": self.method,
            "fix_count": self.fix_count,
            "message": self.message,
            "path_id": self.path_id,
            "program_id": self.program_id,
        }

    @classmethod
    def from_json(cls, data: dict) -> "BugReport":
        return cls(
            data["kind"], ValueRef.from_json(data["source"]), ValueRef.from_json(data["sink"]),
            tuple(ValueRef.from_json(h) for h in data["hops"]), data["method"], int(data["fix_count"]),
            data["message"], data["path_id"], data.get("program_id", ""),
        )

    def render(self) -> str:
        return f"{self.sink.unit}:{self.sink.line}: [{self.kind}] {self.message}"


@dataclass
class RunLog:
    backend: str
    model: str
    temperature: float
    files: int = 0
    files_with_errors: list[str] = field(default_factory=list)
    functions: int = 0
    skipped_functions: list[str] = field(default_factory=list)
    extractors: list[dict] = field(default_factory=list)
    sources: int = 0
    sinks: int = 0
    fact_queries: int = 0
    facts: int = 0
    unparsed_verdicts: int = 0
    paths: int = 0
    infeasible: int = 0
    restricted: int = 0
    validator_fix_counts: list[int] = field(default_factory=list)
    fallbacks: int = 0
    usage: dict = field(default_factory=dict)
    spawns: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "backend": self.backend,
            "model": self.model,
            "temperature": self.temperature,
            "files": self.files,
            "files_with_errors": self.files_with_errors,
            "functions": self.functions,
            "skipped_functions": self.skipped_functions,
            "extractors": self.extractors,
            "sources": self.sources,
            "sinks": self.sinks,
            "fact_queries": self.fact_queries,
            "facts": self.facts,
            "unparsed_verdicts": self.unparsed_verdicts,
            "paths": self.paths,
            "infeasible": self.infeasible,
            "restricted": self.restricted,
            "validator_fix_counts": self.validator_fix_counts,
            "fallbacks": self.fallbacks,
            "usage": self.usage,
            "spawns": self.spawns,
        }

    @property
    def extractor_fix_counts(self) -> dict[str, int]:
        return {e["spec_id"]: e["fix_count"] for e in self.extractors}


@dataclass
class RunResult:
    reports: list[BugReport]
    log: RunLog
    sources: list[ValueRef] = field(default_factory=list)
    sinks: list[ValueRef] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "tool": f"synflow {__version__}",
            "reports": [r.to_json() for r in self.reports],
            "sources": [f"{r.unit}:{r.line}:{r.identifier}" for r in self.sources],
            "sinks": [f"{r.unit}:{r.line}:{r.identifier}" for r in self.sinks],
            "log": self.log.to_json(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n"


def make_client(config: RunConfig) -> LlmClient:
    if config.backend == "cassette":
        backend = CassetteBackend(Cassette.load(config.cassette))
    else:
        backend = OracleBackend() if config.backend == "oracle" else LiveBackend()
        if config.record:
            backend = RecordingBackend(backend, Cassette.load(config.cassette, missing_ok=True), autosave=True)
    return LlmClient(backend, config.model, config.temperature)


def make_prover(config: RunConfig):
    if config.prover:
        return ExecutableProver(config.prover, config.prover_timeout)
    return ShimProver(config.prover_timeout)


def load_corpus(root: str) -> list[SyntaxTree]:
    trees = []
    for path in discover_sources(root):
        try:
            trees.append(load_unit(path, relative_to=root))
        except ParseError as exc:
            log.warning("skipping %s", exc)
    return trees


def detectors_for(config: RunConfig) -> list[DetectorSpec]:
    if config.bug is not None:
        return [builtin_spec(kind) for kind in config.bug_kinds]
    return load_custom_specs(config.spec_path)


def _extract(detector: DetectorSpec, trees, client, runner, store, config, run_log) -> tuple[list[ValueRef], list[ValueRef]]:
    found: dict[str, list[ValueRef]] = {}
    for spec in (detector.source, detector.sink):
        try:
            program, cached = obtain_extractor(spec, runner, client, store, config.max_extractor_fixes)
        except SynthesisFailedError as exc:
            raise PhaseError("extraction", str(exc)) from exc
        run_log.extractors.append({
            "spec_id": spec.spec_id, "kind": spec.kind, "role": spec.role,
            "fix_count": program.fix_count, "cached": cached,
        })
        refs: list[ValueRef] = []
        for tree in trees:
            try:
                refs.extend(run_extractor(program, tree, runner, spec.role))
            except ExtractorExecutionError as exc:
                log.warning("%s %s extractor failed on %s: %s", spec.kind, spec.role, tree.unit.path, exc.diagnostic)
        found[spec.role] = refs
    return found["source"], found["sink"]


def _validate(detector: DetectorSpec, path: DataflowPath, index: ProgramIndex, client, prover,
              config: RunConfig, run_log: RunLog) -> tuple[Optional[FeasibilityVerdict], bool]:
    """Feasibility verdict and restriction result; a path that cannot be laid out is kept."""
    try:
        info = collect_path_info(path, index, detector.source_assumption, detector.sink_assumption)
    except PathInfoError as exc:
        log.warning("keeping %s unvalidated: %s", path, exc)
        return None, True
    verdict = validate_path(info, client, prover, config.max_validator_fixes)
    run_log.validator_fix_counts.append(verdict.fix_count)
    if verdict.method != SOLVER:
        run_log.fallbacks += 1
    return verdict, restriction_check(info, detector.restriction)


def analyze(detector: DetectorSpec, index: ProgramIndex, trees, client, prover, runner, store,
            config: RunConfig, run_log: RunLog) -> tuple[list[BugReport], list[ValueRef], list[ValueRef]]:
    sources, sinks = _extract(detector, trees, client, runner, store, config, run_log)
    run_log.sources += len(sources)
    run_log.sinks += len(sinks)
    summaries = {}
    facts_store = SummaryStore()
    for data in index.ordered():
        pairs = candidate_pairs(data.fn, data.values, sources, sinks, data.cfg)
        run_log.fact_queries += len(pairs)
        summary = summarize_function(data.fn, pairs, client, facts_store, detector.spec_id)
        run_log.facts += len(summary.facts)
        run_log.unparsed_verdicts += len(summary.errors)
        summaries[data.id] = summary
    paths = stitch(summaries, index, sources, sinks, config.stitch)
    run_log.paths += len(paths)
    reports: dict[tuple, BugReport] = {}
    for path in paths:
        key = (detector.kind, path.source.key, path.sink.key)
        if key in reports:
            continue
        verdict, allowed = _validate(detector, path, index, client, prover, config, run_log)
        if verdict is not None and not verdict.feasible:
            run_log.infeasible += 1
            continue
        if not allowed:
            run_log.restricted += 1
            continue
        program_id = hashlib.sha256(verdict.program.encode()).hexdigest()[:16] if verdict and verdict.program else ""
        reports[key] = BugReport(
            kind=detector.kind,
            source=path.source,
            sink=path.sink,
            hops=path.hops,
            method=verdict.method if verdict else "unvalidated",
            fix_count=verdict.fix_count if verdict else 0,
            message=detector.describe(str(path.source), str(path.sink)),
            path_id=path.id,
            program_id=program_id,
        )
    return list(reports.values()), sources, sinks


def run(config: RunConfig, client: Optional[LlmClient] = None, prover=None, runner=None) -> RunResult:
    config.check()
    client = client or make_client(config)
    prover = prover or make_prover(config)
    runner = runner or SandboxRunner()
    store = ExtractorStore(config.extractor_cache)
    spawns_before = len(proc.spawn_log())
    run_log = RunLog(config.backend, client.model, client.temperature)
    detectors = detectors_for(config)
    trees = load_corpus(config.corpus)
    run_log.files = len(trees)
    run_log.files_with_errors = sorted(t.unit.path for t in trees if t.error_lines)
    index = ProgramIndex.build(trees)
    run_log.functions = len(index.functions)
    run_log.skipped_functions = sorted(fid for fid, _ in index.skipped)
    reports: list[BugReport] = []
    sources: list[ValueRef] = []
    sinks: list[ValueRef] = []
    if trees:
        for detector in detectors:
            found, srcs, snks = analyze(detector, index, trees, client, prover, runner, store, config, run_log)
            reports.extend(found)
            sources.extend(srcs)
            sinks.extend(snks)
    reports.sort(key=BugReport.sort_key)
    run_log.usage = client.usage.to_json()
    spawned = proc.spawn_log()[spawns_before:]
    run_log.spawns = {kind: sum(1 for s in spawned if s.kind == kind) for kind in sorted({s.kind for s in spawned})}
    result = RunResult(reports, run_log, sort_refs(sources), sort_refs(sinks))
    if config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(result.dumps())
    return result


def load_run(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported report schema {data.get('schema')!r}")
    return data


def load_reports(path: str) -> list[BugReport]:
    return [BugReport.from_json(r) for r in load_run(path)["reports"]]
