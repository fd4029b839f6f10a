"""Scoring reports against labeled bugs: precision, recall and F1."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import yaml


@dataclass(frozen=True)
class TruthLabel:
    kind: str
    sink_file: str
    sink_line: int
    source_file: Optional[str] = None
    source_line: Optional[int] = None

    def matches(self, kind: str, sink: tuple[str, int], source: tuple[str, int]) -> bool:
        if kind != self.kind or sink != (self.sink_file, self.sink_line):
            return False
        return self.source_file is None or source == (self.source_file, self.source_line)


@dataclass(frozen=True)
class GroundTruth:
    bugs: tuple[TruthLabel, ...]
    sources: Optional[frozenset[tuple[str, int, str]]] = None
    sinks: Optional[frozenset[tuple[str, int, str]]] = None


def _location(text: str, where: str) -> tuple[str, int]:
    path, _, line = str(text).rpartition(":")
    if not path or not line.isdigit():
        raise ValueError(f"{where}: {text!r} is not file:line")
    return path, int(line)


def _value(text: str, where: str) -> tuple[str, int, str]:
    parts = str(text).rsplit(":", 2)
    if len(parts) != 3 or not parts[1].isdigit():
        raise ValueError(f"{where}: {text!r} is not file:line:identifier")
    return parts[0], int(parts[1]), parts[2]


def parse_truth(data: dict) -> GroundTruth:
    bugs = []
    for i, item in enumerate(data.get("bugs") or []):
        where = f"bugs[{i}]"
        if "kind" not in item or "sink" not in item:
            raise ValueError(f"{where}: needs kind and sink")
        sink = _location(item["sink"], f"{where}.sink")
        source = _location(item["source"], f"{where}.source") if item.get("source") else (None, None)
        bugs.append(TruthLabel(str(item["kind"]), sink[0], sink[1], source[0], source[1]))
    sources = data.get("sources")
    sinks = data.get("sinks")
    return GroundTruth(
        tuple(bugs),
        frozenset(_value(s, "sources") for s in sources) if sources is not None else None,
        frozenset(_value(s, "sinks") for s in sinks) if sinks is not None else None,
    )


def load_truth(path: str) -> GroundTruth:
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) if path.endswith((".yaml", ".yml")) else json.load(fh)
    return parse_truth(data or {})


def ratio(num: int, den: int) -> Fraction:
    """num/den with 0/0 read as a perfect score: nothing claimed, nothing wrong."""
    return Fraction(1) if den == 0 else Fraction(num, den)


def f1_score(precision, recall) -> Fraction:
    p, r = Fraction(precision), Fraction(recall)
    if isinstance(precision, float) or isinstance(recall, float):
        p, r = p.limit_denominator(10**6), r.limit_denominator(10**6)
    return Fraction(0) if p + r == 0 else 2 * p * r / (p + r)


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int

    @classmethod
    def of(cls, tp: int, fp: int, fn: int) -> "Metrics":
        if min(tp, fp, fn) < 0:
            raise ValueError("counts must be non-negative")
        return cls(tp, fp, fn)

    @property
    def precision(self) -> Fraction:
        return ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> Fraction:
        return ratio(self.tp, self.tp + self.fn)

    @property
    def f1(self) -> Fraction:
        return f1_score(self.precision, self.recall)

    def to_json(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "fn": self.fn,
            "precision": float(self.precision), "recall": float(self.recall), "f1": float(self.f1),
        }

    def render(self) -> str:
        return (f"P={float(self.precision):.4f} R={float(self.recall):.4f} F1={float(self.f1):.4f} "
                f"(TP={self.tp} FP={self.fp} FN={self.fn})")


def _max_matching(edges: Sequence[Sequence[int]], right: int) -> int:
    """Size of a maximum bipartite matching; left i may take any right in edges[i]."""
    owner = [-1] * right

    def augment(i: int, seen: list[bool]) -> bool:
        for j in edges[i]:
            if not seen[j]:
                seen[j] = True
                if owner[j] < 0 or augment(owner[j], seen):
                    owner[j] = i
                    return True
        return False

    return sum(1 for i in range(len(edges)) if augment(i, [False] * right))


def evaluate(reports: Iterable, truth: GroundTruth) -> Metrics:
    """Each label can be claimed by one report; unclaimed reports are false positives."""
    reports = list(reports)
    edges = [
        [j for j, label in enumerate(truth.bugs)
         if label.matches(r.kind, (r.sink.unit, r.sink.line), (r.source.unit, r.source.line))]
        for r in reports
    ]
    tp = _max_matching(edges, len(truth.bugs))
    return Metrics.of(tp, len(reports) - tp, len(truth.bugs) - tp)


def evaluate_values(found: Iterable[tuple[str, int, str]], expected: frozenset[tuple[str, int, str]]) -> Metrics:
    """Phase-level scoring of extracted sources or sinks."""
    found = set(found)
    tp = len(found & expected)
    return Metrics.of(tp, len(found) - tp, len(expected) - tp)
