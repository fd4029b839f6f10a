"""Extractor specifications: a description plus labeled example files."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from typing import Optional

import yaml

from ..syntax.parsing import parse_unit
from ..syntax.sexpr import serialize

ROLES = ("source", "sink")


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledExample:
    name: str
    text: str
    expected: tuple[tuple[int, str], ...]

    def numbered(self) -> str:
        return "\n".join(f"{i}: {line}" for i, line in enumerate(self.text.split("\n"), 1))


@dataclass(frozen=True)
class ExtractorSpec:
    kind: str
    role: str
    description: str
    examples: tuple[LabeledExample, ...]
    signature: Optional[str] = None

    @property
    def spec_id(self) -> str:
        payload = json.dumps(
            {
                "kind": self.kind,
                "role": self.role,
                "description": self.description,
                "signature": self.signature,
                "examples": [[e.name, e.text, [list(r) for r in e.expected]] for e in self.examples],
            },
            sort_keys=True,
        )
        return f"{self.kind}-{self.role}-{hashlib.sha256(payload.encode()).hexdigest()[:12]}"

    def trees(self) -> dict[str, str]:
        return {e.name: serialize(parse_unit(e.name, e.text)) for e in self.examples}

    def check(self) -> None:
        if self.role not in ROLES:
            raise SpecError(f"role must be one of {ROLES}, got {self.role!r}")
        if not self.description.strip():
            raise SpecError(f"{self.kind}/{self.role}: empty description")
        for ex in self.examples:
            tree = parse_unit(ex.name, ex.text)
            if tree.has_errors:
                raise SpecError(f"example {ex.name} does not parse cleanly (lines {list(tree.error_lines)})")
            lines = ex.text.split("\n")
            for line, ident in ex.expected:
                if not 1 <= line <= len(lines):
                    raise SpecError(f"{ex.name}:{line}: label outside the file")
                if ident not in lines[line - 1]:
                    raise SpecError(f"{ex.name}:{line}: `{ident}` does not occur on that line")


def parse_label(label: str) -> tuple[str, int, str]:
    parts = str(label).rsplit(":", 2)
    if len(parts) != 3 or not parts[1].isdigit():
        raise SpecError(f"label {label!r} is not file:line:identifier")
    return parts[0], int(parts[1]), parts[2]


def load_extractor_spec(path: str) -> ExtractorSpec:
    """Read a spec file; example paths resolve relative to the spec file."""
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    base = os.path.dirname(path)
    for key in ("kind", "role", "description", "examples"):
        if key not in data:
            raise SpecError(f"{path}: missing field {key!r}")
    labels: dict[str, list[tuple[int, str]]] = {}
    for label in data.get("expected") or []:
        fname, line, ident = parse_label(label)
        labels.setdefault(fname, []).append((line, ident))
    examples = []
    for rel in data["examples"]:
        with open(os.path.join(base, rel), encoding="utf-8") as fh:
            text = fh.read()
        name = os.path.basename(rel)
        examples.append(LabeledExample(name, text, tuple(sorted(set(labels.pop(name, []))))))
    if labels:
        raise SpecError(f"{path}: labels for unknown example files {sorted(labels)}")
    spec = ExtractorSpec(
        kind=str(data["kind"]),
        role=str(data["role"]),
        description=str(data["description"]).strip(),
        examples=tuple(examples),
        signature=data.get("signature"),
    )
    spec.check()
    return spec
