"""Bug kinds: bundled DBZ/XSS/OSCI definitions and user-defined source-sink pairs.

A detector pairs a source and a sink extractor specification with the
restriction a dataflow path must satisfy.  Divide-by-zero needs the zero to
arrive unchanged (value equality); injection bugs only need dependence.
"""

from __future__ import annotations

import importlib.resources
import re
from dataclasses import dataclass
from typing import Optional

import yaml

from ..extractors.spec import ExtractorSpec, LabeledExample, SpecError, load_extractor_spec
from ..paths import ASSIGN, BIND, PathInfo
from ..syntax.exprs import CALL_TYPES, assignments_in, call_args, call_name, expr_vars, find_calls, unwrap
from ..syntax.parsing import parse_unit

DEPENDENCE = "dependence"
VALUE_EQUALITY = "value-equality"
RESTRICTIONS = (DEPENDENCE, VALUE_EQUALITY)
BUILTIN_KINDS = ("dbz", "xss", "osci")


@dataclass(frozen=True)
class DetectorSpec:
    kind: str
    name: str
    source: ExtractorSpec
    sink: ExtractorSpec
    restriction: str
    message: str
    source_assumption: str = ""
    sink_assumption: str = ""
    builtin: bool = False

    def __post_init__(self) -> None:
        if self.restriction not in RESTRICTIONS:
            raise SpecError(f"restriction must be one of {RESTRICTIONS}, got {self.restriction!r}")

    @property
    def spec_id(self) -> str:
        return f"{self.source.spec_id}+{self.sink.spec_id}+{self.restriction}"

    def describe(self, source: str, sink: str) -> str:
        return self.message.format(source=source, sink=sink)


def _assets():
    return importlib.resources.files(__name__) / "assets"


def builtin_spec(kind: str) -> DetectorSpec:
    kind = kind.lower()
    if kind not in BUILTIN_KINDS:
        raise SpecError(f"unknown bug kind {kind!r}; supported kinds: {', '.join(BUILTIN_KINDS)}")
    with importlib.resources.as_file(_assets() / kind) as folder:
        with open(folder / "detector.yaml", encoding="utf-8") as fh:
            meta = yaml.safe_load(fh)
        source = load_extractor_spec(str(folder / "source.yaml"))
        sink = load_extractor_spec(str(folder / "sink.yaml"))
    return DetectorSpec(
        kind=kind,
        name=meta["name"],
        source=source,
        sink=sink,
        restriction=meta["restriction"],
        message=meta["message"],
        source_assumption=meta.get("source_assumption", ""),
        sink_assumption=meta.get("sink_assumption", ""),
        builtin=True,
    )


def reference_extractor(kind: str, role: str, signature: Optional[str] = None) -> str:
    """A known-correct extractor body for a bundled or signature-based spec."""
    if signature:
        name, arity = parse_signature(signature)
        template = (_assets() / "custom" / f"signature_{role}.py").read_text(encoding="utf-8")
        return template.format(target=name, arity=arity)
    if kind in BUILTIN_KINDS and role in ("source", "sink"):
        return (_assets() / kind / f"reference_{role}.py").read_text(encoding="utf-8")
    raise SpecError(f"no reference extractor for {kind}/{role}")


# ---------------------------------------------------------------- custom pairs

_SIGNATURE = re.compile(r"^\s*(?:[\w$.]+\.)?([A-Za-z_$][\w$]*)\s*(?:\(\s*(\*|\d+|[^)]*)\s*\))?\s*$")


def parse_signature(text: str) -> tuple[str, Optional[int]]:
    """``name(*)`` matches any arity; ``name()`` none; ``name(a, b)`` or ``name(2)`` exactly two."""
    m = _SIGNATURE.match(text or "")
    if not m:
        raise SpecError(f"signature {text!r} is not of the form name(...)")
    name, args = m.group(1), m.group(2)
    if args is None or args == "*":
        return name, None
    if args.isdigit():
        return name, int(args)
    return name, len([a for a in args.split(",") if a.strip()])


def _arity_ok(call, arity: Optional[int]) -> bool:
    return arity is None or len(call_args(call)) == arity


def derive_labels(code: str, signature: str, role: str) -> tuple[tuple[int, str], ...]:
    """Labels implied by a signature: values returned by it, or values passed into it."""
    name, arity = parse_signature(signature)
    tree = parse_unit("example.java", code)
    out: set[tuple[int, str]] = set()
    for fn in tree.functions:
        body = fn.node.child_by_field_name("body")
        if role == "source":
            for a in assignments_in(body):
                if a.op != "=" or a.rhs is None:
                    continue
                value = unwrap(a.rhs)
                if value.type in CALL_TYPES and call_name(value) == name and _arity_ok(value, arity):
                    out.add((a.line, a.lhs))
        else:
            for call in find_calls(body):
                if call_name(call) == name and _arity_ok(call, arity):
                    for arg in call_args(call):
                        out.update((line, ident) for ident, line in expr_vars(arg))
    return tuple(sorted(out))


@dataclass(frozen=True)
class EndpointSpec:
    description: str
    signature: str
    example: str
    labels: Optional[tuple[str, ...]] = None

    def to_data(self) -> dict:
        data = {"description": self.description, "signature": self.signature, "example": self.example}
        if self.labels is not None:
            data["labels"] = list(self.labels)
        return data


@dataclass(frozen=True)
class CustomPair:
    name: str
    source: EndpointSpec
    sink: EndpointSpec
    restriction: str = DEPENDENCE
    message: str = ""

    def to_data(self) -> dict:
        data = {
            "name": self.name,
            "restriction": self.restriction,
            "source": self.source.to_data(),
            "sink": self.sink.to_data(),
        }
        if self.message:
            data["message"] = self.message
        return data


def _field(data, key: str, where: str, kind=str, required: bool = True):
    if not isinstance(data, dict):
        raise SpecError(f"{where}: expected a mapping")
    if key not in data or data[key] is None:
        if required:
            raise SpecError(f"{where}.{key}: missing")
        return None
    value = data[key]
    if not isinstance(value, kind):
        raise SpecError(f"{where}.{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def _endpoint(data, where: str) -> EndpointSpec:
    description = _field(data, "description", where)
    if not description.strip():
        raise SpecError(f"{where}.description: must not be empty")
    signature = _field(data, "signature", where)
    try:
        parse_signature(signature)
    except SpecError as exc:
        raise SpecError(f"{where}.signature: {exc}") from None
    example = _field(data, "example", where)
    labels = _field(data, "labels", where, list, required=False)
    if labels is not None:
        for i, label in enumerate(labels):
            if not re.fullmatch(r"\d+:[A-Za-z_$][\w$]*", str(label)):
                raise SpecError(f"{where}.labels[{i}]: {label!r} is not line:identifier")
        labels = tuple(str(x) for x in labels)
    return EndpointSpec(description.strip(), signature.strip(), example, labels)


def parse_custom_pairs(text: str) -> list[CustomPair]:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SpecError(f"not valid YAML: {exc}") from None
    pairs = _field(data, "pairs", "spec", list)
    if not pairs:
        raise SpecError("spec.pairs: at least one source-sink pair is required")
    out = []
    seen = set()
    for i, item in enumerate(pairs):
        where = f"spec.pairs[{i}]"
        name = _field(item, "name", where)
        if not re.fullmatch(r"[A-Za-z][\w-]*", name):
            raise SpecError(f"{where}.name: {name!r} must be a simple identifier")
        if name in seen:
            raise SpecError(f"{where}.name: duplicate pair name {name!r}")
        seen.add(name)
        restriction = _field(item, "restriction", where, required=False) or DEPENDENCE
        if restriction not in RESTRICTIONS:
            raise SpecError(f"{where}.restriction: must be one of {RESTRICTIONS}")
        message = _field(item, "message", where, required=False) or ""
        out.append(CustomPair(
            name, _endpoint(_field(item, "source", where, dict), f"{where}.source"),
            _endpoint(_field(item, "sink", where, dict), f"{where}.sink"), restriction, message,
        ))
    return out


def dump_custom_pairs(pairs: list[CustomPair]) -> str:
    return yaml.safe_dump({"pairs": [p.to_data() for p in pairs]}, sort_keys=False, allow_unicode=True)


def _extractor_spec(pair: CustomPair, end: EndpointSpec, role: str) -> ExtractorSpec:
    if end.labels is not None:
        labels = tuple(sorted((int(l.split(":")[0]), l.split(":")[1]) for l in end.labels))
    else:
        labels = derive_labels(end.example, end.signature, role)
    example = LabeledExample(f"{pair.name}_{role}.java", end.example, labels)
    spec = ExtractorSpec(pair.name, role, end.description, (example,), end.signature)
    spec.check()
    return spec


def detector_for_pair(pair: CustomPair) -> DetectorSpec:
    message = pair.message or f"{pair.name}: {{source}} flows into {{sink}}"
    return DetectorSpec(
        kind=pair.name,
        name=pair.name,
        source=_extractor_spec(pair, pair.source, "source"),
        sink=_extractor_spec(pair, pair.sink, "sink"),
        restriction=pair.restriction,
        message=message,
    )


def load_custom_specs(path: str) -> list[DetectorSpec]:
    """One detector per source-sink pair in a custom spec file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return [detector_for_pair(p) for p in parse_custom_pairs(text)]
    except SpecError as exc:
        raise SpecError(f"{path}: {exc}") from None


def load_custom_spec(path: str) -> DetectorSpec:
    """The detector of a single-pair custom spec file."""
    specs = load_custom_specs(path)
    if len(specs) != 1:
        raise SpecError(f"{path}: expected exactly one pair, found {len(specs)}; use load_custom_specs")
    return specs[0]


# ---------------------------------------------------------------- restrictions

def restriction_check(info: PathInfo, restriction: str) -> bool:
    """Dependence always holds; value equality needs every hop on the chain to copy the value."""
    if restriction == DEPENDENCE:
        return True
    if restriction != VALUE_EQUALITY:
        raise SpecError(f"unknown restriction {restriction!r}")
    return all(s.preserving for s in info.steps if s.on_chain and s.kind in (ASSIGN, BIND))


__all__ = [
    "BUILTIN_KINDS",
    "CustomPair",
    "DEPENDENCE",
    "DetectorSpec",
    "EndpointSpec",
    "RESTRICTIONS",
    "VALUE_EQUALITY",
    "builtin_spec",
    "derive_labels",
    "detector_for_pair",
    "dump_custom_pairs",
    "load_custom_spec",
    "load_custom_specs",
    "parse_custom_pairs",
    "parse_signature",
    "reference_extractor",
    "restriction_check",
]
