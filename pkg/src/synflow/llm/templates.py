"""Prompt templates with ``{{name}}`` placeholders and few-shot example blocks.

A template file is split into sections by header lines of the form
``[section]``::

    [id] summarize
    [bindings] code src dst
    [preamble] ...role text...
    [example]                  (repeatable, kept in file order)
    [code] ...
    [explanation] ...
    [answer] Answer: Yes
    [body] ...text with {{code}} placeholders...

Substitution is single-pass and verbatim: bound text is never rescanned for
placeholders.  Bindings not referenced by the template are ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Mapping

from .answers import AnswerFormatError, extract_code, parse_yes_no

PLACEHOLDER = re.compile(r"\{\{([A-Za-z_][A-Za-z0-9_]*)\}\}")
_SECTION = re.compile(r"^\[(id|bindings|preamble|example|code|explanation|answer|body)\]\s?(.*)$")


class RenderError(KeyError):
    def __init__(self, template_id: str, name: str):
        super().__init__(f"template {template_id!r} needs a binding for {name!r}")
        self.template_id = template_id
        self.name = name


class TemplateFormatError(ValueError):
    pass


@dataclass(frozen=True)
class FewShot:
    code: str
    explanation: str
    answer: str


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    preamble: str
    body: str
    examples: tuple[FewShot, ...] = ()
    schema: tuple[str, ...] = ()

    @property
    def placeholders(self) -> list[str]:
        seen: list[str] = []
        for text in (self.preamble, self.body):
            for m in PLACEHOLDER.finditer(text):
                if m.group(1) not in seen:
                    seen.append(m.group(1))
        return seen

    def check(self) -> None:
        missing = [p for p in self.placeholders if p not in self.schema]
        if missing:
            raise TemplateFormatError(f"{self.id}: placeholders {missing} not in binding schema")
        for i, ex in enumerate(self.examples, 1):
            try:
                if ex.answer.lstrip().startswith("```"):
                    extract_code(ex.answer)
                else:
                    parse_yes_no(ex.answer)
            except AnswerFormatError as exc:
                raise TemplateFormatError(f"{self.id}: example {i} has no answer marker") from exc


def parse_template(text: str) -> PromptTemplate:
    fields: dict[str, list[str]] = {}
    examples: list[dict[str, list[str]]] = []
    current: list[str] | None = None
    for line in text.split("\n"):
        m = _SECTION.match(line)
        if m is None:
            if current is None:
                if line.strip():
                    raise TemplateFormatError(f"text before first section: {line!r}")
                continue
            current.append(line)
            continue
        name, rest = m.group(1), m.group(2)
        if name == "example":
            examples.append({})
            current = None
            continue
        if name in ("code", "explanation", "answer"):
            if not examples:
                raise TemplateFormatError(f"[{name}] outside an [example]")
            target = examples[-1]
        else:
            target = fields
        current = target.setdefault(name, [])
        if rest:
            current.append(rest)

    def join(lines: list[str] | None) -> str:
        return "\n".join(lines or []).strip("\n")

    tid = join(fields.get("id")).strip()
    if not tid:
        raise TemplateFormatError("template has no [id]")
    shots = tuple(
        FewShot(join(ex.get("code")), join(ex.get("explanation")), join(ex.get("answer")))
        for ex in examples
    )
    template = PromptTemplate(
        id=tid,
        preamble=join(fields.get("preamble")),
        body=join(fields.get("body")),
        examples=shots,
        schema=tuple(join(fields.get("bindings")).split()),
    )
    template.check()
    return template


def _substitute(template_id: str, text: str, bindings: Mapping[str, str]) -> str:
    def repl(m: re.Match) -> str:
        name = m.group(1)
        if name not in bindings:
            raise RenderError(template_id, name)
        return str(bindings[name])

    return PLACEHOLDER.sub(repl, text)


def render(template: PromptTemplate, bindings: Mapping[str, str]) -> str:
    parts = []
    if template.preamble:
        parts.append(_substitute(template.id, template.preamble, bindings))
    for i, ex in enumerate(template.examples, 1):
        block = [f"Example {i}:", "```java", ex.code, "```"]
        if ex.explanation:
            block.append(f"Explanation: {ex.explanation}")
        block.append(ex.answer)
        parts.append("\n".join(block))
    parts.append(_substitute(template.id, template.body, bindings))
    return "\n\n".join(parts) + "\n"


TEMPLATE_IDS = (
    "summarize",
    "answer_reminder",
    "extractor_synthesis",
    "extractor_repair",
    "validator_synthesis",
    "validator_repair",
    "feasibility_fallback",
)


@lru_cache(maxsize=None)
def load_template(template_id: str) -> PromptTemplate:
    if template_id not in TEMPLATE_IDS:
        raise KeyError(f"unknown template {template_id!r}; known: {', '.join(TEMPLATE_IDS)}")
    text = resources.files(__package__).joinpath("templates", f"{template_id}.txt").read_text("utf-8")
    template = parse_template(text)
    if template.id != template_id:
        raise TemplateFormatError(f"{template_id}.txt declares id {template.id!r}")
    return template
