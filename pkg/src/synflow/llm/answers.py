"""The fixed answer grammar shared by every template.

Yes/No questions end with a line ``Answer: Yes`` or ``Answer: No``; synthesis
prompts are answered with a fenced code block.  Nothing is ever inferred
from free prose.
"""

from __future__ import annotations

import re
from typing import Optional

_ANSWER = re.compile(r"^\W*answer\W*:\W*(yes|no)\b", re.IGNORECASE)
_FENCE = re.compile(r"```[ \t]*([A-Za-z0-9_+-]*)[ \t]*\n(.*?)```", re.DOTALL)


class AnswerFormatError(ValueError):
    pass


def parse_yes_no(text: str) -> bool:
    """The verdict on the last ``Answer:`` line."""
    for line in reversed(text.strip().split("\n")):
        m = _ANSWER.match(line.strip())
        if m:
            return m.group(1).lower() == "yes"
    raise AnswerFormatError("no 'Answer: Yes|No' line in response")


def explanation_of(text: str) -> str:
    lines = text.strip().split("\n")
    for i in range(len(lines) - 1, -1, -1):
        if _ANSWER.match(lines[i].strip()):
            return "\n".join(lines[:i]).strip()
    return text.strip()


def extract_code(text: str, language: Optional[str] = None) -> str:
    """Contents of the last fenced block (optionally of a given language)."""
    blocks = _FENCE.findall(text)
    if language is not None:
        tagged = [b for tag, b in blocks if tag.lower() == language]
        if tagged:
            return tagged[-1].rstrip("\n") + "\n"
    if not blocks:
        raise AnswerFormatError("no fenced code block in response")
    return blocks[-1][1].rstrip("\n") + "\n"


def fence(code: str, language: str = "") -> str:
    return f"```{language}\n{code.rstrip()}\n```"
