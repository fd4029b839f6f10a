"""Corpus preparation: strip comments and rename label-leaking identifiers.

Benchmark files often give the answer away in comments (``/* FLAW */``) or
names (``badSink``).  Comments are blanked rather than deleted and renamed
identifiers stay on their lines, so every remaining token keeps its line.
"""

from __future__ import annotations

import logging
import os
import shutil
from dataclasses import dataclass, field
from typing import Iterable

from .syntax.parsing import SOURCE_EXTENSIONS, ParseError, parse_unit, walk

log = logging.getLogger(__name__)

DEFAULT_BLOCKLIST = ("bad", "good")
COMMENT_TYPES = ("line_comment", "block_comment")
NAME_TYPES = ("identifier", "type_identifier")


@dataclass
class PreprocessResult:
    files: int = 0
    copied_verbatim: list[str] = field(default_factory=list)
    renames: dict[str, str] = field(default_factory=dict)


def _leaks(name: str, blocklist: Iterable[str]) -> bool:
    low = name.lower()
    return any(word in low for word in blocklist)


def _edits(text: str, renames: dict[str, str]) -> list[tuple[int, int, str]]:
    tree = parse_unit("input.java", text)
    data = text.encode("utf-8")
    edits = []
    for node in walk(tree.root):
        if node.type in COMMENT_TYPES:
            body = data[node.start_byte:node.end_byte].decode("utf-8")
            edits.append((node.start_byte, node.end_byte, "\n" * body.count("\n")))
        elif node.type in NAME_TYPES:
            name = data[node.start_byte:node.end_byte].decode("utf-8")
            if name in renames:
                edits.append((node.start_byte, node.end_byte, renames[name]))
    return edits


def _apply(text: str, edits: list[tuple[int, int, str]]) -> str:
    if not edits:
        return text
    data = text.encode("utf-8")
    out = []
    last = 0
    touched = set()
    for start, end, repl in sorted(edits):
        out.append(data[last:start])
        out.append(repl.encode("utf-8"))
        last = end
        touched.add(data[:start].count(b"\n"))
    out.append(data[last:])
    lines = b"".join(out).decode("utf-8").split("\n")
    # comment removal can leave trailing blanks; trim only lines that were edited
    for i in touched:
        if i < len(lines):
            lines[i] = lines[i].rstrip()
    return "\n".join(lines)


def collect_names(texts: Iterable[str], blocklist: Iterable[str]) -> dict[str, str]:
    """One fresh name per leaking identifier, stable across the corpus."""
    blocklist = tuple(w.lower() for w in blocklist)
    seen: set[str] = set()
    leaking: set[str] = set()
    for text in texts:
        tree = parse_unit("input.java", text)
        for node in walk(tree.root):
            if node.type in NAME_TYPES:
                name = node.text.decode("utf-8")
                seen.add(name)
                if _leaks(name, blocklist):
                    leaking.add(name)
    renames = {}
    counter = 0
    for name in sorted(leaking):
        while True:
            counter += 1
            candidate = f"{'T' if name[:1].isupper() else 'v'}{counter}"
            if candidate not in seen:
                break
        renames[name] = candidate
    return renames


def preprocess_text(text: str, renames: dict[str, str]) -> str:
    return _apply(text, _edits(text, renames))


def preprocess_corpus(src: str, dst: str, blocklist: Iterable[str] = DEFAULT_BLOCKLIST) -> PreprocessResult:
    result = PreprocessResult()
    sources: dict[str, str] = {}
    others: list[str] = []
    for dirpath, dirnames, filenames in os.walk(src):
        dirnames.sort()
        for name in sorted(filenames):
            path = os.path.join(dirpath, name)
            rel = os.path.relpath(path, src)
            if not name.endswith(SOURCE_EXTENSIONS):
                others.append(rel)
                continue
            try:
                with open(path, encoding="utf-8", newline="") as fh:
                    sources[rel] = fh.read()
            except UnicodeDecodeError:
                log.warning("%s is not UTF-8; copying it unchanged", rel)
                result.copied_verbatim.append(rel)
                others.append(rel)
    result.renames = collect_names(sources.values(), blocklist)
    for rel in others:
        os.makedirs(os.path.dirname(os.path.join(dst, rel)) or dst, exist_ok=True)
        shutil.copyfile(os.path.join(src, rel), os.path.join(dst, rel))
    for rel, text in sorted(sources.items()):
        try:
            out = preprocess_text(text, result.renames)
        except ParseError as exc:
            log.warning("%s: %s; copying it unchanged", rel, exc)
            result.copied_verbatim.append(rel)
            out = text
        target = os.path.join(dst, rel)
        os.makedirs(os.path.dirname(target) or dst, exist_ok=True)
        with open(target, "w", encoding="utf-8", newline="") as fh:
            fh.write(out)
        result.files += 1
    return result
