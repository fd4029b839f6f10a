"""Content-addressed store of recorded exchanges (fingerprint → response text)."""

from __future__ import annotations

import json
import os
import threading
from typing import Iterator, Optional

from .client import BackendError, ChatRequest


class CassetteConflictError(BackendError):
    def __init__(self, fingerprint: str):
        super().__init__(f"exchange {fingerprint} already recorded with different text; review the cassette")
        self.fingerprint = fingerprint


class Cassette:
    def __init__(self, entries: Optional[dict[str, str]] = None, path: Optional[str] = None):
        self._entries: dict[str, str] = dict(entries or {})
        self.path = path
        self._lock = threading.Lock()

    @classmethod
    def load(cls, path: str, missing_ok: bool = False) -> "Cassette":
        if missing_ok and not os.path.exists(path):
            return cls(path=path)
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict) or not all(isinstance(v, str) for v in data.values()):
            raise ValueError(f"{path}: a cassette is a JSON object of fingerprint → text")
        return cls(data, path)

    def save(self, path: Optional[str] = None) -> None:
        target = path or self.path
        if target is None:
            raise ValueError("cassette has no path")
        with self._lock:
            data = dict(sorted(self._entries.items()))
        os.makedirs(os.path.dirname(os.path.abspath(target)), exist_ok=True)
        tmp = target + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=1, ensure_ascii=False)
            fh.write("\n")
        os.replace(tmp, target)

    def get(self, fp: str) -> Optional[str]:
        return self._entries.get(fp)

    def record(self, request: ChatRequest | str, text: str) -> "Cassette":
        fp = request if isinstance(request, str) else request.fingerprint
        with self._lock:
            old = self._entries.get(fp)
            if old is not None and old != text:
                raise CassetteConflictError(fp)
            self._entries[fp] = text
        return self

    def __contains__(self, fp: str) -> bool:
        return fp in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self._entries))
