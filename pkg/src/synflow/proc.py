"""The single place child processes are started.

Every spawn is tagged and recorded so a run can prove that nothing but the
extractor sandbox and the prover was ever executed.
"""

from __future__ import annotations

import logging
import subprocess
import threading
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

log = logging.getLogger(__name__)

ALLOWED_KINDS = ("extractor", "prover")


@dataclass(frozen=True)
class SpawnRecord:
    kind: str
    argv: tuple[str, ...]


_lock = threading.Lock()
_records: list[SpawnRecord] = []


def spawn_log() -> list[SpawnRecord]:
    with _lock:
        return list(_records)


def clear_spawn_log() -> None:
    with _lock:
        _records.clear()


def run_child(
    kind: str,
    argv: Sequence[str],
    stdin: str,
    timeout: float,
    cwd: Optional[str] = None,
    env: Optional[dict] = None,
    preexec_fn: Optional[Callable[[], None]] = None,
) -> subprocess.CompletedProcess:
    """Run a child to completion; raises ``subprocess.TimeoutExpired`` on timeout."""
    if kind not in ALLOWED_KINDS:
        raise ValueError(f"refusing to spawn a {kind!r} process")
    with _lock:
        _records.append(SpawnRecord(kind, tuple(argv)))
    log.debug("spawn %s: %s", kind, " ".join(argv))
    return subprocess.run(
        list(argv),
        input=stdin,
        capture_output=True,
        text=True,
        timeout=timeout,
        cwd=cwd,
        env=env,
        preexec_fn=preexec_fn,
    )
