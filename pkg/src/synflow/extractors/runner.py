"""Sandboxed execution of extractor programs.

A program is the shipped prelude followed by the model-written ``extract``
function between region markers.  It runs in a fresh interpreter with an
empty environment, a read-only scratch directory, a wall-clock limit and an
address-space cap.  Diagnostics are condensed to the exception and the line
inside the model region so they read the same on every machine.
"""

from __future__ import annotations

import inspect
import os
import re
import stat
import subprocess
import sys
import tempfile
from dataclasses import dataclass
from functools import lru_cache

from .. import proc
from . import prelude

BEGIN_MARK = "# ---- begin extract ----"
END_MARK = "# ---- end extract ----"
SCRIPT_NAME = "extractor.py"


class ExtractorExecutionError(RuntimeError):
    def __init__(self, diagnostic: str):
        super().__init__(diagnostic)
        self.diagnostic = diagnostic


@lru_cache(maxsize=1)
def skeleton_text() -> str:
    return inspect.getsource(prelude)


def assemble(body: str) -> str:
    """Full script text for a model-written ``extract`` function."""
    return "\n".join([
        skeleton_text().rstrip(),
        "",
        "_block_network()",
        "",
        BEGIN_MARK,
        body.rstrip(),
        END_MARK,
        "",
        "if __name__ == '__main__':",
        "    _main()",
        "",
    ])


def region_offset() -> int:
    """Script line number of the first model-written line minus one."""
    return assemble("").split("\n").index(BEGIN_MARK) + 1


_FRAME = re.compile(r'File "[^"]*' + re.escape(SCRIPT_NAME) + r'", line (\d+)')


def condense(stderr: str) -> str:
    lines = [ln for ln in stderr.strip().split("\n") if ln.strip()]
    if not lines:
        return "the program failed without a message"
    message = lines[-1].strip()
    offset = region_offset()
    where = ""
    for m in _FRAME.finditer(stderr):
        n = int(m.group(1)) - offset
        if n >= 1:
            where = f" (extract line {n})"
    return message + where


UNPRIVILEGED_ID = 65534


def _limits(memory_bytes: int, drop_root: bool):
    def apply() -> None:
        import resource

        resource.setrlimit(resource.RLIMIT_AS, (memory_bytes, memory_bytes))
        # root ignores file modes, so the read-only scratch only holds after dropping it
        if drop_root and os.geteuid() == 0:
            os.setgroups([])
            os.setgid(UNPRIVILEGED_ID)
            os.setuid(UNPRIVILEGED_ID)

    return apply


@dataclass
class SandboxRunner:
    timeout: float = 10.0
    memory_bytes: int = 256 * 1024 * 1024
    python: str = sys.executable
    drop_root: bool = True

    def run(self, body: str, tree_text: str) -> list[tuple[int, str]]:
        script = assemble(body)
        with tempfile.TemporaryDirectory(prefix="synflow-extract-") as scratch:
            path = os.path.join(scratch, SCRIPT_NAME)
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(script)
            os.chmod(path, stat.S_IRUSR | stat.S_IRGRP | stat.S_IROTH)
            os.chmod(scratch, stat.S_IRUSR | stat.S_IXUSR | stat.S_IRGRP | stat.S_IXGRP | stat.S_IROTH | stat.S_IXOTH)
            try:
                done = proc.run_child(
                    "extractor",
                    [self.python, "-I", "-S", "-B", path],
                    stdin=tree_text,
                    timeout=self.timeout,
                    cwd=scratch,
                    env={},
                    preexec_fn=_limits(self.memory_bytes, self.drop_root),
                )
            except subprocess.TimeoutExpired:
                raise ExtractorExecutionError(f"timed out after {self.timeout:g} s") from None
            finally:
                os.chmod(scratch, stat.S_IRWXU)
        if done.returncode != 0:
            raise ExtractorExecutionError(condense(done.stderr))
        return parse_output(done.stdout)


def parse_output(stdout: str) -> list[tuple[int, str]]:
    refs = []
    for raw in stdout.split("\n"):
        if not raw.strip():
            continue
        parts = raw.split("\t")
        if len(parts) != 2 or not parts[0].strip().isdigit():
            raise ExtractorExecutionError(f"malformed output line {raw!r}; expected line<TAB>identifier")
        refs.append((int(parts[0]), parts[1].strip()))
    return sorted(set(refs))
