"""Child-process entry point that checks one SMT-LIB problem with z3.

Reads the problem on standard input and prints ``sat``, ``unsat`` or
``unknown`` followed by the model, or ``error: <message>`` with exit
status 1.  Kept free of package imports so it starts quickly.
"""

from __future__ import annotations

import sys


def main(argv: list[str]) -> int:
    import z3

    timeout_ms = int(argv[0]) if argv else 10_000
    text = sys.stdin.read()
    solver = z3.Solver()
    solver.set("timeout", timeout_ms)
    try:
        solver.from_string(text)
        result = solver.check()
    except z3.Z3Exception as exc:
        msg = exc.value.decode() if isinstance(exc.value, bytes) else str(exc.value)
        print("error: " + " ".join(msg.split()))
        return 1
    print(str(result))
    if result == z3.sat:
        print(solver.model().sexpr())
    elif result == z3.unknown:
        print(solver.reason_unknown())
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
