"""Path feasibility: reference encoding, prover execution and the repair loop."""

from .encoder import EncodingError, encode_path
from .prover import ERROR, SAT, UNKNOWN, UNSAT, ExecutableProver, ProverOutcome, ShimProver, strip_host_commands
from .validator import FALLBACK, SOLVER, FeasibilityVerdict, path_bindings, validate_path

__all__ = [
    "ERROR",
    "EncodingError",
    "ExecutableProver",
    "FALLBACK",
    "FeasibilityVerdict",
    "ProverOutcome",
    "SAT",
    "SOLVER",
    "ShimProver",
    "UNKNOWN",
    "UNSAT",
    "encode_path",
    "path_bindings",
    "strip_host_commands",
    "validate_path",
]
