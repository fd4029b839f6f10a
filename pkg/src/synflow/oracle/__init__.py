"""Ground truth by brute force: def-use closure and exhaustive path search."""

from .backend import OracleBackend
from .feasible import SearchBudgetExceeded, UnsupportedPath, oracle_feasible, oracle_witness
from .mini import FactClosure, MiniFunction, UnsupportedConstruct, check_subset, oracle_closure

__all__ = [
    "FactClosure",
    "MiniFunction",
    "OracleBackend",
    "SearchBudgetExceeded",
    "UnsupportedConstruct",
    "UnsupportedPath",
    "check_subset",
    "oracle_closure",
    "oracle_feasible",
    "oracle_witness",
]
