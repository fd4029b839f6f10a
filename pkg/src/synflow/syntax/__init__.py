"""Parsing, control flow and interface values, all without a compiler."""

from .callgraph import CallEdge, CallGraph, call_graph
from .cfg import Cfg, CfgError, Edge, Statement, build_cfg
from .parsing import FunctionInfo, ParseError, SourceUnit, SyntaxTree, discover_sources, load_unit, parse_unit
from .values import CallSite, InterfaceValues, ValueRef, interface_values

__all__ = [
    "CallEdge",
    "CallGraph",
    "CallSite",
    "Cfg",
    "CfgError",
    "Edge",
    "FunctionInfo",
    "InterfaceValues",
    "ParseError",
    "SourceUnit",
    "Statement",
    "SyntaxTree",
    "ValueRef",
    "build_cfg",
    "call_graph",
    "discover_sources",
    "interface_values",
    "load_unit",
    "parse_unit",
]
