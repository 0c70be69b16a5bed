"""Quantum read-once branching programs, one-round multi-partition protocols and
the classical rectangle toolkit around them."""

from __future__ import annotations

from .graph import Edge, Node, QbpGraph, classify, restrict, validate
from .io import load, load_file, save, save_file, to_dot
from .sim import final_state, final_state_info, run, verify_function

__all__ = [
    "Edge",
    "Node",
    "QbpGraph",
    "classify",
    "final_state",
    "final_state_info",
    "load",
    "load_file",
    "restrict",
    "run",
    "save",
    "save_file",
    "to_dot",
    "validate",
    "verify_function",
]
__version__ = "0.1.0"
