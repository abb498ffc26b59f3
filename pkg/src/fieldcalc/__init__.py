"""Field-calculus interpreter, asynchronous network simulator, and
distributed-monitor corpus with independent oracles."""

from .ast import Program
from .desugar import desugar
from .errors import Diagnostic, FcError, FcRuntimeError, ParseError, ScenarioError
from .evaluator import Export, RoundContext, eval_round, gather_nbr, rep_prev
from .loader import load_core_program
from .netsim import EventStructure, SimulationTrace, World, neighbours, run
from .oracles import (
    oracle_bfs, oracle_ellipse, oracle_longest_chain, oracle_same_value_component,
)
from .parser import parse
from .pretty import pretty_print
from .scenario import ScenarioConfig, load_scenario
from .values import (
    Constructor, DeviceId, NeighbouringValue, compare, encode_value, equal,
)
from .vtree import ABSENT, ValueTree, vt_lookup

__version__ = "0.1.0"

__all__ = [
    "ABSENT", "Constructor", "DeviceId", "Diagnostic", "EventStructure",
    "Export", "FcError", "FcRuntimeError", "NeighbouringValue", "ParseError",
    "Program", "RoundContext", "ScenarioConfig", "ScenarioError",
    "SimulationTrace", "ValueTree", "World", "compare", "desugar",
    "encode_value", "equal", "eval_round", "gather_nbr", "load_core_program",
    "load_scenario", "neighbours", "oracle_bfs", "oracle_ellipse",
    "oracle_longest_chain", "oracle_same_value_component", "parse",
    "pretty_print", "rep_prev", "run", "vt_lookup",
]
