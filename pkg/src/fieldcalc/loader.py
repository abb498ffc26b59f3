"""Program loading: parse, bind scenario constants, desugar, validate names."""

from __future__ import annotations

from typing import Optional

from .ast import Call, Program, free_vars, resolve_constants, walk
from .builtins import is_builtin_name
from .desugar import desugar
from .errors import Diagnostic, ParseError
from .parser import parse
from .scenario import ScenarioConfig
from .values import LocalValue


def load_core_program(source: str, scenario: Optional[ScenarioConfig] = None,
                      extra_constants: Optional[dict[str, LocalValue]] = None) -> Program:
    """Source text to a validated core program.

    Constants from the scenario (shadowed by ``extra_constants``, e.g. CLI
    overrides) are substituted before desugaring. With a scenario at hand,
    unbound variables and unknown call targets become diagnostics here
    rather than runtime errors later.
    """
    program = parse(source)
    constants: dict[str, LocalValue] = {}
    if scenario is not None:
        constants.update(scenario.constants)
    if extra_constants:
        constants.update(extra_constants)
    program = resolve_constants(program, constants)
    core = desugar(program)
    if scenario is not None:
        diags = validate_against_scenario(core, set(scenario.sensors))
        if diags:
            raise ParseError(diags)
    return core


def validate_against_scenario(core: Program, sensor_names: set[str]) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    for f in core.functions.values():
        for name in free_vars(f.body, frozenset(f.params)):
            diags.append(Diagnostic(
                "unbound-variable",
                f"variable {name!r} in {f.name!r} is neither a parameter nor a constant",
                f.pos))
    for name in free_vars(core.main):
        diags.append(Diagnostic(
            "unbound-variable", f"variable {name!r} is not bound and not a constant"))
    for root in core.children():
        for node in walk(root):
            if isinstance(node, Call):
                fname = node.fname
                if (fname in core.functions or is_builtin_name(fname)
                        or fname[0].isupper() or fname in sensor_names):
                    continue
                diags.append(Diagnostic(
                    "unknown-function",
                    f"{fname!r} is not a function, builtin or declared sensor",
                    node.pos))
    return diags
