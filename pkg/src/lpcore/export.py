"""CPLEX LP text export for debugging programs in external solvers"""

import math
import re
from pathlib import Path
from typing import Dict, List

from src.lpcore.program import FeasibilityProgram, Relation, Sense

_RELATION_TEXT = {Relation.LE: "<=", Relation.GE: ">=", Relation.EQ: "="}


def _safe_names(program: FeasibilityProgram) -> Dict[str, str]:
    # LP format names: letters, digits and a few symbols, max 255 chars
    names = {}
    for i, var_id in enumerate(program.variables):
        cleaned = re.sub(r"[^A-Za-z0-9_.]", "_", var_id)
        if not cleaned or cleaned[0].isdigit() or cleaned[0] == ".":
            cleaned = f"x_{cleaned}"
        names[var_id] = f"{cleaned[:240]}_{i}" if cleaned in names.values() else cleaned[:250]
    return names


def _terms(coefs: Dict[str, float], names: Dict[str, str]) -> str:
    if not coefs:
        return "0 " + next(iter(names.values()), "x")
    parts: List[str] = []
    for var_id, coef in coefs.items():
        sign = "-" if coef < 0 else "+"
        parts.append(f"{sign} {abs(coef):.17g} {names[var_id]}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def to_lp_format(program: FeasibilityProgram) -> str:
    """
    Render a program as CPLEX LP text.

    Args:
        program: Program to render

    Returns:
        LP file contents
    """
    names = _safe_names(program)
    lines: List[str] = [f"\\ {program.name}"]

    objective = program.objective
    if objective is None or objective.sense is Sense.MIN:
        lines.append("Minimize")
    else:
        lines.append("Maximize")
    lines.append(f" obj: {_terms(objective.coefs if objective else {}, names)}")

    lines.append("Subject To")
    for r, constraint in enumerate(program.constraints):
        label = re.sub(r"[^A-Za-z0-9_.]", "_", constraint.name or f"c{r}")
        lines.append(
            f" {label}_{r}: {_terms(constraint.coefs, names)} "
            f"{_RELATION_TEXT[constraint.relation]} {constraint.rhs:.17g}"
        )

    lines.append("Bounds")
    for var in program.variables.values():
        name = names[var.id]
        if var.is_binary:
            continue
        if math.isinf(var.lower) and math.isinf(var.upper):
            lines.append(f" {name} free")
        elif math.isinf(var.upper):
            lines.append(f" {name} >= {var.lower:.17g}")
        else:
            low = "-inf" if math.isinf(var.lower) else f"{var.lower:.17g}"
            lines.append(f" {low} <= {name} <= {var.upper:.17g}")

    binaries = [names[v.id] for v in program.variables.values() if v.is_binary]
    if binaries:
        lines.append("Binaries")
        lines.extend(f" {name}" for name in binaries)
    lines.append("End")
    return "\n".join(lines) + "\n"


def write_lp_file(program: FeasibilityProgram, path: str) -> Path:
    """Write the LP text to a file and return its path"""
    output_file = Path(path)
    output_file.parent.mkdir(parents=True, exist_ok=True)
    output_file.write_text(to_lp_format(program), encoding="utf-8")
    return output_file
