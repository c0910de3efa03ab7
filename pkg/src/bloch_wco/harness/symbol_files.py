"""
JSON symbol files describing a pair (u, phi).

Node objects:

    {"op": "z"}
    {"op": "const", "re": R, "im": I}
    {"op": "mobius", "re": R, "im": I}
    {"op": "add" | "sub" | "mul" | "div", "args": [A, B]}
    {"op": "neg" | "log" | "exp", "args": [A]}
    {"op": "powint", "n": N, "args": [A]}
    {"op": "compose", "args": [F, G]}          F(G(z))

Top level: {"label": S, "u": NODE, "phi": NODE}.
"""

import json
import logging
from functools import singledispatch
from pathlib import Path
from typing import Any, Dict, Union

from bloch_wco.analytic_core import (
    Add,
    AnalyticExpr,
    Compose,
    Const,
    Div,
    Exp,
    Log,
    Mobius,
    Mul,
    Neg,
    PowInt,
    Sub,
    Var,
)
from bloch_wco.errors import InvalidParameter, ParseError
from bloch_wco.functionals import SymbolPair, make_pair

logger = logging.getLogger(__name__)

BINARY = {"add": Add, "sub": Sub, "mul": Mul, "div": Div}
UNARY = {"neg": Neg, "log": Log, "exp": Exp}


# =============================================================================
# PARSING
# =============================================================================

def _number(node: dict, key: str, path: str) -> float:
    value = node.get(key, 0.0)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"'{key}' must be a number, got {value!r}", path=f"{path}.{key}")
    return float(value)


def _args(node: dict, count: int, path: str) -> list:
    args = node.get("args")
    if not isinstance(args, list) or len(args) != count:
        raise ParseError(f"'{node.get('op')}' needs {count} args", path=f"{path}.args")
    return [parse_document(arg, f"{path}.args[{i}]") for i, arg in enumerate(args)]


def parse_document(node: Any, path: str = "$") -> AnalyticExpr:
    """Build an expression from a decoded node object; errors carry the JSON path."""
    if not isinstance(node, dict):
        raise ParseError(f"node must be an object, got {type(node).__name__}", path=path)
    op = node.get("op")
    try:
        if op == "z":
            return Var()
        if op in ("const", "mobius"):
            value = complex(_number(node, "re", path), _number(node, "im", path))
            return Const(value) if op == "const" else Mobius(value)
        if op in BINARY:
            return BINARY[op](*_args(node, 2, path))
        if op in UNARY:
            return UNARY[op](*_args(node, 1, path))
        if op == "powint":
            n = node.get("n")
            if isinstance(n, bool) or not isinstance(n, int):
                raise ParseError(f"'n' must be an integer, got {n!r}", path=f"{path}.n")
            return PowInt(*_args(node, 1, path), n)
        if op == "compose":
            return Compose(*_args(node, 2, path))
    except InvalidParameter as e:
        raise ParseError(str(e), path=path) from e
    raise ParseError(f"unknown op {op!r}", path=f"{path}.op")


def load_document(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, line=e.lineno, column=e.colno) from e
    if not isinstance(doc, dict):
        raise ParseError("symbol file must hold a JSON object")
    missing = [key for key in ("u", "phi") if key not in doc]
    if missing:
        raise ParseError(f"missing keys: {missing}")
    return doc


def parse_symbol_file(path: Union[str, Path]) -> SymbolPair:
    """
    Read, parse and validate a symbol file.

    Raises:
    -------
    ParseError
        malformed JSON (line and column) or malformed nodes (JSON path).
    NotSelfMap
        phi leaves the disk.
    """
    path = Path(path)
    doc = load_document(path)
    u = parse_document(doc["u"], "$.u")
    phi = parse_document(doc["phi"], "$.phi")
    label = str(doc.get("label") or path.stem)
    pair = make_pair(u, phi, label)
    logger.debug("parsed %s: sup |phi| = %.12g", label, pair.report.sup_modulus)
    return pair


# =============================================================================
# SERIALIZATION
# =============================================================================

@singledispatch
def serialize_expr(expr) -> dict:
    """Node object for an expression; inverse of parse_document."""
    raise InvalidParameter(f"cannot serialize {type(expr).__name__}")


@serialize_expr.register(Var)
def _(expr):
    return {"op": "z"}


@serialize_expr.register(Const)
def _(expr):
    return {"op": "const", "re": expr.value.real, "im": expr.value.imag}


@serialize_expr.register(Mobius)
def _(expr):
    return {"op": "mobius", "re": expr.a.real, "im": expr.a.imag}


@serialize_expr.register(PowInt)
def _(expr):
    return {"op": "powint", "n": expr.n, "args": [serialize_expr(expr.operands[0])]}


@serialize_expr.register(Add)
@serialize_expr.register(Sub)
@serialize_expr.register(Mul)
@serialize_expr.register(Div)
@serialize_expr.register(Neg)
@serialize_expr.register(Log)
@serialize_expr.register(Exp)
@serialize_expr.register(Compose)
def _(expr):
    return {"op": expr.kind, "args": [serialize_expr(op) for op in expr.operands]}


def write_symbol_file(u: AnalyticExpr, phi: AnalyticExpr, path: Union[str, Path], label: str = "") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"label": label or path.stem, "u": serialize_expr(u), "phi": serialize_expr(phi)}
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return path
