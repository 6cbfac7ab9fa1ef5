"""Safe arithmetic expression compiler for data-function specifications.

The grammar is deliberately closed: +, -, *, /, unary minus, the functions
sin, cos, exp, numeric literals and a declared set of variable names.
Anything else (powers, comparisons, attribute access, other calls) is
rejected.  Compiled expressions evaluate with NumPy, so they accept both
scalars and arrays.
"""

from __future__ import annotations

import ast

import numpy as np

from .errors import ConfigError

_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
}


def compile_expression(text: str, variables: tuple[str, ...]):
    """Compile ``text`` into a callable of the declared variables (in order)."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {text!r}: {exc}") from exc

    def build(node):
        if isinstance(node, ast.Expression):
            return build(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, (int, float)) and not isinstance(
                node.value, bool
            ):
                val = float(node.value)
                return lambda env: val
            raise ConfigError(f"non-numeric constant {node.value!r} in expression")
        if isinstance(node, ast.Name):
            if node.id not in variables:
                raise ConfigError(
                    f"unknown variable {node.id!r}; allowed: {', '.join(variables)}"
                )
            name = node.id
            return lambda env: env[name]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = build(node.operand)
            if isinstance(node.op, ast.UAdd):
                return inner
            return lambda env: -inner(env)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            op = _BINOPS[type(node.op)]
            left, right = build(node.left), build(node.right)
            return lambda env: op(left(env), right(env))
        if isinstance(node, ast.Call):
            if (
                isinstance(node.func, ast.Name)
                and node.func.id in _FUNCTIONS
                and not node.keywords
                and len(node.args) == 1
            ):
                fn = _FUNCTIONS[node.func.id]
                arg = build(node.args[0])
                return lambda env: fn(arg(env))
            raise ConfigError(
                "only sin, cos, exp calls with one argument are allowed"
            )
        raise ConfigError(
            f"unsupported syntax {type(node).__name__!r} in expression {text!r}"
        )

    body = build(tree)

    def sampler(*args):
        if len(args) != len(variables):
            raise ValueError(f"expected {len(variables)} arguments, got {len(args)}")
        env = dict(zip(variables, (np.asarray(a, float) for a in args)))
        return body(env)

    return sampler
