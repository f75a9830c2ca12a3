"""AST for the supported OCL subset.

Nodes are frozen dataclasses so that expressions hash, compare structurally,
and can be shared between models.  `to_text` prints an expression in a form
that `parse_ocl` reads back to an equal tree.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Iterator, Union


class Expr:
    __slots__ = ()

    def children(self) -> Iterator["Expr"]:
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Expr):
                yield value

    def walk(self) -> Iterator["Expr"]:
        yield self
        for child in self.children():
            yield from child.walk()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Const(Expr):
    value: Union[str, bool]


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class AllInstances(Expr):
    cls: str


@dataclass(frozen=True)
class Nav(Expr):
    base: Expr
    step: str
    at_pre: bool = False


@dataclass(frozen=True)
class Iterate(Expr):
    """exists / forAll / select over a collection with a bound variable."""

    kind: str
    src: Expr
    var: str
    body: Expr


@dataclass(frozen=True)
class IsEmpty(Expr):
    src: Expr


@dataclass(frozen=True)
class NotEmpty(Expr):
    src: Expr


@dataclass(frozen=True)
class Includes(Expr):
    src: Expr
    item: Expr


@dataclass(frozen=True)
class Excludes(Expr):
    src: Expr
    item: Expr


@dataclass(frozen=True)
class Eq(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Neq(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class And(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Or(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Implies(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr


@dataclass(frozen=True)
class OclIsNew(Expr):
    target: Expr


@dataclass(frozen=True)
class OclIsTypeOf(Expr):
    target: Expr
    cls: str


@dataclass(frozen=True)
class OclAsType(Expr):
    target: Expr
    cls: str


@dataclass(frozen=True)
class Let(Expr):
    name: str
    definition: Expr
    body: Expr


@dataclass(frozen=True)
class First(Expr):
    src: Expr


@dataclass(frozen=True)
class AsOrderedSet(Expr):
    src: Expr


ITERATORS = ("exists", "forAll", "select")

TRUE = Const(True)
FALSE = Const(False)


def conjuncts(expr: Expr) -> list[Expr]:
    """Flatten a tree of `And` nodes left to right."""
    if isinstance(expr, And):
        return conjuncts(expr.left) + conjuncts(expr.right)
    return [expr]


def conjoin(parts: list[Expr]) -> Expr:
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def free_vars(expr: Expr, bound: frozenset = frozenset()) -> set[str]:
    if isinstance(expr, Var):
        return set() if expr.name in bound else {expr.name}
    if isinstance(expr, Iterate):
        return free_vars(expr.src, bound) | free_vars(expr.body, bound | {expr.var})
    if isinstance(expr, Let):
        return free_vars(expr.definition, bound) | free_vars(expr.body, bound | {expr.name})
    out: set[str] = set()
    for child in expr.children():
        out |= free_vars(child, bound)
    return out


def mentions_oclisnew(expr: Expr) -> bool:
    return any(isinstance(node, OclIsNew) for node in expr.walk())


def _quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_text(expr: Expr) -> str:
    """Print `expr` fully parenthesised where precedence could matter."""
    if isinstance(expr, Const):
        if isinstance(expr.value, bool):
            return "true" if expr.value else "false"
        return _quote(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, AllInstances):
        return f"{expr.cls}.allInstances()"
    if isinstance(expr, Nav):
        return f"{_postfix(expr.base)}.{expr.step}" + ("@pre" if expr.at_pre else "")
    if isinstance(expr, Iterate):
        return f"{_postfix(expr.src)}->{expr.kind}({expr.var} | {to_text(expr.body)})"
    if isinstance(expr, IsEmpty):
        return f"{_postfix(expr.src)}->isEmpty()"
    if isinstance(expr, NotEmpty):
        return f"{_postfix(expr.src)}->notEmpty()"
    if isinstance(expr, Includes):
        return f"{_postfix(expr.src)}->includes({to_text(expr.item)})"
    if isinstance(expr, Excludes):
        return f"{_postfix(expr.src)}->excludes({to_text(expr.item)})"
    if isinstance(expr, First):
        return f"{_postfix(expr.src)}->first()"
    if isinstance(expr, AsOrderedSet):
        return f"{_postfix(expr.src)}->asOrderedSet()"
    if isinstance(expr, OclIsNew):
        return f"{_postfix(expr.target)}.oclIsNew()"
    if isinstance(expr, OclIsTypeOf):
        return f"{_postfix(expr.target)}.oclIsTypeOf({expr.cls})"
    if isinstance(expr, OclAsType):
        return f"{_postfix(expr.target)}.oclAsType({expr.cls})"
    if isinstance(expr, (Eq, Neq, And, Or, Implies)):
        op, prec = _BINOP[type(expr)]
        right_prec = prec + 1
        left_prec = prec + 1 if prec == 5 else prec
        return f"{_wrap(expr.left, left_prec)} {op} {_wrap(expr.right, right_prec)}"
    if isinstance(expr, Not):
        return f"not {_wrap(expr.operand, 4)}"
    if isinstance(expr, Let):
        return f"let {expr.name} = {_wrap(expr.definition, 1)} in {to_text(expr.body)}"
    raise TypeError(f"cannot print {expr!r}")


_BINOP = {Implies: ("implies", 1), Or: ("or", 2), And: ("and", 3), Eq: ("=", 5), Neq: ("<>", 5)}


def _precedence(expr: Expr) -> int:
    if isinstance(expr, Let):
        return 0
    if type(expr) in _BINOP:
        return _BINOP[type(expr)][1]
    if isinstance(expr, Not):
        return 4
    return 6


def _wrap(expr: Expr, needed: int) -> str:
    text = to_text(expr)
    return f"({text})" if _precedence(expr) < needed else text


def _postfix(expr: Expr) -> str:
    return _wrap(expr, 6)
