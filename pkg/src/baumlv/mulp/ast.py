"""Abstract syntax of μLp properties.

Printing (`str`) produces the concrete ASCII syntax accepted by
`parse_property`, so `parse_property(str(phi)) == phi`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..ocl import ast as ocl

CONJUNCTIVE = "conjunctive"
IMPLICATIVE = "implicative"


class Formula:
    __slots__ = ()

    def children(self) -> tuple:
        return ()

    def walk(self):
        yield self
        for c in self.children():
            yield from c.walk()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


@dataclass(frozen=True)
class ClassAtom(Formula):
    cls: str
    var: str


@dataclass(frozen=True)
class RelAtom(Formula):
    assoc: str
    left: str
    right: str


@dataclass(frozen=True)
class OclAtom(Formula):
    """A boolean OCL expression whose free variables are formula variables."""

    expr: ocl.Expr


@dataclass(frozen=True)
class Live(Formula):
    var: str


@dataclass(frozen=True)
class Not(Formula):
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Exists(Formula):
    """∃x. live(x) ∧ body: quantification over the current active domain."""

    var: str
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class ExistsClass(Formula):
    """∃x. A(x) ∧ body"""

    var: str
    cls: str
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class ForAllClass(Formula):
    """∀x. A(x) → body"""

    var: str
    cls: str
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class ExistsRel(Formula):
    """∃y. R(x,y) ∧ body when forward, ∃y. R(y,x) ∧ body otherwise."""

    var: str
    assoc: str
    src: str
    forward: bool
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class ForAllRel(Formula):
    var: str
    assoc: str
    src: str
    forward: bool
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class Diamond(Formula):
    body: Formula
    polarity: str = CONJUNCTIVE
    guard: Optional[tuple] = None  # explicit live-guard variables, None = inferred

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class Box(Formula):
    body: Formula
    polarity: str = IMPLICATIVE
    guard: Optional[tuple] = None

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class FixVar(Formula):
    name: str


@dataclass(frozen=True)
class Mu(Formula):
    name: str
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class Nu(Formula):
    name: str
    body: Formula

    def children(self):
        return (self.body,)


TRUE = TrueF()
FALSE = FalseF()

QUANTIFIERS = (Exists, Forall, ExistsClass, ForAllClass, ExistsRel, ForAllRel)
MODALITIES = (Diamond, Box)
FIXPOINTS = (Mu, Nu)


def conjoin(parts) -> Formula:
    parts = list(parts)
    if not parts:
        return TRUE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def disjoin(parts) -> Formula:
    parts = list(parts)
    if not parts:
        return FALSE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Or(p, out)
    return out


# --- variables ---------------------------------------------------------------


def fixpoint_vars(phi: Formula) -> dict:
    """Fixpoint variable -> sorted tuple of the first-order variables of its binder body."""
    out: dict = {}

    def visit(f):
        if isinstance(f, FIXPOINTS):
            out[f.name] = tuple(sorted(free_vars(f.body, out, skip=f.name)))
        for c in f.children():
            visit(c)

    visit(phi)
    return out


def free_vars(phi: Formula, zvars: Optional[dict] = None, skip: Optional[str] = None) -> set:
    """Free first-order variables; a fixpoint variable contributes those of its binder."""
    zvars = zvars or {}

    def fv(f) -> set:
        if isinstance(f, ClassAtom) or isinstance(f, Live):
            return {f.var}
        if isinstance(f, RelAtom):
            return {f.left, f.right}
        if isinstance(f, OclAtom):
            return set(ocl.free_vars(f.expr))
        if isinstance(f, FixVar):
            if f.name == skip:
                return set()
            return set(zvars.get(f.name, ()))
        if isinstance(f, (Exists, Forall, ExistsClass, ForAllClass)):
            return fv(f.body) - {f.var}
        if isinstance(f, (ExistsRel, ForAllRel)):
            return (fv(f.body) - {f.var}) | {f.src}
        if isinstance(f, FIXPOINTS):
            inner = dict(zvars)
            if f.name not in inner:
                inner[f.name] = tuple(sorted(free_vars(f.body, zvars, skip=f.name)))
            return free_vars(f.body, inner, skip=skip)
        out = set()
        for c in f.children():
            out |= fv(c)
        return out

    return fv(phi)


def is_closed(phi: Formula) -> bool:
    return not free_vars(phi)


# --- printing ----------------------------------------------------------------

_PREC = {Implies: 1, Or: 2, And: 3}


def _prec(f: Formula) -> int:
    if isinstance(f, (Implies, Or, And)):
        return _PREC[type(f)]
    if isinstance(f, QUANTIFIERS + FIXPOINTS):
        return 0
    return 4


def _wrap(f: Formula, need: int) -> str:
    text = to_text(f)
    return f"({text})" if _prec(f) < need else text


def _guard(g) -> str:
    return ",".join(g)


def to_text(f: Formula) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, ClassAtom):
        return f"{f.cls}({f.var})"
    if isinstance(f, RelAtom):
        return f"{f.assoc}({f.left}, {f.right})"
    if isinstance(f, OclAtom):
        return "{ " + ocl.to_text(f.expr) + " }"
    if isinstance(f, Live):
        return f"live({f.var})"
    if isinstance(f, FixVar):
        return f.name
    if isinstance(f, Not):
        return "~" + _wrap(f.body, 4)
    if isinstance(f, And):
        return f"{_wrap(f.left, 4)} /\\ {_wrap(f.right, 3)}"
    if isinstance(f, Or):
        return f"{_wrap(f.left, 3)} \\/ {_wrap(f.right, 2)}"
    if isinstance(f, Implies):
        return f"{_wrap(f.left, 2)} -> {_wrap(f.right, 1)}"
    if isinstance(f, Diamond):
        op = "<>" if f.guard is None else f"<{_guard(f.guard)}>"
        if f.polarity != CONJUNCTIVE:
            op += "?"
        return op + " " + _wrap(f.body, 4)
    if isinstance(f, Box):
        op = "[]" if f.guard is None else f"[{_guard(f.guard)}]"
        if f.polarity != IMPLICATIVE:
            op += "?"
        return op + " " + _wrap(f.body, 4)
    if isinstance(f, Mu):
        return f"mu {f.name}. {to_text(f.body)}"
    if isinstance(f, Nu):
        return f"nu {f.name}. {to_text(f.body)}"
    if isinstance(f, Exists):
        return f"exists {f.var}. {to_text(f.body)}"
    if isinstance(f, Forall):
        return f"forall {f.var}. {to_text(f.body)}"
    if isinstance(f, ExistsClass):
        return f"exists {f.var}: {f.cls}. {to_text(f.body)}"
    if isinstance(f, ForAllClass):
        return f"forall {f.var}: {f.cls}. {to_text(f.body)}"
    if isinstance(f, (ExistsRel, ForAllRel)):
        q = "exists" if isinstance(f, ExistsRel) else "forall"
        step = f"{f.assoc}({f.src},.)" if f.forward else f"{f.assoc}(.,{f.src})"
        return f"{q} {f.var}: {step}. {to_text(f.body)}"
    raise TypeError(f"not a formula: {f!r}")
