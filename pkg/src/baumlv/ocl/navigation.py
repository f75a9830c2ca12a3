"""Static typing of OCL expressions, role-mention scan, and the navigational test."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import ast as A

VALUE = "<value>"


def static_type(expr: A.Expr, ctx: dict, cm) -> Optional[str]:
    """Class name of the objects `expr` denotes, VALUE for data, None if unknown."""
    if isinstance(expr, A.Var):
        return ctx.get(expr.name)
    if isinstance(expr, A.AllInstances):
        return expr.cls if expr.cls in cm.by_name else None
    if isinstance(expr, A.OclAsType):
        return expr.cls if expr.cls in cm.by_name else None
    if isinstance(expr, (A.First, A.AsOrderedSet)):
        return static_type(expr.src, ctx, cm)
    if isinstance(expr, A.Iterate) and expr.kind == "select":
        return static_type(expr.src, ctx, cm)
    if isinstance(expr, A.Let):
        inner = dict(ctx)
        inner[expr.name] = static_type(expr.definition, ctx, cm)
        return static_type(expr.body, inner, cm)
    if isinstance(expr, A.Nav):
        base = static_type(expr.base, ctx, cm)
        if base == VALUE:
            return None
        refs = resolve_step(cm, base, expr.step)
        if refs == VALUE:
            return VALUE
        targets = {r.target_class for r in refs}
        return targets.pop() if len(targets) == 1 else None
    if isinstance(expr, A.Const):
        return VALUE
    return VALUE


def resolve_step(cm, cls: Optional[str], step: str):
    """Roles a navigation `.step` from `cls` may denote, or VALUE for an attribute."""
    if cls is not None and cls in cm.by_name:
        if step in cm.attributes_of(cls):
            return VALUE
        ref = cm.roles_of(cls).get(step)
        if ref is not None:
            return [ref]
        # a step declared on a subclass (an implicit downcast)
        found = []
        for sub in cm.descendants(cls):
            if step in cm.attributes_of(sub):
                return VALUE
            ref = cm.roles_of(sub).get(step)
            if ref is not None and ref not in found:
                found.append(ref)
        if found:
            return found
    refs = cm.roles_named(step)
    if refs:
        return refs
    return VALUE


def role_mentions(expr: A.Expr, ctx: dict, cm) -> list:
    """Every role (as `RoleRef`) navigated anywhere in `expr`, `@pre` steps included."""
    out = []

    def visit(e, env):
        if isinstance(e, A.Iterate):
            visit(e.src, env)
            inner = dict(env)
            inner[e.var] = static_type(e.src, env, cm)
            visit(e.body, inner)
            return
        if isinstance(e, A.Let):
            visit(e.definition, env)
            inner = dict(env)
            inner[e.name] = static_type(e.definition, env, cm)
            visit(e.body, inner)
            return
        if isinstance(e, A.Nav):
            base = static_type(e.base, env, cm)
            refs = resolve_step(cm, base if base != VALUE else None, e.step)
            if refs != VALUE:
                for r in refs:
                    if r not in out:
                        out.append(r)
        for child in e.children():
            visit(child, env)

    visit(expr, dict(ctx))
    return out


def classes_queried(expr: A.Expr) -> set:
    return {n.cls for n in expr.walk() if isinstance(n, A.AllInstances)}


@dataclass
class NavResult:
    navigational: bool
    witness: Optional[A.Expr] = None
    shared: list = field(default_factory=list)

    def __bool__(self):
        return self.navigational


def value_sources(expr: A.Expr):
    """Sub-expressions used as values: let definitions, right sides of `=`, `includes` items."""
    for node in expr.walk():
        if isinstance(node, A.Let):
            yield node.definition
        elif isinstance(node, (A.Eq, A.Neq)):
            yield node.right
        elif isinstance(node, A.Includes):
            yield node.item


def _free_queries(expr: A.Expr):
    """Maximal sub-expressions rooted at `C.allInstances()`."""
    found = []

    def visit(e):
        if not A.free_vars(e) and any(isinstance(n, A.AllInstances) for n in e.walk()) \
                and not isinstance(e, (A.And, A.Or, A.Not, A.Implies, A.Let, A.Eq, A.Neq)):
            found.append(e)
            return
        for child in e.children():
            visit(child)

    visit(expr)
    return found


def shared_queries(expr: A.Expr) -> list:
    """Free queries used as values and free of `oclIsNew()` (candidate shared-instance access)."""
    out = []
    for src in value_sources(expr):
        for q in _free_queries(src):
            if not A.mentions_oclisnew(q) and q not in out:
                out.append(q)
    return out


def is_navigational_from(expr: A.Expr, anchor: Optional[str], model, ro, allow_shared: bool = False) -> NavResult:
    """True iff every free query in `expr` touches read-only names only.

    Paths rooted at a variable (the anchor, a parameter, an iterator or let
    variable) are navigational by construction.  With `allow_shared`, free
    queries used as values without `oclIsNew()` are tolerated and reported in
    `shared` instead.
    """
    cm = model.class_model
    ro = set(ro)
    shared = shared_queries(expr) if allow_shared else []
    tolerated = set()
    for q in shared:
        tolerated.update(id(n) for n in q.walk())
    reported = []
    for node in expr.walk():
        if isinstance(node, A.AllInstances):
            rw_hit = any(c not in ro for c in cm.hierarchy(node.cls)) if node.cls in cm.by_name else True
            if not rw_hit:
                continue
            if id(node) in tolerated:
                continue
            return NavResult(False, node, shared)
    for q in shared:
        reported.append(q)
    return NavResult(True, None, reported)
