"""Set-semantics evaluation of OCL-subset queries over snapshots.

Values are scalars (str, bool, Oid, None) or frozensets of scalars.  A
navigation that yields one element returns the element itself; an empty
result is None.  `first()` over an unordered collection with more than one
element yields a `Choice`, which `includes` and `=` read existentially.
"""

from __future__ import annotations

from typing import Optional

from ..errors import OclEvaluationError, PreSnapshotMissing, UnboundVariable, UnknownName
from ..snapshot import Oid, Snapshot, sort_key
from . import ast as A


class Choice(frozenset):
    """Unresolved pick of one element from an unordered collection."""


def as_set(value) -> frozenset:
    if value is None:
        return frozenset()
    if isinstance(value, frozenset):
        return frozenset(value)
    return frozenset((value,))


def normalize(values) -> object:
    values = frozenset(values)
    if not values:
        return None
    if len(values) == 1:
        return next(iter(values))
    return values


def truth(value) -> bool:
    if isinstance(value, frozenset):
        return len(value) == 1 and True in value
    return value is True


def _equal(left, right) -> bool:
    if isinstance(left, Choice) or isinstance(right, Choice):
        ls = as_set(left) if isinstance(left, Choice) else None
        rs = as_set(right) if isinstance(right, Choice) else None
        if ls is not None and rs is None:
            return as_set(right) in ({frozenset((x,)) for x in ls})
        if rs is not None and ls is None:
            return as_set(left) in ({frozenset((x,)) for x in rs})
        return bool(ls & rs)
    return as_set(left) == as_set(right)


def navigate(snap: Snapshot, base, step: str):
    """One navigation step from every object in `base`."""
    cm = snap.schema
    out = set()
    known = False
    for item in as_set(base):
        if not isinstance(item, Oid):
            raise OclEvaluationError(f"cannot navigate .{step} from value {item!r}")
        cls = snap.objects.get(item)
        if cls is None:
            continue
        attrs = cm.attributes_of(cls)
        if step in attrs:
            known = True
            value = snap.attr(item, step)
            if value is not None:
                out.add(value)
            continue
        ref = cm.roles_of(cls).get(step)
        if ref is not None:
            known = True
            out |= snap.neighbours(ref.assoc, ref.forward, item)
    if not known and not _step_exists(cm, step):
        raise UnknownName(f"no attribute or role named {step!r}")
    return normalize(out)


def _step_exists(cm, step):
    if cm.roles_named(step):
        return True
    return any(a.name == step for c in cm.classes for a in c.attributes)


class Evaluator:
    def __init__(self, now: Snapshot, pre: Optional[Snapshot] = None):
        self.now = now
        self.pre = pre

    def eval(self, expr: A.Expr, env: dict):
        method = getattr(self, "e_" + type(expr).__name__)
        return method(expr, env)

    def e_Const(self, e, env):
        return e.value

    def e_Var(self, e, env):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariable(f"unbound variable {e.name!r}") from None

    def e_AllInstances(self, e, env):
        self.now.schema.check(e.cls)
        return normalize(self.now.extension(e.cls))

    def e_Nav(self, e, env):
        base = self.eval(e.base, env)
        if e.at_pre:
            if self.pre is None:
                raise PreSnapshotMissing(f"@pre used without a pre-state: {e}")
            return navigate(self.pre, base, e.step)
        return navigate(self.now, base, e.step)

    def e_Iterate(self, e, env):
        items = sorted(as_set(self.eval(e.src, env)), key=sort_key)
        inner = dict(env)

        def test(x):
            inner[e.var] = x
            return truth(self.eval(e.body, inner))

        if e.kind == "exists":
            return any(test(x) for x in items)
        if e.kind == "forAll":
            return all(test(x) for x in items)
        return normalize(x for x in items if test(x))

    def e_IsEmpty(self, e, env):
        return not as_set(self.eval(e.src, env))

    def e_NotEmpty(self, e, env):
        return bool(as_set(self.eval(e.src, env)))

    def e_Includes(self, e, env):
        src = as_set(self.eval(e.src, env))
        item = self.eval(e.item, env)
        if isinstance(item, Choice):
            return bool(src & item)
        return as_set(item) <= src

    def e_Excludes(self, e, env):
        src = as_set(self.eval(e.src, env))
        item = self.eval(e.item, env)
        return not (src & as_set(item))

    def e_Eq(self, e, env):
        return _equal(self.eval(e.left, env), self.eval(e.right, env))

    def e_Neq(self, e, env):
        return not _equal(self.eval(e.left, env), self.eval(e.right, env))

    def e_And(self, e, env):
        return truth(self.eval(e.left, env)) and truth(self.eval(e.right, env))

    def e_Or(self, e, env):
        return truth(self.eval(e.left, env)) or truth(self.eval(e.right, env))

    def e_Implies(self, e, env):
        return (not truth(self.eval(e.left, env))) or truth(self.eval(e.right, env))

    def e_Not(self, e, env):
        return not truth(self.eval(e.operand, env))

    def e_OclIsNew(self, e, env):
        if self.pre is None:
            raise OclEvaluationError("oclIsNew() is only meaningful in a postcondition")
        items = as_set(self.eval(e.target, env))
        return bool(items) and all(x in self.now.objects and x not in self.pre.objects for x in items)

    def e_OclIsTypeOf(self, e, env):
        self.now.schema.check(e.cls)
        items = as_set(self.eval(e.target, env))
        return len(items) == 1 and self.now.objects.get(next(iter(items))) == e.cls

    def e_OclAsType(self, e, env):
        self.now.schema.check(e.cls)
        return self.eval(e.target, env)

    def e_Let(self, e, env):
        inner = dict(env)
        inner[e.name] = self.eval(e.definition, env)
        return self.eval(e.body, inner)

    def e_First(self, e, env):
        items = as_set(self.eval(e.src, env))
        if len(items) <= 1:
            return normalize(items)
        return Choice(items)

    def e_AsOrderedSet(self, e, env):
        return self.eval(e.src, env)


def eval_query(expr: A.Expr, now: Snapshot, pre_snap: Optional[Snapshot] = None, env: Optional[dict] = None):
    """Evaluate `expr` on `now`; `@pre` steps read `pre_snap`."""
    return Evaluator(now, pre_snap).eval(expr, dict(env or {}))


def holds(expr: A.Expr, now: Snapshot, pre_snap: Optional[Snapshot] = None, env: Optional[dict] = None) -> bool:
    return truth(eval_query(expr, now, pre_snap, env))
