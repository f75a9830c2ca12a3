"""Effect normal form (ENF): an operational reading of effect-style postconditions.

A postcondition is flattened into a sequence of elementary effects.  All
right-hand sides, navigation targets and `let` definitions are evaluated on
the pre-state (so `@pre` and plain navigation agree there); effects are then
applied to a working copy.  Anything not mentioned stays unchanged.

Supported conjunct shapes (anything else raises `UnsupportedPostcondition`):

    C.allInstances()->exists(v | v.oclIsNew() and ...)    creation
    path.role->exists(v | v.oclIsNew() and ...)           creation + link
    path.x = e                                             attribute / link assignment
    result = v                                             result binding
    not S->exists(v | v.key = e)                           keyed deletion
    not x.oclIsTypeOf(A) and x.oclIsTypeOf(B)              retyping
    path.role->isEmpty()                                   link clearing
    path.role->includes(e)                                 link addition
    x.role.attr->includes(v)                               link addition by key lookup
    src->forAll(v | ...)                                   per-element effects
    let n = e in ...                                       pre-state binding
    true                                                   no-op
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..errors import UnsupportedPostcondition
from ..snapshot import Oid, Snapshot, Workspace, sort_key, violations
from . import ast as A
from .evaluate import Choice, Evaluator, as_set, holds


@dataclass(frozen=True)
class Create:
    var: str
    cls: Optional[str]  # set for C.allInstances() creations
    via: Optional[A.Nav]  # set for path.role creations
    body: tuple


@dataclass(frozen=True)
class Assign:
    target: A.Expr
    step: str
    value: A.Expr


@dataclass(frozen=True)
class Clear:
    target: A.Expr
    step: str


@dataclass(frozen=True)
class Include:
    target: A.Expr
    step: str
    item: A.Expr


@dataclass(frozen=True)
class Delete:
    src: A.Expr
    var: str
    cond: A.Expr


@dataclass(frozen=True)
class Retype:
    target: A.Expr
    cls: str


@dataclass(frozen=True)
class ForEach:
    src: A.Expr
    var: str
    body: tuple


@dataclass(frozen=True)
class Bind:
    name: str
    definition: A.Expr


@dataclass(frozen=True)
class SetResult:
    value: A.Expr


@dataclass(frozen=True)
class EffectNormalForm:
    effects: tuple = ()

    def walk(self):
        stack = list(reversed(self.effects))
        while stack:
            eff = stack.pop()
            yield eff
            if isinstance(eff, (Create, ForEach)):
                stack.extend(reversed(eff.body))

    @property
    def creations(self):
        return [e for e in self.walk() if isinstance(e, Create)]

    @property
    def deletions(self):
        return [e for e in self.walk() if isinstance(e, (Delete, Clear))]

    @property
    def retypings(self):
        return [e for e in self.walk() if isinstance(e, Retype)]

    @property
    def link_additions(self):
        return [e for e in self.walk() if isinstance(e, (Include, Assign))]

    @property
    def result_binding(self):
        for e in self.walk():
            if isinstance(e, SetResult):
                return e.value
        return None

    def is_noop(self):
        return not self.effects


def _unsupported(expr, why="unsupported postcondition shape"):
    raise UnsupportedPostcondition(f"{why}: {A.to_text(expr)}", expr)


def _derive(expr: A.Expr) -> list:
    out = []
    for part in A.conjuncts(expr):
        out.extend(_conjunct(part))
    return out


def _creation_split(body: A.Expr, var: str):
    parts = A.conjuncts(body)
    marker = [p for p in parts if isinstance(p, A.OclIsNew) and p.target == A.Var(var)]
    if not marker:
        return None
    return [p for p in parts if p not in marker]


def _conjunct(part: A.Expr) -> list:
    if isinstance(part, A.Const) and part.value is True:
        return []
    if isinstance(part, A.Let):
        return [Bind(part.name, part.definition)] + _derive(part.body)
    if isinstance(part, A.Iterate) and part.kind == "exists":
        rest = _creation_split(part.body, part.var)
        if rest is None:
            _unsupported(part, "exists() without oclIsNew() on its variable")
        body = tuple(_derive(A.conjoin(rest)))
        if isinstance(part.src, A.AllInstances):
            return [Create(part.var, part.src.cls, None, body)]
        if isinstance(part.src, A.Nav) and not part.src.at_pre:
            return [Create(part.var, None, part.src, body)]
        _unsupported(part, "creation must range over C.allInstances() or a role")
    if isinstance(part, A.Iterate) and part.kind == "forAll":
        return [ForEach(part.src, part.var, tuple(_derive(part.body)))]
    if isinstance(part, A.Eq):
        left, right = part.left, part.right
        if left == A.Var("result"):
            return [SetResult(right)]
        if right == A.Var("result"):
            return [SetResult(left)]
        if isinstance(left, A.Nav) and not left.at_pre:
            return [Assign(left.base, left.step, right)]
        _unsupported(part, "left side of = must be a navigation")
    if isinstance(part, A.IsEmpty) and isinstance(part.src, A.Nav) and not part.src.at_pre:
        return [Clear(part.src.base, part.src.step)]
    if isinstance(part, A.Includes) and isinstance(part.src, A.Nav) and not part.src.at_pre:
        return [Include(part.src.base, part.src.step, part.item)]
    if isinstance(part, A.Not):
        inner = part.operand
        if isinstance(inner, A.OclIsTypeOf):
            return []
        if isinstance(inner, A.Iterate) and inner.kind == "exists" and not A.mentions_oclisnew(inner):
            return [Delete(inner.src, inner.var, inner.body)]
        _unsupported(part)
    if isinstance(part, A.OclIsTypeOf):
        return [Retype(part.target, part.cls)]
    _unsupported(part)


def to_effect_normal_form(post: A.Expr) -> EffectNormalForm:
    """Derive the ENF of a postcondition, or raise `UnsupportedPostcondition`."""
    return EffectNormalForm(tuple(_derive(post)))


# --- application ---------------------------------------------------------


class _Branch:
    __slots__ = ("ws", "env")

    def __init__(self, ws, env):
        self.ws = ws
        self.env = env

    def fork(self):
        return _Branch(self.ws.copy(), dict(self.env))


class _Applier:
    def __init__(self, pre: Snapshot):
        self.pre = pre
        self.cm = pre.schema
        self.ev = Evaluator(pre, pre)

    def value(self, expr, env):
        return self.ev.eval(expr, env)

    def objects(self, expr, env):
        return [x for x in sorted(as_set(self.value(expr, env)), key=sort_key) if isinstance(x, Oid)]

    def run(self, effects, branches):
        for eff in effects:
            nxt = []
            for br in branches:
                nxt.extend(getattr(self, "a_" + type(eff).__name__)(eff, br))
            branches = nxt
        return branches

    def _role(self, ws, oid, step):
        cls = ws.objects.get(oid)
        if cls is None:
            return None
        return self.cm.roles_of(cls).get(step)

    def _link_replacing(self, ws, oid, ref, other, replace):
        if replace:
            ws.links -= ws.role_links(oid, ref.forward, ref.assoc)
        ws.link(oid, ref.forward, ref.assoc, other)

    def a_Create(self, eff, br):
        if eff.via is None:
            cls = eff.cls
            sources = []
        else:
            sources = self.objects(eff.via.base, br.env)
            cls = None
            for s in sources:
                ref = self._role(br.ws, s, eff.via.step)
                if ref is None:
                    raise UnsupportedPostcondition(f"{eff.via.step} is not a role of {br.ws.objects.get(s)}")
                cls = ref.target_class
            if cls is None:
                return []
        self.cm.check(cls)
        if self.cm.children.get(cls):
            raise UnsupportedPostcondition(f"cannot create an instance of non-leaf class {cls}")
        oid = br.ws.create(cls)
        for s in sources:
            ref = self._role(br.ws, s, eff.via.step)
            self._link_replacing(br.ws, s, ref, oid, ref.card.upper == 1)
        br.env[eff.var] = oid
        return self.run(eff.body, [br])

    def a_Assign(self, eff, br):
        value = self.value(eff.value, br.env)
        if isinstance(value, Choice):
            out = []
            for pick in sorted(value, key=sort_key):
                out.extend(self._assign(eff, br.fork(), pick))
            return out
        return self._assign(eff, br, value)

    def _assign(self, eff, br, value):
        for t in self.objects(eff.target, br.env):
            cls = br.ws.objects.get(t)
            if cls is None:
                continue
            if eff.step in self.cm.attributes_of(cls):
                if isinstance(value, frozenset):
                    return []
                br.ws.set_attr(t, eff.step, value)
                continue
            ref = self.cm.roles_of(cls).get(eff.step)
            if ref is None:
                raise UnsupportedPostcondition(f"{cls} has no attribute or role {eff.step}")
            br.ws.links -= br.ws.role_links(t, ref.forward, ref.assoc)
            for other in as_set(value):
                br.ws.link(t, ref.forward, ref.assoc, other)
        return [br]

    def a_Clear(self, eff, br):
        for t in self.objects(eff.target, br.env):
            ref = self._role(br.ws, t, eff.step)
            if ref is None:
                raise UnsupportedPostcondition(f"{eff.step} is not a role")
            br.ws.links -= br.ws.role_links(t, ref.forward, ref.assoc)
        return [br]

    def a_Include(self, eff, br):
        item = self.value(eff.item, br.env)
        targets = self.objects(eff.target, br.env)
        keyed = self._keyed_include(eff, br, item)
        if keyed is not None:
            return keyed
        picks = sorted(item, key=sort_key) if isinstance(item, Choice) else [None]
        out = []
        for pick in picks:
            b = br.fork() if len(picks) > 1 else br
            values = as_set(item) if pick is None else {pick}
            for t in targets:
                ref = self._role(b.ws, t, eff.step)
                if ref is None:
                    raise UnsupportedPostcondition(f"{eff.step} is not a role of {b.ws.objects.get(t)}")
                for v in values:
                    b.ws.link(t, ref.forward, ref.assoc, v)
            out.append(b)
        return out

    def _keyed_include(self, eff, br, item):
        """`x.role.attr->includes(v)`: link x to the role-target object whose attr is v."""
        if not isinstance(eff.target, A.Nav):
            return None
        bases = self.objects(eff.target.base, br.env)
        refs = [self._role(br.ws, b, eff.target.step) for b in bases]
        if not refs or any(r is None for r in refs):
            return None
        if eff.step not in self.cm.attributes_of(refs[0].target_class):
            return None
        wanted = as_set(item)
        for b, ref in zip(bases, refs):
            matches = [o for o in sorted(self.pre.extension(ref.target_class), key=sort_key)
                       if self.pre.attr(o, eff.step) in wanted]
            if not matches:
                return []
            for m in matches:
                br.ws.link(b, ref.forward, ref.assoc, m)
        return [br]

    def a_Delete(self, eff, br):
        inner = dict(br.env)
        for x in self.objects(eff.src, br.env):
            inner[eff.var] = x
            if holds(eff.cond, self.pre, self.pre, inner):
                br.ws.delete(x)
        return [br]

    def a_Retype(self, eff, br):
        self.cm.check(eff.cls)
        for t in self.objects(eff.target, br.env):
            if t in br.ws.objects:
                br.ws.retype(t, eff.cls)
        return [br]

    def a_ForEach(self, eff, br):
        branches = [br]
        for x in self.objects(eff.src, br.env) or sorted(as_set(self.value(eff.src, br.env)), key=sort_key):
            for b in branches:
                b.env[eff.var] = x
            branches = self.run(eff.body, branches)
        for b in branches:
            b.env.pop(eff.var, None)
        return branches

    def a_Bind(self, eff, br):
        br.env[eff.name] = self.value(eff.definition, br.env)
        return [br]

    def a_SetResult(self, eff, br):
        br.env["result"] = self.value(eff.value, br.env)
        return [br]


def apply_effects(enf: EffectNormalForm, pre: Snapshot, env: Optional[dict] = None):
    """All successor snapshots of applying `enf` to `pre`.

    Returns a list of `(post, result)` pairs.  Branching comes from
    nondeterministic `first()` picks; successors breaking an upper cardinality
    bound or key uniqueness are dropped.
    """
    applier = _Applier(pre)
    branches = applier.run(enf.effects, [_Branch(Workspace(pre), dict(env or {}))])
    out = []
    seen = set()
    for br in branches:
        post = br.ws.freeze()
        if violations(post) is not None:
            continue
        result = br.env.get("result")
        key = (post, result)
        if key not in seen:
            seen.add(key)
            out.append((post, result))
    return out


def postcondition_holds(post: A.Expr, before: Snapshot, after: Snapshot, env: dict) -> bool:
    """Evaluate a postcondition with `@pre` bound to the old snapshot."""
    return holds(post, after, before, env)
