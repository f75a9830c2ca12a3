"""Domain types for a BAUML model: class model, lifecycles, activities, contracts."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Union

from ..errors import UnknownClass
from ..ocl import ast as ocl

PRE_INITIAL = "*"
UNBOUNDED = None

NODE_KINDS = ("initial", "final", "task", "decision", "merge")
VALUE_KINDS = ("string", "boolean")


@dataclass(frozen=True)
class Cardinality:
    lower: int
    upper: Optional[int]  # None means `*`

    def __str__(self):
        return f"{self.lower}..{'*' if self.upper is None else self.upper}"


@dataclass(frozen=True)
class Attribute:
    name: str
    kind: str
    is_key: bool = False


@dataclass(frozen=True)
class ClassDecl:
    name: str
    attributes: tuple[Attribute, ...] = ()
    is_terminal_state: bool = False


@dataclass(frozen=True)
class AssocDecl:
    name: str
    domain_class: str
    domain_role: str
    image_class: str
    image_role: str
    domain_card: Cardinality
    image_card: Cardinality


@dataclass(frozen=True)
class RoleRef:
    """One navigable end of a binary association, seen from the opposite class."""

    role: str
    assoc: str
    forward: bool  # True: domain -> image (the role is im_r)
    source_class: str
    target_class: str
    card: Cardinality


@dataclass(frozen=True)
class ClassModel:
    classes: tuple[ClassDecl, ...] = ()
    isa_edges: tuple[tuple[str, str], ...] = ()
    associations: tuple[AssocDecl, ...] = ()
    artifacts: tuple[str, ...] = ()
    readonly_marks: tuple[str, ...] = ()

    @cached_property
    def by_name(self) -> dict[str, ClassDecl]:
        return {c.name: c for c in self.classes}

    @cached_property
    def parent(self) -> dict[str, str]:
        return {sub: sup for sub, sup in self.isa_edges}

    @cached_property
    def children(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {c.name: [] for c in self.classes}
        for sub, sup in self.isa_edges:
            out.setdefault(sup, []).append(sub)
        return out

    @cached_property
    def assoc_by_name(self) -> dict[str, AssocDecl]:
        return {a.name: a for a in self.associations}

    def check(self, name: str) -> ClassDecl:
        try:
            return self.by_name[name]
        except KeyError:
            raise UnknownClass(f"unknown class {name!r}") from None

    @cached_property
    def _memo(self) -> dict:
        return {}

    def ancestors(self, name: str) -> list[str]:
        """`name` followed by its superclasses, nearest first."""
        hit = self._memo.get(("anc", name))
        if hit is not None:
            return hit
        self.check(name)
        out = [name]
        seen = {name}
        while out[-1] in self.parent:
            nxt = self.parent[out[-1]]
            if nxt in seen:
                break
            seen.add(nxt)
            out.append(nxt)
        self._memo[("anc", name)] = out
        return out

    def root(self, name: str) -> str:
        return self.ancestors(name)[-1]

    def is_subclass(self, sub: str, sup: str) -> bool:
        """The reflexive-transitive is-a relation."""
        self.check(sup)
        return sup in self.ancestors(sub)

    def same_hierarchy(self, a: str, b: str) -> bool:
        return self.is_subclass(a, b) or self.is_subclass(b, a)

    def descendants(self, name: str) -> list[str]:
        self.check(name)
        out, stack = [], [name]
        while stack:
            cur = stack.pop()
            out.append(cur)
            stack.extend(reversed(self.children.get(cur, [])))
        return out

    def leaves(self, name: str) -> list[str]:
        return [c for c in self.descendants(name) if not self.children.get(c)]

    def hierarchy(self, name: str) -> list[str]:
        return self.descendants(self.root(name))

    def parentart(self, name: str) -> str:
        root = self.root(name)
        if root not in self.artifacts:
            raise UnknownClass(f"{name!r} is not in an artifact hierarchy")
        return root

    def subart(self, artifact: str) -> list[str]:
        return self.leaves(artifact)

    def tstate(self, artifact: str) -> Optional[str]:
        terminals = [c for c in self.subart(artifact) if self.by_name[c].is_terminal_state]
        return terminals[0] if len(terminals) == 1 else None

    def artcl(self) -> set[str]:
        out = set()
        for art in self.artifacts:
            out.update(self.descendants(art))
        return out

    def attributes_of(self, name: str) -> dict[str, Attribute]:
        hit = self._memo.get(("attrs", name))
        if hit is not None:
            return hit
        out: dict[str, Attribute] = {}
        for cls in reversed(self.ancestors(name)):
            for attr in self.by_name[cls].attributes:
                out[attr.name] = attr
        self._memo[("attrs", name)] = out
        return out

    def key_of(self, name: str) -> Optional[str]:
        for attr in self.attributes_of(name).values():
            if attr.is_key:
                return attr.name
        return None

    @cached_property
    def _own_roles(self) -> dict[str, list[RoleRef]]:
        out: dict[str, list[RoleRef]] = {}
        for a in self.associations:
            out.setdefault(a.domain_class, []).append(
                RoleRef(a.image_role, a.name, True, a.domain_class, a.image_class, a.image_card))
            out.setdefault(a.image_class, []).append(
                RoleRef(a.domain_role, a.name, False, a.image_class, a.domain_class, a.domain_card))
        return out

    def roles_of(self, name: str) -> dict[str, RoleRef]:
        """Roles navigable from instances of `name`, inherited ones included."""
        hit = self._memo.get(("roles", name))
        if hit is not None:
            return hit
        out: dict[str, RoleRef] = {}
        for cls in reversed(self.ancestors(name)):
            for ref in self._own_roles.get(cls, ()):
                out[ref.role] = ref
        self._memo[("roles", name)] = out
        return out

    def roles_named(self, role: str) -> list[RoleRef]:
        return [r for refs in self._own_roles.values() for r in refs if r.role == role]

    def all_roles(self) -> list[RoleRef]:
        return [r for refs in self._own_roles.values() for r in refs]


@dataclass(frozen=True)
class Transition:
    source: str
    event: str
    target: str
    guard: ocl.Expr = ocl.TRUE


@dataclass(frozen=True)
class StateMachine:
    artifact: str
    states: tuple[str, ...]
    initial: str
    events: tuple[str, ...]
    transitions: tuple[Transition, ...]


@dataclass(frozen=True)
class Node:
    id: str
    kind: str
    task: Optional[str] = None


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    guard: Optional[ocl.Expr] = None


@dataclass(frozen=True)
class ActivityDiagram:
    event: str
    anchor: str
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]

    @cached_property
    def node(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def outgoing(self) -> dict[str, list[Edge]]:
        out: dict[str, list[Edge]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            out.setdefault(e.source, []).append(e)
        return out

    @cached_property
    def initial_node(self) -> Optional[str]:
        ids = [n.id for n in self.nodes if n.kind == "initial"]
        return ids[0] if len(ids) == 1 else None

    def conditions(self) -> list[ocl.Expr]:
        return [e.guard for e in self.edges if e.guard is not None]

    def task_names(self) -> list[str]:
        return [n.task for n in self.nodes if n.kind == "task"]


@dataclass(frozen=True)
class Param:
    name: str
    kind: str  # "string", "boolean", or a class name
    fresh: bool = False


@dataclass(frozen=True)
class TaskContract:
    name: str
    params: tuple[Param, ...]
    result: Optional[str]
    pre: ocl.Expr
    post: ocl.Expr


Value = Union[str, bool]


@dataclass(frozen=True)
class DbObject:
    name: str
    cls: str
    attrs: tuple[tuple[str, Value], ...] = ()


@dataclass(frozen=True)
class InitialDb:
    objects: tuple[DbObject, ...] = ()
    links: tuple[tuple[str, str, str], ...] = ()


@dataclass(frozen=True)
class BaumlModel:
    class_model: ClassModel = field(default_factory=ClassModel)
    constraints: tuple[ocl.Expr, ...] = ()
    state_machines: tuple[StateMachine, ...] = ()
    activities: tuple[ActivityDiagram, ...] = ()
    contracts: tuple[TaskContract, ...] = ()
    initial_db: InitialDb = field(default_factory=InitialDb)

    @cached_property
    def contract(self) -> dict[str, TaskContract]:
        return {c.name: c for c in self.contracts}

    @cached_property
    def activity(self) -> dict[str, ActivityDiagram]:
        return {a.event: a for a in self.activities}

    @cached_property
    def machine(self) -> dict[str, StateMachine]:
        return {sm.artifact: sm for sm in self.state_machines}

    def machine_of_event(self, event: str) -> Optional[StateMachine]:
        for sm in self.state_machines:
            if event in sm.events:
                return sm
        return None

    def init_events(self, artifact: str) -> set[str]:
        sm = self.machine.get(artifact)
        if sm is None:
            return set()
        return {t.event for t in sm.transitions if t.source == PRE_INITIAL}

    def is_init_event(self, event: str) -> bool:
        sm = self.machine_of_event(event)
        return sm is not None and event in self.init_events(sm.artifact)

    def string_constants(self) -> set[str]:
        out = set()
        for expr in self.all_expressions():
            for node in expr.walk():
                if isinstance(node, ocl.Const) and isinstance(node.value, str):
                    out.add(node.value)
        for obj in self.initial_db.objects:
            out.update(v for _, v in obj.attrs if isinstance(v, str))
        return out

    def all_expressions(self):
        """Every OCL expression in the model, in declaration order."""
        for sm in self.state_machines:
            for t in sm.transitions:
                yield t.guard
        for act in self.activities:
            yield from act.conditions()
        for c in self.contracts:
            yield c.pre
            yield c.post


def hierarchy_queries(model: BaumlModel, name: str) -> dict:
    """parentart / subart / tstate for the hierarchy containing `name`."""
    cm = model.class_model
    cm.check(name)
    art = cm.parentart(name)
    return {
        "parentart": art,
        "subart": cm.subart(art),
        "tstate": cm.tstate(art),
        "is_subclass": cm.is_subclass,
    }
