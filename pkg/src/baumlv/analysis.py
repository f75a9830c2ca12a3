"""Static classification of a BAUML model and the resulting decidability verdict.

The five axes are the read-only/read-write partition, navigationality,
directionality of the dependency graph, cardinality boundedness of target
roles, and shared-instance access.  The verdict is a pure function of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import PreconditionViolated
from .model.types import BaumlModel
from .ocl import ast as A
from .ocl.effects import (
    Assign, Bind, Clear, Create, Delete, ForEach, Include, Retype, to_effect_normal_form,
)
from .ocl.navigation import VALUE, is_navigational_from, resolve_step, role_mentions, shared_queries, static_type

UNIDIRECTIONAL = "UNIDIRECTIONAL"
BIDIRECTIONAL = "BIDIRECTIONAL"
BOUNDED = "BOUNDED"
UNBOUNDED = "UNBOUNDED"
SHARED_NONE = "NONE"
SHARED_RO = "READ_ONLY_ONLY"
SHARED_RW = "READ_WRITE"

THM1 = "UNDECIDABLE_THM1"
THM2 = "UNDECIDABLE_THM2"
THM3 = "DECIDABLE_THM3"
THM4 = "UNDECIDABLE_THM4"
THM5 = "UNDECIDABLE_THM5_UNLESS_BOUNDED"
THM6 = "DECIDABLE_THM6_IF_INSTANCE_BOUNDED"
VERDICTS = (THM3, THM6, THM1, THM2, THM4, THM5)
UNDECIDABLE = (THM1, THM2, THM4, THM5)

CITATIONS = {
    THM1: "termination is undecidable for unrestricted (non-navigational) models",
    THM2: "termination is undecidable for unidirectional models with an unbounded target role",
    THM4: "termination is undecidable for bidirectional models, even when 1-cardinality-bounded",
    THM5: "termination is undecidable for bounded unidirectional models with shared read-write "
          "instances, unless the number of simultaneously active artifact instances is bounded",
    THM6: "decidable when the number of simultaneously active artifact instances is bounded",
    THM3: "decidable for navigational, unidirectional, cardinality-bounded models; "
          "reducible to finite-state model checking",
}


# --- expression sites -------------------------------------------------------


@dataclass(frozen=True)
class Site:
    kind: str  # guard | condition | pre | post
    owner: str
    expr: A.Expr
    ctx: tuple  # (var, type) pairs
    anchor: Optional[str]
    artifact: Optional[str]
    init: bool

    @property
    def env(self) -> dict:
        return dict(self.ctx)

    def describe(self) -> str:
        return f"{self.kind} of {self.owner}"


def _task_usage(model: BaumlModel) -> dict:
    usage: dict = {}
    for act in model.activities:
        for task in act.task_names():
            usage.setdefault(task, []).append(act.event)
    return usage


def contract_context(model: BaumlModel, contract) -> dict:
    cm = model.class_model
    ctx = {p.name: (p.kind if p.kind in cm.by_name else VALUE) for p in contract.params}
    if contract.result:
        ctx["result"] = contract.result
    return ctx


def is_init_task(model: BaumlModel, task: str) -> bool:
    events = _task_usage(model).get(task, [])
    return bool(events) and all(model.is_init_event(ev) for ev in events)


def contract_anchor(model: BaumlModel, contract):
    cm = model.class_model
    if contract.params:
        first = contract.params[0]
        if first.kind in cm.by_name and cm.root(first.kind) in cm.artifacts:
            return first.name, cm.root(first.kind)
    return None, None


def model_sites(model: BaumlModel) -> list:
    sites = []
    for sm in model.state_machines:
        for t in sm.transitions:
            act = model.activity.get(t.event)
            ctx = {"self": sm.artifact}
            if act is not None:
                ctx[act.anchor] = sm.artifact
            sites.append(Site("guard", f"{sm.artifact}:{t.source}->{t.target}", t.guard,
                              tuple(ctx.items()), "self", sm.artifact, t.source == "*"))
    for act in model.activities:
        sm = model.machine_of_event(act.event)
        art = sm.artifact if sm else None
        init = model.is_init_event(act.event)
        for e in act.edges:
            if e.guard is not None:
                sites.append(Site("condition", f"{act.event}:{e.source}->{e.target}", e.guard,
                                  ((act.anchor, art),), act.anchor, art, init))
    for c in model.contracts:
        anchor, art = contract_anchor(model, c)
        ctx = tuple(contract_context(model, c).items())
        init = is_init_task(model, c.name)
        sites.append(Site("pre", c.name, c.pre, ctx, anchor, art, init))
        sites.append(Site("post", c.name, c.post, ctx, anchor, art, init))
    return sites


# --- read-only / read-write partition ---------------------------------------


@dataclass
class RwPartition:
    read_only: set
    read_write: set
    warnings: list = field(default_factory=list)

    def to_json(self):
        return {"read_only": sorted(self.read_only), "read_write": sorted(self.read_write)}


def _enf_touches(effects, ctx, cm, classes, assocs):
    def typ(expr):
        return static_type(expr, ctx, cm)

    def roles_at(expr, step):
        base = typ(expr)
        refs = resolve_step(cm, base if base != VALUE else None, step)
        return [] if refs == VALUE else refs

    for eff in effects:
        if isinstance(eff, Create):
            cls = eff.cls
            if eff.via is not None:
                refs = roles_at(eff.via.base, eff.via.step)
                for r in refs:
                    assocs.add(r.assoc)
                    cls = r.target_class
            if cls:
                classes.add(cls)
            inner = dict(ctx)
            inner[eff.var] = cls
            _enf_touches(eff.body, inner, cm, classes, assocs)
        elif isinstance(eff, Assign):
            base = typ(eff.target)
            step = resolve_step(cm, base if base != VALUE else None, eff.step)
            if step == VALUE:
                if base and base != VALUE:
                    classes.add(base)
                else:
                    classes.update(c.name for c in cm.classes if eff.step in cm.attributes_of(c.name))
            else:
                assocs.update(r.assoc for r in step)
        elif isinstance(eff, (Clear, Include)):
            refs = roles_at(eff.target, eff.step)
            if refs:
                assocs.update(r.assoc for r in refs)
            elif isinstance(eff, Include) and isinstance(eff.target, A.Nav):
                assocs.update(r.assoc for r in roles_at(eff.target.base, eff.target.step))
        elif isinstance(eff, Delete):
            cls = typ(eff.src)
            if cls and cls != VALUE:
                classes.add(cls)
            if isinstance(eff.src, A.Nav):
                # deleting objects reached through a role removes that role's links
                assocs.update(r.assoc for r in roles_at(eff.src.base, eff.src.step))
        elif isinstance(eff, Retype):
            classes.add(eff.cls)
        elif isinstance(eff, ForEach):
            inner = dict(ctx)
            inner[eff.var] = typ(eff.src)
            _enf_touches(eff.body, inner, cm, classes, assocs)
        elif isinstance(eff, Bind):
            ctx = dict(ctx)
            ctx[eff.name] = typ(eff.definition)


def derive_rw_partition(model: BaumlModel) -> RwPartition:
    cm = model.class_model
    classes, assocs = set(), set()
    for c in model.contracts:
        enf = to_effect_normal_form(c.post)
        _enf_touches(enf.effects, contract_context(model, c), cm, classes, assocs)
    classes |= set(cm.artifacts)
    rw = set()
    for c in classes:
        if c in cm.by_name:
            rw.update(cm.hierarchy(c))
    rw |= {a for a in assocs if a in cm.assoc_by_name}
    every = set(cm.by_name) | set(cm.assoc_by_name)
    warnings = []
    for mark in cm.readonly_marks:
        if mark in rw:
            warnings.append(f"{mark} is declared readonly but is updated by some task; treated as read-write")
    return RwPartition(every - rw, rw, warnings)


# --- roles, dependency, cardinality ------------------------------------------


@dataclass
class RoleClassification:
    target: list  # RoleRef
    source: list

    @property
    def target_roles(self) -> set:
        return {r.role for r in self.target}

    @property
    def source_roles(self) -> set:
        return {r.role for r in self.source}

    def is_target(self, ref) -> bool:
        return ref in self.target

    def to_json(self):
        return {
            "target_roles": sorted(f"{r.assoc}.{r.role}" for r in self.target),
            "source_roles": sorted(f"{r.assoc}.{r.role}" for r in self.source),
        }


def classify_roles(model: BaumlModel) -> RoleClassification:
    cm = model.class_model
    target = []
    for site in model_sites(model):
        for ref in role_mentions(site.expr, site.env, cm):
            if ref not in target:
                target.append(ref)
    source = [r for r in cm.all_roles() if r not in target]
    return RoleClassification(target, source)


@dataclass
class Directionality:
    kind: str
    cycle: list = field(default_factory=list)  # [(class, role), ...]

    def to_json(self):
        return {"kind": self.kind, "cycle": [f"{c} -{r}->" for c, r in self.cycle]}


def dependency_graph(model: BaumlModel, roles: RoleClassification, partition: RwPartition) -> dict:
    """Edges between hierarchy roots of read-write classes, one per target role."""
    cm = model.class_model
    graph: dict = {}
    rw_roots = {cm.root(c) for c in partition.read_write if c in cm.by_name}
    for root in sorted(rw_roots):
        graph.setdefault(root, [])
    for ref in roles.target:
        src, dst = cm.root(ref.source_class), cm.root(ref.target_class)
        if src in rw_roots and dst in rw_roots:
            graph[src].append((dst, ref.role))
    return graph


def directionality(model: BaumlModel, roles: RoleClassification, partition: Optional[RwPartition] = None) -> Directionality:
    partition = partition or derive_rw_partition(model)
    graph = dependency_graph(model, roles, partition)
    colour = {n: 0 for n in graph}
    for start in sorted(graph):
        if colour[start]:
            continue
        stack = [(start, iter(graph[start]))]
        path = [(start, None)]
        colour[start] = 1
        while stack:
            node, it = stack[-1]
            step = next(it, None)
            if step is None:
                colour[node] = 2
                stack.pop()
                path.pop()
                continue
            nxt, role = step
            if colour[nxt] == 1:
                idx = [p[0] for p in path].index(nxt)
                cyc = [(path[i][0], path[i + 1][1]) for i in range(idx, len(path) - 1)]
                cyc.append((node, role))
                return Directionality(BIDIRECTIONAL, cyc)
            if colour[nxt] == 0:
                colour[nxt] = 1
                path.append((nxt, role))
                stack.append((nxt, iter(graph[nxt])))
    return Directionality(UNIDIRECTIONAL)


@dataclass
class CardinalityResult:
    kind: str
    n: int = 1
    role: Optional[str] = None

    def to_json(self):
        return {"kind": self.kind, "N": self.n, "role": self.role}


def cardinality_check(model: BaumlModel, roles: RoleClassification, partition: Optional[RwPartition] = None) -> CardinalityResult:
    """Maximum numeric upper bound over target roles of read-write associations."""
    partition = partition or derive_rw_partition(model)
    n = 0
    for ref in roles.target:
        if ref.assoc not in partition.read_write:
            continue
        if ref.card.upper is None:
            return CardinalityResult(UNBOUNDED, 0, f"{ref.assoc}.{ref.role}")
        n = max(n, ref.card.upper)
    return CardinalityResult(BOUNDED, max(n, 1))


# --- navigational and shared checks ------------------------------------------


@dataclass
class NavigationalResult:
    navigational: bool
    witnesses: list = field(default_factory=list)  # (site, expr text)

    def to_json(self):
        return {"navigational": self.navigational,
                "witnesses": [{"site": s, "expr": e} for s, e in self.witnesses]}


def navigational_check(model: BaumlModel, partition: RwPartition) -> NavigationalResult:
    witnesses = []
    for site in model_sites(model):
        if site.init:
            continue
        res = is_navigational_from(site.expr, site.anchor, model, partition.read_only, allow_shared=True)
        if not res.navigational:
            witnesses.append((site.describe(), A.to_text(res.witness)))
    return NavigationalResult(not witnesses, witnesses)


@dataclass
class SharedResult:
    kind: str
    witness: Optional[str] = None
    site: Optional[str] = None

    def to_json(self):
        return {"kind": self.kind, "witness": self.witness, "site": self.site}


def _keyed_includes(model: BaumlModel):
    cm = model.class_model
    for c in model.contracts:
        ctx = contract_context(model, c)
        stack = [(e, ctx) for e in to_effect_normal_form(c.post).effects]
        while stack:
            eff, env = stack.pop()
            if isinstance(eff, (Create, ForEach)):
                inner = dict(env)
                var_type = eff.cls if isinstance(eff, Create) else static_type(eff.src, env, cm)
                inner[eff.var] = var_type
                stack.extend((b, inner) for b in eff.body)
            if isinstance(eff, Include) and isinstance(eff.target, A.Nav):
                base = static_type(eff.target.base, env, cm)
                refs = resolve_step(cm, base if base != VALUE else None, eff.target.step)
                if refs != VALUE:
                    for r in refs:
                        if eff.step in cm.attributes_of(r.target_class):
                            yield c.name, r.target_class, f"{A.to_text(eff.target)}.{eff.step}->includes({A.to_text(eff.item)})"


def shared_instance_check(model: BaumlModel, partition: RwPartition) -> SharedResult:
    cm = model.class_model
    ro_hit = None
    for site in model_sites(model):
        for q in shared_queries(site.expr):
            touched = {n.cls for n in q.walk() if isinstance(n, A.AllInstances)}
            if any(c in partition.read_write for c in touched):
                return SharedResult(SHARED_RW, A.to_text(q), site.describe())
            if ro_hit is None:
                ro_hit = SharedResult(SHARED_RO, A.to_text(q), site.describe())
    for task, cls, text in _keyed_includes(model):
        if cls in partition.read_write:
            return SharedResult(SHARED_RW, text, f"post of {task}")
        if ro_hit is None:
            ro_hit = SharedResult(SHARED_RO, text, f"post of {task}")
    del cm
    return ro_hit or SharedResult(SHARED_NONE)


# --- bounds ------------------------------------------------------------------


@dataclass
class Bounds:
    k: int
    n: int
    l: int
    per_instance: int
    system: int
    instances: int

    def to_json(self):
        return {"k": self.k, "N": self.n, "l": self.l, "per_instance": self.per_instance,
                "system": self.system, "instances": self.instances}


def _longest_path(graph: dict, starts) -> int:
    best = 0

    def dfs(node, seen, depth):
        nonlocal best
        best = max(best, depth)
        for nxt, _ in graph.get(node, []):
            if nxt not in seen:
                dfs(nxt, seen | {nxt}, depth + 1)

    for s in starts:
        if s in graph:
            dfs(s, {s}, 0)
    return best


def initial_instances(model: BaumlModel) -> int:
    artcl = model.class_model.artcl()
    return sum(1 for o in model.initial_db.objects if o.cls in artcl)


def object_bound(model: BaumlModel, n: Optional[int] = None, b_init: Optional[int] = None,
                 mode: str = "thm3", b: Optional[int] = None, report=None) -> Bounds:
    """Per-instance and system object bounds for a cardinality-bounded model.

    per_instance = max((k*N)^(l+1), sum_{i=1..l} (k*N)^i) objects created by one
    instance; system = (artifact instances) * (1 + per_instance) + initial objects,
    where artifact instances is b_init + |arts| in thm3 mode and b in thm6 mode.
    """
    report = report or analyze(model)
    if not report.navigational.navigational:
        raise PreconditionViolated("object bounds need a navigational model")
    if report.cardinality.kind != BOUNDED:
        raise PreconditionViolated(f"object bounds need bounded target roles ({report.cardinality.role} is unbounded)")
    cm = model.class_model
    k = len(cm.associations)
    n = report.cardinality.n if n is None else max(n, 1)
    graph = dependency_graph(model, report.roles, report.partition)
    l = _longest_path(graph, cm.artifacts)
    kn = k * n
    per = max(kn ** (l + 1), sum(kn ** i for i in range(1, l + 1)))
    if b_init is None:
        b_init = initial_instances(model)
    instances = b if mode == "thm6" and b is not None else b_init + len(cm.artifacts)
    artcl = cm.artcl()
    others = sum(1 for o in model.initial_db.objects if o.cls not in artcl)
    return Bounds(k, n, l, per, instances * (1 + per) + others, instances)


# --- report ------------------------------------------------------------------


def decide(navigational: bool, direction: str, cardinality: str, shared: str, instance_bound: bool = False) -> str:
    """The verdict decision table."""
    if not navigational:
        return THM1
    if direction == BIDIRECTIONAL:
        return THM4
    if cardinality == UNBOUNDED:
        return THM2
    if shared == SHARED_RW:
        return THM6 if instance_bound else THM5
    return THM3


@dataclass
class AnalysisReport:
    partition: RwPartition
    roles: RoleClassification
    navigational: NavigationalResult
    directionality: Directionality
    cardinality: CardinalityResult
    shared_instances: SharedResult
    verdict: str
    citation: str
    bounds: Optional[Bounds] = None
    warnings: list = field(default_factory=list)

    @property
    def decidable(self) -> bool:
        return self.verdict not in UNDECIDABLE

    def to_json(self) -> dict:
        return {
            "partition": self.partition.to_json(),
            "roles": self.roles.to_json(),
            "navigational": self.navigational.to_json(),
            "directionality": self.directionality.to_json(),
            "cardinality": self.cardinality.to_json(),
            "shared_instances": self.shared_instances.to_json(),
            "verdict": self.verdict,
            "citation": self.citation,
            "bounds": self.bounds.to_json() if self.bounds else None,
            "warnings": list(self.warnings),
        }


def analyze(model: BaumlModel, instance_bound: Optional[int] = None) -> AnalysisReport:
    partition = derive_rw_partition(model)
    roles = classify_roles(model)
    nav = navigational_check(model, partition)
    direction = directionality(model, roles, partition)
    card = cardinality_check(model, roles, partition)
    shared = shared_instance_check(model, partition)
    verdict = decide(nav.navigational, direction.kind, card.kind, shared.kind, instance_bound is not None)
    warnings = list(partition.warnings)
    if model.constraints:
        warnings.append(f"{len(model.constraints)} constraint(s) are stored but not enforced; "
                        "only keys and state disjointness are checked")
    report = AnalysisReport(partition, roles, nav, direction, card, shared, verdict, CITATIONS[verdict],
                            None, warnings)
    if nav.navigational and card.kind == BOUNDED:
        mode = "thm6" if instance_bound is not None else "thm3"
        report.bounds = object_bound(model, mode=mode, b=instance_bound, report=report)
    return report
