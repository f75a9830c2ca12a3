"""Explicit-state grounding of a BAUML model into a finite transition system.

A configuration is a snapshot plus the set of running processes (one per
artifact instance at most).  Successors are: spawning a lifecycle transition's
activity for an idle instance, running an init activity atomically (which
creates an instance), and advancing one running process to its next task or
final node.  Control nodes between tasks are resolved within the same step.

States are hash-consed after canonical renaming: objects are renumbered by
colour refinement and fresh strings are renamed in order of first appearance.
Every edge records how the object indices of its source map into its target,
so object identity can be followed across steps.
"""

from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BadInput, BudgetExceeded, InconsistentRetyping
from .model.types import PRE_INITIAL, BaumlModel
from .ocl.effects import apply_effects, to_effect_normal_form
from .ocl.evaluate import holds
from .snapshot import Oid, Snapshot, Workspace, sort_key, violations

log = logging.getLogger(__name__)

THM3 = "thm3"
THM6 = "thm6"


@dataclass(frozen=True)
class Process:
    instance: Oid
    event: str
    source: str
    target: str
    node: str
    env: tuple  # sorted (name, value) pairs

    @property
    def bindings(self) -> dict:
        return dict(self.env)


@dataclass(frozen=True)
class Configuration:
    snapshot: Snapshot
    processes: tuple  # sorted by instance
    created: tuple  # per-artifact creation counts (thm3 mode)

    def process_of(self, oid: Oid) -> Optional[Process]:
        for p in self.processes:
            if p.instance == oid:
                return p
        return None

    def describe(self) -> str:
        snap = self.snapshot
        parts = []
        for oid, cls in sorted(snap.objects.items()):
            attrs = ", ".join(f"{a}={v}" for (o, a), v in sorted(snap.attrs.items(), key=lambda kv: kv[0][1]) if o == oid)
            parts.append(f"{oid}:{cls}" + (f"({attrs})" if attrs else ""))
        links = ", ".join(f"{a}({x},{y})" for a, x, y in sorted(snap.links))
        procs = ", ".join(f"{p.instance}@{p.event}.{p.node}" for p in self.processes)
        out = "objects: " + ("; ".join(parts) or "-")
        if links:
            out += " | links: " + links
        if procs:
            out += " | running: " + procs
        return out


@dataclass
class TransitionSystem:
    model: BaumlModel
    states: list  # Configuration per index
    initial: int
    edges: list  # (src, dst)
    perms: list  # per edge: tuple mapping src object index -> dst index or -1
    deadlocks: set = field(default_factory=set)
    options: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.states)

    @property
    def max_objects(self) -> int:
        return max((len(c.snapshot.objects) for c in self.states), default=0)

    def successors(self, s: int) -> list:
        return [dst for (src, dst) in self.edges if src == s]

    def csr(self):
        """Edges sorted by source as numpy arrays: (offsets, dst, perm matrix)."""
        cached = getattr(self, "_csr", None)
        if cached is not None:
            return cached
        n = len(self.states)
        d = max(1, self.max_objects)
        order = sorted(range(len(self.edges)), key=lambda e: self.edges[e])
        offsets = np.zeros(n + 1, dtype=np.int64)
        dst = np.empty(len(order), dtype=np.int64)
        perm = np.full((len(order), d), -1, dtype=np.int64)
        for i, e in enumerate(order):
            s, t = self.edges[e]
            offsets[s + 1] += 1
            dst[i] = t
            p = self.perms[e]
            perm[i, :len(p)] = p
        np.cumsum(offsets, out=offsets)
        self._csr = (offsets, dst, perm)
        return self._csr

    def domain_sizes(self) -> np.ndarray:
        return np.array([len(c.snapshot.objects) for c in self.states], dtype=np.int64)

    def to_json(self) -> dict:
        return {
            "initial": self.initial,
            "states": [{"id": i, **c.snapshot.to_json(),
                        "processes": [{"instance": str(p.instance), "event": p.event, "node": p.node}
                                      for p in c.processes],
                        "deadlock": i in self.deadlocks}
                       for i, c in enumerate(self.states)],
            "edges": [{"from": s, "to": t, "map": list(p)} for (s, t), p in zip(self.edges, self.perms)],
        }


def state_count(ts: TransitionSystem) -> int:
    return len(ts.states)


def reachable_classes(ts: TransitionSystem) -> list:
    """Per state: class name -> frozenset of object ids whose most-specific class it is."""
    out = []
    for conf in ts.states:
        ext: dict = {}
        for oid, cls in conf.snapshot.objects.items():
            ext.setdefault(cls, set()).add(oid)
        out.append({c: frozenset(v) for c, v in ext.items()})
    return out


# --- canonical renaming ------------------------------------------------------


def _value_sig(v, pool):
    if isinstance(v, Oid):
        return "o"
    if isinstance(v, bool):
        return "b1" if v else "b0"
    if v in pool:
        return "*"
    return "s" + v


def _rank(sigs: dict) -> dict:
    distinct = sorted(set(sigs.values()))
    index = {s: i for i, s in enumerate(distinct)}
    return {k: index[s] for k, s in sigs.items()}


def canonicalize(snap: Snapshot, processes, created, pool: frozenset, pool_names: list):
    """Renamed configuration and the old-oid -> new-oid map."""
    objs = list(snap.objects)
    by_inst = {p.instance: p for p in processes}
    attrs_of: dict = {}
    for (o, a), v in snap.attrs.items():
        attrs_of.setdefault(o, []).append((a, _value_sig(v, pool)))

    def proc_sig(p):
        if p is None:
            return ()
        env = tuple((k, _value_sig(v, pool)) for k, v in p.env)
        return (p.event, p.source, p.target, p.node, env)

    colour = _rank({o: (snap.objects[o], tuple(sorted(attrs_of.get(o, ()))), proc_sig(by_inst.get(o)))
                    for o in objs})
    adj: dict = {o: [] for o in objs}
    for a, x, y in snap.links:
        adj[x].append((a, 1, y))
        adj[y].append((a, 0, x))
    for p in processes:
        for k, v in p.env:
            if isinstance(v, Oid) and v != p.instance and v in adj:
                adj[p.instance].append((k, 2, v))
    classes = len(set(colour.values()))
    while True:
        sigs = {o: (colour[o], tuple(sorted((a, d, colour[n]) for a, d, n in adj[o]))) for o in objs}
        refined = _rank(sigs)
        count = len(set(refined.values()))
        colour = refined
        if count == classes:
            break
        classes = count
    order = sorted(objs, key=lambda o: (colour[o], o.n))
    rho = {o: Oid(i) for i, o in enumerate(order)}

    renamed: dict = {}

    def fresh(v):
        if isinstance(v, str) and v in pool:
            if v not in renamed:
                renamed[v] = pool_names[len(renamed)]
            return renamed[v]
        if isinstance(v, Oid):
            return rho.get(v, v)
        return v

    new_attrs = {}
    for o in order:
        for a, _ in sorted(attrs_of.get(o, ())):
            new_attrs[(rho[o], a)] = fresh(snap.attrs[(o, a)])
    new_procs = []
    for p in sorted(processes, key=lambda p: rho[p.instance].n):
        env = tuple((k, fresh(v)) for k, v in p.env)
        new_procs.append(Process(rho[p.instance], p.event, p.source, p.target, p.node, env))
    new_snap = Snapshot(snap.schema, {rho[o]: snap.objects[o] for o in order}, new_attrs,
                        {(a, rho[x], rho[y]) for a, x, y in snap.links})
    return Configuration(new_snap, tuple(new_procs), tuple(created)), rho


# --- the grounder ------------------------------------------------------------


class Grounder:
    def __init__(self, model: BaumlModel, mode: str = THM6, instances: int = 1, budget: int = 8,
                 max_states: int = 1_000_000, max_depth: Optional[int] = None, pool_prefix: str = "$f",
                 object_bound: Optional[int] = None, check_posts: bool = False):
        if mode not in (THM3, THM6):
            raise BadInput(f"unknown grounding mode {mode!r}")
        self.model = model
        self.cm = model.class_model
        self.mode = mode
        self.instances = instances
        self.max_states = max_states
        self.max_depth = max_depth
        self.object_bound = object_bound
        self.check_posts = check_posts
        self.constants = sorted(model.string_constants() | {v for o in model.initial_db.objects
                                                            for _, v in o.attrs if isinstance(v, str)})
        self.pool_names = [f"{pool_prefix}{i}" for i in range(budget)]
        clash = set(self.pool_names) & set(self.constants)
        if clash:
            raise BadInput(f"fresh pool symbols clash with model constants: {sorted(clash)}")
        self.pool = frozenset(self.pool_names)
        self.enf = {c.name: to_effect_normal_form(c.post) for c in model.contracts}
        self.artifacts = list(self.cm.artifacts)
        self.artcl = self.cm.artcl()

    # --- initial configuration -------------------------------------------

    def initial_snapshot(self) -> Snapshot:
        db = self.model.initial_db
        ws = Workspace(Snapshot.empty(self.cm))
        names = {}
        for obj in db.objects:
            self.cm.check(obj.cls)
            oid = ws.create(obj.cls)
            names[obj.name] = oid
            for a, v in obj.attrs:
                ws.set_attr(oid, a, v)
        for assoc, a, b in db.links:
            if assoc not in self.cm.assoc_by_name or a not in names or b not in names:
                raise BadInput(f"bad initial link {assoc}({a}, {b})")
            ws.links.add((assoc, names[a], names[b]))
        snap = ws.freeze()
        broken = violations(snap)
        if broken:
            raise BadInput(f"initial database is inconsistent: {broken}")
        return snap

    # --- fresh values and parameter binding -----------------------------------

    def _strings_in_use(self, snap: Snapshot, processes, env) -> set:
        used = snap.strings()
        for p in processes:
            used.update(v for _, v in p.env if isinstance(v, str))
        used.update(v for v in env.values() if isinstance(v, str))
        return used

    def _bindings(self, contract, snap: Snapshot, env: dict, processes, instance: Optional[Oid]):
        """Every parameter binding for `contract`, as a list of env dicts."""
        used = self._strings_in_use(snap, processes, env)
        free = [s for s in self.pool_names if s not in used]
        strings = sorted(snap.strings() | set(self.constants), key=sort_key)
        choices = []
        fresh_taken = 0
        for i, p in enumerate(contract.params):
            if p.name in env:
                value = env[p.name]
                if p.kind in self.cm.by_name:
                    cls = snap.objects.get(value) if isinstance(value, Oid) else None
                    if cls is None or not self.cm.is_subclass(cls, p.kind):
                        return []
                choices.append([value])
            elif p.kind in self.cm.by_name:
                if (i == 0 and instance is not None and self.cm.root(p.kind) in self.cm.artifacts
                        and self.cm.same_hierarchy(p.kind, snap.objects.get(instance, p.kind))):
                    cls = snap.objects.get(instance)
                    choices.append([instance] if cls and self.cm.is_subclass(cls, p.kind) else [])
                else:
                    choices.append(sorted(snap.extension(p.kind), key=sort_key))
            elif p.kind == "boolean":
                choices.append([False, True])
            elif p.fresh:
                if fresh_taken >= len(free):
                    raise BudgetExceeded(f"fresh value pool of {len(self.pool_names)} symbols exhausted "
                                         f"while binding {contract.name}.{p.name}", "fresh")
                choices.append([free[fresh_taken]])
                fresh_taken += 1
            else:
                choices.append(strings)
        out = []
        for combo in itertools.product(*choices):
            bound = dict(env)
            bound.update({p.name: v for p, v in zip(contract.params, combo)})
            out.append(bound)
        return out

    def run_task(self, task: str, snap: Snapshot, env: dict, processes, instance: Optional[Oid]):
        """All (post snapshot, env after the task) pairs for one task execution."""
        contract = self.model.contract[task]
        out = []
        for bound in self._bindings(contract, snap, env, processes, instance):
            if not holds(contract.pre, snap, None, bound):
                continue
            for post, result in apply_effects(self.enf[task], snap, bound):
                if self.check_posts and not holds(contract.post, post, snap, dict(bound, result=result)):
                    raise AssertionError(f"effects of {task} do not satisfy its postcondition")
                out.append((post, result))
        return out

    # --- control resolution ------------------------------------------------------

    def resolve(self, act, node: str, snap: Snapshot, env: dict) -> list:
        """Task and final nodes reachable from `node` through control nodes whose guards hold.

        Returns None when the only way on is a cycle of control nodes (the process spins).
        """
        found, seen, stack = [], set(), [node]
        looped = False
        while stack:
            n = stack.pop()
            if n in seen:
                looped = True
                continue
            seen.add(n)
            kind = act.node[n].kind
            if kind in ("task", "final"):
                if n not in found:
                    found.append(n)
                continue
            for e in act.outgoing.get(n, []):
                if e.guard is None or holds(e.guard, snap, None, env):
                    stack.append(e.target)
        if not found and looped:
            return None
        return sorted(found)

    def _next(self, act, node: str) -> str:
        return act.outgoing[node][0].target

    # --- successors --------------------------------------------------------------

    def _finish(self, ws: Workspace, oid: Oid, source: str, target: str):
        cls = ws.objects.get(oid)
        if cls is None or cls == target:
            return
        if source != PRE_INITIAL and cls != source and cls in self.cm.leaves(self.cm.root(target)):
            raise InconsistentRetyping(f"{oid} ended in {cls}, but the lifecycle transition targets {target}")
        ws.retype(oid, target)

    def _init_runs(self, sm, transition, snap: Snapshot, processes):
        """Complete executions of an init activity as (snapshot, new instance) pairs."""
        act = self.model.activity[transition.event]
        results = []
        seen = set()
        stack = [(snap, (), act.initial_node)]
        while stack:
            cur, env_t, node = stack.pop()
            key = (cur, env_t, node)
            if key in seen:
                continue
            seen.add(key)
            env = dict(env_t)
            for n in self.resolve(act, node, cur, env) or ():
                kind = act.node[n].kind
                if kind == "final":
                    inst = env.get(act.anchor)
                    if not isinstance(inst, Oid) or inst not in cur.objects:
                        continue
                    if self.cm.root(cur.objects[inst]) != sm.artifact:
                        continue
                    ws = Workspace(cur)
                    self._finish(ws, inst, PRE_INITIAL, transition.target)
                    post = ws.freeze()
                    if violations(post) is None:
                        results.append((post, inst))
                    continue
                task = act.node[n].task
                for post, result in self.run_task(task, cur, env, processes, env.get(act.anchor)):
                    nenv = dict(env)
                    if result is not None and act.anchor not in nenv:
                        nenv[act.anchor] = result
                    stack.append((post, tuple(sorted(nenv.items())), self._next(act, n)))
        return results

    def _can_create(self, conf: Configuration, artifact: str) -> bool:
        if self.mode == THM3:
            return conf.created[self.artifacts.index(artifact)] < 1
        live = sum(1 for c in conf.snapshot.objects.values() if c in self.artcl)
        return live < self.instances

    def successors(self, conf: Configuration) -> list:
        """Raw successors as (snapshot, processes, created) triples with unrenamed oids."""
        snap = conf.snapshot
        out = []
        busy = {p.instance for p in conf.processes}
        # lifecycle transitions of idle instances
        for sm in self.model.state_machines:
            for oid in sorted(snap.extension(sm.artifact), key=sort_key):
                if oid in busy:
                    continue
                state = snap.objects[oid]
                for t in sm.transitions:
                    if t.source != state:
                        continue
                    act = self.model.activity[t.event]
                    env = {"self": oid, act.anchor: oid}
                    if not holds(t.guard, snap, None, env):
                        continue
                    proc = Process(oid, t.event, t.source, t.target, act.initial_node,
                                   tuple(sorted({act.anchor: oid}.items())))
                    out.append((snap, conf.processes + (proc,), conf.created))
        # creation of new instances through init activities
        for sm in self.model.state_machines:
            if not self._can_create(conf, sm.artifact):
                continue
            for t in sm.transitions:
                if t.source != PRE_INITIAL or not holds(t.guard, snap, None, {}):
                    continue
                created = list(conf.created)
                created[self.artifacts.index(sm.artifact)] += 1
                for post, _ in self._init_runs(sm, t, snap, conf.processes):
                    out.append((post, conf.processes, tuple(created)))
        # one step of each running process
        for p in conf.processes:
            if p.instance not in snap.objects:
                rest = tuple(q for q in conf.processes if q is not p)
                out.append((snap, rest, conf.created))
                continue
            act = self.model.activity[p.event]
            env = p.bindings
            others = tuple(q for q in conf.processes if q is not p)
            targets = self.resolve(act, p.node, snap, env)
            if targets is None:
                out.append((snap, conf.processes, conf.created))
                continue
            for n in targets:
                node = act.node[n]
                if node.kind == "final":
                    ws = Workspace(snap)
                    self._finish(ws, p.instance, p.source, p.target)
                    post = ws.freeze()
                    if violations(post) is None:
                        out.append((post, others, conf.created))
                    continue
                for post, _ in self.run_task(node.task, snap, env, conf.processes, p.instance):
                    moved = Process(p.instance, p.event, p.source, p.target, self._next(act, n), p.env)
                    out.append((post, others + (moved,), conf.created))
        return out

    # --- breadth-first construction ---------------------------------------------

    def ground(self) -> TransitionSystem:
        start, _ = canonicalize(self.initial_snapshot(), (), (0,) * len(self.artifacts), self.pool, self.pool_names)
        index = {start: 0}
        states = [start]
        edges, perms = [], []
        deadlocks = set()
        depth = {0: 0}
        queue = deque([0])
        while queue:
            s = queue.popleft()
            conf = states[s]
            if self.max_depth is not None and depth[s] >= self.max_depth:
                raise BudgetExceeded(f"search depth limit {self.max_depth} reached", "steps")
            succ = self.successors(conf)
            seen_here = set()
            n_src = len(conf.snapshot.objects)
            for snap, procs, created in succ:
                nxt, rho = canonicalize(snap, procs, created, self.pool, self.pool_names)
                if self.object_bound is not None and len(nxt.snapshot.objects) > self.object_bound:
                    raise BudgetExceeded(f"snapshot with {len(nxt.snapshot.objects)} objects exceeds the "
                                         f"analysis bound {self.object_bound}", "objects")
                t = index.get(nxt)
                if t is None:
                    t = len(states)
                    if t >= self.max_states:
                        raise BudgetExceeded(f"more than {self.max_states} states", "states")
                    index[nxt] = t
                    states.append(nxt)
                    depth[t] = depth[s] + 1
                    queue.append(t)
                perm = tuple(rho[Oid(j)].n if Oid(j) in rho else -1 for j in range(n_src))
                if (t, perm) in seen_here:
                    continue
                seen_here.add((t, perm))
                edges.append((s, t))
                perms.append(perm)
            if not seen_here:
                deadlocks.add(s)
                edges.append((s, s))
                perms.append(tuple(range(n_src)))
        log.info("grounded %d states, %d edges, %d deadlocks", len(states), len(edges), len(deadlocks))
        return TransitionSystem(self.model, states, 0, edges, perms, deadlocks,
                                {"mode": self.mode, "instances": self.instances, "budget": len(self.pool_names)})


def ground(model: BaumlModel, mode: str = THM6, instances: int = 1, budget: int = 8,
           max_states: int = 1_000_000, max_depth: Optional[int] = None, pool_prefix: str = "$f",
           object_bound: Optional[int] = None, check_posts: bool = False) -> TransitionSystem:
    """Ground `model` into a finite transition system.

    mode "thm3": the initial database plus one extra creation per artifact type.
    mode "thm6": at most `instances` artifact objects exist at any time.
    `budget` is the size of the fresh-string pool.
    """
    return Grounder(model, mode, instances, budget, max_states, max_depth, pool_prefix,
                    object_bound, check_posts).ground()
