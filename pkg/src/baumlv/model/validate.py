"""Model invariant checks.  Each violated invariant raises `ValidationError`
with one of the codes in `CODES`; soft findings are returned as warnings."""

from __future__ import annotations

from collections import deque

from ..errors import ValidationError
from ..ocl import ast as ocl
from .types import NODE_KINDS, PRE_INITIAL, VALUE_KINDS, BaumlModel

CODES = (
    "duplicate-name",
    "unknown-class",
    "isa-cycle",
    "multiple-inheritance",
    "artifact-not-root",
    "empty-subart",
    "terminal-count",
    "multiple-keys",
    "ambiguous-role",
    "bad-cardinality",
    "statemachine-count",
    "states-mismatch",
    "bad-initial",
    "unknown-state",
    "event-activity",
    "activity-initial",
    "activity-final",
    "activity-unreachable",
    "decision-guard",
    "node-out-degree",
    "unknown-node",
    "missing-contract",
    "task-param",
    "unsupported-postcondition",
    "bad-database",
)


def _fail(code, message, where=None, key=None):
    assert code in CODES, code
    line = where.get(key) if where and key else None
    raise ValidationError(code, message, line)


def validate(model: BaumlModel, where: dict | None = None) -> list[str]:
    """Raise on the first broken invariant; return a list of warnings otherwise."""
    warnings: list[str] = []
    _class_model(model, where)
    _state_machines(model, where)
    warnings += _activities(model, where)
    _contracts(model, where)
    _database(model)
    return warnings


def _class_model(model, where):
    cm = model.class_model
    seen = set()
    for c in cm.classes:
        if c.name in seen:
            _fail("duplicate-name", f"class {c.name} declared twice", where, ("class", c.name))
        seen.add(c.name)
    names = set(seen)
    subs = set()
    for sub, sup in cm.isa_edges:
        for n in (sub, sup):
            if n not in names:
                _fail("unknown-class", f"is-a edge mentions unknown class {n}", where, ("class", sub))
        if sub in subs:
            _fail("multiple-inheritance", f"class {sub} has more than one superclass", where, ("class", sub))
        subs.add(sub)
    for c in cm.classes:
        chain, cur = {c.name}, c.name
        while cur in cm.parent:
            cur = cm.parent[cur]
            if cur in chain:
                _fail("isa-cycle", f"is-a cycle through {c.name}", where, ("class", c.name))
            chain.add(cur)
    for c in cm.classes:
        if sum(a.is_key for a in cm.attributes_of(c.name).values()) > 1:
            _fail("multiple-keys", f"class {c.name} has more than one key attribute", where, ("class", c.name))
        for a in c.attributes:
            if a.kind not in VALUE_KINDS:
                _fail("unknown-class", f"attribute {c.name}.{a.name} has kind {a.kind}", where, ("class", c.name))
    for art in cm.artifacts:
        if art not in names:
            _fail("unknown-class", f"artifact {art} is not a declared class")
        if art in cm.parent:
            _fail("artifact-not-root", f"artifact {art} is a subclass of {cm.parent[art]}", where, ("class", art))
        leaves = cm.leaves(art)
        if leaves == [art]:
            _fail("empty-subart", f"artifact {art} has no state subclasses", where, ("class", art))
        terminals = [l for l in leaves if cm.by_name[l].is_terminal_state]
        if len(terminals) != 1:
            _fail("terminal-count", f"artifact {art} needs exactly one terminal state, found {len(terminals)}",
                  where, ("class", art))
    artcl = cm.artcl()
    for c in cm.classes:
        if c.is_terminal_state and (c.name not in artcl or cm.children.get(c.name)):
            _fail("terminal-count", f"{c.name} is marked terminal but is not an artifact leaf state",
                  where, ("class", c.name))
    anames = set()
    for a in cm.associations:
        if a.name in anames or a.name in names:
            _fail("duplicate-name", f"association name {a.name} is not unique", where, ("assoc", a.name))
        anames.add(a.name)
        for n in (a.domain_class, a.image_class):
            if n not in names:
                _fail("unknown-class", f"association {a.name} mentions unknown class {n}", where, ("assoc", a.name))
        for card in (a.domain_card, a.image_card):
            if card.lower < 0 or (card.upper is not None and card.upper < max(card.lower, 1)):
                _fail("bad-cardinality", f"association {a.name} has cardinality {card}", where, ("assoc", a.name))
    # roles reachable from one class, inherited and own, must not clash
    for c in cm.classes:
        seen_roles = {}
        for cls in cm.ancestors(c.name):
            for ref in cm._own_roles.get(cls, ()):
                if ref.role in seen_roles and seen_roles[ref.role] != (ref.assoc, ref.forward):
                    _fail("ambiguous-role", f"role {ref.role} is ambiguous from class {c.name}",
                          where, ("assoc", ref.assoc))
                seen_roles[ref.role] = (ref.assoc, ref.forward)
            if cls == c.name:
                attrs = set(cm.attributes_of(c.name))
                clash = attrs & set(seen_roles)
                if clash:
                    _fail("ambiguous-role", f"{sorted(clash)[0]} is both a role and an attribute of {c.name}",
                          where, ("class", c.name))
    for mark in cm.readonly_marks:
        if mark not in names and mark not in anames:
            _fail("unknown-class", f"readonly mark names unknown element {mark}")


def _state_machines(model, where):
    cm = model.class_model
    by_art = {}
    for sm in model.state_machines:
        if sm.artifact not in cm.artifacts:
            _fail("statemachine-count", f"statemachine for non-artifact {sm.artifact}",
                  where, ("statemachine", sm.artifact))
        if sm.artifact in by_art:
            _fail("statemachine-count", f"two statemachines for {sm.artifact}", where, ("statemachine", sm.artifact))
        by_art[sm.artifact] = sm
    for art in cm.artifacts:
        if art not in by_art:
            _fail("statemachine-count", f"artifact {art} has no statemachine", where, ("class", art))
    events_seen = {}
    for sm in model.state_machines:
        key = ("statemachine", sm.artifact)
        if set(sm.states) != set(cm.subart(sm.artifact)) or len(sm.states) != len(set(sm.states)):
            _fail("states-mismatch", f"states of {sm.artifact} must be exactly {sorted(cm.subart(sm.artifact))}",
                  where, key)
        if sm.initial not in sm.states:
            _fail("bad-initial", f"initial state {sm.initial} is not a state of {sm.artifact}", where, key)
        for t in sm.transitions:
            if t.source != PRE_INITIAL and t.source not in sm.states:
                _fail("unknown-state", f"transition source {t.source} is not a state of {sm.artifact}", where, key)
            if t.target not in sm.states:
                _fail("unknown-state", f"transition target {t.target} is not a state of {sm.artifact}", where, key)
            if t.source == PRE_INITIAL and t.target != sm.initial:
                _fail("bad-initial", f"creation transition must target {sm.initial}, not {t.target}", where, key)
        for ev in sm.events:
            if ev in events_seen and events_seen[ev] != sm.artifact:
                _fail("event-activity", f"event {ev} used by two statemachines", where, key)
            events_seen[ev] = sm.artifact
            if ev not in model.activity:
                _fail("event-activity", f"event {ev} has no activity diagram", where, key)
    counts = {}
    for act in model.activities:
        counts[act.event] = counts.get(act.event, 0) + 1
        if counts[act.event] > 1:
            _fail("event-activity", f"event {act.event} has two activity diagrams", where, ("activity", act.event))
        if act.event not in events_seen:
            _fail("event-activity", f"activity {act.event} belongs to no statemachine event",
                  where, ("activity", act.event))


def _activities(model, where):
    warnings = []
    for act in model.activities:
        key = ("activity", act.event)
        ids = [n.id for n in act.nodes]
        if len(ids) != len(set(ids)):
            _fail("duplicate-name", f"duplicate node id in activity {act.event}", where, key)
        for n in act.nodes:
            if n.kind not in NODE_KINDS:
                _fail("unknown-node", f"unknown node kind {n.kind}", where, key)
        initials = [n for n in act.nodes if n.kind == "initial"]
        if len(initials) != 1:
            _fail("activity-initial", f"activity {act.event} needs exactly one initial node", where, key)
        finals = [n for n in act.nodes if n.kind == "final"]
        if not finals:
            _fail("activity-final", f"activity {act.event} has no final node", where, key)
        node = act.node
        for e in act.edges:
            for end in (e.source, e.target):
                if end not in node:
                    _fail("unknown-node", f"edge mentions unknown node {end} in {act.event}", where, key)
        for n in act.nodes:
            out = act.outgoing.get(n.id, [])
            if n.kind == "decision":
                if not out or any(e.guard is None for e in out):
                    _fail("decision-guard", f"every edge leaving decision {n.id} needs a guard", where, key)
            elif n.kind == "final":
                if out:
                    _fail("node-out-degree", f"final node {n.id} has outgoing edges", where, key)
            else:
                if len(out) != 1 or out[0].guard is not None:
                    _fail("node-out-degree", f"{n.kind} node {n.id} needs exactly one unguarded outgoing edge",
                          where, key)
        start = initials[0].id
        seen, queue = {start}, deque([start])
        while queue:
            for e in act.outgoing.get(queue.popleft(), []):
                if e.target not in seen:
                    seen.add(e.target)
                    queue.append(e.target)
        missing = [i for i in ids if i not in seen]
        if missing:
            _fail("activity-unreachable", f"nodes {missing} of {act.event} are unreachable from the initial node",
                  where, key)
        finals_ids = {n.id for n in finals}
        back = {i: [] for i in ids}
        for e in act.edges:
            back[e.target].append(e.source)
        reach_final, queue = set(finals_ids), deque(finals_ids)
        while queue:
            for src in back[queue.popleft()]:
                if src not in reach_final:
                    reach_final.add(src)
                    queue.append(src)
        stuck = [i for i in ids if i not in reach_final]
        if stuck:
            warnings.append(f"activity {act.event}: no final node reachable from {stuck}")
        for n in act.nodes:
            if n.kind == "task" and n.task not in model.contract:
                _fail("missing-contract", f"task {n.task} in {act.event} has no contract", where, key)
    return warnings


def _contracts(model, where):
    from ..ocl.effects import to_effect_normal_form

    cm = model.class_model
    names = set(cm.by_name)
    seen = set()
    for c in model.contracts:
        key = ("task", c.name)
        if c.name in seen:
            _fail("duplicate-name", f"task {c.name} declared twice", where, key)
        seen.add(c.name)
        for p in c.params:
            if p.kind not in VALUE_KINDS and p.kind not in names:
                _fail("unknown-class", f"parameter {c.name}.{p.name} has unknown kind {p.kind}", where, key)
            if p.fresh and p.kind != "string":
                _fail("task-param", f"only string parameters can be fresh ({c.name}.{p.name})", where, key)
        if c.result is not None and c.result not in names:
            _fail("unknown-class", f"task {c.name} returns unknown class {c.result}", where, key)
        try:
            to_effect_normal_form(c.post)
        except Exception as exc:  # UnsupportedPostcondition
            _fail("unsupported-postcondition", f"task {c.name}: {exc}", where, key)
        if any(isinstance(n, ocl.OclIsNew) for n in c.pre.walk()):
            _fail("unsupported-postcondition", f"task {c.name}: oclIsNew() in a precondition", where, key)
    for act in model.activities:
        sm = model.machine_of_event(act.event)
        if sm is None or model.is_init_event(act.event):
            continue
        for task in act.task_names():
            contract = model.contract[task]
            first = contract.params[0] if contract.params else None
            if first is None or first.kind not in cm.by_name or cm.root(first.kind) != sm.artifact:
                _fail("task-param", f"task {task} in {act.event} must take a {sm.artifact} instance first",
                      where, ("task", task))


def _database(model):
    cm = model.class_model
    db = model.initial_db
    names = {}
    for obj in db.objects:
        if obj.name in names:
            _fail("bad-database", f"object {obj.name} declared twice")
        if obj.cls not in cm.by_name or cm.children.get(obj.cls):
            _fail("bad-database", f"object {obj.name} must belong to a declared leaf class")
        attrs = cm.attributes_of(obj.cls)
        for k, v in obj.attrs:
            if k not in attrs:
                _fail("bad-database", f"object {obj.name} has no attribute {k}")
            if isinstance(v, bool) != (attrs[k].kind == "boolean"):
                _fail("bad-database", f"object {obj.name}.{k} has a value of the wrong kind")
        names[obj.name] = obj.cls
    for assoc, a, b in db.links:
        decl = cm.assoc_by_name.get(assoc)
        if decl is None or a not in names or b not in names:
            _fail("bad-database", f"link {assoc}({a}, {b}) mentions unknown names")
        if not cm.is_subclass(names[a], decl.domain_class) or not cm.is_subclass(names[b], decl.image_class):
            _fail("bad-database", f"link {assoc}({a}, {b}) does not match the association ends")
