"""Line-oriented `.bauml` model language: parser and canonical printer.

The normative grammar lives in docs/bauml.ebnf.  Every statement starts on its
own line; blocks (`statemachine`, `activity`, `task`, `database`) are closed by
a line holding only `}`.  `#` starts a comment that runs to end of line
(outside string literals).
"""

from __future__ import annotations

import re

from ..errors import DslSyntaxError
from ..ocl import ast as ocl
from ..ocl.parser import parse_ocl
from .types import (
    PRE_INITIAL, ActivityDiagram, AssocDecl, Attribute, BaumlModel, Cardinality, ClassDecl,
    ClassModel, DbObject, Edge, InitialDb, Node, Param, StateMachine, TaskContract, Transition,
)

FORMAT_HEADER = "bauml 1"

NAME = r"[0-9]*[A-Za-z_][A-Za-z0-9_]*"
_CARD = r"(?:\d+\.\.(?:\d+|\*)|\d+|\*)"

_RE_CLASS = re.compile(rf"class\s+({NAME})(?:\s*:\s*({NAME}))?\s*(\{{.*\}})?$")
_RE_ARTIFACT = re.compile(rf"artifact\s+({NAME})\s*(\{{.*\}})?$")
_RE_STATE = re.compile(rf"state\s+({NAME})\s*:\s*({NAME})\s*(\[terminal\])?\s*(\{{.*\}})?$")
_RE_ASSOC = re.compile(
    rf"assoc\s+({NAME})\s*\(\s*({NAME})\s*\[({_CARD})\]\s*({NAME})\s*--\s*({NAME})\s*\[({_CARD})\]\s*({NAME})\s*\)$")
_RE_READONLY = re.compile(rf"readonly\s+({NAME})$")
_RE_SM = re.compile(rf"statemachine\s+({NAME})\s*\{{$")
_RE_STATES = re.compile(rf"states\s+({NAME}(?:\s*,\s*{NAME})*)$")
_RE_INITIAL = re.compile(rf"initial\s+({NAME})$")
_RE_TRANSITION = re.compile(rf"transition\s+({NAME}|\*)\s*->\s*({NAME})\s+on\s+({NAME})(?:\s*\[guard:(.*)\])?$")
_RE_ACTIVITY = re.compile(rf"activity\s+({NAME})\s*\(\s*({NAME})\s*\)\s*\{{$")
_RE_NODE = re.compile(rf"node\s+({NAME})\s+(initial|final|decision|merge|task\s+{NAME})$")
_RE_EDGE = re.compile(rf"edge\s+({NAME})\s*->\s*({NAME})(?:\s*\[guard:(.*)\])?$")
_RE_TASK = re.compile(rf"task\s+({NAME})\s*\((.*)\)\s*(?::\s*({NAME}))?\s*\{{$")
_RE_PARAM = re.compile(rf"({NAME})\s*:\s*({NAME})(\s+fresh)?$")
_RE_DB = re.compile(r"database\s*\{$")
_RE_OBJECT = re.compile(rf"object\s+({NAME})\s*:\s*({NAME})\s*(\{{.*\}})?$")
_RE_LINK = re.compile(rf"link\s+({NAME})\s*\(\s*({NAME})\s*,\s*({NAME})\s*\)$")


def _strip_comment(line: str) -> str:
    in_str = False
    escaped = False
    for i, ch in enumerate(line):
        if in_str:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
        elif ch == "#":
            return line[:i]
    return line


def _card(text: str) -> Cardinality:
    if text == "*":
        return Cardinality(0, None)
    if ".." in text:
        lo, hi = text.split("..")
        return Cardinality(int(lo), None if hi == "*" else int(hi))
    return Cardinality(int(text), int(text))


class _ModelParser:
    def __init__(self, text: str, source: str):
        self.source = source
        self.lines = []
        for no, raw in enumerate(text.splitlines(), start=1):
            stripped = _strip_comment(raw).strip()
            if stripped:
                self.lines.append((no, stripped))
        self.i = 0
        self.classes: list[ClassDecl] = []
        self.isa: list[tuple[str, str]] = []
        self.assocs: list[AssocDecl] = []
        self.artifacts: list[str] = []
        self.readonly: list[str] = []
        self.constraints: list[ocl.Expr] = []
        self.machines: list[StateMachine] = []
        self.activities: list[ActivityDiagram] = []
        self.contracts: list[TaskContract] = []
        self.db = InitialDb()
        # line numbers, for validation diagnostics
        self.where: dict[tuple[str, str], int] = {}

    def error(self, message, line):
        raise DslSyntaxError(message, line, None, self.source)

    def ocl(self, text, line):
        text = text.strip()
        if not text:
            self.error("empty OCL expression", line)
        return parse_ocl(text, line, self.source)

    def next_line(self, block):
        if self.i >= len(self.lines):
            self.error(f"unterminated {block} block", self.lines[-1][0] if self.lines else None)
        item = self.lines[self.i]
        self.i += 1
        return item

    def attrs(self, text, line):
        out = []
        if not text:
            return ()
        body = text.strip()[1:-1].strip()
        if not body:
            return ()
        for part in body.split(";"):
            part = part.strip()
            if not part:
                continue
            m = re.fullmatch(rf"({NAME})\s*:\s*({NAME})(\s+key)?", part)
            if not m:
                self.error(f"bad attribute declaration {part!r}", line)
            if m.group(2) not in ("string", "boolean"):
                self.error(f"attribute kind must be string or boolean, not {m.group(2)!r}", line)
            out.append(Attribute(m.group(1), m.group(2), bool(m.group(3))))
        return tuple(out)

    def parse(self) -> tuple[BaumlModel, dict]:
        if self.lines and self.lines[0][1].startswith("bauml"):
            no, text = self.lines[0]
            if text != FORMAT_HEADER:
                self.error(f"unsupported format header {text!r}", no)
            self.i = 1
        while self.i < len(self.lines):
            no, text = self.next_line("model")
            self.statement(no, text)
        cm = ClassModel(
            classes=tuple(self.classes),
            isa_edges=tuple(self.isa),
            associations=tuple(self.assocs),
            artifacts=tuple(self.artifacts),
            readonly_marks=tuple(self.readonly),
        )
        model = BaumlModel(
            class_model=cm,
            constraints=tuple(self.constraints),
            state_machines=tuple(self.machines),
            activities=tuple(self.activities),
            contracts=tuple(self.contracts),
            initial_db=self.db,
        )
        return model, self.where

    def statement(self, no, text):
        keyword = text.split(None, 1)[0].rstrip("{")
        if keyword in ("assocclass", "associationclass"):
            self.error("association classes must be reified into a class plus binary associations", no)
        handler = getattr(self, f"st_{keyword}", None)
        if handler is None:
            self.error(f"unknown statement {keyword!r}", no)
        handler(no, text)

    def _add_class(self, decl, no):
        self.where[("class", decl.name)] = no
        self.classes.append(decl)

    def st_class(self, no, text):
        m = _RE_CLASS.match(text)
        if not m:
            self.error("malformed class declaration", no)
        self._add_class(ClassDecl(m.group(1), self.attrs(m.group(3), no)), no)
        if m.group(2):
            self.isa.append((m.group(1), m.group(2)))

    def st_artifact(self, no, text):
        m = _RE_ARTIFACT.match(text)
        if not m:
            self.error("malformed artifact declaration", no)
        self._add_class(ClassDecl(m.group(1), self.attrs(m.group(2), no)), no)
        self.artifacts.append(m.group(1))

    def st_state(self, no, text):
        m = _RE_STATE.match(text)
        if not m:
            self.error("malformed state declaration", no)
        self._add_class(ClassDecl(m.group(1), self.attrs(m.group(4), no), bool(m.group(3))), no)
        self.isa.append((m.group(1), m.group(2)))

    def st_assoc(self, no, text):
        if text.count("--") > 1:
            self.error("n-ary associations are not supported; reify them into a class", no)
        m = _RE_ASSOC.match(text)
        if not m:
            self.error("malformed association (expected `assoc N (C[card] role -- role[card] D)`)", no)
        name, dc, dcard, drole, irole, icard, ic = m.groups()
        self.where[("assoc", name)] = no
        self.assocs.append(AssocDecl(name, dc, drole, ic, irole, _card(dcard), _card(icard)))

    def st_readonly(self, no, text):
        m = _RE_READONLY.match(text)
        if not m:
            self.error("malformed readonly mark", no)
        self.readonly.append(m.group(1))

    def st_constraint(self, no, text):
        self.constraints.append(self.ocl(text[len("constraint"):], no))

    def st_statemachine(self, no, text):
        m = _RE_SM.match(text)
        if not m:
            self.error("malformed statemachine header", no)
        artifact = m.group(1)
        self.where[("statemachine", artifact)] = no
        states, initial, transitions, events = None, None, [], []
        while True:
            ln, body = self.next_line("statemachine")
            if body == "}":
                break
            if (sm := _RE_STATES.match(body)):
                states = tuple(s.strip() for s in sm.group(1).split(","))
            elif (sm := _RE_INITIAL.match(body)):
                initial = sm.group(1)
            elif (sm := _RE_TRANSITION.match(body)):
                src, tgt, ev, guard = sm.groups()
                g = self.ocl(guard, ln) if guard is not None else ocl.TRUE
                transitions.append(Transition(src, ev, tgt, g))
                if ev not in events:
                    events.append(ev)
            else:
                self.error("expected `states`, `initial`, `transition`, or `}`", ln)
        if states is None:
            self.error(f"statemachine {artifact} lacks a `states` line", no)
        if initial is None:
            self.error(f"statemachine {artifact} lacks an `initial` line", no)
        self.machines.append(StateMachine(artifact, states, initial, tuple(events), tuple(transitions)))

    def st_activity(self, no, text):
        m = _RE_ACTIVITY.match(text)
        if not m:
            self.error("malformed activity header (expected `activity Event(var) {`)", no)
        self.where[("activity", m.group(1))] = no
        nodes, edges = [], []
        while True:
            ln, body = self.next_line("activity")
            if body == "}":
                break
            if (nm := _RE_NODE.match(body)):
                kind = nm.group(2).split()
                nodes.append(Node(nm.group(1), kind[0], kind[1] if len(kind) > 1 else None))
            elif (em := _RE_EDGE.match(body)):
                guard = self.ocl(em.group(3), ln) if em.group(3) is not None else None
                edges.append(Edge(em.group(1), em.group(2), guard))
            else:
                self.error("expected `node`, `edge`, or `}`", ln)
        self.activities.append(ActivityDiagram(m.group(1), m.group(2), tuple(nodes), tuple(edges)))

    def st_task(self, no, text):
        m = _RE_TASK.match(text)
        if not m:
            self.error("malformed task header (expected `task Name(params) [: Class] {`)", no)
        name, params_text, result = m.groups()
        self.where[("task", name)] = no
        params = []
        for part in filter(None, (p.strip() for p in params_text.split(","))):
            pm = _RE_PARAM.match(part)
            if not pm:
                self.error(f"malformed parameter {part!r}", no)
            params.append(Param(pm.group(1), pm.group(2), bool(pm.group(3))))
        clauses = {"pre": [], "post": []}
        current = None
        clause_line = {}
        while True:
            ln, body = self.next_line("task")
            if body == "}":
                break
            head = re.match(r"(pre|post)\s*:(.*)$", body)
            if head:
                current = head.group(1)
                if clauses[current]:
                    self.error(f"duplicate {current}: clause", ln)
                clause_line[current] = ln
                clauses[current].append(head.group(2))
            elif current is None:
                self.error("expected `pre:` or `post:`", ln)
            else:
                clauses[current].append(body)
        pre = self.ocl(" ".join(clauses["pre"]), clause_line["pre"]) if clauses["pre"] else ocl.TRUE
        post = self.ocl(" ".join(clauses["post"]), clause_line["post"]) if clauses["post"] else ocl.TRUE
        self.contracts.append(TaskContract(name, tuple(params), result, pre, post))

    def st_database(self, no, text):
        if not _RE_DB.match(text):
            self.error("malformed database header", no)
        objects, links = list(self.db.objects), list(self.db.links)
        while True:
            ln, body = self.next_line("database")
            if body == "}":
                break
            if (om := _RE_OBJECT.match(body)):
                objects.append(DbObject(om.group(1), om.group(2), self.values(om.group(3), ln)))
            elif (lm := _RE_LINK.match(body)):
                links.append(lm.groups())
            else:
                self.error("expected `object`, `link`, or `}`", ln)
        self.db = InitialDb(tuple(objects), tuple(links))

    def values(self, text, line):
        if not text:
            return ()
        out = []
        for part in filter(None, (p.strip() for p in text.strip()[1:-1].split(";"))):
            vm = re.fullmatch(rf'({NAME})\s*=\s*("(?:[^"\\]|\\.)*"|true|false)', part)
            if not vm:
                self.error(f"bad attribute value {part!r}", line)
            raw = vm.group(2)
            value = raw == "true" if raw in ("true", "false") else re.sub(r"\\(.)", r"\1", raw[1:-1])
            out.append((vm.group(1), value))
        return tuple(out)


def parse_model_unchecked(text: str, source: str = "<model>") -> tuple[BaumlModel, dict]:
    """Parse without validation; returns the model and a line map for diagnostics."""
    return _ModelParser(text, source).parse()


def parse_model(text: str, source: str = "<model>") -> BaumlModel:
    """Parse and validate a `.bauml` source."""
    from .validate import validate

    model, where = parse_model_unchecked(text, source)
    validate(model, where)
    return model


def _fmt_attrs(attrs) -> str:
    if not attrs:
        return ""
    parts = [f"{a.name}: {a.kind}" + (" key" if a.is_key else "") for a in attrs]
    return " { " + "; ".join(parts) + " }"


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_model(model: BaumlModel) -> str:
    """Canonical source; `parse_model(serialize_model(m)) == m`."""
    cm = model.class_model
    out = [FORMAT_HEADER]
    if cm.classes:
        out.append("")
    for decl in cm.classes:
        sup = cm.parent.get(decl.name)
        if decl.name in cm.artifacts:
            out.append(f"artifact {decl.name}{_fmt_attrs(decl.attributes)}")
        elif decl.is_terminal_state or (sup is not None and cm.root(decl.name) in cm.artifacts):
            term = " [terminal]" if decl.is_terminal_state else ""
            out.append(f"state {decl.name} : {sup}{term}{_fmt_attrs(decl.attributes)}")
        else:
            head = f"class {decl.name}" + (f" : {sup}" if sup else "")
            out.append(head + _fmt_attrs(decl.attributes))
    for a in cm.associations:
        out.append(f"assoc {a.name} ({a.domain_class}[{a.domain_card}] {a.domain_role} -- "
                   f"{a.image_role}[{a.image_card}] {a.image_class})")
    for mark in cm.readonly_marks:
        out.append(f"readonly {mark}")
    for c in model.constraints:
        out.append(f"constraint {ocl.to_text(c)}")
    for sm in model.state_machines:
        out += ["", f"statemachine {sm.artifact} {{", f"  states {', '.join(sm.states)}",
                f"  initial {sm.initial}"]
        for t in sm.transitions:
            guard = "" if t.guard == ocl.TRUE else f" [guard: {ocl.to_text(t.guard)}]"
            out.append(f"  transition {t.source} -> {t.target} on {t.event}{guard}")
        out.append("}")
    for act in model.activities:
        out += ["", f"activity {act.event}({act.anchor}) {{"]
        for n in act.nodes:
            out.append(f"  node {n.id} {n.kind}" + (f" {n.task}" if n.task else ""))
        for e in act.edges:
            guard = "" if e.guard is None else f" [guard: {ocl.to_text(e.guard)}]"
            out.append(f"  edge {e.source} -> {e.target}{guard}")
        out.append("}")
    for c in model.contracts:
        params = ", ".join(f"{p.name}: {p.kind}" + (" fresh" if p.fresh else "") for p in c.params)
        result = f" : {c.result}" if c.result else ""
        out += ["", f"task {c.name}({params}){result} {{",
                f"  pre: {ocl.to_text(c.pre)}", f"  post: {ocl.to_text(c.post)}", "}"]
    db = model.initial_db
    if db.objects or db.links:
        out += ["", "database {"]
        for obj in db.objects:
            vals = "; ".join(f"{k} = {_fmt_value(v)}" for k, v in obj.attrs)
            out.append(f"  object {obj.name} : {obj.cls}" + (f" {{ {vals} }}" if vals else ""))
        for assoc, a, b in db.links:
            out.append(f"  link {assoc}({a}, {b})")
        out.append("}")
    return "\n".join(out) + "\n"


__all__ = ["parse_model", "parse_model_unchecked", "serialize_model", "PRE_INITIAL"]
