"""BAUML models that simulate a 2-counter machine, one per reduction table.

Each encoder emits `.bauml` source and parses it, so every generated model
passes the same validation as hand-written ones.  The run activity is built
from one fragment per command reachable from command 1, stitched together
through a merge node `m<k>` at the entry of each fragment.
"""

from __future__ import annotations

from ..model.dsl import parse_model
from .machine import CDec, CounterMachine, Halt, Inc


class _Activity:
    def __init__(self, event: str, anchor: str):
        self.event = event
        self.anchor = anchor
        self.nodes = []
        self.edges = []

    def node(self, ident, kind, task=None):
        self.nodes.append(f"  node {ident} {kind}" + (f" {task}" if task else ""))
        return ident

    def edge(self, src, dst, guard=None):
        self.edges.append(f"  edge {src} -> {dst}" + (f" [guard: {guard}]" if guard is not None else ""))

    def render(self) -> list:
        return [f"activity {self.event}({self.anchor}) {{", *self.nodes, *self.edges, "}", ""]


class _Source:
    def __init__(self):
        self.lines = ["bauml 1", ""]
        self.tasks = {}

    def add(self, *lines):
        self.lines.extend(lines)

    def task(self, name, params, pre, post, result=None):
        if name in self.tasks:
            return
        head = f"task {name}({params})" + (f" : {result}" if result else "") + " {"
        self.tasks[name] = [head, f"  pre: {pre}", f"  post: {post}", "}", ""]

    def text(self) -> str:
        out = list(self.lines)
        for block in self.tasks.values():
            out.extend(block)
        return "\n".join(out)


def _fragments(machine: CounterMachine) -> list:
    """Commands to emit: those reachable from 1, plus HALT (always needed for a Final node)."""
    ks = machine.reachable()
    if machine.n not in ks:
        ks.append(machine.n)
    return ks


def _start(act: _Activity, machine: CounterMachine, ks):
    act.node("start", "initial")
    if machine.n in machine.reachable():
        act.edge("start", "m1")
        return
    # HALT is unreachable: keep it syntactically reachable behind a dead branch
    act.node("s0", "decision")
    act.edge("start", "s0")
    act.edge("s0", "m1", "true")
    act.edge("s0", f"m{machine.n}", "false")


def _lifecycle(src: _Source, art: str, ready: str, halted: str, init_guard=None):
    guard = f" [guard: {init_guard}]" if init_guard else ""
    src.add(f"statemachine {art} {{", f"  states {ready}, {halted}", f"  initial {ready}",
            f"  transition * -> {ready} on init{guard}", f"  transition {ready} -> {halted} on run", "}", "")


def _simple_init(src: _Source, anchor: str):
    act = _Activity("init", anchor)
    act.node("start", "initial")
    act.node("t", "task", "init")
    act.node("f", "final")
    act.edge("start", "t")
    act.edge("t", "f")
    src.add(*act.render())


def _halt_post(var: str, ready: str, halted: str) -> str:
    return f"not {var}.oclIsTypeOf({ready}) and {var}.oclIsTypeOf({halted})"


def _standard_run(src: _Source, machine: CounterMachine, inc, dec):
    """Run activity for the table 1-3 shape.

    `inc(act, k, cmd, entry)` and `dec(act, k, cmd, entry)` add the nodes of one
    fragment; each must route control to `m<goto>`.
    """
    ks = _fragments(machine)
    act = _Activity("run", "m")
    _start(act, machine, ks)
    for k in ks:
        entry = act.node(f"m{k}", "merge")
        cmd = machine.command(k)
        if isinstance(cmd, Inc):
            inc(act, k, cmd, entry)
        elif isinstance(cmd, CDec):
            dec(act, k, cmd, entry)
        else:
            act.node(f"t{k}", "task", "halt")
            act.node("f", "final")
            act.edge(entry, f"t{k}")
            act.edge(f"t{k}", "f")
    src.add(*act.render())
    src.task("halt", "m: Ready2CM", "true", _halt_post("m", "Ready2CM", "Halted2CM"))


def _task_fragment(act, k, entry, task, goto):
    act.node(f"t{k}", "task", task)
    act.edge(entry, f"t{k}")
    act.edge(f"t{k}", f"m{goto}")


def _test_fragment(act, k, entry, q0, task, zero, dec):
    act.node(f"d{k}", "decision")
    act.edge(entry, f"d{k}")
    act.edge(f"d{k}", f"m{zero}", q0)
    act.node(f"t{k}", "task", task)
    act.edge(f"d{k}", f"t{k}", f"not ({q0})")
    act.edge(f"t{k}", f"m{dec}")


_HEADER_2CM = [
    "artifact 2CM { id: string key }",
    "state Ready2CM : 2CM",
    "state Halted2CM : 2CM [terminal]",
]

_INIT_PRE = "not Ready2CM.allInstances()->exists(m' | m'.id = id)"


def table1_source(machine: CounterMachine) -> str:
    """Counters are the extensions of Item1 / Item2, queried globally."""
    src = _Source()
    src.add(*_HEADER_2CM, "class Flag", "class Item1 { id: string key }", "class Item2 { id: string key }", "")
    _lifecycle(src, "2CM", "Ready2CM", "Halted2CM", "Flag.allInstances()->isEmpty()")
    _simple_init(src, "m")
    src.task("init", "id: string fresh", f"Flag.allInstances()->isEmpty() and {_INIT_PRE}",
             "Flag.allInstances()->exists(f | f.oclIsNew()) and "
             "Ready2CM.allInstances()->exists(m | m.oclIsNew() and m.id = id and result = m)", "Ready2CM")

    for i in (1, 2):
        src.task(f"inc{i}", "m: Ready2CM, id: string fresh",
                 f"not Item{i}.allInstances()->exists(x | x.id = id)",
                 f"Item{i}.allInstances()->exists(x | x.oclIsNew() and x.id = id)")
        src.task(f"dec{i}", "m: Ready2CM, id: string",
                 f"Item{i}.allInstances()->exists(x | x.id = id)",
                 f"not Item{i}.allInstances()->exists(x | x.id = id)")

    def inc(act, k, cmd, entry):
        _task_fragment(act, k, entry, f"inc{cmd.counter}", cmd.goto)

    def dec(act, k, cmd, entry):
        i = cmd.counter
        _test_fragment(act, k, entry, f"Item{i}.allInstances()->isEmpty()", f"dec{i}", cmd.zero, cmd.dec)

    _standard_run(src, machine, inc, dec)
    return src.text()


def table2_source(machine: CounterMachine) -> str:
    """Counters are the item sets of two Counter objects owned by the artifact."""
    src = _Source()
    src.add(*_HEADER_2CM, "class Counter", "class Item { id: string }",
            "assoc hasC1 (2CM[0..1] owner1 -- c1[0..1] Counter)",
            "assoc hasC2 (2CM[0..1] owner2 -- c2[0..1] Counter)",
            "assoc contains (Counter[0..1] counter -- items[0..*] Item)", "")
    _lifecycle(src, "2CM", "Ready2CM", "Halted2CM")
    _simple_init(src, "m")
    src.task("init", "id: string fresh", _INIT_PRE,
             "Ready2CM.allInstances()->exists(m | m.oclIsNew() and m.id = id and result = m"
             " and m.c1->exists(x1 | x1.oclIsNew()) and m.c2->exists(x2 | x2.oclIsNew()))", "Ready2CM")

    for i in (1, 2):
        src.task(f"inc{i}", "m: Ready2CM, id: string fresh",
                 f"not m.c{i}.items->exists(x | x.id = id)",
                 f"m.c{i}.items->exists(x | x.oclIsNew() and x.id = id)")
        src.task(f"dec{i}", "m: Ready2CM, id: string",
                 f"m.c{i}.items->exists(x | x.id = id)",
                 f"not m.c{i}.items->exists(x | x.id = id)")

    def inc(act, k, cmd, entry):
        _task_fragment(act, k, entry, f"inc{cmd.counter}", cmd.goto)

    def dec(act, k, cmd, entry):
        i = cmd.counter
        _test_fragment(act, k, entry, f"m.c{i}.items->isEmpty()", f"dec{i}", cmd.zero, cmd.dec)

    _standard_run(src, machine, inc, dec)
    return src.text()


def table3_source(machine: CounterMachine) -> str:
    """Counters are the lengths of the right (c1) and left (c2) hasNext chains from a zero item."""
    src = _Source()
    src.add(*_HEADER_2CM, "class Item",
            "assoc zero (2CM[0..1] owner -- zero[0..1] Item)",
            "assoc hasNext (Item[0..1] l -- r[0..1] Item)", "")
    _lifecycle(src, "2CM", "Ready2CM", "Halted2CM")
    _simple_init(src, "m")
    src.task("init", "id: string fresh", _INIT_PRE,
             "Ready2CM.allInstances()->exists(m | m.oclIsNew() and m.id = id and result = m"
             " and m.zero->exists(x | x.oclIsNew()))", "Ready2CM")
    side = {1: "r", 2: "l"}
    for i, s in side.items():
        src.task(f"incZ{i}", "m: Ready2CM", "true", f"m.zero.{s}->exists(x | x.oclIsNew())")
        src.task(f"inc{i}", "m: Ready2CM", "true",
                 f"m.zero.{s}->exists(x | x.oclIsNew() and x.{s} = m.zero.{s}@pre)")
        src.task(f"decS{i}", "m: Ready2CM", "true", f"m.zero.{s}->isEmpty()")
        src.task(f"dec{i}", "m: Ready2CM", "true",
                 f"let old = m.zero.{s}@pre in let new = m.zero.{s}.{s}@pre in "
                 f"m.zero.{s} = new and old.{s}->isEmpty()")

    def inc(act, k, cmd, entry):
        i, s = cmd.counter, side[cmd.counter]
        q0 = f"m.zero.{s}->isEmpty()"
        act.node(f"d{k}", "decision")
        act.edge(entry, f"d{k}")
        act.node(f"z{k}", "task", f"incZ{i}")
        act.node(f"t{k}", "task", f"inc{i}")
        act.edge(f"d{k}", f"z{k}", q0)
        act.edge(f"d{k}", f"t{k}", f"not ({q0})")
        act.edge(f"z{k}", f"m{cmd.goto}")
        act.edge(f"t{k}", f"m{cmd.goto}")

    def dec(act, k, cmd, entry):
        i, s = cmd.counter, side[cmd.counter]
        q0 = f"m.zero.{s}->isEmpty()"
        q1 = f"m.zero.{s}.{s}->isEmpty()"
        act.node(f"d{k}", "decision")
        act.edge(entry, f"d{k}")
        act.edge(f"d{k}", f"m{cmd.zero}", q0)
        act.node(f"s{k}", "task", f"decS{i}")
        act.node(f"t{k}", "task", f"dec{i}")
        act.edge(f"d{k}", f"s{k}", f"not ({q0}) and {q1}")
        act.edge(f"d{k}", f"t{k}", f"not ({q0}) and not ({q1})")
        act.edge(f"s{k}", f"m{cmd.dec}")
        act.edge(f"t{k}", f"m{cmd.dec}")

    _standard_run(src, machine, inc, dec)
    return src.text()


def table4_source(machine: CounterMachine) -> str:
    """Counters are chains of Conn artifact instances synchronized through one shared PC object."""
    src = _Source()
    src.add("artifact Conn { id: string key }", "state ReadyConn : Conn", "state HaltedConn : Conn [terminal]",
            "class PC { pos: string }",
            "class Item { lastR: boolean; lastL: boolean; startC1: boolean; startC2: boolean }",
            "assoc usesPC (Conn[0..*] conn -- pc[0..1] PC)",
            "assoc right (Conn[0..1] rconn -- r[0..1] Item)",
            "assoc left (Conn[0..1] lconn -- l[0..1] Item)", "")
    _lifecycle(src, "Conn", "ReadyConn", "HaltedConn")

    init = _Activity("init", "c")
    init.node("start", "initial")
    init.node("q0", "decision")
    init.node("p", "task", "createPC")
    init.node("j", "merge")
    init.node("t", "task", "init")
    init.node("q1", "decision")
    init.node("a", "task", "attach")
    init.node("f", "final")
    init.edge("start", "q0")
    init.edge("q0", "p", "PC.allInstances()->isEmpty()")
    init.edge("q0", "j", "not PC.allInstances()->isEmpty()")
    init.edge("p", "j")
    init.edge("j", "t")
    init.edge("t", "q1")
    init.edge("q1", "a", "Item.allInstances()->isEmpty()")
    init.edge("q1", "f", "not Item.allInstances()->isEmpty()")
    init.edge("a", "f")
    src.add(*init.render())
    src.task("createPC", "", "true", 'PC.allInstances()->exists(p | p.oclIsNew() and p.pos = "1")')
    src.task("init", "id: string fresh", "not ReadyConn.allInstances()->exists(x | x.id = id)",
             "ReadyConn.allInstances()->exists(c | c.oclIsNew() and c.id = id and result = c"
             " and c.pc = PC.allInstances())", "ReadyConn")
    src.task("attach", "c: ReadyConn", "true",
             "c.r->exists(s1 | s1.oclIsNew() and s1.lastR = true and s1.startC1 = true)"
             " and c.l->exists(s2 | s2.oclIsNew() and s2.lastL = true and s2.startC2 = true)")

    ks = _fragments(machine)
    act = _Activity("run", "c")
    act.node("start", "initial")
    act.edge("start", "m1")

    def at(k):
        return f'c.pc.pos = "{k}"'

    def forward(k):
        for j in ks:
            if j != k:
                act.edge(f"d{k}", f"m{j}", at(j))

    for k in ks:
        entry = act.node(f"m{k}", "merge")
        cmd = machine.command(k)
        if isinstance(cmd, Halt):
            act.node(f"t{k}", "task", "halt")
            act.node("f", "final")
            act.edge(entry, f"t{k}")
            act.edge(f"t{k}", "f")
            continue
        act.node(f"d{k}", "decision")
        act.edge(entry, f"d{k}")
        i = cmd.counter
        near, far = ("r", "l") if i == 1 else ("l", "r")
        last, start = ("lastR", "startC1") if i == 1 else ("lastL", "startC2")
        if isinstance(cmd, Inc):
            free = "c.l->isEmpty() and c.r->isEmpty()"
            act.node(f"t{k}", "task", f"k{k}Inc{i}")
            act.edge(f"d{k}", f"t{k}", f"{at(k)} and {free}")
            act.edge(f"d{k}", entry, f"{at(k)} and not ({free})")
            act.edge(f"t{k}", f"m{cmd.goto}")
            src.task(f"k{k}Inc{i}", "c: ReadyConn", "true",
                     f"let i = Item.allInstances()->select(x | x.{last}) in "
                     f"c.{far} = i and i.{last} = false"
                     f" and c.{near}->exists(y | y.oclIsNew() and y.{last} = true)"
                     f' and c.pc.pos = "{cmd.goto}"')
        else:
            act.node(f"z{k}", "task", f"k{k}PC")
            act.node(f"t{k}", "task", f"k{k}Dec{i}")
            act.edge(f"d{k}", f"z{k}", f"{at(k)} and c.{near}.{last} and c.{near}.{start}")
            act.edge(f"d{k}", f"t{k}", f"{at(k)} and c.{near}.{last} and not c.{near}.{start}")
            act.edge(f"d{k}", entry, f"{at(k)} and not c.{near}.{last}")
            act.edge(f"z{k}", f"m{cmd.zero}")
            act.edge(f"t{k}", f"m{cmd.dec}")
            src.task(f"k{k}PC", "c: ReadyConn", "true", f'c.pc.pos = "{cmd.zero}"')
            src.task(f"k{k}Dec{i}", "c: ReadyConn", "true",
                     f"let inear = c.{near}@pre in let ifar = c.{far}@pre in "
                     f"ifar.{last} = true and inear.{last} = false"
                     f" and c.l->isEmpty() and c.r->isEmpty()"
                     f' and c.pc.pos = "{cmd.dec}"')
        forward(k)
    src.add(*act.render())
    src.task("halt", "c: ReadyConn", "true", _halt_post("c", "ReadyConn", "HaltedConn"))
    return src.text()


ENCODERS = {
    1: table1_source,
    2: table2_source,
    3: table3_source,
    4: table4_source,
}

EXPECTED_VERDICT = {
    1: "UNDECIDABLE_THM1",
    2: "UNDECIDABLE_THM2",
    3: "UNDECIDABLE_THM4",
    4: "UNDECIDABLE_THM5_UNLESS_BOUNDED",
}


def encode_source(machine: CounterMachine, table: int) -> str:
    return ENCODERS[table](machine)


def encode_unrestricted(machine: CounterMachine):
    return encode(machine, 1)


def encode_unidirectional(machine: CounterMachine):
    return encode(machine, 2)


def encode_bidirectional(machine: CounterMachine):
    return encode(machine, 3)


def encode_shared(machine: CounterMachine):
    return encode(machine, 4)


def encode(machine: CounterMachine, table: int):
    """Parsed and validated model for `machine` under reduction table 1-4."""
    return parse_model(encode_source(machine, table), f"<table {table}>")
