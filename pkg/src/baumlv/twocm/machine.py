"""m-counter machines: text format, interpreter, input normalization, random generation."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from ..errors import BadInput, DslSyntaxError


@dataclass(frozen=True)
class Inc:
    counter: int
    goto: int


@dataclass(frozen=True)
class CDec:
    counter: int
    zero: int
    dec: int


@dataclass(frozen=True)
class Halt:
    pass


Command = Union[Inc, CDec, Halt]


@dataclass(frozen=True)
class CounterMachine:
    commands: tuple  # commands[k-1] is command k
    counters: int = 2

    def __post_init__(self):
        n = len(self.commands)
        if n == 0:
            raise BadInput("a machine needs at least one command")
        if not isinstance(self.commands[-1], Halt):
            raise BadInput("the last command must be HALT")
        for k, cmd in enumerate(self.commands, 1):
            if isinstance(cmd, Halt):
                if k != n:
                    raise BadInput(f"HALT may only appear as the last command (found at {k})")
                continue
            targets = (cmd.goto,) if isinstance(cmd, Inc) else (cmd.zero, cmd.dec)
            for t in targets:
                if not 1 <= t <= n:
                    raise BadInput(f"command {k}: goto {t} outside 1..{n}")
            if not 1 <= cmd.counter <= self.counters:
                raise BadInput(f"command {k}: counter {cmd.counter} outside 1..{self.counters}")

    @property
    def n(self) -> int:
        return len(self.commands)

    def command(self, k: int) -> Command:
        return self.commands[k - 1]

    def successors(self, k: int) -> tuple:
        cmd = self.command(k)
        if isinstance(cmd, Inc):
            return (cmd.goto,)
        if isinstance(cmd, CDec):
            return (cmd.zero, cmd.dec)
        return ()

    def reachable(self) -> list:
        """Command indices reachable from 1 in the control graph, in ascending order."""
        seen, todo = {1}, [1]
        while todo:
            for nxt in self.successors(todo.pop()):
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        return sorted(seen)

    def __str__(self):
        return format_machine(self)


@dataclass
class RunResult:
    outcome: str  # HALTED | RUNNING
    steps: int
    counters: tuple
    pc: int
    max_counter: int
    trace: Optional[list] = None

    @property
    def halted(self) -> bool:
        return self.outcome == "HALTED"


_LINE = re.compile(
    r"(\d+)\s*:\s*(?:"
    r"INC\s+(\d+)\s+GOTO\s+(\d+)"
    r"|DEC\s+(\d+)\s+ZERO\s+(\d+)\s+ELSE\s+(\d+)"
    r"|(HALT))$",
    re.IGNORECASE,
)


def parse_machine(text: str, source: str = "<machine>") -> CounterMachine:
    """Parse the `.cm2` format: `k: INC c GOTO k'`, `k: DEC c ZERO k' ELSE k''`, `n: HALT`.

    Commands may also be separated by `;` on one line; `#` starts a comment and an
    optional `counters m` line fixes the counter count (default: max(2, highest used)).
    """
    commands = {}
    counters = None
    for no, raw in enumerate(text.splitlines(), 1):
        for part in raw.split("#", 1)[0].split(";"):
            part = part.strip()
            if not part:
                continue
            cm = re.fullmatch(r"counters\s+(\d+)", part)
            if cm:
                counters = int(cm.group(1))
                continue
            m = _LINE.match(part)
            if not m:
                raise DslSyntaxError(f"malformed command {part!r}", no, 1, source)
            k = int(m.group(1))
            if k in commands:
                raise DslSyntaxError(f"command {k} defined twice", no, 1, source)
            if m.group(2):
                commands[k] = Inc(int(m.group(2)), int(m.group(3)))
            elif m.group(4):
                commands[k] = CDec(int(m.group(4)), int(m.group(5)), int(m.group(6)))
            else:
                commands[k] = Halt()
    if not commands:
        raise DslSyntaxError("empty machine", None, None, source)
    if sorted(commands) != list(range(1, len(commands) + 1)):
        raise DslSyntaxError("commands must be numbered 1..n without gaps", None, None, source)
    cmds = tuple(commands[k] for k in range(1, len(commands) + 1))
    used = max((c.counter for c in cmds if not isinstance(c, Halt)), default=1)
    try:
        return CounterMachine(cmds, counters if counters is not None else max(2, used))
    except BadInput as exc:
        raise DslSyntaxError(str(exc), None, None, source) from None


def format_machine(machine: CounterMachine, sep: str = "\n") -> str:
    lines = []
    for k, cmd in enumerate(machine.commands, 1):
        if isinstance(cmd, Inc):
            lines.append(f"{k}: INC {cmd.counter} GOTO {cmd.goto}")
        elif isinstance(cmd, CDec):
            lines.append(f"{k}: DEC {cmd.counter} ZERO {cmd.zero} ELSE {cmd.dec}")
        else:
            lines.append(f"{k}: HALT")
    return sep.join(lines)


def run(machine: CounterMachine, inputs=None, step_limit: int = 10_000, trace: bool = False) -> RunResult:
    """Small-step simulation from command 1; HALT itself costs no step."""
    values = list(inputs) if inputs is not None else [0] * machine.counters
    if len(values) != machine.counters:
        raise BadInput(f"expected {machine.counters} input values, got {len(values)}")
    if any((not isinstance(v, int)) or v < 0 for v in values):
        raise BadInput("inputs must be non-negative integers")
    pc, steps = 1, 0
    peak = max(values, default=0)
    log = [(pc, tuple(values))] if trace else None
    while True:
        cmd = machine.command(pc)
        if isinstance(cmd, Halt):
            return RunResult("HALTED", steps, tuple(values), pc, peak, log)
        if steps >= step_limit:
            return RunResult("RUNNING", steps, tuple(values), pc, peak, log)
        i = cmd.counter - 1
        if isinstance(cmd, Inc):
            values[i] += 1
            peak = max(peak, values[i])
            pc = cmd.goto
        elif values[i] == 0:
            pc = cmd.zero
        else:
            values[i] -= 1
            pc = cmd.dec
        steps += 1
        if trace:
            log.append((pc, tuple(values)))


def normalize_input(machine: CounterMachine, inputs) -> CounterMachine:
    """Equivalent machine that starts from zero counters: d1 `INC 1` then d2 `INC 2`, then the program."""
    if machine.counters != 2:
        raise BadInput("input normalization is defined for 2-counter machines")
    d1, d2 = inputs
    if d1 < 0 or d2 < 0:
        raise BadInput("inputs must be non-negative")
    shift = d1 + d2
    prefix = [Inc(1, k + 1) for k in range(1, d1 + 1)]
    prefix += [Inc(2, k + 1) for k in range(d1 + 1, shift + 1)]

    def moved(cmd):
        if isinstance(cmd, Inc):
            return Inc(cmd.counter, cmd.goto + shift)
        if isinstance(cmd, CDec):
            return CDec(cmd.counter, cmd.zero + shift, cmd.dec + shift)
        return cmd

    return CounterMachine(tuple(prefix) + tuple(moved(c) for c in machine.commands), 2)


def random_machine(rng: random.Random, n: int, counters: int = 2, dec_ratio: float = 0.5) -> CounterMachine:
    """Uniformly random machine with `n` commands (the last one HALT)."""
    cmds = []
    for _ in range(n - 1):
        c = rng.randint(1, counters)
        if rng.random() < dec_ratio:
            cmds.append(CDec(c, rng.randint(1, n), rng.randint(1, n)))
        else:
            cmds.append(Inc(c, rng.randint(1, n)))
    cmds.append(Halt())
    return CounterMachine(tuple(cmds), counters)


@dataclass
class Suite:
    """Named desk-scale machines used by the reduction-fidelity checks."""

    halting: dict = field(default_factory=dict)
    non_halting: dict = field(default_factory=dict)


def desk_suite() -> Suite:
    def m(text):
        return parse_machine(text)

    return Suite(
        halting={
            "halt": m("1: HALT"),
            "inc-dec": m("1: INC 1 GOTO 2; 2: DEC 1 ZERO 3 ELSE 2; 3: HALT"),
            "both-counters": m("1: INC 1 GOTO 2; 2: DEC 1 ZERO 5 ELSE 3; 3: INC 2 GOTO 4;"
                               " 4: DEC 2 ZERO 5 ELSE 5; 5: HALT"),
        },
        non_halting={
            "zero-loop": m("1: DEC 1 ZERO 1 ELSE 2; 2: HALT"),
            "spin-on-c2": m("1: INC 1 GOTO 2; 2: DEC 2 ZERO 2 ELSE 3; 3: HALT"),
            "spin-on-c1": m("1: INC 2 GOTO 2; 2: DEC 1 ZERO 2 ELSE 3; 3: HALT"),
        },
    )
