"""Parser for the ASCII property syntax (`.mulp` files).

    phi  ::= phi -> phi | phi \\/ phi | phi /\\ phi | ~phi
           | <> phi | [] phi | <x,y> phi | [x,y] phi     (append `?` to flip the live-guard polarity)
           | mu Z. phi | nu Z. phi
           | forall x. phi | exists x. phi
           | forall x: A. phi | exists x: A. phi
           | forall y: R(x,.). phi | exists y: R(.,x). phi
           | true | false | Z | A(x) | R(x,y) | live(x) | { ocl } | ( phi )

Binder bodies extend as far right as possible.  Unicode connectives
(¬ ∧ ∨ → ∀ ∃ μ ν ⟨⟩) are accepted as well.
"""

from __future__ import annotations

import re

from ..errors import DslSyntaxError, GuardMismatch, NonMonotoneFixpoint
from ..ocl.parser import parse_ocl
from . import ast as M

_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<ocl>\{)
  | (?P<op>->|→|/\\|\\/|∧|∨|<>|\[\]|⟨⟩|~|!|¬|\(|\)|\.|,|:|<|>|\[|\]|\?)
  | (?P<name>[0-9]*[A-Za-z_][A-Za-z0-9_]*'*|∀|∃|μ|ν)
""", re.VERBOSE)

_ALIASES = {"→": "->", "∧": "/\\", "∨": "\\/", "¬": "~", "!": "~", "⟨⟩": "<>",
            "∀": "forall", "∃": "exists", "μ": "mu", "ν": "nu", "not": "~"}
KEYWORDS = {"mu", "nu", "forall", "exists", "true", "false", "live"}


def _ocl_block(text: str, start: int, line: int, source: str):
    """(contents, end index) of a `{...}` block starting at `start`, quotes respected."""
    depth, i, quote = 0, start, None
    while i < len(text):
        ch = text[i]
        if quote:
            if ch == "\\":
                i += 1
            elif ch == quote:
                quote = None
        elif ch == '"':
            quote = ch
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start + 1:i], i + 1
        i += 1
    raise DslSyntaxError("unterminated OCL block", line, start + 1, source)


def tokenize(text: str, source: str = "<property>"):
    out = []
    pos, line = 0, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", line, pos + 1, source)
        kind = m.lastgroup
        if kind == "ocl":
            body, end = _ocl_block(text, pos, line, source)
            out.append(("ocl", body, line))
            line += text.count("\n", pos, end)
            pos = end
            continue
        value = m.group()
        line += value.count("\n")
        pos = m.end()
        if kind == "ws":
            continue
        value = _ALIASES.get(value, value)
        if kind == "name" and value in KEYWORDS:
            kind = "kw"
        elif value in ("forall", "exists", "mu", "nu"):
            kind = "kw"
        elif value == "~":
            kind = "op"
        out.append((kind, value, line))
    out.append(("eof", None, line))
    return out


class _Parser:
    def __init__(self, text: str, source: str):
        self.toks = tokenize(text, source)
        self.i = 0
        self.source = source
        self.bound_z: list = []

    def peek(self, value=None):
        kind, val, _ = self.toks[self.i]
        if value is None:
            return val if kind != "eof" else None
        return val == value and kind != "eof"

    def error(self, msg):
        raise DslSyntaxError(msg, self.toks[self.i][2], None, self.source)

    def take(self, value=None):
        kind, val, _ = self.toks[self.i]
        if value is not None and (val != value or kind == "eof"):
            self.error(f"expected {value!r}, found {val if kind != 'eof' else 'end of input'!r}")
        self.i += 1
        return val

    def name(self):
        kind, val, _ = self.toks[self.i]
        if kind != "name":
            self.error(f"expected a name, found {val if kind != 'eof' else 'end of input'!r}")
        self.i += 1
        return val

    # --- grammar ------------------------------------------------------------

    def formula(self):
        left = self.disj()
        if self.peek("->"):
            self.take()
            return M.Implies(left, self.formula())
        return left

    def disj(self):
        left = self.conj()
        if self.peek("\\/"):
            self.take()
            return M.Or(left, self.disj())
        return left

    def conj(self):
        left = self.unary()
        if self.peek("/\\"):
            self.take()
            return M.And(left, self.conj())
        return left

    def _polarity(self, default, other):
        if self.peek("?"):
            self.take()
            return other
        return default

    def _vars_until(self, close):
        names = [self.name()]
        while self.peek(","):
            self.take()
            names.append(self.name())
        self.take(close)
        return tuple(names)

    def unary(self):
        tok = self.peek()
        if tok == "~":
            self.take()
            return M.Not(self.unary())
        if tok == "<>":
            self.take()
            pol = self._polarity(M.CONJUNCTIVE, M.IMPLICATIVE)
            return M.Diamond(self.unary(), pol)
        if tok == "[]":
            self.take()
            pol = self._polarity(M.IMPLICATIVE, M.CONJUNCTIVE)
            return M.Box(self.unary(), pol)
        if tok == "<":
            self.take()
            guard = self._vars_until(">")
            pol = self._polarity(M.CONJUNCTIVE, M.IMPLICATIVE)
            return M.Diamond(self.unary(), pol, guard)
        if tok == "[":
            self.take()
            guard = self._vars_until("]")
            pol = self._polarity(M.IMPLICATIVE, M.CONJUNCTIVE)
            return M.Box(self.unary(), pol, guard)
        if tok in ("mu", "nu"):
            self.take()
            z = self.name()
            self.take(".")
            self.bound_z.append(z)
            body = self.formula()
            self.bound_z.pop()
            return M.Mu(z, body) if tok == "mu" else M.Nu(z, body)
        if tok in ("forall", "exists"):
            return self.quantifier()
        return self.primary()

    def quantifier(self):
        q = self.take()
        var = self.name()
        guard = None
        if self.peek(":"):
            self.take()
            cls = self.name()
            if self.peek("("):
                self.take()
                if self.peek("."):
                    self.take()
                    self.take(",")
                    src = self.name()
                    guard = ("rel", cls, src, False)
                else:
                    src = self.name()
                    self.take(",")
                    self.take(".")
                    guard = ("rel", cls, src, True)
                self.take(")")
            else:
                guard = ("cls", cls)
        self.take(".")
        body = self.formula()
        if guard is None:
            return _normalize_quantifier(q, var, body)
        if guard[0] == "cls":
            return (M.ExistsClass if q == "exists" else M.ForAllClass)(var, guard[1], body)
        _, assoc, src, forward = guard
        return (M.ExistsRel if q == "exists" else M.ForAllRel)(var, assoc, src, forward, body)

    def primary(self):
        kind, tok, _ = self.toks[self.i]
        if kind == "ocl":
            self.take()
            return M.OclAtom(parse_ocl(tok, None, self.source))
        if tok == "true":
            self.take()
            return M.TRUE
        if tok == "false":
            self.take()
            return M.FALSE
        if tok == "(":
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if tok == "live":
            self.take()
            self.take("(")
            v = self.name()
            self.take(")")
            return M.Live(v)
        if kind == "name":
            name = self.name()
            if self.peek("("):
                self.take()
                args = [self.name()]
                while self.peek(","):
                    self.take()
                    args.append(self.name())
                self.take(")")
                if len(args) == 1:
                    return M.ClassAtom(name, args[0])
                if len(args) == 2:
                    return M.RelAtom(name, args[0], args[1])
                self.error(f"unsupported {len(args)}-ary atom {name}: only classes, binary "
                           f"associations and OCL blocks are supported as queries")
            if name not in self.bound_z:
                self.error(f"{name!r} is not a bound fixpoint variable")
            return M.FixVar(name)
        self.error(f"unexpected {tok if kind != 'eof' else 'end of input'!r}")


def _normalize_quantifier(q: str, var: str, body: M.Formula) -> M.Formula:
    """Recognize the guarded shapes ∃x. A(x) ∧ Φ, ∀x. A(x) → Φ and their relational forms."""
    if q == "exists" and isinstance(body, M.And):
        head, rest = body.left, body.right
        if isinstance(head, M.ClassAtom) and head.var == var:
            return M.ExistsClass(var, head.cls, rest)
        if isinstance(head, M.RelAtom) and head.right == var and head.left != var:
            return M.ExistsRel(var, head.assoc, head.left, True, rest)
        if isinstance(head, M.RelAtom) and head.left == var and head.right != var:
            return M.ExistsRel(var, head.assoc, head.right, False, rest)
    if q == "forall" and isinstance(body, M.Implies):
        head, rest = body.left, body.right
        if isinstance(head, M.ClassAtom) and head.var == var:
            return M.ForAllClass(var, head.cls, rest)
        if isinstance(head, M.RelAtom) and head.right == var and head.left != var:
            return M.ForAllRel(var, head.assoc, head.left, True, rest)
        if isinstance(head, M.RelAtom) and head.left == var and head.right != var:
            return M.ForAllRel(var, head.assoc, head.right, False, rest)
    return (M.Exists if q == "exists" else M.Forall)(var, body)


# --- well-formedness ---------------------------------------------------------------


def check_monotone(phi: M.Formula):
    """Every fixpoint variable must occur under an even number of negations within its binder."""

    def visit(f, polarity: dict):
        if isinstance(f, M.FixVar):
            if polarity.get(f.name, 0) % 2:
                raise NonMonotoneFixpoint(f"fixpoint variable {f.name} occurs under an odd number of negations")
            return
        if isinstance(f, M.FIXPOINTS):
            inner = dict(polarity)
            inner[f.name] = 0
            visit(f.body, inner)
            return
        if isinstance(f, M.Not):
            visit(f.body, {k: v + 1 for k, v in polarity.items()})
            return
        if isinstance(f, M.Implies):
            visit(f.left, {k: v + 1 for k, v in polarity.items()})
            visit(f.right, polarity)
            return
        for c in f.children():
            visit(c, polarity)

    visit(phi, {})


def check_guards(phi: M.Formula):
    """Explicit modality guards must list exactly the free variables of their body."""
    zvars = M.fixpoint_vars(phi)
    for f in phi.walk():
        if isinstance(f, M.MODALITIES) and f.guard is not None:
            expected = M.free_vars(f.body, zvars)
            if set(f.guard) != expected:
                raise GuardMismatch(f"modality guard ({', '.join(f.guard)}) differs from the free variables "
                                    f"({', '.join(sorted(expected)) or 'none'}) of {f.body}")


def parse_property(text: str, source: str = "<property>") -> M.Formula:
    p = _Parser(text, source)
    phi = p.formula()
    if p.peek() is not None:
        p.error(f"unexpected {p.peek()!r} after the end of the formula")
    check_monotone(phi)
    check_guards(phi)
    return phi
