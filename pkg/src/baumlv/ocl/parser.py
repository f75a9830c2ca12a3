"""Recursive-descent parser for the OCL subset (grammar in docs/ocl.ebnf)."""

from __future__ import annotations

import re

from ..errors import DslSyntaxError
from . import ast as A

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<arrow>->)
  | (?P<neq><>)
  | (?P<atpre>@pre)
  | (?P<ident>[0-9]*[A-Za-z_][A-Za-z0-9_]*'*)
  | (?P<punct>[().,|=])
    """,
    re.VERBOSE,
)

KEYWORDS = {"and", "or", "not", "implies", "let", "in", "true", "false"}


def tokenize(text: str, line: int | None = None, source: str = "<ocl>"):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[pos]!r} in OCL", line, pos + 1, source)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "ident" and value in KEYWORDS:
                kind = value
            out.append((kind, value, pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, line, source):
        self.text = text
        self.line = line
        self.source = source
        self.toks = tokenize(text, line, source)
        self.i = 0

    def peek(self, offset=0):
        return self.toks[min(self.i + offset, len(self.toks) - 1)]

    def error(self, message):
        _, value, pos = self.peek()
        found = value or "end of expression"
        raise DslSyntaxError(f"{message} (found {found!r})", self.line, pos + 1, self.source)

    def accept(self, kind, value=None):
        tok = self.peek()
        if tok[0] == kind and (value is None or tok[1] == value):
            self.i += 1
            return tok
        return None

    def expect(self, kind, value=None):
        tok = self.accept(kind, value)
        if tok is None:
            self.error(f"expected {value or kind}")
        return tok

    def parse(self):
        expr = self.expression()
        if self.peek()[0] != "eof":
            self.error("unexpected trailing input")
        return expr

    def expression(self):
        if self.accept("let"):
            bindings = [self.binding()]
            while self.accept("punct", ","):
                bindings.append(self.binding())
            self.expect("in")
            body = self.expression()
            for name, definition in reversed(bindings):
                body = A.Let(name, definition, body)
            return body
        return self.implies()

    def binding(self):
        name = self.expect("ident")[1]
        self.expect("punct", "=")
        return name, self.implies()

    def implies(self):
        left = self.disjunction()
        while self.accept("implies"):
            left = A.Implies(left, self.disjunction())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.accept("or"):
            left = A.Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.negation()
        while self.accept("and"):
            left = A.And(left, self.negation())
        return left

    def negation(self):
        if self.accept("not"):
            return A.Not(self.negation())
        return self.comparison()

    def comparison(self):
        left = self.postfix()
        if self.accept("punct", "="):
            return A.Eq(left, self.postfix())
        if self.accept("neq"):
            return A.Neq(left, self.postfix())
        return left

    def primary(self):
        tok = self.peek()
        if self.accept("true"):
            return A.Const(True)
        if self.accept("false"):
            return A.Const(False)
        if tok[0] == "string":
            self.i += 1
            return A.Const(re.sub(r"\\(.)", r"\1", tok[1][1:-1]))
        if tok[0] == "ident":
            self.i += 1
            return A.Var(tok[1])
        if self.accept("punct", "("):
            inner = self.expression()
            self.expect("punct", ")")
            return inner
        if tok[0] == "let":
            return self.expression()
        self.error("expected an expression")

    def postfix(self):
        expr = self.primary()
        while True:
            if self.accept("punct", "."):
                expr = self.dot_step(expr)
            elif self.accept("arrow"):
                expr = self.arrow_step(expr)
            else:
                return expr

    def dot_step(self, base):
        name = self.expect("ident")[1]
        if self.peek()[:2] == ("punct", "("):
            return self.call(base, name)
        at_pre = bool(self.accept("atpre"))
        return A.Nav(base, name, at_pre)

    def arrow_step(self, base):
        name = self.expect("ident")[1]
        return self.call(base, name)

    def call(self, base, name):
        self.expect("punct", "(")
        if name == "allInstances":
            self.expect("punct", ")")
            if not isinstance(base, A.Var):
                self.error("allInstances() needs a class name")
            return A.AllInstances(base.name)
        if name in A.ITERATORS:
            var = self.expect("ident")[1]
            self.expect("punct", "|")
            body = self.expression()
            self.expect("punct", ")")
            return A.Iterate(name, base, var, body)
        if name in ("oclIsTypeOf", "oclAsType"):
            cls = self.expect("ident")[1]
            self.expect("punct", ")")
            node = A.OclIsTypeOf if name == "oclIsTypeOf" else A.OclAsType
            return node(base, cls)
        if name in ("includes", "excludes"):
            item = self.expression()
            self.expect("punct", ")")
            return (A.Includes if name == "includes" else A.Excludes)(base, item)
        nullary = {
            "isEmpty": A.IsEmpty,
            "notEmpty": A.NotEmpty,
            "oclIsNew": A.OclIsNew,
            "first": A.First,
            "asOrderedSet": A.AsOrderedSet,
        }
        if name in nullary:
            self.expect("punct", ")")
            return nullary[name](base)
        self.i -= 2
        self.error(f"unsupported OCL operation {name!r}")


def parse_ocl(text: str, line: int | None = None, source: str = "<ocl>") -> A.Expr:
    """Parse an OCL-subset expression; raises `DslSyntaxError` with position."""
    return _Parser(text, line, source).parse()
