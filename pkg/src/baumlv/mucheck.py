"""Explicit-state μLp model checking over a grounded transition system.

An extension is a boolean matrix of shape (d**k, S): one row per assignment of
the formula's k free variables (sorted by name) to object indices 0..d-1 and
one column per state.  An assignment is live in a state when all of its
objects exist there.  Modalities transport assignments along the object maps
that the grounder records on every edge.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels
from .errors import NonMonotoneFixpoint, OpenFormula
from .grounder import TransitionSystem
from .mulp import ast as M
from .ocl.evaluate import holds
from .snapshot import Oid

log = logging.getLogger(__name__)


@dataclass
class Counterexample:
    """A lasso: `prefix` leads from the initial state to the loop, which repeats forever."""

    artifact: str
    obj: int  # object index of the witness instance in the first loop state
    prefix: list
    loop: list

    def describe(self, ts: TransitionSystem) -> str:
        lines = [f"instance of {self.artifact} never reaches its terminal state"]
        for s in self.prefix:
            lines.append(f"  s{s}: {ts.states[s].describe()}")
        lines.append("  loop:")
        for s in self.loop:
            lines.append(f"  s{s}: {ts.states[s].describe()}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {"artifact": self.artifact, "object": self.obj, "prefix": self.prefix, "loop": self.loop}


@dataclass
class CheckResult:
    holds: bool
    states: int
    counterexample: Optional[Counterexample] = None
    stats: dict = field(default_factory=dict)

    def __bool__(self):
        return self.holds


class Checker:
    def __init__(self, ts: TransitionSystem):
        self.ts = ts
        self.S = len(ts.states)
        self.d = max(1, ts.max_objects)
        self.offsets, self.dst, self.perm = ts.csr()
        self.sizes = ts.domain_sizes()
        self._mapped: dict = {}
        self._live: dict = {}
        self._atoms: dict = {}
        self.iterations = 0

    # --- assignment plumbing ---------------------------------------------------

    def _digits(self, k: int) -> np.ndarray:
        """(d**k, k) matrix of the object index each assignment gives each variable."""
        if k == 0:
            return np.zeros((1, 0), dtype=np.int64)
        grids = np.indices((self.d,) * k).reshape(k, -1).T
        return grids.astype(np.int64)

    def live(self, k: int) -> np.ndarray:
        hit = self._live.get(k)
        if hit is None:
            digits = self._digits(k)
            top = digits.max(axis=1) if k else np.full(1, -1)
            hit = top[:, None] < self.sizes[None, :]
            self._live[k] = hit
        return hit

    def mapped(self, k: int) -> np.ndarray:
        """(E, d**k): each assignment transported along each edge, -1 if an object vanishes."""
        hit = self._mapped.get(k)
        if hit is None:
            E = self.dst.shape[0]
            if k == 0:
                hit = np.zeros((E, 1), dtype=np.int64)
            else:
                digits = self._digits(k)
                moved = self.perm[:, digits]  # (E, A, k)
                gone = (moved < 0).any(axis=2)
                weights = self.d ** np.arange(k - 1, -1, -1, dtype=np.int64)
                hit = (np.where(moved < 0, 0, moved) * weights).sum(axis=2)
                hit[gone] = -1
            hit = np.ascontiguousarray(hit, dtype=np.int64)
            self._mapped[k] = hit
        return hit

    def lift(self, vars_: tuple, arr: np.ndarray, target: tuple) -> np.ndarray:
        if vars_ == target:
            return arr
        k = len(vars_)
        a = arr.reshape((self.d,) * k + (self.S,))
        missing = [v for v in target if v not in vars_]
        a = a.reshape(a.shape[:k] + (1,) * len(missing) + (self.S,))
        cur = list(vars_) + missing
        order = [cur.index(v) for v in target] + [len(cur)]
        a = np.transpose(a, order)
        a = np.broadcast_to(a, (self.d,) * len(target) + (self.S,))
        return np.ascontiguousarray(a).reshape(self.d ** len(target), self.S)

    def _combine(self, a, b, op):
        (va, xa), (vb, xb) = a, b
        target = tuple(sorted(set(va) | set(vb)))
        return target, op(self.lift(va, xa, target), self.lift(vb, xb, target))

    # --- atoms -----------------------------------------------------------------

    def class_atom(self, cls: str) -> np.ndarray:
        key = ("cls", cls)
        hit = self._atoms.get(key)
        if hit is None:
            cm = self.ts.model.class_model
            hit = np.zeros((self.d, self.S), dtype=bool)
            if cls in cm.by_name:
                for s, conf in enumerate(self.ts.states):
                    for oid, c in conf.snapshot.objects.items():
                        if cm.is_subclass(c, cls):
                            hit[oid.n, s] = True
            self._atoms[key] = hit
        return hit

    def rel_atom(self, assoc: str) -> np.ndarray:
        """(d*d, S) with row x*d+y set when the link assoc(x, y) exists."""
        key = ("rel", assoc)
        hit = self._atoms.get(key)
        if hit is None:
            hit = np.zeros((self.d * self.d, self.S), dtype=bool)
            for s, conf in enumerate(self.ts.states):
                for a, x, y in conf.snapshot.links:
                    if a == assoc:
                        hit[x.n * self.d + y.n, s] = True
            self._atoms[key] = hit
        return hit

    def ocl_atom(self, expr, vars_: tuple) -> np.ndarray:
        digits = self._digits(len(vars_))
        out = np.zeros((digits.shape[0], self.S), dtype=bool)
        live = self.live(len(vars_))
        for s, conf in enumerate(self.ts.states):
            for a in np.nonzero(live[:, s])[0]:
                env = {v: Oid(int(digits[a, i])) for i, v in enumerate(vars_)}
                out[a, s] = holds(expr, conf.snapshot, None, env)
        return out

    # --- evaluation ---------------------------------------------------------------

    def eval(self, f: M.Formula, zenv: dict):
        """(sorted free variables, extension matrix) of `f`."""
        if isinstance(f, M.TrueF):
            return (), np.ones((1, self.S), dtype=bool)
        if isinstance(f, M.FalseF):
            return (), np.zeros((1, self.S), dtype=bool)
        if isinstance(f, M.ClassAtom):
            return (f.var,), self.class_atom(f.cls)
        if isinstance(f, M.Live):
            return (f.var,), self.live(1)
        if isinstance(f, M.RelAtom):
            rel = self.rel_atom(f.assoc)
            if f.left == f.right:
                diag = np.arange(self.d) * (self.d + 1)
                return (f.left,), rel[diag]
            arr = rel
            if f.left > f.right:
                # rows of `rel` are indexed (left, right); reorder to sorted variable order
                arr = np.ascontiguousarray(rel.reshape(self.d, self.d, self.S).transpose(1, 0, 2))
                arr = arr.reshape(self.d * self.d, self.S)
            return tuple(sorted((f.left, f.right))), arr
        if isinstance(f, M.OclAtom):
            vars_ = tuple(sorted(M.free_vars(f)))
            return vars_, self.ocl_atom(f.expr, vars_)
        if isinstance(f, M.FixVar):
            if f.name not in zenv:
                raise OpenFormula(f"fixpoint variable {f.name} is not bound")
            return zenv[f.name]
        if isinstance(f, M.Not):
            v, x = self.eval(f.body, zenv)
            return v, ~x
        if isinstance(f, M.And):
            return self._combine(self.eval(f.left, zenv), self.eval(f.right, zenv), np.logical_and)
        if isinstance(f, M.Or):
            return self._combine(self.eval(f.left, zenv), self.eval(f.right, zenv), np.logical_or)
        if isinstance(f, M.Implies):
            v, x = self.eval(f.left, zenv)
            return self._combine((v, ~x), self.eval(f.right, zenv), np.logical_or)
        if isinstance(f, M.ExistsClass):
            return self.eval(M.Exists(f.var, M.And(M.ClassAtom(f.cls, f.var), f.body)), zenv)
        if isinstance(f, M.ForAllClass):
            return self.eval(M.Forall(f.var, M.Implies(M.ClassAtom(f.cls, f.var), f.body)), zenv)
        if isinstance(f, (M.ExistsRel, M.ForAllRel)):
            atom = M.RelAtom(f.assoc, f.src, f.var) if f.forward else M.RelAtom(f.assoc, f.var, f.src)
            if isinstance(f, M.ExistsRel):
                return self.eval(M.Exists(f.var, M.And(atom, f.body)), zenv)
            return self.eval(M.Forall(f.var, M.Implies(atom, f.body)), zenv)
        if isinstance(f, (M.Exists, M.Forall)):
            return self._quantify(f, zenv)
        if isinstance(f, M.MODALITIES):
            return self._modality(f, zenv)
        if isinstance(f, M.FIXPOINTS):
            return self._fixpoint(f, zenv)
        raise TypeError(f"not a formula: {f!r}")

    def _quantify(self, f, zenv):
        vars_, arr = self.eval(f.body, zenv)
        if f.var not in vars_:
            vars_, arr = tuple(sorted(vars_ + (f.var,))), self.lift(vars_, arr, tuple(sorted(vars_ + (f.var,))))
        k = len(vars_)
        i = vars_.index(f.var)
        a = arr.reshape((self.d,) * k + (self.S,))
        live = np.arange(self.d)[:, None] < self.sizes[None, :]  # (d, S)
        shape = [1] * k + [self.S]
        shape[i] = self.d
        live = live.reshape(shape)
        if isinstance(f, M.Exists):
            res = (a & live).any(axis=i)
        else:
            res = (a | ~live).all(axis=i)
        rest = vars_[:i] + vars_[i + 1:]
        return rest, res.reshape(self.d ** len(rest), self.S)

    def _modality(self, f, zenv):
        vars_, arr = self.eval(f.body, zenv)
        if f.guard is not None:
            target = tuple(sorted(set(f.guard) | set(vars_)))
            arr, vars_ = self.lift(vars_, arr, target), target
        k = len(vars_)
        mapped = self.mapped(k)
        implicative = f.polarity == M.IMPLICATIVE
        X = np.ascontiguousarray(arr)
        if isinstance(f, M.Diamond):
            Y = kernels.pre_exists(self.offsets, self.dst, mapped, X, implicative)
        else:
            Y = kernels.pre_forall(self.offsets, self.dst, mapped, X, implicative)
        live = self.live(k)
        Y = (Y | ~live) if implicative else (Y & live)
        return vars_, Y

    def _fixpoint(self, f, zenv):
        zvars = {k: v[0] for k, v in zenv.items()}
        vars_ = tuple(sorted(M.free_vars(f.body, zvars, skip=f.name)))
        A = self.d ** len(vars_)
        least = isinstance(f, M.Mu)
        cur = np.zeros((A, self.S), dtype=bool) if least else np.ones((A, self.S), dtype=bool)
        limit = A * self.S + 2
        for _ in range(limit):
            self.iterations += 1
            inner = dict(zenv)
            inner[f.name] = (vars_, cur)
            v, nxt = self.eval(f.body, inner)
            nxt = self.lift(v, nxt, vars_)
            if np.array_equal(nxt, cur):
                return vars_, cur
            grows = not (cur & ~nxt).any()
            shrinks = not (nxt & ~cur).any()
            if (least and not grows) or (not least and not shrinks):
                raise NonMonotoneFixpoint(f"approximants of {f.name} are not monotone")
            cur = nxt
        raise NonMonotoneFixpoint(f"fixpoint {f.name} did not converge in {limit} iterations")


def evaluate(ts: TransitionSystem, phi: M.Formula):
    """(free variables, extension) of `phi` over `ts`."""
    return Checker(ts).eval(phi, {})


def check(ts: TransitionSystem, phi: M.Formula, counterexample: bool = True) -> CheckResult:
    """Whether the closed formula `phi` holds in the initial state of `ts`."""
    free = M.free_vars(phi)
    if free:
        raise OpenFormula(f"property has free variables: {', '.join(sorted(free))}")
    checker = Checker(ts)
    _, arr = checker.eval(phi, {})
    ok = bool(arr[0, ts.initial])
    cex = None
    if not ok and counterexample:
        cex = termination_counterexample(ts, phi, checker)
    return CheckResult(ok, len(ts.states), cex,
                       {"iterations": checker.iterations, "backend": kernels.BACKEND, "domain": checker.d})


# --- counterexamples ---------------------------------------------------------------


def _bfs_parents(ts: TransitionSystem):
    offsets, dst, _ = ts.csr()
    parent = {ts.initial: None}
    queue = deque([ts.initial])
    while queue:
        s = queue.popleft()
        for t in dst[offsets[s]:offsets[s + 1]]:
            t = int(t)
            if t not in parent:
                parent[t] = s
                queue.append(t)
    return parent


def _path_to(parent, s) -> list:
    out = []
    while s is not None:
        out.append(s)
        s = parent[s]
    return out[::-1]


def termination_counterexample(ts: TransitionSystem, phi: M.Formula, checker: Optional[Checker] = None):
    """A lasso for a violated termination-shaped property, or None for other shapes.

    The violated conjunct ∀x. A(x) → Ψ(x) yields a reachable state and an instance
    for which Ψ fails; since Ψ only uses existential steps, every continuation
    from there is a witness, and the first edge out of each state is followed
    (tracking the instance) until a state repeats.
    """
    checker = checker or Checker(ts)
    body = phi.body if isinstance(phi, M.Nu) else phi
    conjuncts = []

    def collect(f):
        if isinstance(f, M.And):
            collect(f.left)
            collect(f.right)
        elif isinstance(f, M.ForAllClass):
            conjuncts.append(f)

    collect(body)
    if not conjuncts:
        return None
    parent = _bfs_parents(ts)
    offsets, dst, perm = checker.offsets, checker.dst, checker.perm
    for q in conjuncts:
        vars_, arr = checker.eval(M.Implies(M.ClassAtom(q.cls, q.var), q.body), {})
        if vars_ != (q.var,):
            continue
        for s in sorted(parent):
            bad = np.nonzero(~arr[:, s] & (np.arange(checker.d) < checker.sizes[s]))[0]
            if len(bad) == 0:
                continue
            obj = int(bad[0])
            prefix = _path_to(parent, s)
            seen = {}
            walk = []
            cur, o = s, obj
            while (cur, o) not in seen:
                seen[(cur, o)] = len(walk)
                walk.append(cur)
                e = int(offsets[cur])
                o = int(perm[e, o]) if o >= 0 else -1
                cur = int(dst[e])
            start = seen[(cur, o)]
            loop = walk[start:]
            return Counterexample(q.cls, obj, prefix[:-1] + walk[:start], loop)
    return None


# --- reachability oracle ------------------------------------------------------------


def check_reachability_oracle(ts: TransitionSystem, goal: Callable) -> bool:
    """Plain graph search: is a configuration satisfying `goal` reachable from the initial state?"""
    offsets, dst, _ = ts.csr()
    mask = kernels.reachable(offsets, dst, ts.initial)
    return any(goal(ts.states[i]) for i in np.nonzero(mask)[0])


# --- plain Kripke structures ----------------------------------------------------------


def kripke_system(n: int, edges, labels: dict, initial: int = 0, props=()) -> TransitionSystem:
    """A transition system over `n` states whose propositions are unary classes.

    A state labelled `p` holds one object of class `p`, so `exists x: p. true`
    reads "p holds here".  States without successors get a self-loop and are
    flagged as deadlocks, as in grounded systems.  `props` declares extra
    propositions that may label no state.
    """
    from .grounder import Configuration
    from .model.types import BaumlModel, ClassDecl, ClassModel
    from .snapshot import Snapshot

    props = sorted({p for ps in labels.values() for p in ps} | set(props))
    cm = ClassModel(classes=tuple(ClassDecl(p) for p in props))
    model = BaumlModel(class_model=cm)
    states, index = [], []
    for s in range(n):
        present = sorted(labels.get(s, ()))
        index.append({p: i for i, p in enumerate(present)})
        snap = Snapshot(cm, {Oid(i): p for i, p in enumerate(present)}, {}, ())
        states.append(Configuration(snap, (), (s,)))
    out_edges, perms = [], []
    has_succ = set()
    for s, t in sorted(set(edges)):
        out_edges.append((s, t))
        perms.append(tuple(index[t].get(p, -1) for p in sorted(index[s], key=index[s].get)))
        has_succ.add(s)
    deadlocks = set()
    for s in range(n):
        if s not in has_succ:
            deadlocks.add(s)
            out_edges.append((s, s))
            perms.append(tuple(range(len(index[s]))))
    return TransitionSystem(model, states, initial, out_edges, perms, deadlocks, {"kripke": True})
