"""Normal forms, the pseudo-navigational fragment, compatibility, and the termination property."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..errors import MissingTerminalState, NoClassQuantifier
from ..model.types import BaumlModel
from . import ast as M


# --- rewriting -------------------------------------------------------------------------


def expand_abbreviations(phi: M.Formula) -> M.Formula:
    """Rewrite into the core connectives ¬, ∧, ⟨·⟩, μ and ∃ only."""

    def ex(f, flipped=frozenset()):
        if isinstance(f, M.FixVar):
            return M.Not(f) if f.name in flipped else f
        if isinstance(f, (M.TrueF, M.FalseF, M.ClassAtom, M.RelAtom, M.OclAtom, M.Live)):
            return f
        if isinstance(f, M.Not):
            return M.Not(ex(f.body, flipped))
        if isinstance(f, M.And):
            return M.And(ex(f.left, flipped), ex(f.right, flipped))
        if isinstance(f, M.Or):
            return M.Not(M.And(M.Not(ex(f.left, flipped)), M.Not(ex(f.right, flipped))))
        if isinstance(f, M.Implies):
            return M.Not(M.And(ex(f.left, flipped), M.Not(ex(f.right, flipped))))
        if isinstance(f, M.Diamond):
            return M.Diamond(ex(f.body, flipped), f.polarity, f.guard)
        if isinstance(f, M.Box):
            dual = M.CONJUNCTIVE if f.polarity == M.IMPLICATIVE else M.IMPLICATIVE
            return M.Not(M.Diamond(M.Not(ex(f.body, flipped)), dual, f.guard))
        if isinstance(f, M.Mu):
            return M.Mu(f.name, ex(f.body, flipped - {f.name}))
        if isinstance(f, M.Nu):
            return M.Not(M.Mu(f.name, M.Not(ex(f.body, flipped | {f.name}))))
        if isinstance(f, M.Exists):
            return M.Exists(f.var, ex(f.body, flipped))
        if isinstance(f, M.Forall):
            return M.Not(M.Exists(f.var, M.Not(ex(f.body, flipped))))
        if isinstance(f, M.ExistsClass):
            return M.Exists(f.var, M.And(M.ClassAtom(f.cls, f.var), ex(f.body, flipped)))
        if isinstance(f, M.ForAllClass):
            return ex(M.Forall(f.var, M.Implies(M.ClassAtom(f.cls, f.var), f.body)), flipped)
        if isinstance(f, (M.ExistsRel, M.ForAllRel)):
            atom = M.RelAtom(f.assoc, f.src, f.var) if f.forward else M.RelAtom(f.assoc, f.var, f.src)
            if isinstance(f, M.ExistsRel):
                return M.Exists(f.var, M.And(atom, ex(f.body, flipped)))
            return ex(M.Forall(f.var, M.Implies(atom, f.body)), flipped)
        raise TypeError(f"not a formula: {f!r}")

    return ex(phi)


def to_nnf(phi: M.Formula) -> M.Formula:
    """Push negations down to atoms (class atoms, relation atoms, OCL atoms, live)."""

    def nnf(f, neg: bool, flipped: frozenset):
        if isinstance(f, M.FixVar):
            # a flipped variable stands for ¬Z, so the two negations cancel
            return M.Not(f) if neg != (f.name in flipped) else f
        if isinstance(f, M.TrueF):
            return M.FALSE if neg else f
        if isinstance(f, M.FalseF):
            return M.TRUE if neg else f
        if isinstance(f, (M.ClassAtom, M.RelAtom, M.OclAtom, M.Live)):
            return M.Not(f) if neg else f
        if isinstance(f, M.Not):
            return nnf(f.body, not neg, flipped)
        if isinstance(f, M.And):
            op = M.Or if neg else M.And
            return op(nnf(f.left, neg, flipped), nnf(f.right, neg, flipped))
        if isinstance(f, M.Or):
            op = M.And if neg else M.Or
            return op(nnf(f.left, neg, flipped), nnf(f.right, neg, flipped))
        if isinstance(f, M.Implies):
            op = M.And if neg else M.Or
            return op(nnf(f.left, not neg, flipped), nnf(f.right, neg, flipped))
        if isinstance(f, M.Diamond):
            if neg:
                dual = M.IMPLICATIVE if f.polarity == M.CONJUNCTIVE else M.CONJUNCTIVE
                return M.Box(nnf(f.body, True, flipped), dual, f.guard)
            return M.Diamond(nnf(f.body, False, flipped), f.polarity, f.guard)
        if isinstance(f, M.Box):
            if neg:
                dual = M.CONJUNCTIVE if f.polarity == M.IMPLICATIVE else M.IMPLICATIVE
                return M.Diamond(nnf(f.body, True, flipped), dual, f.guard)
            return M.Box(nnf(f.body, False, flipped), f.polarity, f.guard)
        if isinstance(f, M.FIXPOINTS):
            inner = (flipped | {f.name}) if neg else (flipped - {f.name})
            is_mu = isinstance(f, M.Mu) != neg
            return (M.Mu if is_mu else M.Nu)(f.name, nnf(f.body, neg, inner))
        if isinstance(f, (M.Exists, M.Forall)):
            is_ex = isinstance(f, M.Exists) != neg
            return (M.Exists if is_ex else M.Forall)(f.var, nnf(f.body, neg, flipped))
        if isinstance(f, (M.ExistsClass, M.ForAllClass)):
            is_ex = isinstance(f, M.ExistsClass) != neg
            return (M.ExistsClass if is_ex else M.ForAllClass)(f.var, f.cls, nnf(f.body, neg, flipped))
        if isinstance(f, (M.ExistsRel, M.ForAllRel)):
            is_ex = isinstance(f, M.ExistsRel) != neg
            return (M.ExistsRel if is_ex else M.ForAllRel)(f.var, f.assoc, f.src, f.forward,
                                                           nnf(f.body, neg, flipped))
        raise TypeError(f"not a formula: {f!r}")

    return nnf(phi, False, frozenset())


def negate(phi: M.Formula) -> M.Formula:
    return to_nnf(M.Not(phi))


# --- the pseudo-navigational fragment ----------------------------------------------------


@dataclass
class FragmentResult:
    ok: bool
    witness: Optional[M.Formula] = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def _guarded_modality(f: M.Formula):
    """(class, var, modality) for A(x) ∧ ⟨Φ⟩, A(x) → [Φ], ¬A(x) ∨ [Φ] and the other guarded shapes."""
    if isinstance(f, M.And) and isinstance(f.left, M.ClassAtom) and isinstance(f.right, M.MODALITIES):
        return f.left.cls, f.left.var, f.right
    if isinstance(f, M.Implies) and isinstance(f.left, M.ClassAtom) and isinstance(f.right, M.MODALITIES):
        return f.left.cls, f.left.var, f.right
    if (isinstance(f, M.Or) and isinstance(f.left, M.Not) and isinstance(f.left.body, M.ClassAtom)
            and isinstance(f.right, M.MODALITIES)):
        return f.left.body.cls, f.left.body.var, f.right
    return None


def is_pseudo_navigational(phi: M.Formula) -> FragmentResult:
    """Membership in the navigation-guarded fragment (in negation normal form).

    Besides the class-guarded modalities, a modality over a closed body that is
    a ν-bound variable is admitted: this is the `... ∧ [Z]` skeleton of the
    termination property.
    """
    zvars = M.fixpoint_vars(phi)

    def bad(f, why):
        return FragmentResult(False, f, why)

    def visit(f, nu_bound: frozenset) -> FragmentResult:
        if isinstance(f, (M.TrueF, M.FalseF, M.ClassAtom, M.FixVar)):
            return FragmentResult(True)
        if isinstance(f, M.Not):
            if isinstance(f.body, M.ClassAtom):
                return FragmentResult(True)
            return bad(f, "negation applied to something other than a class atom")
        if isinstance(f, (M.RelAtom, M.OclAtom, M.Live)):
            return bad(f, "only class atoms may appear outside quantifier guards")
        guarded = _guarded_modality(f)
        if guarded is not None:
            cls, var, mod = guarded
            if M.free_vars(mod.body, zvars) != {var}:
                return bad(f, f"the guarded modality must have {var} as the single free variable of its body")
            return visit(mod.body, nu_bound)
        if isinstance(f, M.Implies):
            return bad(f, "implication outside a guarded quantifier or modality")
        if isinstance(f, (M.And, M.Or)):
            r = visit(f.left, nu_bound)
            return r if not r else visit(f.right, nu_bound)
        if isinstance(f, M.MODALITIES):
            if isinstance(f.body, M.FixVar) and f.body.name in nu_bound and not M.free_vars(f.body, zvars):
                return FragmentResult(True)
            return bad(f, "modality not guarded by a class atom")
        if isinstance(f, M.Mu):
            return visit(f.body, nu_bound - {f.name})
        if isinstance(f, M.Nu):
            return visit(f.body, nu_bound | {f.name})
        if isinstance(f, (M.ExistsClass, M.ForAllClass, M.ExistsRel, M.ForAllRel)):
            return visit(f.body, nu_bound)
        if isinstance(f, (M.Exists, M.Forall)):
            return bad(f, "quantifier not guarded by a class or an association")
        return bad(f, "unsupported construct")

    return visit(phi, frozenset())


# --- compatibility ------------------------------------------------------------------------


@dataclass
class CompatibilityResult:
    compatible: bool
    trace: list = field(default_factory=list)  # (rule, subformula text, outcome)

    def __bool__(self):
        return self.compatible

    def replay(self) -> bool:
        """The verdict recomputed from the trace: the outcome of the first (outermost) step."""
        return self.trace[0][2] if self.trace else True


def comp(cls: str, var: str, phi: M.Formula, model: BaumlModel, roles) -> CompatibilityResult:
    """The compatibility relation between a class/variable pair and a pseudo-navigational formula."""
    cm = model.class_model
    trace: list = []

    def related(a, b):
        return a in cm.by_name and b in cm.by_name and cm.same_hierarchy(a, b)

    def is_target(assoc, forward):
        return any(r.assoc == assoc and r.forward == forward for r in roles.target)

    def go(c, x, f) -> bool:
        slot = len(trace)
        trace.append(None)
        guarded = _guarded_modality(f)
        if isinstance(f, (M.TrueF, M.FalseF, M.FixVar)):
            rule, ok = 1, True
        elif isinstance(f, M.ClassAtom) or (isinstance(f, M.Not) and isinstance(f.body, M.ClassAtom)):
            atom = f if isinstance(f, M.ClassAtom) else f.body
            rule, ok = 2, related(c, atom.cls)
        elif guarded is not None:
            a, _, mod = guarded
            rule = 8
            ok = related(c, a) and go(c, x, mod.body)
        elif isinstance(f, (M.And, M.Or)):
            rule = 3
            ok = go(c, x, f.left) and go(c, x, f.right)
        elif isinstance(f, M.FIXPOINTS):
            rule = 4
            ok = go(c, x, f.body)
        elif isinstance(f, (M.ExistsClass, M.ForAllClass)):
            rule, ok = 5, False
        elif isinstance(f, (M.ExistsRel, M.ForAllRel)):
            a = cm.assoc_by_name.get(f.assoc)
            if a is None:
                rule, ok = (6 if f.forward else 7), False
            elif f.forward:
                rule = 6
                ok = is_target(f.assoc, True) and related(c, a.domain_class) and go(a.image_class, f.var, f.body)
            else:
                rule = 7
                ok = is_target(f.assoc, False) and related(c, a.image_class) and go(a.domain_class, f.var, f.body)
        elif isinstance(f, M.MODALITIES):
            # closed ν-skeleton modalities carry no navigation
            rule = 8
            ok = go(c, x, f.body)
        else:
            rule, ok = 0, False
        trace[slot] = (rule, str(f), ok)
        return ok

    ok = go(cls, var, phi)
    return CompatibilityResult(ok, trace)


@dataclass
class NavCompatibility:
    compatible: bool
    anchor: Optional[str]
    anchors: list = field(default_factory=list)
    results: list = field(default_factory=list)  # CompatibilityResult per anchored subformula
    reason: str = ""

    def __bool__(self):
        return self.compatible


def class_quantified_roots(phi: M.Formula) -> list:
    """Outermost subformulas of the shape ∃x. A(x) ∧ Ψ or ∀x. A(x) → Ψ."""
    out = []

    def visit(f):
        if isinstance(f, (M.ExistsClass, M.ForAllClass)):
            out.append(f)
            return
        for c in f.children():
            visit(c)

    visit(phi)
    return out


def navigationally_compatible(phi: M.Formula, model: BaumlModel, roles=None) -> NavCompatibility:
    """Whether a closed pseudo-navigational property only navigates as the model does.

    Every outermost class-quantified subformula must be anchored at an artifact
    class and be compatible with its anchor; the anchor of the first is returned.
    """
    from ..analysis import classify_roles

    if roles is None:
        roles = classify_roles(model)
    roots = class_quantified_roots(phi)
    if not roots:
        raise NoClassQuantifier(f"{phi} has no subformula of the form exists x: A. ... or forall x: A. ...")
    artcl = model.class_model.artcl()
    anchors, results = [], []
    for r in roots:
        anchors.append(r.cls)
        if r.cls not in artcl:
            return NavCompatibility(False, roots[0].cls, anchors, results, f"{r.cls} is not an artifact class")
        res = comp(r.cls, r.var, r.body, model, roles)
        results.append(res)
        if not res:
            return NavCompatibility(False, roots[0].cls, anchors, results,
                                    f"{r.cls}/{r.var} is not compatible with {r.body}")
    return NavCompatibility(True, roots[0].cls, anchors, results)


# --- artifact termination ---------------------------------------------------------------


def termination_property(model: BaumlModel) -> M.Formula:
    """νZ. (⋀_A ∀x. A(x) → μY. tstate(A)(x) ∨ (A(x) ∧ ⟨Y⟩)) ∧ [Z] over the model's artifacts."""
    cm = model.class_model
    conjuncts = []
    for art in cm.artifacts:
        term = cm.tstate(art)
        if term is None:
            raise MissingTerminalState(f"artifact {art} has no unique terminal state")
        y = "Y" if len(cm.artifacts) == 1 else f"Y{len(conjuncts) + 1}"
        body = M.Mu(y, M.Or(M.ClassAtom(term, "x"), M.And(M.ClassAtom(art, "x"), M.Diamond(M.FixVar(y)))))
        conjuncts.append(M.ForAllClass("x", art, body))
    return M.Nu("Z", M.And(M.conjoin(conjuncts), M.Box(M.FixVar("Z"))))
