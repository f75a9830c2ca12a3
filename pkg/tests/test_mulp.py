from dataclasses import replace

import pytest

from baumlv.errors import (
    DslSyntaxError, GuardMismatch, MissingTerminalState, NoClassQuantifier, NonMonotoneFixpoint,
)
from baumlv.model import parse_model_unchecked
from baumlv.mulp import (
    ast as M, expand_abbreviations, is_pseudo_navigational, navigationally_compatible, negate,
    parse_property, termination_property, to_nnf,
)
from baumlv.twocm import desk_suite, encode

from conftest import CORPUS

x, y = "x", "y"
A, B = M.ClassAtom("A", x), M.ClassAtom("B", x)


class TestParser:
    def test_precedence(self):
        f = parse_property(r"A(x) /\ B(x) \/ C(x) -> D(x)")
        assert f == M.Implies(M.Or(M.And(A, B), M.ClassAtom("C", x)), M.ClassAtom("D", x))

    def test_right_associative(self):
        f = parse_property(r"A(x) /\ B(x) /\ C(x)")
        assert f == M.And(A, M.And(B, M.ClassAtom("C", x)))
        assert parse_property("A(x) -> B(x) -> C(x)") == M.Implies(A, M.Implies(B, M.ClassAtom("C", x)))

    def test_binder_extends_right(self):
        f = parse_property(r"mu Y. A(x) \/ <> Y")
        assert f == M.Mu("Y", M.Or(A, M.Diamond(M.FixVar("Y"))))

    def test_unicode(self):
        f = parse_property("∀x. A(x) → μY. B(x) ∨ (A(x) ∧ ⟨⟩Y)")
        assert str(f) == r"forall x: A. mu Y. B(x) \/ A(x) /\ <> Y"
        assert parse_property("¬A(x)") == parse_property("!A(x)") == parse_property("not A(x)")

    def test_quantifier_normalization(self):
        assert parse_property("exists x. A(x) /\\ true") == M.ExistsClass(x, "A", M.TRUE)
        assert parse_property("forall y. R(x, y) -> true") == M.ForAllRel(y, "R", x, True, M.TRUE)
        assert parse_property("exists y. R(y, x) /\\ true") == M.ExistsRel(y, "R", x, False, M.TRUE)
        assert parse_property("exists x. true") == M.Exists(x, M.TRUE)

    def test_relational_guards(self):
        assert parse_property("exists y: R(x,.). B(y)") == M.ExistsRel(y, "R", x, True, M.ClassAtom("B", y))
        assert parse_property("forall y: R(.,x). B(y)") == M.ForAllRel(y, "R", x, False, M.ClassAtom("B", y))

    def test_guards_and_polarity(self):
        f = parse_property("<x>? A(x)")
        assert f == M.Diamond(A, M.IMPLICATIVE, ("x",))
        g = parse_property("[]? true")
        assert g == M.Box(M.TRUE, M.CONJUNCTIVE)

    def test_ocl_block(self):
        f = parse_property('{ x.id = "a}b" }')
        assert isinstance(f, M.OclAtom)
        assert M.free_vars(f) == {"x"}

    def test_live_and_comments(self):
        assert parse_property("live(x)  # the object exists\n") == M.Live(x)

    @pytest.mark.parametrize("text", [
        r"A(x) /\ ", "Y", "R(x, y, z)", "(A(x)", "{ x.id = ", "A(x) B(x)", "mu . A(x)", "A(x) @",
    ])
    def test_syntax_errors(self, text):
        with pytest.raises(DslSyntaxError):
            parse_property(text)

    def test_non_monotone(self):
        with pytest.raises(NonMonotoneFixpoint):
            parse_property("mu Y. ~Y")
        with pytest.raises(NonMonotoneFixpoint):
            parse_property("nu Y. Y -> A(x)")
        parse_property("mu Y. ~~Y")

    def test_guard_mismatch(self):
        with pytest.raises(GuardMismatch):
            parse_property("<x,y> A(x)")
        parse_property("<x> A(x)")

    @pytest.mark.parametrize("text", [
        r"nu Z. ((forall x: Order. mu Y1. SentOrder(x) \/ Order(x) /\ <> Y1)) /\ [] Z",
        r"exists x: A. [x]? (B(x) -> ~C(x))",
        r"forall y: R(.,x). { y.flag = true } \/ live(y)",
        r"~(A(x) \/ B(x)) /\ <> (mu Y. A(x) \/ <> Y)",
        r"2CM(x) -> <> HaltedCM(x)",
    ])
    def test_round_trip(self, text):
        f = parse_property(text)
        assert parse_property(str(f)) == f


class TestVariables:
    def test_free_vars(self):
        f = parse_property(r"exists y: R(x,.). B(y) /\ C(z)")
        assert M.free_vars(f) == {"x", "z"}
        assert M.is_closed(parse_property("forall x: A. B(x)"))

    def test_fixpoint_contributes_binder_vars(self):
        f = parse_property(r"mu Y. A(x) \/ <> Y")
        assert M.fixpoint_vars(f) == {"Y": ("x",)}
        assert M.free_vars(f) == {"x"}


class TestNormalForms:
    def test_nnf_pushes_negation(self):
        f = to_nnf(parse_property(r"~(A(x) /\ <> B(x))"))
        assert f == M.Or(M.Not(A), M.Box(M.Not(B), M.IMPLICATIVE))

    def test_nnf_dualizes_fixpoints(self):
        f = negate(parse_property(r"mu Y. A(x) \/ <> Y"))
        assert f == M.Nu("Y", M.And(M.Not(A), M.Box(M.FixVar("Y"), M.IMPLICATIVE)))

    def test_nnf_quantifiers(self):
        f = negate(parse_property("exists x: A. B(x)"))
        assert f == M.ForAllClass(x, "A", M.Not(B))

    def test_expand_core_connectives(self):
        core = expand_abbreviations(parse_property(r"nu Z. forall x: A. [] Z \/ B(x)"))
        allowed = (M.Not, M.And, M.Diamond, M.Mu, M.Exists, M.ClassAtom, M.FixVar, M.TrueF, M.FalseF)
        assert all(isinstance(f, allowed) for f in core.walk())


class TestFragment:
    @pytest.mark.parametrize("text", [
        r"forall x: Order. mu Y. SentOrder(x) \/ Order(x) /\ <> Y",
        r"exists x: A. A(x) -> [] B(x)",
        r"exists x: A. ~A(x) \/ [] ~B(x)",
        r"nu Z. (forall x: A. B(x)) /\ [] Z",
        r"exists x: A. exists y: R(x,.). B(y)",
    ])
    def test_members(self, text):
        assert is_pseudo_navigational(parse_property(text)).ok

    @pytest.mark.parametrize("text,why", [
        ("mu Z. <> Z", "modality"),
        (r"exists x: A. <> B(x)", "modality"),
        (r"exists x: A. ~<> B(x)", "negation"),
        (r"exists x: A. { x.id = x.id }", "class atoms"),
        (r"exists x: A. exists y: B. A(x) /\ <> (B(x) /\ B(y))", "single free variable"),
    ])
    def test_non_members(self, text, why):
        res = is_pseudo_navigational(parse_property(text))
        assert not res.ok and why in res.reason and res.witness is not None


class TestTermination:
    def test_single_artifact(self, shop_min):
        assert str(termination_property(shop_min)) == (
            r"nu Z. (forall x: Order. mu Y. SentOrder(x) \/ Order(x) /\ <> Y) /\ [] Z")

    def test_encodings_are_compatible(self):
        m = desk_suite().halting["inc-dec"]
        for table in (1, 2, 3, 4):
            model = encode(m, table)
            phi = termination_property(model)
            assert is_pseudo_navigational(phi).ok
            assert navigationally_compatible(phi, model).compatible

    def test_missing_terminal(self):
        text = (CORPUS / "shop_min.bauml").read_text().replace(" [terminal]", "")
        model, _ = parse_model_unchecked(text)
        with pytest.raises(MissingTerminalState):
            termination_property(model)

    def test_no_class_quantifier(self, shop):
        with pytest.raises(NoClassQuantifier):
            navigationally_compatible(parse_property("mu Y. true"), shop)

    def test_anchor_must_be_artifact(self, shop):
        res = navigationally_compatible(parse_property("forall x: ItemType. ItemType(x)"), shop)
        assert not res.compatible and "not an artifact" in res.reason

    def test_incompatible_reports_anchor(self, shop):
        res = navigationally_compatible(parse_property("forall x: Order. exists y: requests(x,.). true"), shop)
        assert not res.compatible and res.anchor == "Order"

    def test_nu_body_shape(self, shop):
        phi = termination_property(shop)
        assert isinstance(phi, M.Nu) and isinstance(phi.body.right, M.Box)
        assert replace(phi.body.right, polarity=M.IMPLICATIVE) == phi.body.right
