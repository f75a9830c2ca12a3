import pytest

from baumlv.errors import (
    DslSyntaxError, PreSnapshotMissing, UnboundVariable, UnknownClass, UnsupportedPostcondition,
)
from baumlv.grounder import Grounder
from baumlv.ocl import (
    apply_effects, ast as A, eval_query, holds, parse_ocl, postcondition_holds, to_effect_normal_form,
    to_text,
)
from baumlv.ocl.effects import Create, Delete, Include, Retype
from baumlv.snapshot import Oid, Workspace


@pytest.fixture(scope="module")
def db(shop):
    return Grounder(shop).initial_snapshot()


def contract(model, name):
    return {c.name: c for c in model.contracts}[name]


class TestParser:
    @pytest.mark.parametrize("text", [
        "not RequestedOrder.allInstances()->exists(ro | ro.id = orderId)",
        "o.itemType->forAll(it | it.item->exists(i | i.sentOrder->isEmpty()))",
        "let n = x.c@pre in x.c = n",
        "a implies b or c and not d",
        'x.name <> "a \\"quoted\\" b"',
        "o.oclAsType(SentOrder).sentDate = date",
        "Item.allInstances()->select(i | i.lastR)->asOrderedSet()->first()",
        "s->select(v | v.flag).next->notEmpty()",
        "x.r->includes(y) and x.r->excludes(z)",
    ])
    def test_round_trip(self, text):
        expr = parse_ocl(text)
        assert parse_ocl(to_text(expr)) == expr

    def test_precedence(self):
        e = parse_ocl("a or b and c implies d")
        assert isinstance(e, A.Implies)
        assert isinstance(e.left, A.Or) and isinstance(e.left.right, A.And)

    def test_not_binds_tighter_than_and(self):
        e = parse_ocl("not a and b")
        assert isinstance(e, A.And) and isinstance(e.left, A.Not)

    def test_primed_names(self):
        e = parse_ocl("m'.pc = m''")
        assert A.free_vars(e) == {"m'", "m''"}

    def test_at_pre(self):
        e = parse_ocl("x.c@pre")
        assert isinstance(e, A.Nav) and e.at_pre

    @pytest.mark.parametrize("text", ["a and", "x->frobnicate()", "(a", "a $ b", "x.", "let in a"])
    def test_errors(self, text):
        with pytest.raises(DslSyntaxError):
            parse_ocl(text)

    def test_error_column(self):
        with pytest.raises(DslSyntaxError) as exc:
            parse_ocl("a and $", line=7, source="m.bauml")
        assert exc.value.line == 7 and exc.value.column == 7

    def test_free_vars_respects_binders(self):
        e = parse_ocl("s->exists(v | v.r = w) and let n = v in n = u")
        assert A.free_vars(e) == {"s", "w", "v", "u"}


class TestEvaluate:
    def test_all_instances(self, db):
        assert len(eval_query(parse_ocl("ItemType.allInstances()"), db)) == 2

    def test_navigation_flattens(self, db):
        value = eval_query(parse_ocl("ItemType.allInstances().item.serialNumber"), db)
        assert set(value) == {"S1", "S2"}

    def test_single_value_is_scalar(self, db):
        t1 = next(o for o, c in db.objects.items() if c == "ItemType" and db.attr(o, "id") == "T1")
        assert eval_query(parse_ocl("t.item.serialNumber"), db, env={"t": t1}) == "S1"

    def test_quantifiers(self, db):
        assert holds(parse_ocl('ItemType.allInstances()->exists(t | t.id = "T2")'), db)
        assert not holds(parse_ocl('ItemType.allInstances()->forAll(t | t.id = "T2")'), db)
        assert holds(parse_ocl("Order.allInstances()->isEmpty()"), db)

    def test_includes_on_values(self, db):
        assert holds(parse_ocl('ItemType.allInstances().id->includes("T1")'), db)
        assert holds(parse_ocl('ItemType.allInstances().id->excludes("T9")'), db)

    def test_let_and_implies(self, db):
        assert holds(parse_ocl("let n = Item.allInstances() in n->notEmpty() implies true"), db)
        assert holds(parse_ocl("false implies false"), db)

    def test_type_tests(self, db):
        i = next(o for o, c in db.objects.items() if c == "Item")
        assert holds(parse_ocl("i.oclIsTypeOf(Item)"), db, env={"i": i})
        assert not holds(parse_ocl("i.oclIsTypeOf(ItemType)"), db, env={"i": i})

    def test_unbound_variable(self, db):
        with pytest.raises(UnboundVariable):
            holds(parse_ocl("x.id = y"), db)

    def test_unknown_class(self, db):
        with pytest.raises(UnknownClass):
            eval_query(parse_ocl("Nope.allInstances()"), db)

    def test_pre_missing(self, db):
        t = next(iter(db.extension("ItemType")))
        with pytest.raises(PreSnapshotMissing):
            eval_query(parse_ocl("t.id@pre"), db, env={"t": t})

    def test_ocl_is_new(self, db):
        ws = Workspace(db)
        oid = ws.create("ItemType")
        after = ws.freeze()
        assert holds(parse_ocl("x.oclIsNew()"), after, db, {"x": oid})
        old = next(iter(db.extension("ItemType")))
        assert not holds(parse_ocl("x.oclIsNew()"), after, db, {"x": old})


class TestEffects:
    def test_creation_enf(self, shop):
        enf = to_effect_normal_form(contract(shop, "CreateNewCustomerOrder").post)
        (create,) = enf.creations
        assert isinstance(create, Create) and create.cls == "RequestedOrder"
        assert enf.result_binding is not None

    def test_retyping_enf(self, shop):
        enf = to_effect_normal_form(contract(shop, "AssignItemsToOrder").post)
        assert [r.cls for r in enf.retypings] == ["SentOrder"]
        assert all(isinstance(r, Retype) for r in enf.retypings)

    def test_keyed_include(self, shop):
        enf = to_effect_normal_form(contract(shop, "AddItemType").post)
        assert any(isinstance(e, Include) for e in enf.walk())

    def test_deletion(self):
        enf = to_effect_normal_form(parse_ocl("not Item.allInstances()->exists(i | i.serialNumber = s)"))
        assert isinstance(enf.effects[0], Delete)

    def test_noop(self):
        assert to_effect_normal_form(parse_ocl("true")).is_noop

    @pytest.mark.parametrize("text", [
        "a.x <> b", "x.oclIsNew()", "Order.allInstances()->exists(o | o.id = v)", "a or b",
    ])
    def test_unsupported(self, text):
        with pytest.raises(UnsupportedPostcondition):
            to_effect_normal_form(parse_ocl(text))

    def test_apply_creation(self, shop, db):
        c = contract(shop, "CreateNewCustomerOrder")
        env = {"orderId": "o1", "date": "d", "expDisp": "e"}
        ((post, result),) = apply_effects(to_effect_normal_form(c.post), db, env)
        assert post.objects[result] == "RequestedOrder"
        assert post.attr(result, "id") == "o1"
        assert postcondition_holds(c.post, db, post, {**env, "result": result})

    def test_apply_link_by_key(self, shop, db):
        create = contract(shop, "CreateNewCustomerOrder")
        ((snap, order),) = apply_effects(to_effect_normal_form(create.post), db,
                                         {"orderId": "o1", "date": "d", "expDisp": "e"})
        add = contract(shop, "AddItemType")
        env = {"ro": order, "idItemType": "T2"}
        ((after, _),) = apply_effects(to_effect_normal_form(add.post), snap, env)
        assert eval_query(parse_ocl("ro.itemType.id"), after, env=env) == "T2"
        assert postcondition_holds(add.post, snap, after, env)

    def test_cardinality_violations_are_dropped(self, shop, db):
        create = contract(shop, "CreateNewCustomerOrder")
        ((snap, order),) = apply_effects(to_effect_normal_form(create.post), db,
                                         {"orderId": "o1", "date": "d", "expDisp": "e"})
        ws = Workspace(snap)
        for _ in range(3):
            t = ws.create("ItemType")
            ws.link(order, True, "buys", t)
        full = ws.freeze()
        add = to_effect_normal_form(contract(shop, "AddItemType").post)
        assert apply_effects(add, full, {"ro": order, "idItemType": "T1"}) == []

    def test_oid_never_equals_scalar(self):
        assert Oid(1) != 1 and Oid(0) != False  # noqa: E712
