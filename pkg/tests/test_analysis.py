import itertools

import pytest

from baumlv import analysis as A
from baumlv.errors import PreconditionViolated
from baumlv.model import parse_model
from baumlv.twocm import desk_suite, encode

from conftest import CORPUS


def _with_extra(text_extra, base="shop_min.bauml"):
    return parse_model((CORPUS / base).read_text() + "\n" + text_extra)


class TestDecide:
    @pytest.mark.parametrize("nav,direction,card,shared,bounded", list(itertools.product(
        (True, False), (A.UNIDIRECTIONAL, A.BIDIRECTIONAL), (A.BOUNDED, A.UNBOUNDED),
        (A.SHARED_NONE, A.SHARED_RO, A.SHARED_RW), (True, False))))
    def test_table(self, nav, direction, card, shared, bounded):
        verdict = A.decide(nav, direction, card, shared, bounded)
        if not nav:
            expected = A.THM1
        elif direction == A.BIDIRECTIONAL:
            expected = A.THM4
        elif card == A.UNBOUNDED:
            expected = A.THM2
        elif shared == A.SHARED_RW:
            expected = A.THM6 if bounded else A.THM5
        else:
            expected = A.THM3
        assert verdict == expected

    def test_every_verdict_has_a_citation(self):
        assert set(A.CITATIONS) == set(A.VERDICTS)
        assert all(A.CITATIONS[v] for v in A.VERDICTS)


class TestShop:
    def test_partition(self, shop):
        p = A.derive_rw_partition(shop)
        assert {"ItemType", "Item", "has"} <= p.read_only
        assert {"Order", "RequestedOrder", "SentOrder", "ReqLine", "buys", "makes"} <= p.read_write
        assert not p.read_only & p.read_write

    def test_roles(self, shop):
        roles = A.classify_roles(shop).to_json()
        assert "buys.itemType" in roles["target_roles"]
        assert "buys.requestedOrder" in roles["source_roles"]

    def test_dependency_graph_skips_read_only(self, shop):
        report = A.analyze(shop)
        graph = A.dependency_graph(shop, report.roles, report.partition)
        assert "ItemType" not in graph and "Item" not in graph
        assert graph["SupplierRequest"] == [("ReqLine", "reqLine")]

    def test_bounds(self, shop):
        b = A.analyze(shop).bounds
        assert (b.k, b.n, b.l) == (5, 3, 1)
        assert b.per_instance == 15 ** 2
        assert b.system == 2 * (1 + 225) + 4  # two artifact slots plus the four catalogue objects

    def test_json(self, shop):
        data = A.analyze(shop).to_json()
        assert data["verdict"] == A.THM3
        assert data["bounds"]["N"] == 3
        assert data["shared_instances"]["kind"] == A.SHARED_RO

    def test_minimal_bound(self, shop_min):
        b = A.object_bound(shop_min)
        assert (b.k, b.per_instance, b.system) == (0, 0, 1)


@pytest.fixture(scope="module")
def reports():
    m = desk_suite().halting["inc-dec"]
    return {t: A.analyze(encode(m, t)) for t in (1, 2, 3, 4)}


class TestEncodings:
    def test_table1_witness(self, reports):
        nav = reports[1].navigational
        assert not nav.navigational and nav.witnesses

    def test_table2_unbounded_role(self, reports):
        assert reports[2].cardinality.kind == A.UNBOUNDED
        assert reports[2].cardinality.role is not None

    def test_table3_cycle(self, reports):
        d = reports[3].directionality
        assert d.kind == A.BIDIRECTIONAL and d.cycle
        graph = A.dependency_graph(encode(desk_suite().halting["inc-dec"], 3), reports[3].roles,
                                   reports[3].partition)
        # each step of the reported cycle is an edge of the dependency graph, and it closes
        nodes = [c for c, _ in d.cycle]
        for i, (cls, role) in enumerate(d.cycle):
            assert (nodes[(i + 1) % len(nodes)], role) in graph[cls]

    def test_table4_shared(self, reports):
        s = reports[4].shared_instances
        assert s.kind == A.SHARED_RW and s.witness

    def test_instance_bound_makes_table4_decidable(self):
        m = desk_suite().halting["inc-dec"]
        report = A.analyze(encode(m, 4), instance_bound=2)
        assert report.verdict == A.THM6 and report.decidable
        assert report.bounds.instances == 2

    def test_instance_bound_does_not_rescue_others(self):
        m = desk_suite().halting["inc-dec"]
        for t in (1, 2, 3):
            assert not A.analyze(encode(m, t), instance_bound=2).decidable

    @pytest.mark.parametrize("table", [1, 2])
    def test_bound_needs_preconditions(self, table):
        m = desk_suite().halting["halt"]
        with pytest.raises(PreconditionViolated):
            A.object_bound(encode(m, table))


class TestSmallModels:
    def test_constraint_warning(self):
        model = _with_extra("constraint Order.allInstances()->forAll(o | o.id <> \"\")")
        assert any("not enforced" in w for w in A.analyze(model).warnings)

    def test_shared_none(self, shop_min):
        assert A.analyze(shop_min).shared_instances.kind == A.SHARED_NONE

    def test_unbounded_read_only_role_ignored(self):
        model = _with_extra("class Tag { label: string key }\n"
                            "assoc tagged(Order[0..*] order -- tag[0..*] Tag)\nreadonly Tag\nreadonly tagged")
        report = A.analyze(model)
        assert report.cardinality.kind == A.BOUNDED
        assert report.verdict == A.THM3
