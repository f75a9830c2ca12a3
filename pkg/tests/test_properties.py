"""Property-based checks with hypothesis."""

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from baumlv.errors import BudgetExceeded
from baumlv.grounder import THM6, ground
from baumlv.kernels import _fallback
from baumlv.mucheck import check, check_reachability_oracle, evaluate, kripke_system
from baumlv.mulp import ast as M, expand_abbreviations, negate, parse_property, to_nnf
from baumlv.twocm import encode, random_machine

from test_acceptance import random_goal, reach

try:
    from baumlv.kernels import _ckernels
except ImportError:
    _ckernels = None

PROPS = ("p", "q", "r")
SETTINGS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def prop(p):
    return M.ExistsClass("x", p, M.TRUE)


@st.composite
def object_formulas(draw):
    """Closed formulas that track one object across a step."""
    cls, other = draw(st.sampled_from(PROPS)), draw(st.sampled_from(PROPS))
    atom = draw(st.sampled_from([M.ClassAtom(other, "x"), M.Live("x")]))
    pol = draw(st.sampled_from([M.CONJUNCTIVE, M.IMPLICATIVE]))
    body = draw(st.sampled_from([atom, M.Diamond(atom, pol), M.Box(atom, pol), M.Not(atom)]))
    quant = draw(st.sampled_from([M.ExistsClass, M.ForAllClass]))
    return quant("x", cls, body)


@st.composite
def formulas(draw, depth=4, fixvars=()):
    leaves = [st.sampled_from([M.TRUE, M.FALSE]), st.sampled_from(PROPS).map(prop), object_formulas()]
    if fixvars:
        leaves.append(st.sampled_from(fixvars).map(M.FixVar))
    if depth == 0:
        return draw(st.one_of(leaves))
    kind = draw(st.sampled_from(["leaf", "and", "or", "not", "dia", "box", "mu", "nu"]))
    sub = formulas(depth - 1, fixvars)
    if kind == "leaf":
        return draw(st.one_of(leaves))
    if kind in ("and", "or"):
        cls = M.And if kind == "and" else M.Or
        return cls(draw(sub), draw(sub))
    if kind == "not":
        # fixpoint variables stay under an even number of negations
        return M.Not(draw(formulas(depth - 1, ())))
    if kind == "dia":
        return M.Diamond(draw(sub))
    if kind == "box":
        return M.Box(draw(sub))
    name = f"Y{len(fixvars)}"
    binder = M.Mu if kind == "mu" else M.Nu
    return binder(name, draw(formulas(depth - 1, fixvars + (name,))))


@st.composite
def kripke(draw, max_states=12):
    n = draw(st.integers(1, max_states))
    edges = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3 * n))
    labels = {s: set(draw(st.sets(st.sampled_from(PROPS), max_size=2))) for s in range(n)}
    return kripke_system(n, edges, labels, props=PROPS)


def sem(ts, phi):
    vars_, arr = evaluate(ts, phi)
    assert vars_ == ()
    return arr[0]


class TestLogicLaws:
    @SETTINGS
    @given(formulas(), kripke())
    def test_nnf_preserves_meaning(self, phi, ts):
        assert np.array_equal(sem(ts, to_nnf(phi)), sem(ts, phi))

    @SETTINGS
    @given(formulas(), kripke())
    def test_negate_complements(self, phi, ts):
        assert np.array_equal(sem(ts, negate(phi)), ~sem(ts, phi))
        assert np.array_equal(sem(ts, M.Not(phi)), ~sem(ts, phi))

    @SETTINGS
    @given(formulas(), kripke())
    def test_abbreviations_preserve_meaning(self, phi, ts):
        assert np.array_equal(sem(ts, expand_abbreviations(phi)), sem(ts, phi))

    @SETTINGS
    @given(formulas(depth=2), kripke())
    def test_modal_duality(self, phi, ts):
        assert np.array_equal(sem(ts, M.Not(M.Diamond(phi))), sem(ts, M.Box(M.Not(phi))))
        assert np.array_equal(sem(ts, M.Not(M.Mu("Z", M.Or(phi, M.Diamond(M.FixVar("Z")))))),
                              sem(ts, M.Nu("Z", M.And(M.Not(phi), M.Box(M.FixVar("Z"))))))

    @SETTINGS
    @given(formulas())
    def test_print_parse_round_trip(self, phi):
        assert parse_property(str(phi)) == phi


class TestOracle:
    @SETTINGS
    @given(kripke(max_states=40), st.randoms(use_true_random=False))
    def test_reachability(self, ts, rng):
        goal, pred = random_goal(rng, list(PROPS))
        expected = check_reachability_oracle(ts, pred)
        assert check(ts, reach(goal), counterexample=False).holds == expected


def _ground_or_resource(model, **kw):
    try:
        return ground(model, mode=THM6, instances=1, budget=3, max_states=3000, **kw)
    except BudgetExceeded as exc:
        return exc.resource


machines = st.builds(random_machine, st.randoms(use_true_random=False), st.integers(1, 4))


class TestGrounding:
    @settings(max_examples=15, deadline=None)
    @given(machines)
    def test_deterministic(self, m):
        model = encode(m, 2)
        a, b = _ground_or_resource(model), _ground_or_resource(model)
        if isinstance(a, str):
            assert a == b
        else:
            assert a.to_json() == b.to_json()

    @settings(max_examples=15, deadline=None)
    @given(machines)
    def test_pool_prefix_symmetry(self, m):
        model = encode(m, 2)
        a, b = _ground_or_resource(model), _ground_or_resource(model, pool_prefix="$g")
        if isinstance(a, str):
            assert a == b
        else:
            assert (a.edges, a.perms, a.deadlocks) == (b.edges, b.perms, b.deadlocks)


@st.composite
def csr_problem(draw):
    s = draw(st.integers(1, 25))
    degrees = draw(st.lists(st.integers(1, 3), min_size=s, max_size=s))
    offsets = np.concatenate([[0], np.cumsum(degrees)]).astype(np.int64)
    e = int(offsets[-1])
    a = draw(st.integers(1, 4))
    dst = np.array(draw(st.lists(st.integers(0, s - 1), min_size=e, max_size=e)), dtype=np.int64)
    mapped = np.array(draw(st.lists(st.lists(st.integers(-1, a - 1), min_size=a, max_size=a),
                                    min_size=e, max_size=e)), dtype=np.int64).reshape(e, a)
    x = np.array(draw(st.lists(st.booleans(), min_size=a * s, max_size=a * s))).reshape(a, s)
    return offsets, dst, mapped, x


@pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")
class TestKernelBackends:
    @SETTINGS
    @given(csr_problem(), st.booleans())
    def test_pre_images(self, problem, vanish):
        for name in ("pre_exists", "pre_forall"):
            slow = getattr(_fallback, name)(*problem, vanish)
            fast = getattr(_ckernels, name)(*problem, vanish)
            assert np.array_equal(np.asarray(fast, dtype=bool), np.asarray(slow, dtype=bool)), name

    @SETTINGS
    @given(csr_problem(), st.data())
    def test_reachable(self, problem, data):
        offsets, dst = problem[0], problem[1]
        start = data.draw(st.integers(0, len(offsets) - 2))
        slow = _fallback.reachable(offsets, dst, start)
        fast = _ckernels.reachable(offsets, dst, start)
        assert np.array_equal(np.asarray(fast, dtype=bool), slow)
