import numpy as np
import pytest

from paracon import verify as vf
from paracon.engine import apply_maps, consensus_vector
from paracon.graphs import DirectedGraph
from paracon.maps import Ball, Halfspace, LinearMap, PreconditionError, Projector
from paracon.matrices import apply_kron, stochastic_from_graph
from paracon.norms import mixed_norm_pinf


def halfspace_pair():
    return Projector(Halfspace([1.0, 1.0], 1.0)), Projector(Halfspace([-1.0, 2.0], 0.5))


# --- single maps -----------------------------------------------------------

def test_elsner_alternating_halfspaces():
    h1, h2 = halfspace_pair()
    rep = vf.check_elsner([h1, h2], "cyclic", [8.0, 9.0], 400)
    assert rep.passed
    x = np.array(rep.notes["limit"])
    assert h1.fixed_oracle(x, 1e-9) and h2.fixed_oracle(x, 1e-9)


def test_elsner_single_map_and_fixed_start():
    P = Projector(Ball([0.0, 0.0], 1.0))
    assert vf.check_elsner([P], "cyclic", [5.0, -3.0], 5).passed
    rep = vf.check_elsner([P], "cyclic", [0.1, 0.1], 3)
    assert rep.passed and rep.notes["limit"] == [0.1, 0.1]


def test_elsner_flags_non_convergent_pool():
    # disjoint halfspaces: alternating projections oscillate
    pool = [Projector(Halfspace([1.0, 0.0], 0.0)), Projector(Halfspace([-1.0, 0.0], -1.0))]
    assert not vf.check_elsner(pool, "cyclic", [3.0, 0.0], 100).passed


def test_composition_fixed_sets():
    h1, h2 = halfspace_pair()
    rng = np.random.default_rng(1)
    rep = vf.check_composition_fixed_sets(h1, h2, list(10 * rng.standard_normal((20, 2))), [0.0, 0.0])
    assert rep.passed and rep.trials > 40


def test_linear_qne_iff_ne_examples():
    rng = np.random.default_rng(0)
    samples = list(10 * rng.standard_normal((40, 2)))
    proj = vf.check_linear_qne_iff_ne(np.array([[1.0, 0.0], [0.0, 0.0]]), samples)
    assert proj.passed and proj.notes["quasi_nonexpansive"] and proj.notes["nonexpansive"]
    scale = vf.check_linear_qne_iff_ne(2 * np.eye(2), samples)
    assert scale.passed and not scale.notes["quasi_nonexpansive"] and not scale.notes["nonexpansive"]
    avg = vf.check_linear_qne_iff_ne(np.array([[0.75, 0.25], [0.25, 0.75]]), samples)
    assert avg.passed and avg.notes["paracontraction"] and avg.notes["norm_drop"]


def test_linear_check_accepts_map_objects_and_rejects_nonlinear():
    rng = np.random.default_rng(0)
    samples = list(rng.standard_normal((10, 2)))
    assert vf.check_linear_qne_iff_ne(LinearMap([[0.0, -1.0], [1.0, 0.0]]), samples).passed
    with pytest.raises(ValueError):
        vf.check_linear_qne_iff_ne(Projector(Ball([0.0, 0.0], 0.1)), samples)


# --- stacked maps ----------------------------------------------------------

def test_stacked_checks():
    rng = np.random.default_rng(3)
    maps = list(halfspace_pair())
    xs = [10 * rng.standard_normal((2, 2)) for _ in range(100)]
    ys = [np.zeros((2, 2)), np.array([[1.0, -3.0], [0.0, 0.0]])]
    assert vf.check_M_pc_22(maps, xs, ys).passed
    assert vf.check_M_qne_pinf(maps, xs, ys).passed
    # x in F(M): both norms preserved
    rep = vf.check_M_qne_pinf(maps, [ys[1]], [ys[0]])
    assert rep.passed and rep.worst_margin == 0.0
    with pytest.raises(PreconditionError):
        vf.check_M_pc_22(maps, xs, [np.full((2, 2), 5.0)])


def test_pinf_equality_witness():
    P1 = Projector(Ball([0.0, 0.0], 1.0))
    P2 = Projector(Halfspace([1.0, 0.0], 0.0))
    x, y = vf.pinf_equality_witness(P1, P2)
    Mx = apply_maps([P1, P2], x)
    assert np.array_equal(Mx[1], x[1])
    assert not np.array_equal(Mx[0], x[0])
    assert abs(mixed_norm_pinf(Mx - y) - mixed_norm_pinf(x - y)) <= 1e-12
    assert vf.check_M_pinf_equality(P1, P2).passed


# --- stochastic matrices ---------------------------------------------------

def test_doubly_stochastic_check():
    rng = np.random.default_rng(0)
    S = vf.random_doubly_stochastic(rng, 4, terms=2)
    assert vf.check_doubly_stochastic_pc(S, 10 * rng.standard_normal((100, 4))).passed
    with pytest.raises(PreconditionError):
        vf.check_doubly_stochastic_pc([[1.0, 0.0], [0.5, 0.5]], [[1.0, 0.0]])


def test_positive_stochastic_check_and_necessity():
    rng = np.random.default_rng(0)
    S = vf.random_positive_stochastic(rng, 3)
    xs = list(10 * rng.standard_normal((200, 3, 2)))
    for p in (1.5, 2.0, 3.0):
        assert vf.check_S_pc_pinf(S, xs, p).passed
    cyc = stochastic_from_graph(DirectedGraph.cycle(3))
    with pytest.raises(PreconditionError):
        vf.check_S_pc_pinf(cyc, xs, 2.0)
    rep = vf.check_positive_necessity(cyc, n=2, p=3.0)
    assert rep.passed and rep.trials == 1
    x, i, k = vf.necessity_witness(cyc, 2, 3.0)
    assert mixed_norm_pinf(apply_kron(cyc, x), 3.0) == mixed_norm_pinf(x, 3.0)


def test_necessity_skips_reducible_matrix():
    rep = vf.check_positive_necessity(np.eye(3))
    assert rep.trials == 0 and "skipped" in rep.notes


# --- v-sequences -----------------------------------------------------------

def test_v_inequality_trivial_cases():
    rng = np.random.default_rng(0)
    vs = vf.random_vsequence(rng, 3, 4)
    table_rep = vf.check_v_inequality(vs)
    assert table_rep.passed
    y = vs.y_star
    at_fixed = vf.v_sequence(vs.maps, vs.S_list, consensus_vector(y, 3), y)
    rep = vf.check_v_inequality(at_fixed)
    # averaging copies of y* returns y* up to rounding, so every side is ~0
    assert rep.passed and abs(rep.worst_margin) <= 1e-15
    assert np.max(np.abs(at_fixed.v - y)) <= 1e-15
    # tau = t: Phi is the identity and both sides coincide exactly
    table = vf.phi_table(vs.S_list)
    for t in range(vs.q + 1):
        d = vf._block_dist(vs.v[t], y, 2.0)
        np.testing.assert_array_equal(table[(t, t)] @ d, d)


def test_v_suite_on_sc_schedules():
    rng = np.random.default_rng(11)
    for _ in range(200):
        y = rng.uniform(-1, 1, 2)
        maps = vf.random_projector_family(rng, 3, 2, y)
        S_list = [stochastic_from_graph(vf.random_strongly_connected(rng, 3)) for _ in range(4)]
        vs = vf.v_sequence(maps, S_list, y + 10 * rng.standard_normal((3, 2)), y)
        assert vf.check_v_inequality(vs).passed
        assert vf.check_phi_inequality(vs).passed


def test_phi_identity_case():
    rng = np.random.default_rng(5)
    vs = vf.random_vsequence(rng, 3, 3, mode="inside")
    rep = vf.check_phi_inequality(vs)
    assert rep.passed and rep.notes["identity_cases"] == 3


def test_v_checker_detects_tampering():
    rng = np.random.default_rng(0)
    vs = vf.random_vsequence(rng, 3, 3)
    vs.v[-1] = vs.v[-1] + 100.0
    assert not vf.check_v_inequality(vs).passed
    assert vs.recompute_error() > 1


def test_composed_map_q1_reduces_to_direct_check():
    rng = np.random.default_rng(2)
    maps = [Projector(Halfspace(a, 0.5)) for a in ([1.0, 0.0], [0.0, 1.0], [-1.0, -1.0])]
    S = vf.random_positive_stochastic(rng, 3)
    xs = [10 * rng.standard_normal((3, 2)) for _ in range(50)]
    T = vf.composed_map(maps, [S])
    for x in xs:
        np.testing.assert_array_equal(T(x), apply_kron(S, apply_maps(maps, x)))
    rep = vf.check_composed_map_pc(maps, [S], xs, np.zeros(2))
    assert rep.passed
    # the stacked witness is fixed
    w = consensus_vector(np.zeros(2), 3)
    assert mixed_norm_pinf(T(w) - w) == 0.0


def test_composed_map_cycle_example():
    rep = vf.suite_composed_cycle(42)
    assert rep.passed and rep.trials >= 500


def test_composed_map_requires_positive_product():
    maps = [Projector(Ball([0.0, 0.0], 1.0))] * 3
    S = stochastic_from_graph(DirectedGraph.cycle(3))
    with pytest.raises(PreconditionError):
        vf.check_composed_map_pc(maps, [S], [np.ones((3, 2))], np.zeros(2))
    with pytest.raises(PreconditionError):
        vf.check_class_lemma(maps, [np.eye(3)], [np.ones((3, 2))], np.zeros(2))


# --- scenarios -------------------------------------------------------------

def test_counterexample_check():
    rep = vf.check_counterexample()
    assert rep.passed
    assert rep.notes["drift"] == 0.0 and rep.notes["steps"] == 1000


def test_suite_registry():
    assert vf.resolve_suite(["all"]) == list(vf.SUITE)
    assert vf.resolve_suite(["check_phi_inequality", "check_v_inequality"]) == ["check_v_inequality"]
    with pytest.raises(KeyError):
        vf.resolve_suite(["nosuchcheck"])


@pytest.mark.parametrize("name", ["check_elsner", "check_linear_qne_iff_ne", "check_M_pc_22",
                                  "check_closed_convex", "check_map_library",
                                  "check_composition_fixed_sets"])
def test_quick_suites_pass(name):
    (rep,) = vf.run_suite([name], seed=42)
    assert rep.passed, rep.to_text()
