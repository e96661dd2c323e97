import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from paracon.engine import (
    Scenario, consensus_vector, disagreement, extract_z_subsequence, fejer_margins,
    metrics_csv, recomputation_errors, residual, run, step, step_agentwise, trace_csv,
)
from paracon.graphs import Constant, DirectedGraph, FiniteList, ScheduleExhausted
from paracon.maps import AffineLinearSolve, Ball, Halfspace, Projector
from paracon.matrices import stochastic_from_graph
from paracon.norms import mixed_norm_pinf
from paracon.scenarios import (
    COUNTER_C1, COUNTER_C2, COUNTER_X1, counterexample_scenario, linear_system_scenario,
    random_linear_system,
)
from paracon.verify import random_projector_family, random_self_arced_graph, random_step_matrix


def test_step_keeps_consensus_fixed_point():
    maps = [Projector(Ball([0.0, 0.0], 1.0)), Projector(Halfspace([1.0, 1.0], 0.0))]
    y = consensus_vector([-0.2, 0.1], 2)
    S = stochastic_from_graph(DirectedGraph.complete(2))
    np.testing.assert_array_equal(step(y, S, maps), y)


def test_single_agent_is_plain_iteration():
    M = Projector(Ball([0.0, 0.0], 1.0))
    x = np.array([[3.0, 4.0]])
    np.testing.assert_array_equal(step(x, np.array([[1.0]]), [M]), [M(x[0])])


def test_counterexample_first_step_freezes_agent_0():
    sc = counterexample_scenario()
    S = stochastic_from_graph(DirectedGraph.from_arcs(2, [(0, 1)]))
    x2 = step(sc.x0, S, sc.maps)
    np.testing.assert_array_equal(x2[0], COUNTER_X1)
    assert COUNTER_C1.contains(COUNTER_X1, 0) and not COUNTER_C2.contains(COUNTER_X1, 0)


@settings(max_examples=60)
@given(st.integers(1, 5), st.integers(1, 4), st.integers(0, 10_000))
def test_agentwise_form_is_bit_identical(m, n, seed):
    rng = np.random.default_rng(seed)
    maps = random_projector_family(rng, m, n, np.zeros(n))
    S = random_step_matrix(rng, random_self_arced_graph(rng, m))
    x = 10 * rng.standard_normal((m, n))
    np.testing.assert_array_equal(step(x, S, maps), step_agentwise(x, S, maps))


def test_metric_examples():
    assert disagreement(consensus_vector([1.0, 2.0], 3)) == 0.0
    assert disagreement([[0.0, 0.0], [3.0, 4.0]]) == 5.0
    assert disagreement(np.eye(3)) == pytest.approx(np.sqrt(2), rel=1e-15)
    maps = [Projector(Ball([0.0, 0.0], 1.0)), Projector(Halfspace([1.0, 0.0], 0.0))]
    assert residual([[0.6, 0.8], [-1.0, 5.0]], maps) == 0.0
    # projector block at distance 2 from the unit ball
    assert residual([[3.0, 0.0], [-1.0, 0.0]], maps) == pytest.approx(2.0)


def test_affine_residual_closed_form():
    A = np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 1.0]])
    b = np.array([1.0, -1.0])
    M = AffineLinearSolve(A, b)
    x = np.array([0.3, -2.0, 4.0])
    r = A @ x - b
    expected = np.linalg.norm(A.T @ np.linalg.solve(A @ A.T, r))
    assert residual(x[None], [M]) == pytest.approx(expected, rel=1e-12)


def test_run_at_fixed_point_stops_immediately():
    maps = [Projector(Ball([0.0, 0.0], 1.0))] * 3
    sc = Scenario(maps, Constant(DirectedGraph.cycle(3)), consensus_vector([0.1, 0.2], 3))
    tr = run(sc)
    assert tr.converged and tr.steps == 1
    assert tr.disagreement[0] == 0.0 and tr.residual[0] == 0.0


def test_linear_system_matches_direct_solve():
    sc = linear_system_scenario("complete", horizon=5000)
    _, A, b, x_true = random_linear_system()
    tr = run(sc)
    assert tr.converged
    direct = np.linalg.lstsq(A, b, rcond=None)[0]
    np.testing.assert_allclose(direct, x_true, atol=1e-12)
    assert np.max(np.abs(tr.state(tr.steps) - direct)) <= 1e-6
    assert tr.disagreement[-1] <= 1e-8


def test_counterexample_never_converges():
    tr = run(counterexample_scenario(horizon=300))
    assert not tr.converged and tr.steps == 300
    d = [COUNTER_C2.distance(x) for x in tr.x[:, 0]]
    assert max(d) == min(d) == 2.0


def test_trace_recomputation():
    for sc in (linear_system_scenario("periodic", horizon=300), counterexample_scenario(horizon=50)):
        tr = run(sc)
        assert recomputation_errors(tr, sc.maps) == 0.0


def test_schedule_exhaustion_raises():
    maps = [Projector(Ball([0.0], 1.0))] * 2
    sc = Scenario(maps, FiniteList([DirectedGraph.self_arcs_only(2)] * 3), [[5.0], [-9.0]], horizon=100)
    with pytest.raises(ScheduleExhausted):
        run(sc)


def test_scenario_validation():
    maps = [Projector(Ball([0.0, 0.0], 1.0))] * 2
    with pytest.raises(ValueError):
        Scenario(maps, Constant(DirectedGraph.complete(3)), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        Scenario(maps, Constant(DirectedGraph.complete(2)), np.zeros((3, 2)))
    with pytest.raises(ValueError):
        Scenario(maps, Constant(DirectedGraph.complete(2)), np.zeros((2, 2)), horizon=0)


def test_z_subsequence_indices():
    tr = run(linear_system_scenario("complete", horizon=30))
    zs = extract_z_subsequence(tr, 1, 1, 1)
    assert [(k, t) for k, t, _ in zs[:3]] == [(2, 1), (3, 2), (4, 3)]
    zs = extract_z_subsequence(tr, 2, 1, 2)
    assert [(k, t) for k, t, _ in zs[:2]] == [(2, 4), (3, 8)]
    np.testing.assert_array_equal(zs[0][2], tr.averaged(4))
    with pytest.raises(ValueError):
        extract_z_subsequence(tr, 50, 1, 2)


def test_z_distances_nonincreasing():
    sc = linear_system_scenario("periodic")
    tr = run(sc)
    xs = consensus_vector(sc.witness, sc.m)
    d = [mixed_norm_pinf(z - xs) for _, _, z in extract_z_subsequence(tr, 3, 1, 2)]
    assert all(b <= a + 1e-12 for a, b in zip(d, d[1:]))


def test_fejer_margins_nonnegative():
    sc = linear_system_scenario("complete", horizon=5000)
    tr = run(sc)
    a, b = fejer_margins(tr, consensus_vector(sc.witness, sc.m))
    assert a.min() >= -1e-12 and b.min() >= -1e-12


def test_csv_layout():
    tr = run(counterexample_scenario(horizon=2))
    lines = trace_csv(tr).splitlines()
    assert lines[0] == "t,agent,component,value,xbar_value"
    assert len(lines) == 1 + 2 * 2 * 2
    assert lines[1] == "1,0,0,-2.0,-2.0"
    assert lines[3] == "1,1,0,3.0,0.5"
    assert metrics_csv(tr).splitlines()[0] == "t,disagreement,residual,distance_to_witness"
