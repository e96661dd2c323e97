import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from paracon import graphs as gr
from paracon.graphs import DirectedGraph
from paracon.matrices import stochastic_from_weights
from paracon.scenarios import COUNTER_WEIGHTS, counterexample_graph


def reach_all(adj):
    # brute-force oracle: transitive closure by repeated path extension
    m = adj.shape[0]
    R = adj | np.eye(m, dtype=bool)
    for _ in range(m):
        R = R | ((R.astype(int) @ R.astype(int)) > 0)
    return bool(R.all())


@st.composite
def graphs(draw, m=None, self_arcs=True):
    m = draw(st.integers(1, 6)) if m is None else m
    bits = draw(st.lists(st.booleans(), min_size=m * m, max_size=m * m))
    adj = np.array(bits).reshape(m, m)
    if self_arcs:
        np.fill_diagonal(adj, True)
    return DirectedGraph(adj)


# --- composition -----------------------------------------------------------

def test_compose_examples():
    K = DirectedGraph.complete(3)
    assert gr.compose_graphs(K, K) == K
    G = DirectedGraph.from_arcs(3, [(2, 0)])
    assert gr.compose_graphs(DirectedGraph.self_arcs_only(3), G) == G
    Gp = DirectedGraph.from_arcs(3, [(0, 1)])
    Gq = DirectedGraph.from_arcs(3, [(1, 2)])
    arcs = gr.compose_graphs(Gp, Gq).arcs
    assert {(0, 1), (1, 2), (0, 2)} <= arcs
    # the reverse order has no 2-hop path 0 -> 2
    assert (0, 2) not in gr.compose_graphs(Gq, Gp).arcs


@settings(max_examples=200)
@given(st.integers(1, 6).flatmap(lambda m: st.tuples(graphs(m), graphs(m))))
def test_compose_matches_path_definition(pair):
    Gp, Gq = pair
    m = Gp.m
    expected = {(i, j) for i in range(m) for j in range(m)
                if any(Gp.adj[i, k] and Gq.adj[k, j] for k in range(m))}
    assert gr.compose_graphs(Gp, Gq).arcs == expected


@settings(max_examples=200)
@given(st.integers(1, 6).flatmap(
    lambda m: st.tuples(*[st.lists(st.sampled_from([0.0, 0.0, 0.3, 1.0, 2.5]),
                                   min_size=m * m, max_size=m * m)] * 2)))
def test_gamma_homomorphism(entries):
    m = int(round(len(entries[0]) ** 0.5))
    A1 = np.array(entries[0]).reshape(m, m)
    A2 = np.array(entries[1]).reshape(m, m)
    assert gr.graph_of_matrix(A2 @ A1) == gr.compose_graphs(gr.graph_of_matrix(A1),
                                                             gr.graph_of_matrix(A2))


def test_compose_sequence_is_chronological():
    seq = [DirectedGraph.from_arcs(3, [(0, 1)]), DirectedGraph.from_arcs(3, [(1, 2)])]
    assert (0, 2) in gr.compose_sequence(seq).arcs
    assert (0, 2) not in gr.compose_sequence(seq[::-1]).arcs
    with pytest.raises(ValueError):
        gr.compose_sequence([])


# --- connectivity ----------------------------------------------------------

def test_connectivity_examples():
    assert gr.is_strongly_connected(DirectedGraph.cycle(3))
    assert not gr.is_strongly_connected(counterexample_graph())
    assert gr.is_strongly_connected(DirectedGraph.complete(5))
    assert gr.is_complete(DirectedGraph.complete(3))
    assert not gr.is_complete(DirectedGraph.cycle(3))
    C = DirectedGraph.cycle(3)
    assert gr.is_complete(gr.compose_sequence([C, C]))


@settings(max_examples=300)
@given(graphs(self_arcs=False))
def test_strong_connectivity_matches_oracle(G):
    assert gr.is_strongly_connected(G) == reach_all(G.adj)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_composition_of_m_minus_1_sc_graphs_complete(m):
    # exhaustive over arc-minimal SC graphs; monotonicity covers all SC graphs
    pool = gr.minimal_strongly_connected(m)
    for seq in itertools.product(pool, repeat=m - 1):
        assert gr.is_complete(gr.compose_sequence(seq))


def test_minimal_sc_graphs_cover_every_sc_graph():
    pool = gr.minimal_strongly_connected(3)
    for G in gr.self_arced_graphs(3):
        if gr.is_strongly_connected(G):
            assert any(np.all(H.adj <= G.adj) for H in pool)


def test_m_minus_2_compositions_need_not_be_complete():
    C = DirectedGraph.cycle(4)
    assert not gr.is_complete(gr.compose_sequence([C, C]))


# --- graph of a matrix -----------------------------------------------------

def test_graph_of_matrix_examples():
    assert gr.graph_of_matrix(np.eye(3)) == DirectedGraph.self_arcs_only(3)
    assert gr.graph_of_matrix(np.full((3, 3), 0.2)) == DirectedGraph.complete(3)
    S = stochastic_from_weights(counterexample_graph(), COUNTER_WEIGHTS)
    assert gr.graph_of_matrix(S.entries) == counterexample_graph()
    with pytest.raises(ValueError):
        gr.graph_of_matrix([[1.0, -0.1], [0.0, 1.0]])


def test_graph_validation():
    with pytest.raises(ValueError):
        DirectedGraph(np.ones((2, 3)))
    with pytest.raises(ValueError):
        DirectedGraph.from_arcs(2, [(0, 2)])
    with pytest.raises(ValueError):
        gr.Constant(DirectedGraph(np.zeros((2, 2))))  # no self-arcs


# --- schedules and RJSC ----------------------------------------------------

def test_rjsc_window_indices():
    assert gr.rjsc_window(1, 1, 1) == (1, 1)
    assert gr.rjsc_window(3, 2, 2) == (5, 7)


def test_certify_examples():
    cert = gr.certify_rjsc(gr.Constant(DirectedGraph.cycle(4)), 1, 1, 50)
    assert isinstance(cert, gr.RjscCertificate) and cert.verified_windows == 50
    alt = gr.PeriodicList([DirectedGraph.from_arcs(2, [(0, 1)]), DirectedGraph.from_arcs(2, [(1, 0)])])
    assert isinstance(gr.certify_rjsc(alt, 2, 1, 10), gr.RjscCertificate)
    assert isinstance(gr.certify_rjsc(alt, 1, 1, 10), gr.RjscFailure)
    rooted = gr.Constant(counterexample_graph())
    for l in (1, 2, 5):
        fail = gr.certify_rjsc(rooted, l, 1, 3)
        assert isinstance(fail, gr.RjscFailure) and fail.k == 1


def test_search_rjsc():
    alt = gr.PeriodicList([DirectedGraph.from_arcs(2, [(0, 1)]), DirectedGraph.from_arcs(2, [(1, 0)])])
    cert = gr.search_rjsc(alt, 4, 10)
    assert (cert.l, cert.rho0) == (2, 1)
    fail = gr.search_rjsc(gr.Constant(counterexample_graph()), 3, 5)
    assert isinstance(fail, gr.RjscFailure) and fail.l == 3


def test_certify_horizon_too_short():
    sched = gr.FiniteList([DirectedGraph.complete(2)] * 5)
    assert isinstance(gr.certify_rjsc(sched, 1, 1, 5), gr.RjscCertificate)
    with pytest.raises(gr.ScheduleExhausted):
        gr.certify_rjsc(sched, 2, 1, 3)
    with pytest.raises(gr.ScheduleExhausted):
        sched.graph(6)


def test_seeded_random_is_reproducible_and_order_free():
    pool = [DirectedGraph.cycle(3), DirectedGraph.complete(3)]
    a = gr.SeededRandom(pool, seed=9)
    b = gr.SeededRandom(pool, seed=9)
    late = b.graph(40)
    assert [a.graph(t) for t in range(1, 41)][-1] == late
    assert a.graphs(1, 40) == b.graphs(1, 40)


def test_periodic_list_indexing():
    pool = [DirectedGraph.from_arcs(3, [(k, (k + 1) % 3)]) for k in range(3)]
    s = gr.PeriodicList(pool)
    assert s.graph(1) == pool[0] and s.graph(4) == pool[0] and s.graph(6) == pool[2]
    with pytest.raises(IndexError):
        s.graph(0)
