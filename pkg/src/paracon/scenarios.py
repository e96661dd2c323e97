"""Ready-made regression scenarios."""
import numpy as np

from .engine import Scenario
from .graphs import Constant, DirectedGraph, PeriodicList
from .maps import AffineLinearSolve, Halfspace, Projector


def random_linear_system(n=4, rows_per_agent=(2, 2, 2), seed=42):
    """Consistent ``Ax = b`` with a unique solution, split into per-agent row blocks.

    Returns ``(maps, A, b, x_true)``.
    """
    rng = np.random.default_rng(seed)
    rows = sum(rows_per_agent)
    while True:
        A = rng.standard_normal((rows, n))
        if np.linalg.matrix_rank(A) == min(rows, n):
            break
    x_true = rng.standard_normal(n)
    b = A @ x_true
    maps = []
    start = 0
    for r in rows_per_agent:
        maps.append(AffineLinearSolve(A[start:start + r], b[start:start + r]))
        start += r
    return maps, A, b, x_true


def cyclic_single_arc_graphs(m):
    """``m`` graphs; graph ``k`` has every self-arc plus the single arc ``k -> k+1 (mod m)``."""
    return [DirectedGraph.from_arcs(m, [(k, (k + 1) % m)]) for k in range(m)]


def linear_system_scenario(schedule="complete", seed=42, horizon=20_000, n=4,
                           rows_per_agent=(2, 2, 2), init_scale=10.0):
    """Distributed solve of a random linear system.

    ``schedule`` is ``"complete"`` (constant complete graph) or ``"periodic"``
    (the single-arc cycle from :func:`cyclic_single_arc_graphs`).
    """
    maps, A, b, x_true = random_linear_system(n, rows_per_agent, seed)
    m = len(maps)
    if schedule == "complete":
        sched = Constant(DirectedGraph.complete(m))
    elif schedule == "periodic":
        sched = PeriodicList(cyclic_single_arc_graphs(m))
    else:
        raise ValueError(f"unknown schedule {schedule!r}")
    rng = np.random.default_rng(seed + 1)
    x0 = init_scale * rng.standard_normal((m, n))
    return Scenario(maps=maps, schedule=sched, x0=x0, horizon=horizon,
                    witness=x_true, name=f"linear-{schedule}")


# C1 = {x : x_0 <= 1}, C2 = {x : x_0 >= 0}; they meet in the band 0 <= x_0 <= 1
COUNTER_C1 = Halfspace([1.0, 0.0], 1.0)
COUNTER_C2 = Halfspace([-1.0, 0.0], 0.0)
COUNTER_X1 = np.array([-2.0, 1.0])
COUNTER_X2 = np.array([3.0, -1.0])
# s_00 = 1, s_01 = 0, s_10 = 1/2, s_11 = 1/2
COUNTER_WEIGHTS = {(0, 0): "1", (1, 0): "1/2", (1, 1): "1/2"}


def counterexample_graph(reverse_arc=False):
    """Self-arcs plus ``0 -> 1`` (agent 0 is a neighbor of agent 1); optionally also ``1 -> 0``."""
    arcs = [(0, 1)] + ([(1, 0)] if reverse_arc else [])
    return DirectedGraph.from_arcs(2, arcs)


def counterexample_scenario(x1=COUNTER_X1, x2=COUNTER_X2, reverse_arc=False, horizon=1000):
    """Two projectors over a constant rooted (not strongly connected) graph.

    With ``reverse_arc`` the graph becomes complete and uniform weights are used.
    """
    G = counterexample_graph(reverse_arc)
    weights = None if reverse_arc else dict(COUNTER_WEIGHTS)
    maps = [Projector(COUNTER_C1), Projector(COUNTER_C2)]
    x0 = np.stack([np.asarray(x1, float), np.asarray(x2, float)])
    return Scenario(maps=maps, schedule=Constant(G), x0=x0, horizon=horizon,
                    weights=weights, witness=np.array([0.5, 0.0]),
                    name="counterexample" + ("-reversed" if reverse_arc else ""))
