"""Directed neighbor graphs, their composition, and RJSC certification.

Vertices are ``0 .. m-1``. An arc ``(a, b)`` means information flows from
``a`` to ``b``: in a neighbor graph, agent ``a`` is a neighbor of agent ``b``.
A graph is stored as a boolean matrix ``adj`` with ``adj[a, b]`` set for arc
``(a, b)``.
"""
import itertools
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components


class DirectedGraph:
    """Immutable m-vertex digraph."""

    __slots__ = ("adj",)

    def __init__(self, adj):
        adj = np.array(adj, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1] or adj.shape[0] < 1:
            raise ValueError(f"adjacency must be square, got shape {adj.shape}")
        adj.setflags(write=False)
        self.adj = adj

    @classmethod
    def from_arcs(cls, m, arcs, self_arcs=True):
        adj = np.eye(m, dtype=bool) if self_arcs else np.zeros((m, m), dtype=bool)
        for a, b in arcs:
            if not (0 <= a < m and 0 <= b < m):
                raise ValueError(f"arc ({a}, {b}) outside vertex range 0..{m - 1}")
            adj[a, b] = True
        return cls(adj)

    @classmethod
    def complete(cls, m):
        return cls(np.ones((m, m), dtype=bool))

    @classmethod
    def self_arcs_only(cls, m):
        return cls(np.eye(m, dtype=bool))

    @classmethod
    def cycle(cls, m, self_arcs=True):
        return cls.from_arcs(m, [(i, (i + 1) % m) for i in range(m)], self_arcs)

    @property
    def m(self):
        return self.adj.shape[0]

    @property
    def arcs(self):
        return frozenset(zip(*map(lambda a: a.tolist(), np.nonzero(self.adj))))

    def neighbors(self, i):
        """Labels ``j`` with an arc ``j -> i``, ascending."""
        return np.flatnonzero(self.adj[:, i])

    def has_self_arcs(self):
        return bool(np.all(np.diag(self.adj)))

    def __eq__(self, other):
        return isinstance(other, DirectedGraph) and np.array_equal(self.adj, other.adj)

    def __hash__(self):
        return hash((self.m, self.adj.tobytes()))

    def __repr__(self):
        off = sorted((a, b) for a, b in self.arcs if a != b)
        return f"DirectedGraph(m={self.m}, self_arcs={self.has_self_arcs()}, arcs={off})"


def compose_graphs(Gp, Gq):
    """``Gq o Gp``: arc ``(i, j)`` whenever ``(i, k)`` is in ``Gp`` and ``(k, j)`` in ``Gq``.

    ``Gp`` acts first, so ``compose_graphs(gamma(A1), gamma(A2)) == gamma(A2 @ A1)``.
    """
    if Gp.m != Gq.m:
        raise ValueError("graphs have different vertex counts")
    prod = Gp.adj.astype(np.int64) @ Gq.adj.astype(np.int64)
    return DirectedGraph(prod > 0)


def compose_sequence(graphs):
    """Compose graphs in chronological order (first element acts first)."""
    graphs = list(graphs)
    if not graphs:
        raise ValueError("empty graph sequence")
    out = graphs[0]
    for G in graphs[1:]:
        out = compose_graphs(out, G)
    return out


def is_strongly_connected(G):
    n_comp, _ = connected_components(G.adj, directed=True, connection="strong")
    return n_comp == 1


def is_complete(G):
    return bool(G.adj.all())


def graph_of_matrix(A):
    """``gamma(A)``: arc ``(i, j)`` iff ``A[j, i] > 0``."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if np.any(A < 0):
        raise ValueError("matrix has negative entries")
    return DirectedGraph(A.T > 0)


# ---------------------------------------------------------------------------
# schedules
# ---------------------------------------------------------------------------

class ScheduleExhausted(IndexError):
    pass


class GraphSchedule:
    """Sequence of neighbor graphs ``N(1), N(2), ...``."""

    m: int
    horizon = None  # None means unbounded

    def graph(self, t):
        raise NotImplementedError

    def graphs(self, start, stop):
        """``[N(start), ..., N(stop)]`` inclusive."""
        return [self.graph(t) for t in range(start, stop + 1)]

    def _check_t(self, t):
        if t < 1:
            raise IndexError("schedule time starts at t = 1")
        if self.horizon is not None and t > self.horizon:
            raise ScheduleExhausted(f"schedule has horizon {self.horizon}, asked for t = {t}")

    @staticmethod
    def _validate(graphs):
        graphs = list(graphs)
        if not graphs:
            raise ValueError("schedule needs at least one graph")
        m = graphs[0].m
        for G in graphs:
            if G.m != m:
                raise ValueError("schedule graphs differ in vertex count")
            if not G.has_self_arcs():
                raise ValueError("neighbor graphs must carry every self-arc")
        return graphs, m


class Constant(GraphSchedule):
    def __init__(self, G):
        (self.G,), self.m = self._validate([G])

    def graph(self, t):
        self._check_t(t)
        return self.G


class PeriodicList(GraphSchedule):
    """``N(t) = graphs[(t - 1) % len(graphs)]``."""

    def __init__(self, graphs):
        self.pool, self.m = self._validate(graphs)

    def graph(self, t):
        self._check_t(t)
        return self.pool[(t - 1) % len(self.pool)]


class FiniteList(GraphSchedule):
    """Explicit finite sequence; ``N(t) = graphs[t - 1]``."""

    def __init__(self, graphs):
        self.pool, self.m = self._validate(graphs)
        self.horizon = len(self.pool)

    def graph(self, t):
        self._check_t(t)
        return self.pool[t - 1]


class SeededRandom(GraphSchedule):
    """Each ``N(t)`` drawn uniformly from ``pool`` by a seeded generator.

    Draws are made in time order, so every prefix is reproducible whatever
    order the graphs are requested in.
    """

    def __init__(self, pool, seed=42, horizon=None):
        self.pool, self.m = self._validate(pool)
        self.seed = seed
        self.horizon = horizon
        self._rng = np.random.default_rng(seed)
        self._drawn = []

    def graph(self, t):
        self._check_t(t)
        while len(self._drawn) < t:
            self._drawn.append(int(self._rng.integers(len(self.pool))))
        return self.pool[self._drawn[t - 1]]


# ---------------------------------------------------------------------------
# RJSC certification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RjscCertificate:
    l: int
    rho0: int
    verified_windows: int


@dataclass(frozen=True)
class RjscFailure:
    l: int
    rho0: int
    k: int
    first: int
    last: int
    composed: DirectedGraph


def rjsc_window(l, rho0, k):
    """Time indices ``(k-1)l + rho0 .. kl + rho0 - 1`` of window ``k``."""
    return (k - 1) * l + rho0, k * l + rho0 - 1


def certify_rjsc(schedule, l, rho0, k_max):
    """Check windows ``k = 1 .. k_max`` each compose to a strongly connected graph.

    Returns an :class:`RjscCertificate`, or an :class:`RjscFailure` for the
    first failing window. Raises :class:`ScheduleExhausted` when the schedule
    ends before the last window.
    """
    if l < 1 or rho0 < 1 or k_max < 1:
        raise ValueError("l, rho0 and k_max must be >= 1")
    last_needed = rjsc_window(l, rho0, k_max)[1]
    if schedule.horizon is not None and schedule.horizon < last_needed:
        raise ScheduleExhausted(
            f"schedule horizon {schedule.horizon} shorter than required {last_needed}")
    for k in range(1, k_max + 1):
        first, last = rjsc_window(l, rho0, k)
        G = compose_sequence(schedule.graphs(first, last))
        if not is_strongly_connected(G):
            return RjscFailure(l, rho0, k, first, last, G)
    return RjscCertificate(l, rho0, k_max)


def search_rjsc(schedule, l_max, k_max):
    """First ``(l, rho0)`` with ``1 <= rho0 <= l <= l_max`` that certifies.

    Returns the certificate, or the failure recorded for ``(l_max, 1)`` when
    nothing certifies.
    """
    failure = None
    for l in range(1, l_max + 1):
        for rho0 in range(1, l + 1):
            res = certify_rjsc(schedule, l, rho0, k_max)
            if isinstance(res, RjscCertificate):
                return res
            if l == l_max and rho0 == 1:
                failure = res
    return failure


# ---------------------------------------------------------------------------
# enumeration helpers
# ---------------------------------------------------------------------------

def self_arced_graphs(m):
    """Every self-arced digraph on ``m`` vertices (``2**(m*(m-1))`` of them)."""
    off = [(a, b) for a in range(m) for b in range(m) if a != b]
    for bits in itertools.product((False, True), repeat=len(off)):
        yield DirectedGraph.from_arcs(m, [e for e, on in zip(off, bits) if on])


def minimal_strongly_connected(m):
    """Self-arced strongly connected graphs from which no arc can be dropped.

    Composition is monotone in each argument, so a property that holds for all
    compositions of these holds for compositions of every self-arced strongly
    connected graph.
    """
    out = []
    for G in self_arced_graphs(m):
        if not is_strongly_connected(G):
            continue
        minimal = True
        for a, b in G.arcs:
            if a == b:
                continue
            adj = G.adj.copy()
            adj[a, b] = False
            if is_strongly_connected(DirectedGraph(adj)):
                minimal = False
                break
        if minimal:
            out.append(G)
    return out
