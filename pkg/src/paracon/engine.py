"""The distributed iteration ``x(t+1) = M((S(t) kron I) x(t))`` and its traces.

Time starts at ``t = 1``. Row ``k`` of every trace array holds time ``t = k + 1``.
"""
import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .graphs import GraphSchedule, ScheduleExhausted
from .matrices import StochasticMatrix, apply_kron, stochastic_from_graph, stochastic_from_weights
from .norms import _pnorm_rows, as_stacked, as_vector, mixed_norm_pinf

DEFAULT_HORIZON = 10_000
DEFAULT_EPS = 1e-8


def apply_maps(maps, x):
    """Stacked map ``M``: block ``i`` goes through ``maps[i]`` in ascending order."""
    return np.stack([M(x[i]) for i, M in enumerate(maps)])


def step(x, S, maps):
    """One stacked update ``M((S kron I) x)``."""
    x = as_stacked(x)
    if len(maps) != x.shape[0]:
        raise ValueError(f"{len(maps)} maps for {x.shape[0]} agents")
    return apply_maps(maps, apply_kron(S, x))


def step_agentwise(x, S, maps):
    """Same update written per agent: ``x_i <- M_i(sum_{j in N_i} s_ij x_j)``."""
    x = as_stacked(x)
    A = S.entries if isinstance(S, StochasticMatrix) else np.asarray(S, dtype=float)
    out = np.empty_like(x)
    for i, M in enumerate(maps):
        acc = np.zeros(x.shape[1])
        for j in np.flatnonzero(A[i]):
            acc = acc + A[i, j] * x[j]
        out[i] = M(acc)
    return out


def disagreement(x, p=2.0):
    """``max_{i,j} ||x_i - x_j||_p``."""
    x = as_stacked(x)
    m = x.shape[0]
    if m == 1:
        return 0.0
    diffs = (x[:, None, :] - x[None, :, :]).reshape(m * m, -1)
    return float(_pnorm_rows(diffs, p).max())


def residual(x, maps, p=2.0):
    """``max_i ||M_i(x_i) - x_i||_p``."""
    x = as_stacked(x)
    return float(_pnorm_rows(apply_maps(maps, x) - x, p).max())


def consensus_vector(y, m):
    """Stacked vector with every block equal to ``y``."""
    y = as_vector(y)
    return np.tile(y, (m, 1))


@dataclass
class Scenario:
    """Everything a run needs.

    ``weights`` is ``None`` (uniform ``1/|N_i|``), a dict ``{(i, j): s_ij}``
    applied to every graph, or a callable ``(t, G) -> StochasticMatrix``.
    """

    maps: list
    schedule: GraphSchedule
    x0: np.ndarray
    horizon: int = DEFAULT_HORIZON
    eps_consensus: float = DEFAULT_EPS
    eps_residual: float = DEFAULT_EPS
    p: float = 2.0
    weights: object = None
    witness: np.ndarray = None
    name: str = "scenario"

    def __post_init__(self):
        self.x0 = as_stacked(self.x0)
        m, n = self.x0.shape
        if len(self.maps) != m:
            raise ValueError(f"x0 has {m} blocks but {len(self.maps)} maps were given")
        bad = [i for i, M in enumerate(self.maps) if M.dim != n]
        if bad:
            raise ValueError(f"maps {bad} do not act on R^{n}")
        if self.schedule.m != m:
            raise ValueError(f"schedule has {self.schedule.m} vertices, scenario has {m} agents")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.witness is not None:
            self.witness = as_vector(self.witness)
            if self.witness.size != n:
                raise ValueError("witness dimension mismatch")

    @property
    def m(self):
        return self.x0.shape[0]

    @property
    def n(self):
        return self.x0.shape[1]


class _MatrixSource:
    # caches S per distinct graph; the matrix depends only on the graph
    def __init__(self, weights):
        self.weights = weights
        self.cache = {}

    def __call__(self, t, G):
        if callable(self.weights):
            return self.weights(t, G)
        S = self.cache.get(G)
        if S is None:
            if self.weights is None:
                S = stochastic_from_graph(G)
            else:
                S = stochastic_from_weights(G, self.weights)
            self.cache[G] = S
        return S


@dataclass
class Trace:
    """Per-step record of a run; row ``k`` is time ``t = k + 1``."""

    x: np.ndarray
    xbar: np.ndarray
    disagreement: np.ndarray
    residual: np.ndarray
    distance_to_witness: np.ndarray
    matrices: list
    converged: bool
    final: np.ndarray
    p: float = 2.0
    meta: dict = field(default_factory=dict)

    @property
    def steps(self):
        return self.x.shape[0]

    @property
    def times(self):
        return np.arange(1, self.steps + 1)

    def state(self, t):
        """``x(t)``; ``t = steps + 1`` gives the state after the last update."""
        if t == self.steps + 1:
            return self.final
        return self.x[t - 1]

    def averaged(self, t):
        """``xbar(t) = (S(t) kron I) x(t)``."""
        if not 1 <= t <= self.steps:
            raise IndexError(f"xbar({t}) not recorded (steps = {self.steps})")
        return self.xbar[t - 1]


def run(scenario, record=True):
    """Iterate until both metrics drop below their thresholds or the horizon ends.

    At each ``t`` the metrics are taken on ``x(t)``; the run stops at the first
    ``t`` with ``disagreement <= eps_consensus`` and ``residual <= eps_residual``.
    """
    sc = scenario
    m, n = sc.m, sc.n
    T = sc.horizon
    p = sc.p
    source = _MatrixSource(sc.weights)
    xs = np.empty((T, m, n))
    xbars = np.empty((T, m, n))
    dis = np.empty(T)
    res = np.empty(T)
    dist = np.full(T, np.nan)
    mats = []
    target = None if sc.witness is None else consensus_vector(sc.witness, m)
    x = sc.x0.copy()
    converged = False
    k = 0
    for t in range(1, T + 1):
        try:
            G = sc.schedule.graph(t)
        except ScheduleExhausted as exc:
            raise ScheduleExhausted(f"schedule exhausted at t = {t} before horizon {T}") from exc
        S = source(t, G)
        mapped = apply_maps(sc.maps, x)
        dis[k] = disagreement(x, p)
        res[k] = float(_pnorm_rows(mapped - x, p).max())
        if target is not None:
            dist[k] = mixed_norm_pinf(x - target, p)
        xbar = apply_kron(S, x)
        xs[k] = x
        xbars[k] = xbar
        mats.append(S)
        k += 1
        if dis[k - 1] <= sc.eps_consensus and res[k - 1] <= sc.eps_residual:
            converged = True
            break
        x = apply_maps(sc.maps, xbar)
    final = x
    return Trace(
        x=xs[:k], xbar=xbars[:k], disagreement=dis[:k], residual=res[:k],
        distance_to_witness=dist[:k], matrices=mats, converged=converged,
        final=final, p=p, meta={"name": sc.name, "m": m, "n": n, "horizon": T},
    )


def recomputation_errors(trace, maps):
    """``max |x(t+1) - M(xbar(t))|`` over recorded steps, plus the ``xbar`` identity."""
    worst = 0.0
    for k in range(trace.steps):
        xbar = apply_kron(trace.matrices[k], trace.x[k])
        worst = max(worst, float(np.max(np.abs(xbar - trace.xbar[k]))))
        nxt = trace.x[k + 1] if k + 1 < trace.steps else (trace.final if not trace.converged else None)
        if nxt is not None:
            worst = max(worst, float(np.max(np.abs(apply_maps(maps, trace.xbar[k]) - nxt))))
    return worst


def extract_z_subsequence(trace, l, rho0, q):
    """``z(k) = xbar((k-1) q l + rho0 - 1)`` for ``k = 2, 3, ...`` while recorded.

    Returns a list of ``(k, t, z)`` triples.
    """
    if l < 1 or rho0 < 1 or q < 1:
        raise ValueError("l, rho0 and q must be >= 1")
    out = []
    k = 2
    while True:
        t = (k - 1) * q * l + rho0 - 1
        if t > trace.steps:
            break
        out.append((k, t, trace.averaged(t)))
        k += 1
    if not out:
        raise ValueError(f"trace of {trace.steps} steps too short for z(2)")
    return out


def fejer_margins(trace, x_star, p=None):
    """Margins of ``||x(t+1)-x*|| <= ||xbar(t)-x*|| <= ||x(t)-x*||`` in the (p, inf) norm.

    Returns two arrays (one per inequality); a negative entry is a violation.
    """
    p = trace.p if p is None else p
    x_star = as_stacked(x_star)
    nxt = np.concatenate([trace.x[1:], trace.final[None]]) if not trace.converged else trace.x[1:]
    K = nxt.shape[0]
    d_x = _pnorm_rows((trace.x - x_star).reshape(-1, trace.x.shape[2]), p).reshape(trace.steps, -1).max(axis=1)
    d_bar = _pnorm_rows((trace.xbar - x_star).reshape(-1, trace.x.shape[2]), p).reshape(trace.steps, -1).max(axis=1)
    d_next = _pnorm_rows((nxt - x_star).reshape(-1, trace.x.shape[2]), p).reshape(K, -1).max(axis=1)
    return d_bar[:K] - d_next, d_x - d_bar


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

TRACE_HEADER = ("t", "agent", "component", "value", "xbar_value")
METRICS_HEADER = ("t", "disagreement", "residual", "distance_to_witness")


def _fmt(v):
    return repr(float(v))


def trace_csv(trace):
    """Long-format trace: one row per ``(t, agent, component)``; ``t`` from 1, indices from 0."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    m, n = trace.x.shape[1:]
    for k in range(trace.steps):
        xk, bk = trace.x[k], trace.xbar[k]
        for i in range(m):
            for c in range(n):
                w.writerow((k + 1, i, c, _fmt(xk[i, c]), _fmt(bk[i, c])))
    return buf.getvalue()


def metrics_csv(trace):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRICS_HEADER)
    for k in range(trace.steps):
        w.writerow((k + 1, _fmt(trace.disagreement[k]), _fmt(trace.residual[k]),
                    _fmt(trace.distance_to_witness[k])))
    return buf.getvalue()
