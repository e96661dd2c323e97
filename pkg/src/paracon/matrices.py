"""Row-stochastic step matrices, Kronecker application and transition products.

Weights are held as exact :class:`fractions.Fraction` values so that membership
in the finite weight set is decidable; the float matrix used for arithmetic is
derived from them once.
"""
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .norms import as_stacked

ROW_SUM_TOL = 1e-12
RANK_TOL = 1e-10


def exact_weight(w):
    """Canonical exact value of a weight given as a Fraction, int, float or string.

    Floats go through their shortest round-trip decimal, so ``0.1`` becomes
    ``1/10``; strings may be decimals or ratios such as ``"1/3"``.
    """
    if isinstance(w, Fraction):
        return w
    if isinstance(w, bool):
        raise TypeError("boolean is not a weight")
    if isinstance(w, int):
        return Fraction(w)
    if isinstance(w, float):
        if not np.isfinite(w):
            raise ValueError("weight must be finite")
        return Fraction(repr(w))
    if isinstance(w, str):
        return Fraction(w.strip())
    raise TypeError(f"cannot read weight {w!r}")


class StochasticMatrix:
    """Row-stochastic ``m x m`` matrix with entries drawn from a finite weight set."""

    __slots__ = ("exact", "entries", "weight_set")

    def __init__(self, exact, weight_set=None):
        exact = tuple(tuple(exact_weight(w) for w in row) for row in exact)
        m = len(exact)
        if m == 0 or any(len(row) != m for row in exact):
            raise ValueError("stochastic matrix must be square and non-empty")
        if any(w < 0 for row in exact for w in row):
            raise ValueError("stochastic matrix has negative entries")
        entries = np.array([[float(w) for w in row] for row in exact])
        bad = np.flatnonzero(np.abs(entries.sum(axis=1) - 1.0) > ROW_SUM_TOL)
        if bad.size:
            raise ValueError(f"rows {bad.tolist()} do not sum to 1")
        present = frozenset(w for row in exact for w in row)
        if weight_set is None:
            weight_set = present | {Fraction(0)}
        else:
            weight_set = frozenset(exact_weight(w) for w in weight_set)
            stray = present - weight_set
            if stray:
                raise ValueError(f"entries {sorted(stray)} outside the declared weight set")
        entries.setflags(write=False)
        self.exact = exact
        self.entries = entries
        self.weight_set = weight_set

    @property
    def m(self):
        return len(self.exact)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __eq__(self, other):
        return isinstance(other, StochasticMatrix) and self.exact == other.exact

    def __hash__(self):
        return hash(self.exact)

    def __repr__(self):
        rows = "; ".join(" ".join(str(w) for w in row) for row in self.exact)
        return f"StochasticMatrix([{rows}])"


def uniform_weight_set(m):
    return frozenset({Fraction(0)} | {Fraction(1, d) for d in range(1, m + 1)})


def stochastic_from_graph(G):
    """``s_ij = 1/|N_i|`` for each neighbor ``j`` of ``i`` (arc ``j -> i``), else 0."""
    if not G.has_self_arcs():
        raise ValueError("neighbor graph is missing self-arcs")
    m = G.m
    rows = []
    for i in range(m):
        nbrs = set(G.neighbors(i).tolist())
        w = Fraction(1, len(nbrs))
        rows.append([w if j in nbrs else Fraction(0) for j in range(m)])
    return StochasticMatrix(rows, uniform_weight_set(m))


def stochastic_from_weights(G, weights):
    """Weighted step matrix; ``weights[(i, j)]`` is ``s_ij``, positive exactly on arcs ``j -> i``.

    Missing pairs are zero.
    """
    m = G.m
    rows = [[Fraction(0)] * m for _ in range(m)]
    for (i, j), w in weights.items():
        if not (0 <= i < m and 0 <= j < m):
            raise ValueError(f"weight index ({i}, {j}) out of range")
        rows[i][j] = exact_weight(w)
    for i in range(m):
        for j in range(m):
            on_arc = bool(G.adj[j, i])
            w = rows[i][j]
            if on_arc and w <= 0:
                raise ValueError(f"arc {j} -> {i} has non-positive weight s[{i},{j}] = {w}")
            if not on_arc and w != 0:
                raise ValueError(f"weight s[{i},{j}] = {w} placed on a non-arc")
    return StochasticMatrix(rows)


def _as_float_matrix(S):
    return S.entries if isinstance(S, StochasticMatrix) else np.asarray(S, dtype=float)


def apply_kron(S, x):
    """``(S kron I) x`` for a stacked ``(m, n)`` vector, without forming the Kronecker product.

    Block ``i`` of the result is ``sum_j s_ij x_j`` accumulated in ascending ``j``.
    """
    A = _as_float_matrix(S)
    x = as_stacked(x)
    if A.shape != (x.shape[0], x.shape[0]):
        raise ValueError(f"matrix of shape {A.shape} cannot act on {x.shape[0]} blocks")
    out = np.zeros_like(x)
    for j in range(x.shape[0]):
        out += A[:, j, None] * x[j]
    return out


@dataclass(frozen=True)
class TransitionProduct:
    """``Phi(t, tau) = S(t) S(t-1) ... S(tau+1)``; the identity when ``t == tau``."""

    tau: int
    t: int
    matrix: np.ndarray


def phi_product(S_seq, tau, t):
    """Transition product over a schedule ``S_seq`` where ``S_seq[k-1]`` is ``S(k)``."""
    q = len(S_seq)
    if not 0 <= tau <= t <= q:
        raise IndexError(f"need 0 <= tau <= t <= {q}, got tau={tau}, t={t}")
    m = _as_float_matrix(S_seq[0]).shape[0] if q else None
    if m is None:
        raise IndexError("empty schedule")
    phi = np.eye(m)
    for s in range(tau + 1, t + 1):
        phi = _as_float_matrix(S_seq[s - 1]) @ phi
    phi.setflags(write=False)
    return TransitionProduct(tau, t, phi)


def phi_table(S_seq):
    """All products ``Phi(t, tau)`` for ``0 <= tau <= t <= q`` keyed by ``(t, tau)``."""
    q = len(S_seq)
    m = _as_float_matrix(S_seq[0]).shape[0]
    table = {}
    for tau in range(q + 1):
        phi = np.eye(m)
        table[(tau, tau)] = phi
        for s in range(tau + 1, q + 1):
            phi = _as_float_matrix(S_seq[s - 1]) @ phi
            table[(s, tau)] = phi
    return table


# ---------------------------------------------------------------------------
# predicates
# ---------------------------------------------------------------------------

def is_positive_matrix(A):
    return bool(np.all(_as_float_matrix(A) > 0))


def has_positive_diagonal(A):
    return bool(np.all(np.diag(_as_float_matrix(A)) > 0))


def is_doubly_stochastic(S):
    """Row and column sums equal one (exactly for :class:`StochasticMatrix`)."""
    if isinstance(S, StochasticMatrix):
        m = S.m
        rows_ok = all(sum(row) == 1 for row in S.exact)
        cols_ok = all(sum(S.exact[i][j] for i in range(m)) == 1 for j in range(m))
        if rows_ok and cols_ok:
            return True
    A = _as_float_matrix(S)
    if np.any(A < 0):
        return False
    return bool(np.all(np.abs(A.sum(axis=0) - 1) <= ROW_SUM_TOL)
                and np.all(np.abs(A.sum(axis=1) - 1) <= ROW_SUM_TOL))


def fixed_space_dimension(A):
    """Dimension of ``{v : A v = v}`` counted as singular values of ``A - I`` at or below RANK_TOL."""
    A = _as_float_matrix(A)
    sv = np.linalg.svd(A - np.eye(A.shape[0]), compute_uv=False)
    return int(np.sum(sv <= RANK_TOL))


def consensus_fixed_set_check(S):
    """True iff the eigenvalue-1 eigenspace of ``S`` is exactly ``span{1}``.

    Then the fixed set of ``S kron I`` is the consensus set.
    """
    return fixed_space_dimension(S) == 1

