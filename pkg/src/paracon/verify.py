"""Sampled and exhaustive numerical checks of the convergence argument.

Each ``check_*`` function returns a :class:`~paracon.report.CheckReport`.
The functions taking explicit inputs test one instance; the ``suite_*``
functions build randomized instances from a seed and are collected in
:data:`SUITE`.
"""
import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import graphs as gr
from .engine import apply_maps, consensus_vector, disagreement, fejer_margins, run
from .maps import (
    EPS_FIX, EPS_QNE, AffineLinearSolve, AffineSubspace, Averaged, Ball, Box, Halfspace,
    Indicator, Intersection, LinearOperator, PreconditionError, Projector,
    Proximal, Quadratic, Reflection, GradientDescent, WeightedL1, check_nonexpansive,
    check_paracontraction, check_quasi_nonexpansive, compose, fixed_set_closed_convex_probe,
    is_fixed_point, sample_points,
)
from .matrices import (
    apply_kron, consensus_fixed_set_check, has_positive_diagonal,
    is_positive_matrix, phi_product, phi_table, stochastic_from_graph,
    stochastic_from_weights,
)
from .norms import MixedNormSpec, mixed_norm, mixed_norm_pinf, p_norm
from .report import CheckReport
from .scenarios import counterexample_scenario, linear_system_scenario, COUNTER_C2

# tolerance for fixed points located by iteration
FOUND_TOL = 1e-8
# residual at which iterative fixed-point search stops
SEARCH_TOL = 1e-12
SEARCH_MAX_ITER = 100_000
# displacement below which a block counts as exactly at rest (identity cases)
REST_TOL = 1e-13
LINEARITY_TOL = 1e-10
FEJER_SLACK = 1e-12


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def find_fixed_point(T, x0, tol=SEARCH_TOL, max_iter=SEARCH_MAX_ITER, damping=0.5):
    """Damped iteration ``x <- (1-d) x + d T(x)`` until ``max|T(x) - x| <= tol``.

    Returns ``(x, converged)``.
    """
    x = np.array(x0, dtype=float)
    for _ in range(max_iter):
        Tx = T(x)
        if np.max(np.abs(Tx - x)) <= tol:
            return x, True
        x = (1.0 - damping) * x + damping * Tx
    return x, False


def composed_map(maps, S_list):
    """``x -> ((S(q) kron I) M o ... o (S(1) kron I) M)(x)``."""
    def T(x):
        for S in S_list:
            x = apply_kron(S, apply_maps(maps, x))
        return x
    return T


def random_self_arced_graph(rng, m, density=0.4):
    adj = rng.random((m, m)) < density
    np.fill_diagonal(adj, True)
    return gr.DirectedGraph(adj)


def random_strongly_connected(rng, m, density=0.3, tries=20):
    """Rejection sampling; after ``tries`` misses a random Hamiltonian cycle is overlaid."""
    for _ in range(tries):
        G = random_self_arced_graph(rng, m, density)
        if gr.is_strongly_connected(G):
            return G
    adj = G.adj.copy()
    order = rng.permutation(m)
    adj[order, np.roll(order, -1)] = True
    return gr.DirectedGraph(adj)


def random_weights_matrix(rng, G, max_int=4):
    """Step matrix on ``G`` with integer-ratio weights ``k / sum`` (a finite set)."""
    m = G.m
    weights = {}
    for i in range(m):
        nbrs = G.neighbors(i)
        ints = rng.integers(1, max_int + 1, size=nbrs.size)
        total = int(ints.sum())
        for j, k in zip(nbrs, ints):
            weights[(i, int(j))] = Fraction(int(k), total)
    return stochastic_from_weights(G, weights)


def random_step_matrix(rng, G):
    if rng.random() < 0.5:
        return stochastic_from_graph(G)
    return random_weights_matrix(rng, G)


def random_positive_stochastic(rng, m):
    return random_weights_matrix(rng, gr.DirectedGraph.complete(m), max_int=5)


def random_doubly_stochastic(rng, m, terms=None):
    """Convex mix of the identity (positive weight) and 1-3 random permutations, never ``I``."""
    if m < 2:
        raise ValueError("need m >= 2 for a doubly stochastic matrix other than I")
    terms = int(rng.integers(1, 4)) if terms is None else terms
    while True:
        w = rng.random(terms + 1) + 0.05
        w /= w.sum()
        S = w[0] * np.eye(m)
        for k in range(terms):
            S += w[k + 1] * np.eye(m)[rng.permutation(m)]
        if not np.allclose(S, np.eye(m)):
            return S


def random_projector_family(rng, m, n, y_star, full_dimensional=False):
    """``m`` projectors onto sets that all contain a ball of radius 0.5 around ``y_star``
    (or contain ``y_star`` on an affine subspace when ``full_dimensional`` is off).
    """
    y_star = np.asarray(y_star, float)
    kinds = ["halfspace", "ball", "box"] + ([] if full_dimensional else ["affine"])
    maps = []
    for i in range(m):
        kind = kinds[rng.integers(len(kinds))]
        if kind == "halfspace":
            a = rng.standard_normal(n)
            a /= np.linalg.norm(a)
            C = Halfspace(a, a @ y_star + rng.uniform(0.5, 1.5))
        elif kind == "ball":
            off = rng.standard_normal(n)
            off *= rng.uniform(0.0, 1.0) / np.linalg.norm(off)
            C = Ball(y_star + off, np.linalg.norm(off) + rng.uniform(0.5, 2.0))
        elif kind == "box":
            C = Box(y_star - rng.uniform(0.5, 1.5, n), y_star + rng.uniform(0.5, 1.5, n))
        else:
            A = rng.standard_normal((1, n))
            C = AffineSubspace(A, A @ y_star)
        maps.append(Projector(C))
    return maps


def library_maps():
    """One map of every kind on R^3, each with its known fixed point as ``witness``."""
    ball = Ball([1.0, 0.0, 0.0], 2.0)
    half = Halfspace([0.0, 1.0, 1.0], 0.5)
    box = Box([-1.0, -1.0, -1.0], [1.0, 2.0, 0.5])
    line = AffineSubspace([[1.0, -1.0, 0.0], [0.0, 0.0, 1.0]], [0.0, 0.0])
    theta = 0.7
    rot = np.array([[np.cos(theta), -np.sin(theta), 0.0],
                    [np.sin(theta), np.cos(theta), 0.0],
                    [0.0, 0.0, 1.0]])
    return {
        "affine_solve": AffineLinearSolve([[1.0, 2.0, 0.0]], [1.0]),
        "projector_ball": Projector(ball),
        "projector_halfspace": Projector(half),
        "projector_box": Projector(box),
        "projector_intersection": Projector(Intersection([ball, half])),
        "gradient": GradientDescent(np.diag([2.0, 1.0, 0.0]), [-2.0, -1.0, 0.0], alpha=0.5, lam=2.0),
        "prox_indicator": Proximal(Indicator(box)),
        "prox_quadratic": Proximal(Quadratic(np.diag([1.0, 1.0, 0.0]), [1.0, -1.0, 0.0]), step=0.5),
        "prox_l1": Proximal(WeightedL1(0.5, 3)),
        "averaged_reflection": Averaged(Reflection(line), 0.7),
        "averaged_rotation": Averaged(LinearOperator(rot), 0.5),
        "composite": compose([Projector(ball), Projector(half)], witness=[1.0, 0.0, 0.0]),
    }


def fixed_points_of(M, count, rng, radius=10.0):
    """``count`` fixed points of ``M``: its witness plus limits of iterations from random starts."""
    pts = [np.asarray(M.witness, float)]
    for x0 in sample_points(M.witness, count - 1, radius, rng):
        y, ok = find_fixed_point(M, x0, tol=1e-13, damping=1.0)
        if ok and is_fixed_point(M, y, EPS_FIX):
            pts.append(y)
    return pts


# ---------------------------------------------------------------------------
# single-map facts
# ---------------------------------------------------------------------------

def check_elsner(pool, selector, x0, T):
    """Run ``x <- P_sel(t)(x)`` for ``t = 1..T`` and test the limit.

    Every map chosen at least ``T / (2 len(pool))`` times must leave the limit
    fixed to within 1e-7. ``selector`` maps ``t`` to a pool index or is the
    string ``"cyclic"``.
    """
    if selector == "cyclic":
        selector = lambda t: (t - 1) % len(pool)  # noqa: E731
    x = np.array(x0, dtype=float)
    counts = np.zeros(len(pool), dtype=int)
    for t in range(1, T + 1):
        k = selector(t)
        counts[k] += 1
        x = pool[k](x)
    rep = CheckReport("check_elsner", notes={"limit": x.tolist()})
    threshold = T / (2 * len(pool))
    for k, P in enumerate(pool):
        if counts[k] < threshold:
            continue
        rep.trials += 1
        r = p_norm(P(x) - x, P.p)
        rep.margin(r, 1e-7)
        if r > 1e-7:
            rep.violate(map=k, residual=r)
    return rep


def check_composition_fixed_sets(P1, P2, samples, witness):
    """Both inclusions of ``F(P1 o P2) = F(P1) & F(P2)`` on samples.

    Intersection points come from the witness, from iterating the composite
    to its limit from each sample, and from convex mixes of those.
    """
    comp = compose([P1, P2], witness)
    rep = CheckReport("check_composition_fixed_sets")
    rng = np.random.default_rng(0)
    inter = [np.asarray(witness, float)]
    for x in samples:
        x = np.asarray(x, float)
        rep.trials += 1
        both = P1.fixed_oracle(x) and P2.fixed_oracle(x)
        fixed = is_fixed_point(comp, x, EPS_FIX)
        if both != fixed:
            rep.violate(x=x.tolist(), in_both=both, composite_fixed=fixed)
        z, ok = find_fixed_point(comp, x, damping=1.0)
        rep.trials += 1
        if not ok:
            rep.violate(x=x.tolist(), reason="composite iteration did not converge")
            continue
        if not (P1.fixed_oracle(z, FOUND_TOL) and P2.fixed_oracle(z, FOUND_TOL)):
            rep.violate(z=z.tolist(), reason="composite fixed point outside the intersection")
        inter.append(z)
    for _ in range(len(samples)):
        a, b = rng.choice(len(inter), 2)
        lam = rng.random()
        z = lam * inter[a] + (1 - lam) * inter[b]
        rep.trials += 1
        r = p_norm(comp(z) - z, comp.p)
        rep.margin(r, FOUND_TOL)
        if r > FOUND_TOL:
            rep.violate(z=z.tolist(), reason="intersection point moved by composite", residual=r)
    return rep


def _matrix_of(P, n=None):
    if isinstance(P, np.ndarray) or isinstance(P, (list, tuple)):
        A = np.asarray(P, dtype=float)
        return A, (lambda x: A @ x)
    n = P.dim if n is None else n
    cols = [P(e) for e in np.eye(n)]
    return np.column_stack(cols), P


def check_linear_qne_iff_ne(P, samples, p=2.0, rng=None):
    """For a linear ``P``: quasi-nonexpansive iff nonexpansive, and paracontraction
    iff ``||P x|| < ||x||`` off the fixed set, each side decided on samples.

    The report fails only when an equivalence breaks; the four sampled truth
    values are in ``notes``.
    """
    rng = np.random.default_rng(7) if rng is None else rng
    samples = [np.asarray(x, float) for x in samples]
    A, f = _matrix_of(P, samples[0].size)
    n = A.shape[0]
    for x, y in zip(samples, samples[1:]):
        c = float(rng.standard_normal())
        err = max(np.max(np.abs(f(x + y) - f(x) - f(y))), np.max(np.abs(f(c * x) - c * f(x))))
        if err > LINEARITY_TOL * max(1.0, np.max(np.abs(x)) + np.max(np.abs(y))):
            raise ValueError("map is not linear on the samples")
    # fixed set: null space of A - I
    _, sv, vt = np.linalg.svd(A - np.eye(n))
    basis = vt[sv <= 1e-10]
    fixed = [np.zeros(n)] + [basis.T @ (10 * rng.standard_normal(basis.shape[0]))
                             for _ in range(5) if basis.shape[0]]

    def norm(v):
        return p_norm(v, p)

    qne = all(norm(f(x) - y) <= norm(x - y) * (1 + EPS_QNE) for x in samples for y in fixed)
    ne = all(norm(f(x) - f(z)) <= norm(x - z) * (1 + EPS_QNE)
             for x, z in itertools.combinations(samples, 2))
    moving = [x for x in samples if norm(f(x) - x) > EPS_FIX]
    pc = all(norm(f(x) - y) < norm(x - y) for x in moving for y in fixed)
    drop = all(norm(f(x)) < norm(x) for x in moving)
    rep = CheckReport("check_linear_qne_iff_ne", trials=len(samples),
                      notes={"quasi_nonexpansive": qne, "nonexpansive": ne,
                             "paracontraction": pc, "norm_drop": drop})
    if qne != ne:
        rep.violate(reason="quasi-nonexpansive and nonexpansive disagree", qne=qne, ne=ne)
    if pc != drop:
        rep.violate(reason="paracontraction and norm drop disagree", pc=pc, drop=drop)
    return rep


# ---------------------------------------------------------------------------
# stacked maps
# ---------------------------------------------------------------------------

def _stacked_fixed(maps, x, tol=EPS_FIX):
    return all(p_norm(M(x[i]) - x[i], M.p) <= tol for i, M in enumerate(maps))


def check_M_pc_22(maps, samples, y_fixed):
    """The stacked map is a paracontraction in ``||.||_{2,2}``, on samples."""
    spec = MixedNormSpec(2, 2)
    rep = CheckReport("check_M_pc_22")
    for y in y_fixed:
        if not _stacked_fixed(maps, y):
            raise PreconditionError("y is not a fixed point of the stacked map")
    for x in samples:
        Mx = apply_maps(maps, x)
        moving = not _stacked_fixed(maps, x)
        for y in y_fixed:
            rep.trials += 1
            lhs = mixed_norm(Mx - y, spec)
            rhs = mixed_norm(x - y, spec)
            if moving:
                rep.margin(lhs, rhs)
                if not lhs < rhs:
                    rep.violate(lhs=lhs, rhs=rhs)
            elif lhs > rhs * (1 + EPS_QNE):
                rep.violate(lhs=lhs, rhs=rhs, fixed_sample=True)
    return rep


def check_M_qne_pinf(maps, samples, y_fixed, p=2.0):
    """The stacked map is quasi-nonexpansive in ``||.||_{p,inf}``, on samples."""
    rep = CheckReport("check_M_qne_pinf")
    for y in y_fixed:
        if not _stacked_fixed(maps, y):
            raise PreconditionError("y is not a fixed point of the stacked map")
    for x in samples:
        Mx = apply_maps(maps, x)
        for y in y_fixed:
            rep.trials += 1
            lhs = mixed_norm_pinf(Mx - y, p)
            rhs = mixed_norm_pinf(x - y, p)
            rep.margin(lhs, rhs)
            if lhs > rhs * (1 + EPS_QNE):
                rep.violate(lhs=lhs, rhs=rhs)
    return rep


def pinf_equality_witness(M1, M2, p=2.0, rng=None, tries=2000):
    """Two-agent input on which the stacked map keeps ``||.||_{p,inf}`` distance exactly.

    Block 2 sits at a point ``M2`` leaves bit-for-bit unchanged and far from
    ``y2``; block 1 is moved by ``M1`` but lies closer to ``y1``. Returns
    ``(x, y)`` stacked arrays.
    """
    rng = np.random.default_rng(3) if rng is None else rng
    y1 = np.asarray(M1.witness, float)
    y2 = np.asarray(M2.witness, float)
    best = None
    for x2 in sample_points(y2, tries, 10.0, rng):
        if np.array_equal(M2(x2), x2):
            d = p_norm(x2 - y2, p)
            if best is None or d > best[1]:
                best = (x2, d)
    if best is None or best[1] == 0.0:
        raise ValueError("no exactly-fixed point of M2 away from its witness was found")
    x2, d2 = best
    for _ in range(tries):
        u = rng.standard_normal(y1.size)
        x1 = y1 + u * (0.5 * d2 / p_norm(u, p))
        if p_norm(M1(x1) - x1, p) > EPS_FIX:
            return np.stack([x1, x2]), np.stack([y1, y2])
    raise ValueError("no non-fixed point of M1 found near its witness")


def check_M_pinf_equality(M1, M2, p=2.0, rng=None):
    """Stacked map fails strictness in ``||.||_{p,inf}`` on the constructed witness."""
    x, y = pinf_equality_witness(M1, M2, p, rng)
    Mx = apply_maps([M1, M2], x)
    lhs = mixed_norm_pinf(Mx - y, p)
    rhs = mixed_norm_pinf(x - y, p)
    rep = CheckReport("check_M_pinf_equality", trials=1,
                      notes={"lhs": lhs, "rhs": rhs, "block1_moved": p_norm(Mx[0] - x[0], p)})
    rep.margin(abs(lhs - rhs), 1e-12)
    if abs(lhs - rhs) > 1e-12:
        rep.violate(lhs=lhs, rhs=rhs)
    return rep


# ---------------------------------------------------------------------------
# stochastic matrices
# ---------------------------------------------------------------------------

def check_doubly_stochastic_pc(S, samples):
    """``||S x||_2 < ||x||_2`` for sampled ``x`` off ``F(S)``; ``S`` doubly stochastic, positive diagonal."""
    S = np.asarray(S, float)
    if not (has_positive_diagonal(S) and np.allclose(S.sum(0), 1, atol=1e-12, rtol=0)
            and np.allclose(S.sum(1), 1, atol=1e-12, rtol=0) and np.all(S >= 0)):
        raise PreconditionError("S must be doubly stochastic with positive diagonal")
    rep = CheckReport("check_doubly_stochastic_pc")
    for x in samples:
        x = np.asarray(x, float)
        Sx = S @ x
        if p_norm(Sx - x, 2) <= EPS_FIX:
            continue
        rep.trials += 1
        lhs, rhs = p_norm(Sx, 2), p_norm(x, 2)
        if not rep.margin(lhs, rhs) > 0:
            rep.violate(lhs=lhs, rhs=rhs)
    return rep


def check_S_pc_pinf(S, samples, p):
    """``||(S kron I)x||_{p,inf} < ||x||_{p,inf}`` for sampled stacked ``x`` off the consensus set."""
    if not is_positive_matrix(S):
        raise PreconditionError("S must be positive")
    rep = CheckReport(f"check_S_pc_pinf(p={p})")
    for x in samples:
        if disagreement(x, 2.0) <= EPS_FIX:
            continue
        rep.trials += 1
        lhs = mixed_norm_pinf(apply_kron(S, x), p)
        rhs = mixed_norm_pinf(x, p)
        if not rep.margin(lhs, rhs) > 0:
            rep.violate(lhs=lhs, rhs=rhs)
    return rep


def necessity_witness(S, n, p, z=None):
    """Stacked ``x`` with ``x_k = 0`` and ``x_j = z`` elsewhere (``||z||_p = 1``) for a zero ``s_ik``.

    Returns ``(x, i, k)`` or ``None`` when ``S`` is positive.
    """
    A = np.asarray(S, float)
    zeros = np.argwhere(A == 0)
    if zeros.size == 0:
        return None
    i, k = (int(v) for v in zeros[0])
    if z is None:
        z = np.ones(n)
    z = np.asarray(z, float) / p_norm(z, p)
    x = np.tile(z, (A.shape[0], 1))
    x[k] = 0.0
    return x, i, k


def check_positive_necessity(S, n=2, p=2.0):
    """On the witness of :func:`necessity_witness` the ``(p, inf)`` norm is kept exactly.

    Skipped (zero trials) unless ``F(S kron I)`` is the consensus set.
    """
    rep = CheckReport("check_positive_necessity")
    if not consensus_fixed_set_check(S):
        rep.notes["skipped"] = "fixed set of S is larger than the consensus set"
        return rep
    w = necessity_witness(S, n, p)
    if w is None:
        rep.notes["skipped"] = "S is positive"
        return rep
    x, i, k = w
    rep.trials = 1
    lhs = mixed_norm_pinf(apply_kron(S, x), p)
    rhs = mixed_norm_pinf(x, p)
    rep.notes.update(lhs=lhs, rhs=rhs, zero_entry=(i, k))
    gap = abs(lhs - rhs)
    rep.margin(gap, 1e-15)
    if gap > 1e-15 or abs(rhs - 1.0) > 1e-15:
        rep.violate(lhs=lhs, rhs=rhs)
    return rep


# ---------------------------------------------------------------------------
# v-sequences and composed maps
# ---------------------------------------------------------------------------

@dataclass
class VSequence:
    """``v(0..q)`` with ``v_i(t+1) = sum_j s_ij(t+1) M_j(v_j(t))``."""

    v: np.ndarray
    S_list: list
    maps: list
    y_star: np.ndarray

    @property
    def q(self):
        return len(self.S_list)

    def recompute_error(self):
        err = 0.0
        for t in range(self.q):
            nxt = apply_kron(self.S_list[t], apply_maps(self.maps, self.v[t]))
            err = max(err, float(np.max(np.abs(nxt - self.v[t + 1]))))
        return err


def v_sequence(maps, S_list, v0, y_star):
    v = [np.asarray(v0, float)]
    for S in S_list:
        v.append(apply_kron(S, apply_maps(maps, v[-1])))
    return VSequence(np.stack(v), list(S_list), list(maps), np.asarray(y_star, float))


def _block_dist(v, y, p):
    return np.array([p_norm(b - y, p) for b in v])


def check_v_inequality(vs, p=2.0, slack=1e-10):
    """``||v_i(t) - y*|| <= sum_j phi_ij(t, tau) ||v_j(tau) - y*||`` for all ``0 <= tau <= t <= q``."""
    table = phi_table(vs.S_list)
    dist = [_block_dist(vs.v[t], vs.y_star, p) for t in range(vs.q + 1)]
    rep = CheckReport("check_v_inequality")
    for (t, tau), phi in table.items():
        rhs = phi @ dist[tau]
        for i in range(len(vs.maps)):
            rep.trials += 1
            rep.margin(dist[t][i], rhs[i])
            if dist[t][i] > rhs[i] + slack:
                rep.violate(i=i, t=t, tau=tau, lhs=dist[t][i], rhs=rhs[i])
    return rep


def check_phi_inequality(vs, p=2.0, slack=1e-10):
    """The bound at ``(q, 0)`` with its strict and identity refinements.

    Strict: if some ``phi_ij(q, t) > 0`` with ``M_j`` moving ``v_j(t)`` by more
    than EPS_FIX, then ``lhs < rhs``. Identity: if every such ``j`` is at rest
    (moved by at most REST_TOL), then ``v_i(q) = sum_p phi_ip(q,0) v_p(0)`` to 1e-10.
    """
    q = vs.q
    table = phi_table(vs.S_list)
    moved = np.array([[p_norm(M(vs.v[t][j]) - vs.v[t][j], p) for j, M in enumerate(vs.maps)]
                      for t in range(q)])
    d0 = _block_dist(vs.v[0], vs.y_star, p)
    dq = _block_dist(vs.v[q], vs.y_star, p)
    rep = CheckReport("check_phi_inequality", notes={"strict_cases": 0, "identity_cases": 0})
    phi_q0 = table[(q, 0)]
    for i in range(len(vs.maps)):
        rep.trials += 1
        lhs, rhs = dq[i], float(phi_q0[i] @ d0)
        if lhs > rhs + slack:
            rep.violate(kind="bound", i=i, lhs=lhs, rhs=rhs)
        reach = np.array([table[(q, t)][i] > 0 for t in range(q)])
        if np.any(reach & (moved > EPS_FIX)):
            rep.notes["strict_cases"] += 1
            rep.margin(lhs, rhs)
            if not lhs < rhs:
                rep.violate(kind="strict", i=i, lhs=lhs, rhs=rhs)
        elif np.all(moved[reach] <= REST_TOL):
            rep.notes["identity_cases"] += 1
            err = float(np.max(np.abs(vs.v[q][i] - phi_q0[i] @ vs.v[0])))
            if err > 1e-10:
                rep.violate(kind="identity", i=i, error=err)
    return rep


def _check_fixed_set(rep, maps, T, witnesses, starts, p):
    """Shared part of the class and composed-map lemmas.

    Consensus copies of common fixed points (and convex mixes of them) must be
    fixed by ``T``; limits of ``T`` from ``starts`` must be consensus vectors
    whose block is fixed by every map.
    """
    m = len(maps)
    commons = [np.asarray(w, float) for w in witnesses]
    for x0 in starts:
        z, ok = find_fixed_point(T, x0)
        rep.trials += 1
        if not ok:
            rep.violate(reason="fixed-point search did not converge")
            continue
        dis = disagreement(z, p)
        off = max(p_norm(M(z[i]) - z[i], p) for i in range(m) for M in maps)
        if dis > FOUND_TOL or off > FOUND_TOL:
            rep.violate(reason="fixed point of composed map outside F(M) & C",
                        disagreement=dis, map_residual=off)
        else:
            commons.append(z.mean(axis=0))
    rng = np.random.default_rng(len(commons))
    mixes = list(commons)
    for _ in range(len(commons)):
        a, b = rng.choice(len(commons), 2)
        lam = rng.random()
        mixes.append(lam * commons[a] + (1 - lam) * commons[b])
    for y in mixes:
        yb = consensus_vector(y, m)
        rep.trials += 1
        r = mixed_norm_pinf(T(yb) - yb, p)
        if r > FOUND_TOL:
            rep.violate(reason="consensus common fixed point moved", residual=r)
    return commons


def check_class_lemma(maps, S_list, samples, witness, p=2.0, n_starts=2):
    """``F(composed map) = F(M) & C`` when ``gamma(S(q)...S(1))`` is strongly connected."""
    prod = phi_product(S_list, 0, len(S_list)).matrix
    if not gr.is_strongly_connected(gr.graph_of_matrix(prod)):
        raise PreconditionError("product of step matrices is not strongly connected")
    T = composed_map(maps, S_list)
    rep = CheckReport("check_class_lemma")
    _check_fixed_set(rep, maps, T, [witness], list(samples)[:n_starts], p)
    for x in samples:
        rep.trials += 1
        if mixed_norm_pinf(T(x) - x, p) <= EPS_FIX:
            if disagreement(x, p) > FOUND_TOL or not _stacked_fixed(maps, x, FOUND_TOL):
                rep.violate(reason="sample fixed by composed map outside F(M) & C")
    return rep


def check_composed_map_pc(maps, S_list, samples, witness, p=2.0, n_starts=2):
    """Composed map over a window with positive product is a ``(p, inf)`` paracontraction
    with fixed set ``F(M) & C``.
    """
    prod = phi_product(S_list, 0, len(S_list)).matrix
    if not is_positive_matrix(prod):
        raise PreconditionError("product of step matrices is not positive")
    T = composed_map(maps, S_list)
    m = len(maps)
    rep = CheckReport("check_composed_map_pc", notes={"fixed_samples": 0})
    samples = list(samples)
    commons = _check_fixed_set(rep, maps, T, [witness], samples[:n_starts], p)
    targets = [consensus_vector(y, m) for y in commons]
    for x in samples:
        Tx = T(x)
        if mixed_norm_pinf(Tx - x, p) <= EPS_FIX:
            rep.notes["fixed_samples"] += 1
            continue
        for yb in targets:
            rep.trials += 1
            lhs = mixed_norm_pinf(Tx - yb, p)
            rhs = mixed_norm_pinf(x - yb, p)
            rep.margin(lhs, rhs)
            if not lhs < rhs:
                rep.violate(lhs=lhs, rhs=rhs)
    return rep


# ---------------------------------------------------------------------------
# scenario-level checks
# ---------------------------------------------------------------------------

def check_counterexample(T=1000):
    """Constant rooted graph: agent 0 freezes outside ``C2``; control and contrast runs converge."""
    rep = CheckReport("check_counterexample")
    sc = counterexample_scenario(horizon=T)
    tr = run(sc)
    x1 = tr.x[:, 0, :]
    x1_all = np.concatenate([x1, tr.final[None, 0, :]])
    drift = float(np.max(np.abs(x1_all - x1_all[0])))
    delta0 = float(COUNTER_C2.distance(x1_all[0])) * (1 - 1e-9)
    dmin = float(min(COUNTER_C2.distance(v) for v in x1_all))
    rep.trials += 3
    rep.notes.update(steps=tr.steps, drift=drift, delta0=delta0, min_distance=dmin)
    rep.margin(drift, 1e-12)
    if drift > 1e-12:
        rep.violate(reason="agent 0 moved", drift=drift)
    rep.margin(delta0, dmin)
    if dmin < delta0:
        rep.violate(reason="agent 0 approached C2", min_distance=dmin, delta0=delta0)
    if tr.converged:
        rep.violate(reason="rooted-graph run reported convergence")
    control = run(counterexample_scenario(x1=[0.5, 1.0], horizon=T))
    rep.trials += 1
    if not control.converged:
        rep.violate(reason="control run from a common fixed point did not converge")
    contrast = run(counterexample_scenario(reverse_arc=True, horizon=T))
    rep.trials += 1
    if not contrast.converged:
        rep.violate(reason="strongly connected contrast run did not converge")
    rep.notes.update(control_steps=control.steps, contrast_steps=contrast.steps)
    return rep


def regression_scenarios():
    return [
        linear_system_scenario("complete", horizon=5000),
        linear_system_scenario("periodic", horizon=20_000),
        counterexample_scenario(),
        counterexample_scenario(reverse_arc=True),
    ]


def check_fejer(trace, x_star, slack=FEJER_SLACK):
    """Both links of the Fejer chain at every recorded step."""
    a, b = fejer_margins(trace, x_star)
    rep = CheckReport("check_fejer", trials=int(a.size + b.size))
    worst = float(min(a.min(initial=np.inf), b.min(initial=np.inf)))
    rep.margin(0.0, worst)
    for name, arr in (("map", a), ("average", b)):
        bad = np.flatnonzero(arr < -slack)
        for k in bad[:10]:
            rep.violate(link=name, t=int(k + 1), margin=float(arr[k]))
    return rep


def check_subsequence_lemma(trace, x_star, l, rho0, slack=FEJER_SLACK):
    """``||x(t) - x*|| <= ||xbar(rho_k) - x*||`` for every z-index ``rho_k`` and ``t > rho_k``."""
    from .engine import extract_z_subsequence

    p = trace.p
    m = trace.x.shape[1]
    q = max(m - 1, 1)
    zs = extract_z_subsequence(trace, l, rho0, q)
    states = np.concatenate([trace.x, trace.final[None]])
    d_x = np.array([mixed_norm_pinf(s - x_star, p) for s in states])
    # suffix max over times > t
    suffix = np.maximum.accumulate(d_x[::-1])[::-1]
    rep = CheckReport("check_subsequence_lemma")
    for k, t, z in zs:
        if t >= len(states):
            continue
        rep.trials += 1
        lhs = suffix[t]  # states index t is time t + 1
        rhs = mixed_norm_pinf(z - x_star, p)
        rep.margin(lhs, rhs)
        if lhs > rhs + slack:
            rep.violate(k=k, t=t, lhs=float(lhs), rhs=rhs)
    return rep


# ---------------------------------------------------------------------------
# randomized suites
# ---------------------------------------------------------------------------

def suite_map_library(seed=42, n_x=100, n_y=5):
    """Every library map: paracontraction on >= 500 pairs, quasi-nonexpansiveness,
    plus kind-specific identities."""
    rng = np.random.default_rng(seed)
    rep = CheckReport("map_library")
    for name, M in library_maps().items():
        ys = fixed_points_of(M, n_y, rng)
        xs = sample_points(M.witness, n_x, rng=rng)
        while len(ys) * n_x < 500:
            ys.append(ys[rng.integers(len(ys))])
        sub = check_paracontraction(M, xs, ys)
        sub.name = f"paracontraction[{name}]"
        rep.merge(sub)
        sub = check_quasi_nonexpansive(M, xs, ys)
        sub.name = f"quasi_nonexpansive[{name}]"
        rep.merge(sub)
        for x in xs[:20]:
            rep.trials += 1
            if M.fixed_oracle(x) and not is_fixed_point(M, x, EPS_FIX):
                rep.violate(map=name, reason="oracle says fixed but evaluator moves x")
        if isinstance(M, Projector):
            for x in xs:
                rep.trials += 1
                Px = M(x)
                if np.max(np.abs(M(Px) - Px)) > 1e-12:
                    rep.violate(map=name, reason="projector not idempotent")
        if isinstance(M, AffineLinearSolve):
            P = M.projection_matrix
            for x in xs:
                for y in ys:
                    rep.trials += 1
                    if np.max(np.abs((M(x) - y) - P @ (x - y))) > 1e-10:
                        rep.violate(map=name, reason="M(x) - y != P(x - y)")
        if isinstance(M, Proximal):
            for x in xs:
                rep.trials += 1
                r = M.optimality_residual(x)
                if r > 1e-8:
                    rep.violate(map=name, reason="prox optimality", residual=r)
        if isinstance(M, Averaged):
            pairs = list(zip(xs[::2], xs[1::2]))
            sub = check_nonexpansive(M, pairs)
            sub.name = f"nonexpansive[{name}]"
            rep.merge(sub)
        if hasattr(M, "maps"):
            for x in xs:
                rep.trials += 1
                members = all(P.fixed_oracle(x) for P in M.maps)
                if members != M.fixed_oracle(x) or members != is_fixed_point(M, x, EPS_FIX):
                    rep.violate(map=name, reason="composite oracle disagrees with members")
    return rep


def suite_closed_convex(seed=42, n_probes=500):
    """Convex mixes of fixed points stay fixed, for every library map."""
    rng = np.random.default_rng(seed)
    rep = CheckReport("closed_convex")
    for name, M in library_maps().items():
        ys = fixed_points_of(M, 8, rng)
        for _ in range(n_probes):
            a, b = rng.choice(len(ys), 2)
            alpha = rng.random()
            rep.trials += 1
            if not fixed_set_closed_convex_probe(M, ys[a], ys[b], alpha):
                rep.violate(map=name, alpha=alpha)
    return rep


def suite_elsner(seed=42):
    rng = np.random.default_rng(seed)
    h1 = Projector(Halfspace([1.0, 1.0], 1.0))
    h2 = Projector(Halfspace([-1.0, 2.0], 0.5))
    rep = CheckReport("check_elsner")
    rep.merge(check_elsner([h1, h2], "cyclic", [8.0, 9.0], 2000))
    ball = Projector(Ball([0.0, 0.0], 1.0))
    rep.merge(check_elsner([ball], "cyclic", [5.0, -3.0], 50))
    pool = [h1, h2, ball]
    choice = rng.integers(0, 3, size=3000)
    rep.merge(check_elsner(pool, lambda t: int(choice[t - 1]), [8.0, 9.0], 3000))
    return rep


def suite_composition(seed=42):
    rng = np.random.default_rng(seed)
    rep = CheckReport("check_composition_fixed_sets")
    lib = library_maps()
    pairs = [
        (lib["projector_ball"], lib["projector_halfspace"], [1.0, 0.0, 0.0]),
        (lib["projector_box"], lib["affine_solve"], [1.0, 0.0, 0.0]),
        (lib["gradient"], lib["projector_ball"], [1.0, 1.0, 0.0]),
    ]
    for P1, P2, w in pairs:
        samples = sample_points(w, 30, rng=rng)
        rep.merge(check_composition_fixed_sets(P1, P2, samples, w))
    return rep


def suite_linear(seed=42):
    rng = np.random.default_rng(seed)
    rep = CheckReport("check_linear_qne_iff_ne")
    A = rng.standard_normal((1, 3))
    proj = np.eye(3) - A.T @ A / (A @ A.T)
    rot = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    avg = random_doubly_stochastic(rng, 3, terms=2)
    cases = {"projection": (proj, (True, True)), "scaling": (2 * np.eye(3), (False, False)),
             "rotation": (rot, (True, False)), "doubly_stochastic": (avg, (True, True))}
    for name, (P, (qne, pc)) in cases.items():
        samples = list(10 * rng.standard_normal((60, 3)))
        sub = check_linear_qne_iff_ne(P, samples)
        sub.name = f"linear[{name}]"
        if sub.notes["quasi_nonexpansive"] != qne or sub.notes["paracontraction"] != pc:
            sub.violate(reason="unexpected property value", notes=dict(sub.notes))
        rep.merge(sub)
    return rep


def suite_stacked_maps(seed=42, n_samples=200):
    rng = np.random.default_rng(seed)
    rep = CheckReport("check_M_pc_22/check_M_qne_pinf")
    y_star = np.zeros(3)
    for m in (2, 3, 4):
        maps = random_projector_family(rng, m, 3, y_star)
        fixed = [fixed_points_of(M, 4, rng) for M in maps]
        ys = [np.stack([f[rng.integers(len(f))] for f in fixed]) for _ in range(4)]
        xs = [y_star + 10 * rng.standard_normal((m, 3)) for _ in range(n_samples)]
        rep.merge(check_M_pc_22(maps, xs, ys))
        # projectors contract in the 2-norm only, so the block norm is p = 2
        rep.merge(check_M_qne_pinf(maps, xs, ys, 2.0))
    lib = library_maps()
    rep.merge(check_M_pinf_equality(lib["projector_ball"], lib["projector_halfspace"], 2.0))
    rep.merge(check_M_pinf_equality(lib["affine_solve"], lib["projector_box"], 2.0))
    return rep


def suite_doubly_stochastic(seed=42, n_matrices=100, n_samples=100):
    rng = np.random.default_rng(seed)
    rep = CheckReport("doubly_stochastic_pc", notes={"matrices": 0, "min_samples_off_fixed_set": None})
    for _ in range(n_matrices):
        m = int(rng.integers(2, 7))
        S = random_doubly_stochastic(rng, m)
        # keep drawing until n_samples points lie off F(S)
        xs = []
        while len(xs) < n_samples:
            x = 10 * rng.standard_normal(m)
            if p_norm(S @ x - x, 2) > EPS_FIX:
                xs.append(x)
        sub = check_doubly_stochastic_pc(S, xs)
        rep.notes["matrices"] += 1
        low = rep.notes["min_samples_off_fixed_set"]
        rep.notes["min_samples_off_fixed_set"] = sub.trials if low is None else min(low, sub.trials)
        rep.merge(sub)
        # S kron I in the (2,2) norm, which is the flat 2-norm
        X = 10 * rng.standard_normal((10, m, 2))
        for x in X:
            if p_norm((apply_kron(S, x) - x).ravel(), 2) <= EPS_FIX:
                continue
            rep.trials += 1
            lhs = mixed_norm(apply_kron(S, x), MixedNormSpec(2, 2))
            rhs = mixed_norm(x, MixedNormSpec(2, 2))
            if not rep.margin(lhs, rhs) > 0:
                rep.violate(lhs=lhs, rhs=rhs, kron=True)
    return rep


def suite_positive_stochastic(seed=42, n_samples=500):
    rng = np.random.default_rng(seed)
    rep = CheckReport("positive_stochastic_pinf")
    for p in (1.5, 2.0, 3.0):
        for m in (2, 3, 5):
            S = random_positive_stochastic(rng, m)
            n = 3
            xs = list(10 * rng.standard_normal((n_samples, m, n)))
            # blocks that are all multiples of one vector
            base = rng.standard_normal(n)
            xs += [np.outer(rng.uniform(-3, 3, m), base) for _ in range(n_samples // 5)]
            rep.merge(check_S_pc_pinf(S, xs, p))
    checked = 0
    for _ in range(200):
        m = int(rng.integers(2, 6))
        G = random_strongly_connected(rng, m, density=0.3)
        if gr.is_complete(G):
            continue
        S = random_step_matrix(rng, G)
        for p in (1.5, 2.0, 3.0):
            sub = check_positive_necessity(S, n=3, p=p)
            checked += sub.trials
            rep.merge(sub)
    rep.notes["necessity_probes"] = checked
    return rep


def suite_graph_algebra(seed=42, n_pairs=200, n_random=100):
    rng = np.random.default_rng(seed)
    rep = CheckReport("graph_algebra")
    for _ in range(n_pairs):
        m = int(rng.integers(1, 7))
        A1 = rng.random((m, m)) * (rng.random((m, m)) < 0.4)
        A2 = rng.random((m, m)) * (rng.random((m, m)) < 0.4)
        rep.trials += 1
        lhs = gr.graph_of_matrix(A2 @ A1)
        rhs = gr.compose_graphs(gr.graph_of_matrix(A1), gr.graph_of_matrix(A2))
        if lhs != rhs:
            rep.violate(reason="gamma homomorphism", m=m)
        I = gr.DirectedGraph.self_arcs_only(m)
        G = gr.graph_of_matrix(A1)
        if gr.compose_graphs(I, G) != G or gr.compose_graphs(G, I) != G:
            rep.violate(reason="self-arc graph is not a composition identity")
    for m in (2, 3, 4):
        count = 0
        for graphs in _exhaustive_sc_tuples(m):
            rep.trials += 1
            count += 1
            if not gr.is_complete(gr.compose_sequence(graphs)):
                rep.violate(reason="composition of m-1 strongly connected graphs not complete", m=m)
        rep.notes[f"exhaustive_tuples_m{m}"] = count
    for m in (5, 6):
        for _ in range(n_random):
            graphs = [random_strongly_connected(rng, m, density=rng.uniform(0.05, 0.5))
                      for _ in range(m - 1)]
            rep.trials += 1
            if not gr.is_complete(gr.compose_sequence(graphs)):
                rep.violate(reason="composition of m-1 strongly connected graphs not complete", m=m)
    for m in (2, 3, 4):
        for G in itertools.islice(gr.self_arced_graphs(m), 0, None, 7):
            rep.trials += 1
            cert = gr.certify_rjsc(gr.Constant(G), 1, 1, 3)
            if isinstance(cert, gr.RjscCertificate) != gr.is_strongly_connected(G):
                rep.violate(reason="constant-schedule certificate disagrees with SC", graph=repr(G))
    return rep


def _exhaustive_sc_tuples(m):
    """All ``(m-1)``-tuples of self-arced SC graphs on ``m`` vertices, for ``m <= 3``;
    for ``m = 4`` all tuples of minimal ones (enough, since composition is monotone)."""
    if m <= 3:
        pool = [G for G in gr.self_arced_graphs(m) if gr.is_strongly_connected(G)]
    else:
        pool = gr.minimal_strongly_connected(m)
    return itertools.product(pool, repeat=m - 1)


def random_vsequence(rng, m, q, n=2, mode="far"):
    """Random projectors sharing ``y*``, random self-arced step matrices, and ``v(0)``.

    ``mode``: ``"far"`` (blocks within radius 10), ``"inside"`` (every block
    within 0.3 of ``y*``, so every map leaves it at rest), or ``"mixed"``.
    """
    y_star = rng.uniform(-1, 1, n)
    full = mode != "far"
    maps = random_projector_family(rng, m, n, y_star, full_dimensional=full)
    S_list = [random_step_matrix(rng, random_self_arced_graph(rng, m, rng.uniform(0.1, 0.7)))
              for _ in range(q)]
    far = y_star + 10 * rng.standard_normal((m, n)) / np.sqrt(n)
    near = y_star + 0.3 * rng.uniform(-1, 1, (m, n)) / np.sqrt(n)
    if mode == "far":
        v0 = far
    elif mode == "inside":
        v0 = near
    else:
        pick = rng.random(m) < 0.5
        v0 = np.where(pick[:, None], far, near)
    return v_sequence(maps, S_list, v0, y_star)


def suite_lemmas(seed=42, trials=200, p=2.0, n_samples=10):
    """Random v-sequences (``m <= 4``, ``q <= 6``) through the v-bound, the
    strict/identity refinements, and the class and composed-map lemmas."""
    rng = np.random.default_rng(seed)
    rep = CheckReport("lemma_suite", notes={"strict_cases": 0, "identity_cases": 0,
                                            "class_checks": 0, "composed_checks": 0})
    modes = ("far", "inside", "mixed")
    for k in range(trials):
        m = int(rng.integers(2, 5))
        q = int(rng.integers(1, 7))
        vs = random_vsequence(rng, m, q, mode=modes[k % 3])
        rep.trials += 1
        if vs.recompute_error() > 1e-12:
            rep.violate(reason="v recursion not reproduced")
        rep.merge(check_v_inequality(vs, p))
        sub = check_phi_inequality(vs, p)
        rep.notes["strict_cases"] += sub.notes["strict_cases"]
        rep.notes["identity_cases"] += sub.notes["identity_cases"]
        rep.merge(sub)
        prod = phi_product(vs.S_list, 0, q).matrix
        samples = [vs.y_star + 10 * rng.standard_normal((m, vs.y_star.size)) for _ in range(n_samples)]
        if gr.is_strongly_connected(gr.graph_of_matrix(prod)):
            rep.notes["class_checks"] += 1
            rep.merge(check_class_lemma(vs.maps, vs.S_list, samples, vs.y_star, p, n_starts=1))
        if is_positive_matrix(prod):
            rep.notes["composed_checks"] += 1
            rep.merge(check_composed_map_pc(vs.maps, vs.S_list, samples, vs.y_star, p, n_starts=1))
    return rep


def suite_composed_cycle(seed=42, n_samples=500):
    """Three halfspace projectors over two steps of the 3-cycle (positive product)."""
    rng = np.random.default_rng(seed)
    y_star = np.zeros(2)
    maps = [Projector(Halfspace(a, 0.5)) for a in ([1.0, 0.0], [0.0, 1.0], [-1.0, -1.0])]
    S = stochastic_from_graph(gr.DirectedGraph.cycle(3))
    samples = [10 * rng.standard_normal((3, 2)) for _ in range(n_samples)]
    rep = check_composed_map_pc(maps, [S, S], samples, y_star, 2.0, n_starts=3)
    rep.merge(check_class_lemma(maps, [S], samples[:50], y_star, 2.0))
    return rep


def suite_counterexample(seed=42):
    return check_counterexample(1000)


def suite_fejer(seed=42):
    rep = CheckReport("fejer_and_subsequence")
    for sc in regression_scenarios():
        tr = run(sc)
        x_star = consensus_vector(sc.witness, sc.m)
        sub = check_fejer(tr, x_star)
        sub.name = f"fejer[{sc.name}]"
        rep.merge(sub)
        if tr.converged:
            cert = gr.search_rjsc(sc.schedule, sc.m + 1, 5)
            sub = check_subsequence_lemma(tr, x_star, cert.l, cert.rho0)
            sub.name = f"subsequence[{sc.name}]"
            rep.merge(sub)
    return rep


SUITE = {
    "check_map_library": suite_map_library,
    "check_closed_convex": suite_closed_convex,
    "check_elsner": suite_elsner,
    "check_composition_fixed_sets": suite_composition,
    "check_linear_qne_iff_ne": suite_linear,
    "check_M_pc_22": suite_stacked_maps,
    "check_dbl_stochastic_pc": suite_doubly_stochastic,
    "check_S_pc_pinf": suite_positive_stochastic,
    "check_graph_algebra": suite_graph_algebra,
    "check_v_inequality": suite_lemmas,
    "check_composed_map_pc": suite_composed_cycle,
    "check_counterexample": suite_counterexample,
    "check_fejer": suite_fejer,
}
# aliases accepted by name
SUITE_ALIASES = {
    "check_M_qne_pinf": "check_M_pc_22",
    "check_phi_inequality": "check_v_inequality",
    "check_class_lemma": "check_v_inequality",
    "check_subsequence_lemma": "check_fejer",
}


def resolve_suite(names):
    """Expand ``"all"`` and aliases; raise ``KeyError`` for unknown names."""
    out = []
    for name in names:
        if name == "all":
            out.extend(SUITE)
            continue
        key = SUITE_ALIASES.get(name, name)
        if key not in SUITE:
            raise KeyError(name)
        if key not in out:
            out.append(key)
    return list(dict.fromkeys(out))


def run_suite(names=("all",), seed=42):
    reports = []
    for key in resolve_suite(names):
        rep = SUITE[key](seed)
        rep.name = key
        reports.append(rep)
    return reports
