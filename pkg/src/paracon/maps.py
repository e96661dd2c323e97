"""Paracontracting maps on R^n and sampled checks of their defining inequalities.

Every map carries two independent notions of "fixed":

* ``is_fixed_point(M, x, tol)`` asks the evaluator: ``||M(x) - x||_p <= tol``.
* ``M.fixed_oracle(x, tol)`` answers from the map's analytic description
  (``Ax = b``, ``x in C``, ``grad f(x) = 0`` ...) without calling the evaluator.

The checkers use the oracle as ground truth for the evaluator.
"""
import numpy as np

from .norms import EPS_STRICT, InvalidInput, as_vector, p_norm
from .report import CheckReport

# absolute tolerance for fixed-point membership
EPS_FIX = 1e-9
# relative slack for non-strict (quasi-nonexpansive) inequalities
EPS_QNE = 1e-12

DEFAULT_SEED = 42
SAMPLE_RADIUS = 10.0


class DimensionMismatch(ValueError):
    pass


class PreconditionError(ValueError):
    pass


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def _matrix(a, name):
    a = _frozen(a)
    if a.ndim == 1:
        a = _frozen(a[None, :])
    if a.ndim != 2 or not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name} must be a finite 2-d matrix")
    return a


# ---------------------------------------------------------------------------
# convex sets
# ---------------------------------------------------------------------------

class ConvexSet:
    """Nonempty closed convex subset of R^n with an exact Euclidean projector."""

    kind = "set"
    dim: int
    witness: np.ndarray

    def project(self, x):
        raise NotImplementedError

    def distance(self, x):
        raise NotImplementedError

    def contains(self, x, tol=EPS_FIX):
        return bool(self.distance(x) <= tol)


class Halfspace(ConvexSet):
    """``{x : a.x <= c}``."""

    kind = "halfspace"

    def __init__(self, a, c):
        self.a = as_vector(a)
        self.c = float(c)
        self.dim = self.a.size
        self._aa = float(self.a @ self.a)
        if self._aa == 0.0:
            raise InvalidInput("halfspace normal must be nonzero")
        self.witness = _frozen(self.a * (self.c / self._aa))

    def project(self, x):
        excess = float(self.a @ x) - self.c
        if excess <= 0.0:
            return np.array(x, dtype=float)
        return x - (excess / self._aa) * self.a

    def distance(self, x):
        return max(0.0, float(self.a @ x) - self.c) / np.sqrt(self._aa)


class Ball(ConvexSet):
    """Closed Euclidean ball."""

    kind = "ball"

    def __init__(self, center, radius):
        self.center = _frozen(as_vector(center))
        self.radius = float(radius)
        if not self.radius >= 0.0:
            raise InvalidInput("ball radius must be >= 0")
        self.dim = self.center.size
        self.witness = self.center

    def project(self, x):
        d = x - self.center
        r = float(np.sqrt(d @ d))
        if r <= self.radius:
            return np.array(x, dtype=float)
        return self.center + d * (self.radius / r)

    def distance(self, x):
        d = x - self.center
        return max(0.0, float(np.sqrt(d @ d)) - self.radius)


class Box(ConvexSet):
    """Axis-aligned box ``lo <= x <= hi``."""

    kind = "box"

    def __init__(self, lo, hi):
        self.lo = _frozen(as_vector(lo))
        self.hi = _frozen(as_vector(hi))
        if self.lo.shape != self.hi.shape or np.any(self.lo > self.hi):
            raise InvalidInput("box needs lo <= hi of equal length")
        self.dim = self.lo.size
        self.witness = _frozen(0.5 * (self.lo + self.hi))

    def project(self, x):
        return np.clip(x, self.lo, self.hi)

    def distance(self, x):
        d = x - np.clip(x, self.lo, self.hi)
        return float(np.sqrt(d @ d))


class AffineSubspace(ConvexSet):
    """``{x : Ax = b}``; ``A`` need not have full row rank but the system must be consistent."""

    kind = "affine"

    def __init__(self, A, b):
        self.A = _matrix(A, "A")
        self.b = _frozen(as_vector(b))
        if self.b.size != self.A.shape[0]:
            raise DimensionMismatch("A and b row counts differ")
        self.dim = self.A.shape[1]
        self._pinv = _frozen(np.linalg.pinv(self.A))
        w = self._pinv @ self.b
        if np.linalg.norm(self.A @ w - self.b) > 1e-9 * max(1.0, np.linalg.norm(self.b)):
            raise InvalidInput("affine subspace is empty (inconsistent Ax = b)")
        self.witness = _frozen(w)

    def project(self, x):
        return x - self._pinv @ (self.A @ x - self.b)

    def distance(self, x):
        d = self._pinv @ (self.A @ x - self.b)
        return float(np.sqrt(d @ d))


class Intersection(ConvexSet):
    """Intersection of convex sets, projected onto with Dykstra's algorithm."""

    kind = "intersection"

    def __init__(self, sets, witness=None, tol=1e-14, max_iter=100_000):
        self.sets = tuple(sets)
        if not self.sets:
            raise InvalidInput("intersection of no sets")
        dims = {s.dim for s in self.sets}
        if len(dims) != 1:
            raise DimensionMismatch("intersected sets differ in dimension")
        self.dim = dims.pop()
        self.tol = tol
        self.max_iter = max_iter
        if witness is None:
            witness = self._dykstra(np.zeros(self.dim))
        witness = as_vector(witness)
        if not all(s.contains(witness, EPS_FIX) for s in self.sets):
            raise InvalidInput("intersection appears empty: no witness point found")
        self.witness = _frozen(witness)

    def _dykstra(self, x):
        x = np.array(x, dtype=float)
        incr = [np.zeros_like(x) for _ in self.sets]
        for _ in range(self.max_iter):
            prev = x
            for k, s in enumerate(self.sets):
                y = s.project(x + incr[k])
                incr[k] = x + incr[k] - y
                x = y
            if np.max(np.abs(x - prev)) <= self.tol * max(1.0, np.max(np.abs(x))):
                break
        return x

    def project(self, x):
        if all(s.distance(x) == 0.0 for s in self.sets):
            return np.array(x, dtype=float)
        return self._dykstra(x)

    def distance(self, x):
        return max(s.distance(x) for s in self.sets)


# ---------------------------------------------------------------------------
# maps
# ---------------------------------------------------------------------------

class ParaMap:
    """A continuous map R^n -> R^n with an analytic fixed-point oracle.

    ``p`` is the exponent of the norm in which the map is claimed to be a
    paracontraction; every constructor here defaults to 2. ``witness`` is a
    known fixed point.
    """

    kind = "map"
    dim: int
    p: float = 2.0
    witness: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionMismatch(f"map on R^{self.dim} applied to shape {x.shape}")
        return self._apply(x)

    def _apply(self, x):
        raise NotImplementedError

    def fixed_oracle(self, x, tol=EPS_FIX):
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} on R^{self.dim}>"


class AffineLinearSolve(ParaMap):
    """``x -> x - A'(AA')^{-1}(Ax - b)``; fixed points solve ``Ax = b``."""

    kind = "affine_solve"

    def __init__(self, A, b):
        self.A = _matrix(A, "A")
        self.b = _frozen(as_vector(b))
        if self.b.size != self.A.shape[0]:
            raise DimensionMismatch("A and b row counts differ")
        sv = np.linalg.svd(self.A, compute_uv=False)
        if sv.size < self.A.shape[0] or sv.min() <= 1e-10:
            raise InvalidInput("A must have linearly independent rows")
        self.dim = self.A.shape[1]
        self._gram_inv = _frozen(np.linalg.inv(self.A @ self.A.T))
        self.witness = _frozen(self.A.T @ (self._gram_inv @ self.b))

    @property
    def projection_matrix(self):
        """``I - A'(AA')^{-1}A``, the orthogonal projector onto ``ker A``."""
        return np.eye(self.dim) - self.A.T @ self._gram_inv @ self.A

    def _apply(self, x):
        return x - self.A.T @ (self._gram_inv @ (self.A @ x - self.b))

    def fixed_oracle(self, x, tol=EPS_FIX):
        return bool(np.linalg.norm(self.A @ x - self.b) <= tol)


class Projector(ParaMap):
    """Orthogonal projector onto a nonempty closed convex set."""

    kind = "projector"

    def __init__(self, convex_set):
        self.set = convex_set
        self.dim = convex_set.dim
        self.witness = convex_set.witness

    def _apply(self, x):
        return self.set.project(x)

    def fixed_oracle(self, x, tol=EPS_FIX):
        return self.set.contains(x, tol)


def _check_quadratic(Q, c):
    Q = _matrix(Q, "Q")
    c = _frozen(as_vector(c))
    if Q.shape != (c.size, c.size):
        raise DimensionMismatch("Q must be n x n with c of length n")
    if np.max(np.abs(Q - Q.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(Q))):
        raise InvalidInput("Q must be symmetric")
    eig = np.linalg.eigvalsh(Q)
    if eig[0] < -1e-12 * max(1.0, eig[-1]):
        raise InvalidInput("Q must be positive semidefinite")
    minimizer, *_ = np.linalg.lstsq(Q, -c, rcond=None)
    if np.linalg.norm(Q @ minimizer + c) > 1e-9 * max(1.0, np.linalg.norm(c)):
        raise InvalidInput("quadratic objective is unbounded below (no minimizer)")
    return Q, c, float(eig[-1]), _frozen(minimizer)


class GradientDescent(ParaMap):
    """``x -> x - alpha * grad f(x)`` for ``f(x) = x'Qx/2 + c'x``.

    ``lam`` is the Lipschitz constant of the gradient; it defaults to the
    largest eigenvalue of ``Q`` and the step must satisfy ``0 < alpha < 2/lam``.
    """

    kind = "gradient"

    def __init__(self, Q, c=None, alpha=None, lam=None):
        Q = np.asarray(Q, dtype=float)
        if c is None:
            c = np.zeros(Q.shape[0])
        self.Q, self.c, lam_max, self.witness = _check_quadratic(Q, c)
        self.lam = lam_max if lam is None else float(lam)
        if self.lam < lam_max * (1 - 1e-12):
            raise InvalidInput(f"lam={self.lam} is below the largest eigenvalue {lam_max}")
        if alpha is None:
            alpha = 1.0 / self.lam if self.lam > 0 else 1.0
        self.alpha = float(alpha)
        if not (self.alpha > 0 and (self.lam == 0 or self.alpha < 2.0 / self.lam)):
            raise InvalidInput("step size must satisfy 0 < alpha < 2/lam")
        self.dim = self.c.size

    def gradient(self, x):
        return self.Q @ x + self.c

    def _apply(self, x):
        return x - self.alpha * self.gradient(x)

    def fixed_oracle(self, x, tol=EPS_FIX):
        return bool(np.linalg.norm(self.gradient(x)) <= tol)


# proximal objectives ---------------------------------------------------------

class Indicator:
    """Indicator function of a convex set."""

    kind = "indicator"

    def __init__(self, convex_set):
        self.set = convex_set
        self.dim = convex_set.dim
        self.minimizer = convex_set.witness

    def prox(self, x, step):
        return self.set.project(x)

    def is_minimizer(self, x, tol):
        return self.set.contains(x, tol)

    def optimality_residual(self, y, g, step):
        # g is in the normal cone at y iff projecting y + g/2 returns y
        return self.set.distance(y) + float(np.linalg.norm(self.set.project(y + 0.5 * g) - y))


class Quadratic:
    """``f(x) = x'Qx/2 + c'x`` with ``Q`` symmetric positive semidefinite."""

    kind = "quadratic"

    def __init__(self, Q, c=None):
        Q = np.asarray(Q, dtype=float)
        if c is None:
            c = np.zeros(Q.shape[0])
        self.Q, self.c, _, self.minimizer = _check_quadratic(Q, c)
        self.dim = self.c.size

    def prox(self, x, step):
        return np.linalg.solve(np.eye(self.dim) + step * self.Q, x - step * self.c)

    def is_minimizer(self, x, tol):
        return bool(np.linalg.norm(self.Q @ x + self.c) <= tol)

    def optimality_residual(self, y, g, step):
        return float(np.linalg.norm(self.Q @ y + self.c - g))


class WeightedL1:
    """``f(x) = w * ||x||_1`` with ``w > 0``."""

    kind = "l1"

    def __init__(self, weight, dim):
        self.weight = float(weight)
        if not self.weight > 0:
            raise InvalidInput("l1 weight must be positive")
        self.dim = int(dim)
        self.minimizer = _frozen(np.zeros(self.dim))

    def prox(self, x, step):
        t = self.weight * step
        return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)

    def is_minimizer(self, x, tol):
        return bool(np.linalg.norm(x) <= tol)

    def optimality_residual(self, y, g, step):
        w = self.weight
        on = y != 0
        r = np.where(on, np.abs(g - w * np.sign(y)), np.maximum(np.abs(g) - w, 0.0))
        return float(np.max(r, initial=0.0))


class Proximal(ParaMap):
    """``x -> argmin_y f(y) + ||x - y||^2 / (2 step)``; fixed points minimize ``f``."""

    kind = "proximal"

    def __init__(self, f, step=1.0):
        self.f = f
        self.step = float(step)
        if not self.step > 0:
            raise InvalidInput("prox step must be positive")
        self.dim = f.dim
        self.witness = f.minimizer

    def _apply(self, x):
        return self.f.prox(x, self.step)

    def fixed_oracle(self, x, tol=EPS_FIX):
        return self.f.is_minimizer(x, tol)

    def optimality_residual(self, x):
        """Distance of ``(x - prox(x))/step`` from the subdifferential at ``prox(x)``."""
        y = self(x)
        return self.f.optimality_residual(y, (x - y) / self.step, self.step)


# nonexpansive operators for averaged maps --------------------------------------

class Reflection:
    """``x -> 2 P_C(x) - x``; nonexpansive with fixed set ``C``."""

    kind = "reflection"

    def __init__(self, convex_set):
        self.set = convex_set
        self.dim = convex_set.dim
        self.witness = convex_set.witness

    def __call__(self, x):
        return 2.0 * self.set.project(x) - x

    def fixed_oracle(self, x, tol):
        return self.set.contains(x, tol)


class LinearOperator:
    """Linear map with spectral norm at most one."""

    kind = "linear"

    def __init__(self, matrix):
        self.matrix = _matrix(matrix, "matrix")
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise DimensionMismatch("operator matrix must be square")
        if np.linalg.norm(self.matrix, 2) > 1.0 + 1e-12:
            raise InvalidInput("operator is not nonexpansive in the 2-norm")
        self.dim = self.matrix.shape[0]
        self.witness = _frozen(np.zeros(self.dim))

    def __call__(self, x):
        return self.matrix @ x

    def fixed_oracle(self, x, tol):
        return bool(np.linalg.norm(self.matrix @ x - x) <= tol)


class Averaged(ParaMap):
    """``x -> alpha N(x) + (1 - alpha) x`` with ``N`` nonexpansive, ``0 < alpha < 1``."""

    kind = "averaged"

    def __init__(self, N, alpha):
        self.N = N
        self.alpha = float(alpha)
        if not 0.0 < self.alpha < 1.0:
            raise InvalidInput("alpha must lie in (0, 1)")
        self.dim = N.dim
        self.witness = N.witness

    def _apply(self, x):
        return self.alpha * self.N(x) + (1.0 - self.alpha) * x

    def fixed_oracle(self, x, tol=EPS_FIX):
        return self.N.fixed_oracle(x, tol)


class LinearMap(ParaMap):
    """Arbitrary linear map ``x -> P x``; not assumed to be a paracontraction."""

    kind = "linear_map"

    def __init__(self, P):
        self.P = _matrix(P, "P")
        if self.P.shape[0] != self.P.shape[1]:
            raise DimensionMismatch("P must be square")
        self.dim = self.P.shape[0]
        self.witness = _frozen(np.zeros(self.dim))

    def _apply(self, x):
        return self.P @ x

    def fixed_oracle(self, x, tol=EPS_FIX):
        return bool(np.linalg.norm(self.P @ x - x) <= tol)


class Composite(ParaMap):
    """``maps[0] o maps[1] o ... o maps[-1]`` (the last map is applied first)."""

    kind = "composite"

    def __init__(self, maps, witness):
        self.maps = tuple(maps)
        if not self.maps:
            raise InvalidInput("composition of no maps")
        dims = {M.dim for M in self.maps}
        if len(dims) != 1:
            raise DimensionMismatch("composed maps differ in dimension")
        ps = {M.p for M in self.maps}
        if len(ps) != 1:
            raise InvalidInput("composed maps declare different contraction norms")
        self.dim = dims.pop()
        self.p = ps.pop()
        if witness is None:
            raise PreconditionError("compose needs a common fixed point witness")
        witness = as_vector(witness)
        bad = [k for k, M in enumerate(self.maps) if not M.fixed_oracle(witness)]
        if bad:
            raise PreconditionError(f"witness is not fixed by maps {bad}")
        self.witness = _frozen(witness)

    def _apply(self, x):
        for M in reversed(self.maps):
            x = M._apply(x)
        return x

    def fixed_oracle(self, x, tol=EPS_FIX):
        return all(M.fixed_oracle(x, tol) for M in self.maps)


def compose(maps, witness=None):
    """Compose paracontractions sharing the common fixed point ``witness``."""
    return Composite(maps, witness)


# ---------------------------------------------------------------------------
# evaluation and checks
# ---------------------------------------------------------------------------

def evaluate(M, x):
    return M(x)


def displacement(M, x, p=None):
    """``||M(x) - x||_p`` in the map's contraction norm by default."""
    x = np.asarray(x, dtype=float)
    return p_norm(M(x) - x, M.p if p is None else p)


def is_fixed_point(M, x, tol=EPS_FIX):
    if not tol > 0:
        raise InvalidInput("tol must be positive")
    return bool(displacement(M, x) <= tol)


def sample_points(center, count, radius=SAMPLE_RADIUS, rng=None):
    """``count`` points drawn uniformly from the Euclidean ball around ``center``."""
    rng = np.random.default_rng(DEFAULT_SEED) if rng is None else rng
    center = as_vector(center)
    n = center.size
    d = rng.standard_normal((count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / n)
    return center + d * r[:, None]


def _check_fixed_inputs(M, y_fixed):
    for y in y_fixed:
        if not is_fixed_point(M, y, EPS_FIX):
            raise PreconditionError(f"{y!r} is not a fixed point of {M!r}")


def check_paracontraction(M, x_samples, y_fixed, p=None):
    """Sampled test of ``||M(x) - y|| < ||x - y||`` for non-fixed ``x`` and fixed ``y``.

    Samples ``x`` with ``||M(x) - x|| <= EPS_FIX`` count as fixed and are
    held only to the non-strict inequality.
    """
    p = M.p if p is None else p
    _check_fixed_inputs(M, y_fixed)
    rep = CheckReport("paracontraction")
    for x in x_samples:
        x = np.asarray(x, dtype=float)
        Mx = M(x)
        fixed = p_norm(Mx - x, p) <= EPS_FIX
        for y in y_fixed:
            rep.trials += 1
            lhs = p_norm(Mx - y, p)
            rhs = p_norm(x - y, p)
            if fixed:
                if lhs > rhs * (1 + EPS_QNE):
                    rep.violate(x=x.tolist(), y=list(y), lhs=lhs, rhs=rhs, strict=False)
                continue
            rep.margin(lhs, rhs)
            if not lhs < rhs:
                rep.violate(x=x.tolist(), y=list(y), lhs=lhs, rhs=rhs, strict=True)
    return rep


def check_quasi_nonexpansive(M, x_samples, y_fixed, p=None):
    """Sampled test of ``||M(x) - y|| <= ||x - y||`` (relative slack 1e-12)."""
    p = M.p if p is None else p
    _check_fixed_inputs(M, y_fixed)
    rep = CheckReport("quasi_nonexpansive")
    for x in x_samples:
        x = np.asarray(x, dtype=float)
        Mx = M(x)
        for y in y_fixed:
            rep.trials += 1
            lhs = p_norm(Mx - y, p)
            rhs = p_norm(x - y, p)
            rep.margin(lhs, rhs)
            if lhs > rhs * (1 + EPS_QNE):
                rep.violate(x=x.tolist(), y=list(y), lhs=lhs, rhs=rhs)
    return rep


def check_nonexpansive(N, pairs, p=2.0):
    """Sampled test of ``||N(x) - N(y)|| <= ||x - y||`` with EPS_STRICT slack."""
    rep = CheckReport("nonexpansive")
    for x, y in pairs:
        rep.trials += 1
        lhs = p_norm(N(x) - N(y), p)
        rhs = p_norm(np.asarray(x) - y, p)
        rep.margin(lhs, rhs)
        if lhs > rhs + EPS_STRICT:
            rep.violate(x=list(x), y=list(y), lhs=lhs, rhs=rhs)
    return rep


def fixed_set_closed_convex_probe(M, x1, x2, alpha):
    """Whether ``alpha x1 + (1 - alpha) x2`` is fixed, given fixed ``x1, x2``."""
    if not 0.0 <= alpha <= 1.0:
        raise PreconditionError("alpha must lie in [0, 1]")
    x1 = as_vector(x1)
    x2 = as_vector(x2)
    _check_fixed_inputs(M, [x1, x2])
    return is_fixed_point(M, alpha * x1 + (1.0 - alpha) * x2, EPS_FIX)
