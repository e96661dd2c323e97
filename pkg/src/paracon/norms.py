"""Vector p-norms and the mixed (block) norm on stacked vectors.

A stacked vector is stored as an ``(m, n)`` array: row ``i`` is the
subvector held by agent ``i``.
"""
from dataclasses import dataclass

import numpy as np

INF = np.inf

# absolute slack for every "strict inequality" test in the package
EPS_STRICT = 1e-10


class InvalidInput(ValueError):
    """Raised for non-finite vectors or an unsupported norm exponent."""


def _check_exponent(p, name="p"):
    if p == INF:
        return INF
    p = float(p)
    if not p > 1.0:
        raise InvalidInput(f"{name} must be > 1 or INF, got {p}")
    if not np.isfinite(p):
        raise InvalidInput(f"{name} must be > 1 or INF, got {p}")
    return p


def as_vector(x):
    """Return ``x`` as a finite 1-d float array."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InvalidInput(f"expected a non-empty 1-d vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInput("vector has non-finite entries")
    return x


def as_stacked(x):
    """Return ``x`` as a finite ``(m, n)`` float array of agent blocks."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise InvalidInput(f"expected an (m, n) stacked vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInput("stacked vector has non-finite entries")
    return x


def p_norm(x, p=2.0):
    """p-norm of a vector, ``p`` in (1, inf) or ``INF``.

    Examples
    --------
    >>> p_norm([3.0, 4.0], 2)
    5.0
    >>> p_norm([1.0, -2.0, 3.0], INF)
    3.0
    """
    p = _check_exponent(p)
    x = as_vector(x)
    return _pnorm_rows(x[None, :], p)[0]


def _pnorm_rows(x, p):
    # row-wise p-norms without validation; x is 2-d
    a = np.abs(x)
    if p == INF:
        return a.max(axis=1)
    # scale by the row max so entries neither overflow nor underflow under **p
    scale = a.max(axis=1)
    out = np.zeros(x.shape[0])
    nz = scale > 0
    r = a[nz] / scale[nz, None]
    if p == 2.0:
        out[nz] = scale[nz] * np.sqrt(np.einsum("ij,ij->i", r, r))
    else:
        out[nz] = scale[nz] * np.sum(r ** p, axis=1) ** (1.0 / p)
    return out


def block_norms(x, p=2.0):
    """Vector of the p-norms of each block of a stacked vector."""
    p = _check_exponent(p)
    return _pnorm_rows(as_stacked(x), p)


@dataclass(frozen=True)
class MixedNormSpec:
    """Exponents of the mixed norm: ``p`` inside each block, ``q`` across blocks."""

    p: float = 2.0
    q: float = INF

    def __post_init__(self):
        object.__setattr__(self, "p", _check_exponent(self.p, "p"))
        object.__setattr__(self, "q", _check_exponent(self.q, "q"))


def mixed_norm(x, spec=MixedNormSpec()):
    """Mixed norm ``||x||_{p,q}``: the q-norm of the vector of block p-norms.

    For ``q = INF`` this is exactly ``max_i ||x_i||_p``.
    """
    norms = block_norms(x, spec.p)
    if spec.q == INF:
        return float(norms.max())
    return float(_pnorm_rows(norms[None, :], spec.q)[0])


def mixed_norm_pinf(x, p=2.0):
    """Shorthand for ``||x||_{p,inf}``."""
    return mixed_norm(x, MixedNormSpec(p, INF))


def minkowski_strictness_witness(u, v, p):
    """True when Minkowski's inequality is strict for ``u, v`` by more than EPS_STRICT.

    For ``1 < p < inf`` this happens exactly when neither vector is a
    nonnegative multiple of the other (up to the slack).
    """
    p = _check_exponent(p)
    if p == INF:
        raise InvalidInput("strictness of Minkowski's inequality needs finite p")
    u = as_vector(u)
    v = as_vector(v)
    lhs = p_norm(u + v, p)
    rhs = p_norm(u, p) + p_norm(v, p)
    return bool(lhs < rhs - EPS_STRICT)
