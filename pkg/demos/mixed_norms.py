# %% [markdown]
# # Mixed norms on stacked vectors
#
# A stacked vector is an ``(m, n)`` array of ``m`` blocks in R^n. The
# ``(p, inf)`` norm takes the p-norm of each block and then the largest one.
# Averaging with a positive stochastic matrix strictly shrinks the distance to
# consensus in this norm; averaging with a non-positive one may not.

# %%
import numpy as np

from paracon import DirectedGraph, apply_kron, mixed_norm, mixed_norm_pinf, stochastic_from_graph
from paracon.norms import MixedNormSpec

x = np.array([[3.0, 4.0], [1.0, 0.0], [0.0, -2.0]])
for p in (1.5, 2.0, 3.0, np.inf):
    print(f"p={p}: (p,inf) = {mixed_norm_pinf(x, p):.4f}  (p,2) = {mixed_norm(x, MixedNormSpec(p, 2.0)):.4f}")

# %% Positive versus cyclic averaging
S_pos = stochastic_from_graph(DirectedGraph.complete(3))
S_cyc = stochastic_from_graph(DirectedGraph.cycle(3))
rng = np.random.default_rng(0)
drops = {"complete": [], "cycle": []}
for _ in range(1000):
    y = rng.standard_normal((3, 2))
    for name, S in (("complete", S_pos), ("cycle", S_cyc)):
        drops[name].append(mixed_norm_pinf(y) - mixed_norm_pinf(apply_kron(S, y)))
for name, d in drops.items():
    d = np.array(d)
    print(f"{name}: smallest drop {d.min():.3e}, fraction strict {np.mean(d > 0):.3f}")

# %% A point where cyclic averaging keeps the norm
# random samples rarely hit it, so build one directly
from paracon.verify import necessity_witness

w, i, k = necessity_witness(S_cyc, 2, 2.0)
print("witness:\n", w)
print("norm before %.6f, after %.6f" % (mixed_norm_pinf(w), mixed_norm_pinf(apply_kron(S_cyc, w))))
