# %% [markdown]
# # Solving a linear system over a network
#
# Three agents each hold two rows of a consistent system ``A x = b`` in R^4.
# Agent ``i`` applies the affine projector onto its own solution set, then
# averages with its neighbors. The iterates reach consensus on the unique
# solution.

# %%
import numpy as np

from paracon import run
from paracon.scenarios import linear_system_scenario, random_linear_system

maps, A, b, x_true = random_linear_system()
print("A shape:", A.shape, " rank:", np.linalg.matrix_rank(A))

# %% Constant complete graph
sc = linear_system_scenario("complete", horizon=5000)
tr = run(sc)
print("converged:", tr.converged, "after", tr.steps, "steps")
print("final disagreement: %.2e" % tr.disagreement[-1])
print("final residual:     %.2e" % tr.residual[-1])

# %% Compare with a direct least-squares solve
direct = np.linalg.lstsq(A, b, rcond=None)[0]
print("max |x_i - direct| over agents:", np.max(np.abs(tr.final - direct)))

# %% Disagreement every 20 steps
for t in range(0, tr.steps, 20):
    print(f"t={t + 1:4d}  disagreement={tr.disagreement[t]:.3e}  residual={tr.residual[t]:.3e}")
