# %% [markdown]
# # Why strong connectivity matters
#
# Two agents project onto halfspaces ``C1 = {x_0 <= 1}`` and ``C2 = {x_0 >= 0}``.
# The graph is rooted: agent 1 listens to agent 0, but agent 0 only listens to
# itself. Agent 0 sits at a fixed point of its own map outside ``C2`` and
# never moves, so the pair never agrees on a common fixed point.

# %%
import numpy as np

from paracon import run
from paracon.scenarios import COUNTER_C2, counterexample_scenario

sc = counterexample_scenario(horizon=1000)
tr = run(sc)
print("converged:", tr.converged)
print("agent 0 start:", sc.x0[0], " end:", tr.final[0])
d = np.array([COUNTER_C2.distance(x) for x in tr.x[:, 0]])
print("distance of agent 0 to C2: min %.3f, max %.3f" % (d.min(), d.max()))
print("final disagreement: %.3f" % tr.disagreement[-1])

# %% Adding the reverse arc
sc2 = counterexample_scenario(reverse_arc=True)
tr2 = run(sc2)
print("with 1 -> 0 as well: converged =", tr2.converged, "in", tr2.steps, "steps")
print("consensus point:", tr2.final[0])
