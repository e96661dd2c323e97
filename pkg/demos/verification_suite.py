# %% [markdown]
# # Running the verification checks
#
# Every check returns a report with the number of trials, the violations and
# the worst margin (positive means the inequality held with room to spare).

# %%
import time

from paracon import verify as vf

print("available checks:", ", ".join(vf.SUITE))

# %% A few quick checks
for name in ("check_map_library", "check_elsner", "check_counterexample", "check_fejer"):
    t0 = time.perf_counter()
    (rep,) = vf.run_suite([name], seed=42)
    print(f"{name:28s} passed={rep.passed}  trials={rep.trials:6d}  "
          f"worst margin={rep.worst_margin:.2e}  ({time.perf_counter() - t0:.2f}s)")

# %% Details of one report
(rep,) = vf.run_suite(["check_counterexample"], seed=42)
print(rep.to_text())
