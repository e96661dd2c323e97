"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``.
The lines are also repeated in the pytest terminal summary.
"""
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from paracon import graphs as gr
from paracon import verify as vf
from paracon.cli import main
from paracon.engine import consensus_vector, run
from paracon.scenarios import linear_system_scenario, random_linear_system

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
RESULTS = {}


def record(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    RESULTS[number] = line
    print(line)
    assert ok, line


def _converged_linear(schedule, horizon):
    sc = linear_system_scenario(schedule, horizon=horizon)
    _, A, b, _ = random_linear_system()
    unique = np.linalg.matrix_rank(A) == A.shape[1]
    t0 = time.perf_counter()
    tr = run(sc)
    elapsed = time.perf_counter() - t0
    direct = np.linalg.solve(A.T @ A, A.T @ b)
    final = tr.x[-1]
    err = float(np.max(np.abs(final - direct)))
    ok = (tr.converged and tr.steps <= horizon and tr.disagreement[-1] <= 1e-8
          and tr.residual[-1] <= 1e-8 and unique and err <= 1e-6)
    detail = (f"steps={tr.steps} disagreement={tr.disagreement[-1]:.2e} "
              f"residual={tr.residual[-1]:.2e} |x - direct|={err:.2e} time={elapsed:.2f}s")
    return ok, elapsed, detail


def test_criterion_1_linear_complete_graph():
    ok, elapsed, detail = _converged_linear("complete", 5000)
    record(1, ok and elapsed < 5.0, "linear system, complete graph: " + detail)


def test_criterion_2_linear_periodic_schedule(capsys):
    code = main(["certify", str(SCENARIOS / "linear_periodic.json"), "--lmax", "6", "--kmax", "50"])
    certified = capsys.readouterr().out.strip()
    sc = linear_system_scenario("periodic")
    cert = gr.search_rjsc(sc.schedule, 6, 50)
    ok, _, detail = _converged_linear("periodic", 20_000)
    ok = ok and code == 0 and isinstance(cert, gr.RjscCertificate)
    record(2, ok, f"periodic single-arc schedule ({certified}): " + detail)


def test_criterion_3_counterexample():
    t0 = time.perf_counter()
    rep = vf.check_counterexample(1000)
    elapsed = time.perf_counter() - t0
    n = rep.notes
    ok = rep.passed and n["steps"] == 1000 and n["contrast_steps"] < 1000 and elapsed < 1.0
    record(3, ok, f"rooted graph freezes agent 0 (drift={n['drift']:.1e}, min dist={n['min_distance']}, "
                  f"delta0={n['delta0']}); reversed arc converges in {n['contrast_steps']} steps; "
                  f"time={elapsed:.2f}s")


def test_criterion_4_doubly_stochastic():
    rep = vf.suite_doubly_stochastic(42, n_matrices=100, n_samples=100)
    n = rep.notes
    ok = rep.passed and n["matrices"] == 100 and n["min_samples_off_fixed_set"] >= 100
    record(4, ok, f"{n['matrices']} doubly stochastic matrices x {n['min_samples_off_fixed_set']} samples, "
                  f"violations={len(rep.violations)}, worst margin={rep.worst_margin:.2e}")


def test_criterion_5_positive_stochastic_and_necessity():
    rep = vf.suite_positive_stochastic(42, n_samples=500)
    ok = rep.passed and rep.notes["necessity_probes"] > 0
    record(5, ok, f"strict (p,inf) decrease for p in 1.5, 2, 3 over {rep.trials} samples and probes; "
                  f"{rep.notes['necessity_probes']} necessity witnesses equal to 1e-15; "
                  f"violations={len(rep.violations)}")


def test_criterion_6_v_sequence_lemmas():
    rep = vf.suite_lemmas(42, trials=200, p=2.0)
    n = rep.notes
    ok = rep.passed and n["strict_cases"] > 0 and n["identity_cases"] > 0
    record(6, ok, f"200 v-sequences: strict cases={n['strict_cases']}, identity cases={n['identity_cases']}, "
                  f"class checks={n['class_checks']}, composed checks={n['composed_checks']}, "
                  f"violations={len(rep.violations)}")


def test_criterion_7_graph_algebra():
    rep = vf.suite_graph_algebra(42, n_pairs=200)
    n = rep.notes
    ok = rep.passed and n["exhaustive_tuples_m4"] > 0
    record(7, ok, f"homomorphism on 200 pairs, exhaustive completeness m<=4 "
                  f"({n['exhaustive_tuples_m3']} + {n['exhaustive_tuples_m4']} tuples), "
                  f"violations={len(rep.violations)}")


def test_criterion_8_fejer_chain():
    worst = np.inf
    bad = 0
    names = []
    for sc in vf.regression_scenarios():
        tr = run(sc)
        rep = vf.check_fejer(tr, consensus_vector(sc.witness, sc.m), slack=1e-12)
        bad += len(rep.violations)
        worst = min(worst, rep.worst_margin)
        names.append(sc.name)
    record(8, bad == 0, f"Fejer chain on {', '.join(names)}: worst margin={worst:.2e}, violations={bad}")


def test_criterion_9_determinism(tmp_path):
    files = sorted(SCENARIOS.glob("*.json"))
    same = True
    for f in files:
        outs = []
        for k in range(2):
            out = tmp_path / f"{f.stem}-{k}"
            subprocess.run([sys.executable, "-m", "paracon", "run", str(f), "--out", str(out)],
                           check=False, capture_output=True)
            outs.append((out / "trace.csv").read_bytes())
        same = same and outs[0] == outs[1] and len(outs[0]) > 0
    record(9, same, f"two separate processes give byte-identical trace.csv for {len(files)} scenario files")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
