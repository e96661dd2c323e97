"""Command line: ``paracon run | verify | certify``.

Exit codes: 0 success, 1 error, 2 horizon exhausted without convergence,
3 no RJSC certificate found.
"""
import argparse
import sys
from pathlib import Path

from . import graphs as gr
from . import verify as vf
from .engine import consensus_vector, metrics_csv, run, trace_csv
from .report import CheckReport, reports_to_csv
from .scenario_io import ScenarioError, load_scenario

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_HORIZON = 2
EXIT_NO_CERT = 3


def _write(out_dir, name, text):
    path = Path(out_dir) / name
    path.write_text(text, encoding="utf-8", newline="\n")
    return path


def _scenario_checks(names, sc, trace, seed):
    """Checks listed in a scenario file; trace-level ones use this run."""
    reports = []
    for name in names:
        if name in ("check_fejer", "check_subsequence_lemma"):
            if sc.witness is None:
                rep = CheckReport(name)
                rep.violate(reason="scenario has no witness")
            elif name == "check_fejer":
                rep = vf.check_fejer(trace, consensus_vector(sc.witness, sc.m))
            else:
                cert = gr.search_rjsc(sc.schedule, sc.m + 1, 5)
                if not isinstance(cert, gr.RjscCertificate):
                    rep = CheckReport(name)
                    rep.violate(reason="schedule not certified")
                else:
                    rep = vf.check_subsequence_lemma(
                        trace, consensus_vector(sc.witness, sc.m), cert.l, cert.rho0)
            rep.name = name
            reports.append(rep)
        else:
            reports.extend(vf.run_suite([name], seed))
    return reports


def summary_text(trace):
    k = trace.steps - 1
    lines = [
        f"scenario: {trace.meta['name']}",
        f"agents: {trace.meta['m']}",
        f"dimension: {trace.meta['n']}",
        f"horizon: {trace.meta['horizon']}",
        f"converged: {'yes' if trace.converged else 'no'}",
        f"steps: {trace.steps}",
        f"final disagreement: {float(trace.disagreement[k])!r}",
        f"final residual: {float(trace.residual[k])!r}",
        f"final distance to witness: {float(trace.distance_to_witness[k])!r}",
    ]
    return "\n".join(lines) + "\n"


def cmd_run(path, out_dir):
    try:
        sf = load_scenario(path)
        sc = sf.scenario
        trace = run(sc)
        try:
            reports = _scenario_checks(sf.verify, sc, trace, sf.seed)
        except KeyError as exc:
            raise ScenarioError(f"{path}: field verify: unknown check {exc.args[0]!r}") from None
    except (ScenarioError, OSError, ValueError, gr.ScheduleExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write(out, "trace.csv", trace_csv(trace))
    _write(out, "metrics.csv", metrics_csv(trace))
    summary = summary_text(trace)
    if reports:
        summary += "".join(f"check {r.name}: {r.verdict}\n" for r in reports)
        _write(out, "verify_report.csv", reports_to_csv(reports))
        _write(out, "verify_report.txt", "\n\n".join(r.to_text() for r in reports) + "\n")
    _write(out, "summary.txt", summary)
    sys.stdout.write(summary)
    return EXIT_OK if trace.converged else EXIT_HORIZON


def cmd_verify(names, seed, out_dir=None):
    try:
        keys = vf.resolve_suite(names)
    except KeyError as exc:
        print(f"error: unknown check {exc.args[0]!r}; known: {', '.join(sorted(vf.SUITE))}",
              file=sys.stderr)
        return EXIT_ERROR
    reports = vf.run_suite(keys, seed)
    for r in reports:
        print(f"{r.verdict.upper()} {r.name} trials={r.trials} "
              f"violations={len(r.violations)} worst_margin={r.worst_margin!r}")
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write(out, "report.csv", reports_to_csv(reports))
        _write(out, "report.txt", "\n\n".join(r.to_text() for r in reports) + "\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_ERROR


def cmd_certify(path, l_max, k_max):
    try:
        sc = load_scenario(path).scenario
        res = gr.search_rjsc(sc.schedule, l_max, k_max)
    except (ScenarioError, OSError, gr.ScheduleExhausted, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if isinstance(res, gr.RjscCertificate):
        print(f"certified: l={res.l} rho0={res.rho0} windows={res.verified_windows}")
        return EXIT_OK
    arcs = sorted((a, b) for a, b in res.composed.arcs if a != b)
    print(f"not certified up to l={l_max}: window k={res.k} (times {res.first}..{res.last}, "
          f"l={res.l}, rho0={res.rho0}) composes to a graph that is not strongly connected; "
          f"arcs {arcs}")
    return EXIT_NO_CERT


def build_parser():
    ap = argparse.ArgumentParser(prog="paracon", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="simulate a scenario file")
    p.add_argument("file")
    p.add_argument("--out", required=True, help="output directory")
    p = sub.add_parser("verify", help="run numerical checks")
    p.add_argument("--suite", nargs="+", default=["all"],
                   help="check names (comma or space separated) or 'all'")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default=None, help="directory for report.csv and report.txt")
    p = sub.add_parser("certify", help="search for an RJSC certificate of a scenario's schedule")
    p.add_argument("file")
    p.add_argument("--lmax", type=int, default=10)
    p.add_argument("--kmax", type=int, default=20)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.file, args.out)
    if args.command == "verify":
        names = [n for item in args.suite for n in item.split(",") if n]
        return cmd_verify(names, args.seed, args.out)
    return cmd_certify(args.file, args.lmax, args.kmax)


if __name__ == "__main__":
    sys.exit(main())
