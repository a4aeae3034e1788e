"""Batch front end: ``simulate <scenario-file>``.

For every speed the scenario lists, runs one noiseless simulation and
``trials`` noisy ones, then writes into the output directory::

    report.csv                       one RMSE row per (speed, mode)
    v0.60/noiseless/trace_000.csv    per-trial traces
    v0.60/noisy/trace_000.csv ...
    v0.60/<mode>/trajectory.dat      reference vs. actual path (gnuplot columns)
    v0.60/<mode>/velocity.dat        v and omega time series
    manifest.json                    every file with its sha256, written last

Exit codes: 0 success, 1 invalid scenario, 2 a run did not complete,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path as FsPath

from . import __version__
from .metrics import REPORT_COLUMNS, aggregate, evaluate_trace, trace_errors
from .scenario import Scenario, ScenarioError, load_scenario
from .simulation import Trace, run, run_trials

logger = logging.getLogger("fuzzytrack")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_IO = 3

TRACE_COLUMNS = (
    "t", "x", "y", "theta", "ref_x", "ref_y", "epsilon",
    "v_cmd", "omega_cmd", "v_real", "omega_real",
    "wr_cmd", "wl_cmd", "wr_real", "wl_real",
)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def trace_csv(trace: Trace, stride: int = 1) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for r in trace.records[::stride]:
        writer.writerow(_fmt(v) for v in (
            r.time, r.pose.x, r.pose.y, r.pose.theta, r.ref_point[0], r.ref_point[1], r.epsilon,
            r.cmd.v, r.cmd.omega, r.real.v, r.real.omega,
            r.wheels_cmd.omega_r, r.wheels_cmd.omega_l, r.wheels_real.omega_r, r.wheels_real.omega_l,
        ))
    return buf.getvalue()


def trajectory_dat(trace: Trace, stride: int = 1) -> str:
    lines = ["# t ref_x ref_y x y"]
    for r in trace.records[::stride]:
        lines.append(" ".join(_fmt(v) for v in (r.time, r.ref_point[0], r.ref_point[1], r.pose.x, r.pose.y)))
    return "\n".join(lines) + "\n"


def velocity_dat(trace: Trace, scenario: Scenario, stride: int = 1) -> str:
    errors = trace_errors(trace, scenario.path, trace.v_ref)
    lines = ["# t v_ref v_real omega_ref omega_real"]
    for i in range(0, len(trace), stride):
        r = trace.records[i]
        omega_ref = r.real.omega - errors["omega"][i]
        lines.append(" ".join(_fmt(v) for v in (r.time, trace.v_ref, r.real.v, float(omega_ref), r.real.omega)))
    return "\n".join(lines) + "\n"


class _Writer:
    """Writes files under ``root`` and remembers them for the manifest."""

    def __init__(self, root: FsPath):
        self.root = root
        self.files: dict[str, str] = {}

    def write(self, rel: str, text: str) -> None:
        data = text.encode("utf-8")
        target = self.root / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
        self.files[rel] = hashlib.sha256(data).hexdigest()

    def manifest(self, scenario: Scenario, incomplete: list[str], status: str) -> None:
        doc = {
            "scenario": scenario.name,
            "version": __version__,
            "status": status,
            "incomplete_runs": incomplete,
            "files": [{"path": k, "sha256": self.files[k]} for k in sorted(self.files)],
        }
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        (self.root / "manifest.json").write_text(text, encoding="utf-8")


def speed_dir(v: float) -> str:
    return f"v{v:.2f}"


def run_scenario(scenario: Scenario, out_dir=None, workers: int = 1) -> int:
    """Run every (speed, mode) batch of ``scenario`` and write the outputs.

    Returns the process exit status.
    """
    root = FsPath(out_dir) if out_dir is not None else scenario.output_dir
    writer = _Writer(root)
    incomplete: list[str] = []
    report = io.StringIO()
    rows = csv.writer(report, lineterminator="\n")
    rows.writerow(REPORT_COLUMNS)
    stride = scenario.trace_stride
    try:
        root.mkdir(parents=True, exist_ok=True)
        for v in scenario.speeds:
            for mode in ("noiseless", "noisy"):
                config = scenario.sim_config(v, noisy=mode == "noisy")
                if mode == "noiseless":
                    # Noiseless runs are deterministic, so one trial is enough.
                    traces = [run(config)]
                else:
                    traces = run_trials(config, scenario.trials, workers=workers)
                base = f"{speed_dir(v)}/{mode}"
                for i, trace in enumerate(traces):
                    if not trace.completed:
                        incomplete.append(f"{base}/trace_{i:03d}")
                    writer.write(f"{base}/trace_{i:03d}.csv", trace_csv(trace, stride))
                writer.write(f"{base}/trajectory.dat", trajectory_dat(traces[0], stride))
                writer.write(f"{base}/velocity.dat", velocity_dat(traces[0], scenario, stride))
                reports = [evaluate_trace(t, scenario.path, v) for t in traces if len(t)]
                if reports:
                    rows.writerow(_fmt(x) for x in aggregate(reports).csv_row(v, mode))
                logger.info("v=%.2f %s: %d trace(s) done", v, mode, len(traces))
        writer.write("report.csv", report.getvalue())
        status = "complete" if not incomplete else "partial"
        writer.manifest(scenario, incomplete, status)
    except OSError as exc:
        logger.error("I/O failure: %s", exc)
        try:
            writer.manifest(scenario, incomplete, "partial")
        except OSError:
            pass
        return EXIT_IO
    if incomplete:
        logger.error("%d run(s) hit max_steps: %s", len(incomplete), ", ".join(incomplete))
        return EXIT_RUNTIME
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="simulate",
        description="Run a fuzzy trajectory-tracking scenario and write traces and RMSE reports.",
    )
    p.add_argument("scenario", help="scenario file (YAML)")
    p.add_argument("--out", help="output directory (overrides output_dir in the scenario)")
    p.add_argument("--seed", type=int, help="base noise seed (overrides noise.seed)")
    p.add_argument("--trials", type=int, help="noisy trials per speed (overrides trials)")
    p.add_argument("--paper-exact-rules", action="store_true",
                   help="use the rule table verbatim, including the asymmetric (VBL, VF) cell")
    p.add_argument("--workers", type=int, default=1, help="processes for noisy trials (default 1)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        scenario = load_scenario(args.scenario, paper_exact_rules=args.paper_exact_rules)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ScenarioError("--seed", "must be a 64-bit unsigned integer")
            scenario = replace(scenario, noise=replace(scenario.noise, seed=args.seed))
        if args.trials is not None:
            if args.trials < 1:
                raise ScenarioError("--trials", "must be >= 1")
            scenario = replace(scenario, trials=args.trials)
    except ScenarioError as exc:
        print(f"simulate: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"simulate: cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_IO
    return run_scenario(scenario, args.out, workers=max(1, args.workers))


if __name__ == "__main__":
    sys.exit(main())
