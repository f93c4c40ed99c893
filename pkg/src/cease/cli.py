"""Command-line harness: run one policy, compare several, or validate a scenario file.

Exit codes: 0 success, 2 usage or input error, 3 environment error
(output directory not writable, or any other failure outside the inputs).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import platform
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .sim import POLICIES, PART_NAMES, Scenario, ScenarioError, load_scenario
from .sim.bundled import BUNDLED
from .sim.runner import axes_csv, coverage_csv, cpe_csv, depth_trace_csv, run_policy, temporal_coverage
from .sim.scenario import bundled_path, materialize

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ENV = 3

COLUMNS = PART_NAMES + ("Avg",)

log = logging.getLogger("cease")


class UsageError(Exception):
    """Bad arguments or input files; maps to exit code 2."""


class EnvError(Exception):
    """The environment refused an operation; maps to exit code 3."""


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    policy: str
    out: str
    seed: int | None = None
    trace: int = 0

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise UsageError(f"unknown policy {self.policy!r}; choose from {', '.join(POLICIES)}")
        if not self.scenario or not self.out:
            raise UsageError("scenario and output paths must be nonempty")


def resolve_scenario(arg: str) -> Path:
    """A path as given, or a bundled scenario name (``exp1``, ``exp2``) when no such file exists."""
    p = Path(arg)
    if not p.exists() and arg in BUNDLED:
        return bundled_path(arg)
    return p


def _load(arg: str, seed: int | None) -> tuple[Path, Scenario]:
    path = resolve_scenario(arg)
    try:
        scn = load_scenario(path)
    except ScenarioError as exc:
        raise UsageError(str(exc)) from exc
    if seed is not None:
        scn = scn.with_seed(seed)
    return path, scn


def _prepare_out(out: str) -> Path:
    d = Path(out)
    try:
        d.mkdir(parents=True, exist_ok=True)
        probe = d / ".cease-write-probe"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise EnvError(f"{d}: output directory is not writable ({exc.strerror or exc})") from exc
    return d


def _write(path: Path, text: str) -> None:
    try:
        # newline="" keeps "\n" line ends on every platform so files stay byte-identical
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise EnvError(f"{path}: cannot write ({exc.strerror or exc})") from exc


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _manifest(command: str, config: dict, path: Path, scn: Scenario, wall: float, extra: dict) -> dict:
    return {
        "tool": "cease",
        "version": __version__,
        "command": command,
        "config": config,
        "scenario_path": str(path),
        "scenario_sha256": _sha256(path),
        "scenario": materialize(scn.raw),
        "wall_time_s": round(wall, 3),
        "python": platform.python_version(),
        "numpy": np.__version__,
        **extra,
    }


def cmd_run(cfg: RunConfig) -> dict:
    """Simulate one policy and write coverage.csv, cpe_trace.csv, axes.csv and manifest.json."""
    path, scn = _load(cfg.scenario, cfg.seed)
    out = _prepare_out(cfg.out)
    log.info("running %s on %s (seed %d, %d steps)", cfg.policy, scn.name, scn.seed, scn.n_steps)
    tic = time.perf_counter()
    trace = run_policy(scn, cfg.policy, planner_trace=cfg.trace >= 2)
    wall = time.perf_counter() - tic
    cov = temporal_coverage(trace)
    _write(out / "coverage.csv", coverage_csv(cov))
    _write(out / "cpe_trace.csv", cpe_csv(trace))
    _write(out / "axes.csv", axes_csv(trace))
    files = ["coverage.csv", "cpe_trace.csv", "axes.csv"]
    if trace.planner_trace is not None:
        _write(out / "planner_trace.jsonl", "".join(line + "\n" for line in trace.planner_trace))
        _write(out / "sr_depth.csv", depth_trace_csv(trace))
        files += ["planner_trace.jsonl", "sr_depth.csv"]
    extra = {"seed": scn.seed, "steps": len(trace), "coverage": {k: round(v, 6) for k, v in cov.items()},
             "files": files}
    if trace.plan_seconds:
        extra["plan_ms_median"] = round(1000.0 * float(np.median(trace.plan_seconds)), 3)
    config = {"scenario": cfg.scenario, "policy": cfg.policy, "out": cfg.out, "seed": cfg.seed, "trace": cfg.trace}
    _write(out / "manifest.json", json.dumps(_manifest("run", config, path, scn, wall, extra), indent=2) + "\n")
    log.info("%s done in %.1f s, Avg coverage %.3f", cfg.policy, wall, cov["Avg"])
    return cov


def compare_csv(rows: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("policy",) + COLUMNS)
    for pol, cov in rows.items():
        w.writerow([pol] + [f"{cov[c]:.3f}" for c in COLUMNS])
    return buf.getvalue()


def format_table(rows: dict) -> str:
    head = f"{'policy':<8}" + "".join(f"{c:>7}" for c in COLUMNS)
    lines = [head, "-" * len(head)]
    for pol, cov in rows.items():
        lines.append(f"{pol:<8}" + "".join(f"{cov[c]:>7.3f}" for c in COLUMNS))
    return "\n".join(lines)


def cmd_compare(scenario: str, policies: list, out: str, seed: int | None = None, trace: int = 0) -> dict:
    """Run each policy in turn on the same scenario and seed, then write compare.csv."""
    if len(policies) < 2:
        raise UsageError(f"compare needs at least two policies, got {len(policies)}")
    if len(set(policies)) != len(policies):
        raise UsageError("each policy may appear only once")
    cfgs = [RunConfig(scenario, p, str(Path(out) / p), seed, trace) for p in policies]
    path, scn = _load(scenario, seed)
    root = _prepare_out(out)
    tic = time.perf_counter()
    rows = {cfg.policy: cmd_run(cfg) for cfg in cfgs}
    wall = time.perf_counter() - tic
    _write(root / "compare.csv", compare_csv(rows))
    config = {"scenario": scenario, "policies": list(policies), "out": out, "seed": seed, "trace": trace}
    extra = {"seed": scn.seed, "files": ["compare.csv"] + [f"{p}/" for p in policies]}
    _write(root / "manifest.json", json.dumps(_manifest("compare", config, path, scn, wall, extra), indent=2) + "\n")
    return rows


def cmd_validate(scenario: str, show: bool = False) -> Scenario:
    path, scn = _load(scenario, None)
    if show:
        print(json.dumps(materialize(scn.raw), indent=2))
    else:
        print(f"{path}: ok ({scn.name}, {scn.n_steps} steps, {len(scn.cameras)} cameras, "
              f"{len(scn.humanoids)} humanoids)")
    return scn


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="cease", description="Simulate and compare active camera policies around a robot arm.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    scen_help = "scenario JSON file, or the name of a bundled scenario (exp1, exp2)"
    r = sub.add_parser("run", help="simulate one policy and write its artifacts")
    r.add_argument("--scenario", required=True, help=scen_help)
    r.add_argument("--policy", required=True, help=f"one of {', '.join(POLICIES)}")
    r.add_argument("--out", required=True, help="output directory (created if missing)")
    r.add_argument("--seed", type=int, help="override the scenario seed")
    r.add_argument("-t", "--trace", action="count", default=0,
                   help="-t logs progress; -tt also writes planner_trace.jsonl and sr_depth.csv")

    c = sub.add_parser("compare", help="run several policies and tabulate coverage")
    c.add_argument("--scenario", required=True, help=scen_help)
    c.add_argument("--policies", default=",".join(POLICIES), help="comma-separated list (default: all)")
    c.add_argument("--out", required=True, help="output directory (created if missing)")
    c.add_argument("--seed", type=int, help="override the scenario seed")
    c.add_argument("-t", "--trace", action="count", default=0, help="as for run")

    v = sub.add_parser("validate", help="check a scenario file against the schema")
    v.add_argument("--scenario", required=True, help=scen_help)
    v.add_argument("--show", action="store_true", help="print the scenario with all defaults filled in")
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"cease: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    level = logging.INFO if getattr(args, "trace", 0) else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        if args.command == "run":
            cmd_run(RunConfig(args.scenario, args.policy, args.out, args.seed, args.trace))
        elif args.command == "compare":
            pols = [p.strip() for p in args.policies.split(",") if p.strip()]
            rows = cmd_compare(args.scenario, pols, args.out, args.seed, args.trace)
            print(format_table(rows))
        else:
            cmd_validate(args.scenario, args.show)
    except UsageError as exc:
        print(f"cease: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EnvError as exc:
        print(f"cease: error: {exc}", file=sys.stderr)
        return EXIT_ENV
    except Exception as exc:  # noqa: BLE001 - exit codes are restricted to 0, 2 and 3
        log.debug("unexpected failure", exc_info=True)
        print(f"cease: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ENV
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
