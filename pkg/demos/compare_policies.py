"""Run the three camera policies on a shortened bundled scenario and print their coverage.

    python3 demos/compare_policies.py [exp1|exp2] [seconds]
"""

import sys
import time

from cease.cli import format_table
from cease.sim import bundled_path, load_scenario, run_policy, scenario_from_dict, temporal_coverage

name = sys.argv[1] if len(sys.argv) > 1 else "exp1"
seconds = float(sys.argv[2]) if len(sys.argv) > 2 else 5.0

scn = scenario_from_dict(dict(load_scenario(bundled_path(name)).raw, duration=seconds))
rows = {}
for policy in ("fixed", "tcp", "cease"):
    tic = time.perf_counter()
    trace = run_policy(scn, policy)
    rows[policy] = temporal_coverage(trace)
    extra = f", median replan {1000 * sorted(trace.plan_seconds)[len(trace.plan_seconds) // 2]:.0f} ms" \
        if trace.plan_seconds else ""
    print(f"{policy}: {len(trace)} steps in {time.perf_counter() - tic:.1f} s{extra}")
print()
print(format_table(rows))
