"""One obstacle walks toward a static arm; compare its collision estimate when seen and when hidden.

    python3 demos/obstacle_risk.py
"""

import numpy as np

from cease import (BeliefParams, RobotConfig, SceState, WorldBelief, cpe_single, evolve_known, new_sce)

arm = RobotConfig.from_links([((0, 0, 0), (0, 0, 0.4), 0.06), ((0, 0, 0.4), (0.35, 0, 0.5), 0.05),
                              ((0.35, 0, 0.5), (0.6, 0.1, 0.35), 0.04)])
params = BeliefParams()
dt = 0.1

first = SceState(np.array([1.4, 0.1, 0.4]), np.zeros(3), np.array([-0.8, 0.0, 0.0]), np.zeros(3))
beliefs = {mode: WorldBelief((new_sce("hand", first, params, (((0, 0, 0), 0.08),)),)) for mode in ("seen", "hidden")}

print(f"{'t':>5} {'u seen':>8} {'p seen':>8} {'u hidden':>9} {'p hidden':>9}")
for k in range(12):
    row = [f"{k * dt:5.1f}"]
    for mode, b in beliefs.items():
        observed = mode == "seen"
        s = b.sces[0]
        p = cpe_single(s, observed, arm, dt, params.a_max)
        row += [f"{s.u:8.3f}", f"{p:8.3f}"]
        beliefs[mode] = evolve_known(b, {"hand": observed}, dt, params)
    print(" ".join(row))
