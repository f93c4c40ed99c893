"""A camera sweeps back and forth; print how the hidden free space shrinks and refills.

Each map row is an elevation band (top = up), each column an azimuth cell; digits
are depth in tenths of d_max (9 = at least 90 %). Cells never seen contract at
v_max; once any cell reaches zero an obstacle could be anywhere close, and every
hidden cell drops to zero with it.

    python3 demos/safe_region_sweep.py
"""

import math

import numpy as np

from cease import CameraModel, SphericalGrid, VisionState, evolve, init_safe_region, visibility_mask

grid = SphericalGrid(24, 8)
cam = CameraModel((0, 0, 0), math.radians(30), d_max=2.0)
sr = init_safe_region(grid, cam.origin, cam.d_max, v_max=1.5)
dt = 0.1


def show(sr):
    d = np.minimum(9, (10 * sr.depth / sr.d_max).astype(int)).reshape(grid.n_el, grid.n_az)
    for row in d[::-1]:
        print("  " + "".join(str(v) for v in row))


for k in range(16):
    axis = VisionState(1.2 * math.sin(0.4 * k), 0.0)
    sr = evolve(sr, visibility_mask(sr, [cam], [axis]), dt)
    if k % 5 == 0:
        print(f"t = {k * dt:.1f} s, camera azimuth {math.degrees(axis.azimuth):+.0f} deg, "
              f"mean depth {sr.depth.mean():.2f} m")
        show(sr)
