"""Five-material cantilever: the optimizer picks its own palette.

Both candidate sets span E=0.4..1.0 against densities 0.3..1.0. The
interesting outcome is material SELECTION: for set 1 the optimal layout
skips material 4 entirely (its stiffness-per-mass sits in the shadow of
materials 3 and 5), while set 2's slightly stiffer mid-range materials
all earn a place. Run with --set 2 to compare.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from topocut import relaxation
from topocut.model import MATERIALS_5_SET1, MATERIALS_5_SET2, measure, preset

GLYPHS = ".12345"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--set", type=int, choices=(1, 2), default=1)
    args = ap.parse_args()

    mats = MATERIALS_5_SET1 if args.set == 1 else MATERIALS_5_SET2
    spec = preset("cantilever5mat", materials=mats)
    print(f"five-material cantilever {spec.n_x}x{spec.n_y}, set {args.set}, "
          f"mass target {spec.constraint.target}")
    print(f"  E = {spec.materials.young_moduli}")
    print(f"  density = {spec.materials.densities}")

    t0 = time.perf_counter()
    result = relaxation.run(spec)
    wall = time.perf_counter() - t0

    frac = measure(result.design, spec.constraint, spec.materials)["value"]
    print(f"\nstatus={result.status}  f={result.objective:.2f}  "
          f"n_fem={result.n_fem}  mass={frac:.4f}  wall={wall:.1f}s")

    grid = result.design.material_map().reshape(spec.n_x, spec.n_y).T[::-1]
    step = max(1, spec.n_x // 76)
    for row in grid[::step]:
        print("".join(GLYPHS[v] for v in row[::step]))

    counts = np.bincount(grid.ravel(), minlength=6)
    used = [m for m in range(1, 6) if counts[m] > 0]
    print(f"\nmaterials used: {used}")
    for m in used:
        print(f"  MAT {m}: {counts[m]} elements")


if __name__ == "__main__":
    main()
