"""Aitken reference eigenvalues for the Anderson benchmark.

Courant (S1) eigenvalues on red-refined levels of the cell-aligned unit-square
mesh are extrapolated from the last three levels.  Level L has 128 * 4**L
triangles; the default levels 4..6 end at 524288 triangles.

    python3 scripts/anderson_reference.py --seeds 1 2 3
"""
import argparse

from eigenbox.config import initial_mesh, make_potential
from eigenbox.driver import aitken
from eigenbox.levels import solve_method
from eigenbox.mesh import uniform_red_refine


def courant_sequence(seed: int, levels):
    V = make_potential("anderson", seed)
    mesh = initial_mesh("unitsquare")
    vals = []
    for level in range(max(levels) + 1):
        if level in levels:
            rep, _, _ = solve_method("S1", mesh, V, 1, gub=False)
            vals.append(rep[0].lambda_h)
        mesh = uniform_red_refine(mesh)
    return vals


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--levels", type=int, nargs="+", default=[4, 5, 6])
    args = ap.parse_args()
    for seed in args.seeds:
        vals = courant_sequence(seed, args.levels)
        print(f"seed {seed}: S1 {' '.join(repr(v) for v in vals)} -> Aitken {aitken(vals)!r}")


if __name__ == "__main__":
    main()
