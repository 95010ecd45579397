"""Write the CSV tables of the four benchmark suites into one directory.

    python3 scripts/run_benchmarks.py --out results [--quick]
"""
import argparse
from pathlib import Path

from eigenbox.config import ExperimentConfig
from eigenbox.driver import run

ALL = "cr,ecr,mcr,rt,scr,s1"


def suites(quick: bool):
    fine = 5 if quick else 8
    yield "harmonic_k1", dict(domain="square8", potential="harmonic", methods=ALL, k=1, levels=fine)
    yield "harmonic_k20", dict(domain="square8", potential="harmonic", methods=ALL, k=20,
                               levels=fine - 1)
    yield "lshape_uniform", dict(domain="lshape8", potential="harmonic", methods=ALL, k=1,
                                 levels=fine)
    yield "lshape_adaptive", dict(domain="lshape8", potential="harmonic", methods=ALL, k=1,
                                  mode="adaptive", levels=500,
                                  max_dofs=20_000 if quick else 200_000)
    yield "lattice_uniform", dict(domain="square8", potential="lattice", methods=ALL, k=1,
                                  levels=fine)
    yield "lattice_adaptive", dict(domain="square8", potential="lattice", methods=ALL, k=1,
                                   mode="adaptive", levels=500,
                                   max_dofs=20_000 if quick else 200_000)
    for seed in (1, 2, 3):
        yield f"anderson{seed}_adaptive", dict(domain="unitsquare", potential="anderson", seed=seed,
                                               methods=ALL, mode="adaptive", levels=500,
                                               max_dofs=20_000 if quick else 200_000)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--quick", action="store_true", help="coarser runs for a smoke test")
    args = ap.parse_args()
    out = Path(args.out)
    for name, kw in suites(args.quick):
        path = out / f"{name}.csv"
        rows = run(ExperimentConfig(timing=True, **kw), out=path)
        print(f"{name}: {len(rows)} rows -> {path}", flush=True)


if __name__ == "__main__":
    main()
