"""Command line interface, CSV output and Aitken extrapolation.

Examples
--------
::

    eigenbox run --domain square8 --potential harmonic --methods cr,ecr,mcr,rt,scr,s1 \\
                 --k 1 --mode uniform --levels 6 --out run.csv
    eigenbox run --domain lshape8 --potential harmonic --methods scr --mode adaptive \\
                 --theta 0.5 --max-dofs 200000 --levels 40 --out afem.csv
    eigenbox aitken --in values.txt
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from .adaptivity import afem_loop
from .config import DOMAINS, MODES, POTENTIALS, ExperimentConfig, read_config_file
from .levels import GLB_KEYS, GUB_KEYS
from .mesh import save_mesh

COLUMNS = ("level", "ntri", "method", "ndof", "k", "lambda_h") + GLB_KEYS + GUB_KEYS + (
    "eps", "epsp", "epspp", "delta", "deltap", "hmax", "seconds")

# Reference eigenvalues of the benchmarks (unshifted problems).
REFERENCE = {
    ("square8", "harmonic", 1): math.sqrt(2.0),
    ("square8", "harmonic", 20): 8.4852765,
    ("lshape8", "harmonic", 1): 2.357076,
    ("square8", "lattice", 1): 25.743622,
    ("unitsquare", "zero", 1): 2.0 * math.pi**2,
}


def reference_value(domain: str, potential: str, k: int) -> float | None:
    return REFERENCE.get((domain, potential, k))


def aitken(seq) -> float:
    """Aitken's delta-squared value from the last three terms."""
    x = np.asarray(seq, dtype=float)
    if x.size < 3:
        raise ValueError("Aitken extrapolation needs at least three terms")
    x0, x1, x2 = x[-3:]
    d1, d2 = x2 - x1, x1 - x0
    if d1 == 0 or d2 == 0 or d1 - d2 == 0:
        raise ValueError("sequence not accelerable")
    return float(x2 - d1 * d1 / (d1 - d2))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def report_row(r, timing: bool = False) -> dict:
    p = r.params
    row = {"level": r.level, "ntri": r.ntri, "method": r.method, "ndof": r.ndof, "k": r.k,
           "lambda_h": r.lambda_h}
    for key in GLB_KEYS:
        row[key] = r.glb.get(key)
    for key in GUB_KEYS:
        row[key] = r.gub.get(key)
    if p is not None:
        row.update(eps=p.eps, epsp=p.epsp, epspp=p.epspp, delta=p.delta, deltap=p.deltap, hmax=p.hmax)
    row["seconds"] = r.seconds if timing else None
    return {c: _fmt(row.get(c)) for c in COLUMNS}


def write_csv(reports, fh, timing: bool = False) -> None:
    w = csv.DictWriter(fh, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(report_row(r, timing))


def _mesh_path(template: str, level: int) -> Path:
    if "{level}" in template:
        return Path(template.format(level=level))
    return Path(f"{template}.{level}")


def run(config: ExperimentConfig, out=None) -> list:
    """Run one experiment; writes CSV to ``out`` (path or file) or ``config.out``."""
    callback = None
    if config.dump_mesh:
        def callback(res, _report):
            path = _mesh_path(config.dump_mesh, res.reports[0].level)
            path.parent.mkdir(parents=True, exist_ok=True)
            save_mesh(res.mesh, path)
    reports = afem_loop(config, callback=callback)
    target = out if out is not None else config.out
    if target is not None:
        if hasattr(target, "write"):
            write_csv(reports, target, config.timing)
        else:
            Path(target).parent.mkdir(parents=True, exist_ok=True)
            with open(target, "w", newline="") as fh:
                write_csv(reports, fh, config.timing)
    return reports


def csv_text(reports, timing: bool = False) -> str:
    buf = io.StringIO()
    write_csv(reports, buf, timing)
    return buf.getvalue()


# --- CLI -----------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eigenbox", description="Guaranteed eigenvalue bounds")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a benchmark and write one CSV row per level and method")
    r.add_argument("--config", help="key = value file; flags override it")
    r.add_argument("--domain", choices=DOMAINS)
    r.add_argument("--potential", choices=POTENTIALS)
    r.add_argument("--seed", type=int, help="seed of the disordered potential")
    r.add_argument("--methods", help="comma separated subset of cr,ecr,mcr,rt,scr,s1")
    r.add_argument("--k", type=int)
    r.add_argument("--mode", choices=MODES)
    r.add_argument("--theta", type=float)
    r.add_argument("--levels", type=int)
    r.add_argument("--max-dofs", type=int)
    r.add_argument("--estimator", help="scheme whose eigenfunction drives the refinement")
    r.add_argument("--exclude-boundary-jumps", action="store_true", default=None)
    r.add_argument("--all-k", action="store_true", default=None, help="emit rows for every k' <= k")
    r.add_argument("--no-gub", action="store_true", default=None)
    r.add_argument("--timing", action="store_true", default=None, help="fill the seconds column")
    r.add_argument("--dump-mesh", help="mesh dump path per level ('{level}' is substituted)")
    r.add_argument("--out", help="CSV path (stdout if omitted)")
    a = sub.add_parser("aitken", help="Aitken extrapolation of the last three values")
    a.add_argument("--in", dest="infile", help="one value per line (stdin if omitted)")
    sub.add_parser("reference", help="print the reference eigenvalue table")
    return ap


def config_from_args(args) -> ExperimentConfig:
    values = read_config_file(args.config) if args.config else {}
    flags = {
        "domain": args.domain, "potential": args.potential, "seed": args.seed,
        "methods": args.methods, "k": args.k, "mode": args.mode, "theta": args.theta,
        "levels": args.levels, "max_dofs": args.max_dofs, "estimator": args.estimator,
        "all_k": args.all_k, "timing": args.timing, "dump_mesh": args.dump_mesh, "out": args.out,
        "boundary_jumps": None if args.exclude_boundary_jumps is None else False,
        "gub": None if args.no_gub is None else False,
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    return ExperimentConfig(**values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = config_from_args(args)
            if cfg.out is None:
                run(cfg, out=sys.stdout)
            else:
                run(cfg)
        elif args.command == "aitken":
            text = Path(args.infile).read_text() if args.infile else sys.stdin.read()
            vals = [float(t) for t in text.split()]
            print(repr(aitken(vals)))
        else:
            for (dom, pot, k), v in REFERENCE.items():
                print(f"{dom:10s} {pot:9s} k={k:<3d} {v!r}")
    except (ValueError, np.linalg.LinAlgError, OSError) as exc:
        print(f"eigenbox: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
