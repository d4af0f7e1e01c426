"""Command line driver: ``vof2d run`` and ``vof2d convergence``."""
import argparse
import csv
import os
import sys
from dataclasses import replace

import numpy as np

from .advect import BoundednessError, CFLError
from .config import ConfigError, load_config
from .diagnostics import DiagnosticsWriter, convergence_table, write_snapshot
from .scenarios import build
from .stokes import StokesConvergenceError
from .thermal import ThermalSolveError

NUMERICAL_ERRORS = (CFLError, BoundednessError, StokesConvergenceError, ThermalSolveError,
                    FloatingPointError, np.linalg.LinAlgError)


def set_threads(n):
    if not n:
        return
    import numba
    avail = numba.config.NUMBA_NUM_THREADS
    if n > avail:
        print(f"note: {n} threads requested, numba pool has {avail}", file=sys.stderr)
    numba.set_num_threads(max(1, min(n, avail)))


def run_simulation(cfg, out_dir, every=1, quiet=False):
    """Run one scenario, writing ``diagnostics.csv`` and snapshots; returns the simulation."""
    from .coupling import Simulation

    os.makedirs(out_dir, exist_ok=True)
    sim = Simulation(build(cfg))
    outs = tuple(cfg.output_times)

    with DiagnosticsWriter(os.path.join(out_dir, "diagnostics.csv")) as w:
        def observer(s, kind):
            if kind in ("init", "step") and (s.state.step % every == 0 or kind == "init"):
                w.write(s.diagnostics())
            if kind == "output":
                write_snapshot(out_dir, f"t{s.state.t:.6g}", s)

        sim.run(observer, outs)
        if sim.state.step % every:
            w.write(sim.diagnostics())
    if not any(abs(sim.state.t - t) <= 1e-12 * max(1.0, t) for t in outs):
        write_snapshot(out_dir, "final", sim)
    if not quiet:
        d = sim.diagnostics()
        print(f"{cfg.kind}: t={d['time']:.6g} steps={d['step']} total_c1={d['total_c1']!r}"
              + (f" l1_error={d['l1_error']!r}" if d["l1_error"] != "" else ""))
    return sim


def parse_levels(text):
    try:
        a, b = text.split("..")
        a, b = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError("levels must look like a..b") from None
    if a > b:
        raise argparse.ArgumentTypeError("levels a..b need a <= b")
    return a, b


def run_convergence(cfg, levels, out_dir):
    a, b = levels
    if build(cfg).exact is None:
        raise ConfigError(f"scenario {cfg.kind!r} has no exact solution")
    hs, errs = [], []
    for lev in range(a, b + 1):
        n = 2 ** lev
        c = replace(cfg, nx=int(round(cfg.Lx * n)), ny=int(round(cfg.Ly * n)), output_times=())
        sim = run_simulation(c, os.path.join(out_dir, f"level{lev}"), quiet=True)
        e = sim.diagnostics()["l1_error"]
        hs.append(sim.vgrid.h)
        errs.append(e)
    rows = convergence_table(hs, errs)
    path = os.path.join(out_dir, "convergence.csv")
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["h", "l1_error", "rate"])
        for h, e, r in rows:
            wr.writerow([repr(h), repr(e), "" if r is None else (r if isinstance(r, str) else repr(r))])
    for h, e, r in rows:
        rate = "" if r is None else (r if isinstance(r, str) else f"{r:.3f}")
        print(f"h={h:<12.6g} l1={e:<14.6e} rate={rate}")
    return rows


def build_parser():
    p = argparse.ArgumentParser(prog="vof2d", description=__doc__)
    p.add_argument("--output-dir", default=None, help="output directory (overrides run.output_dir)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads; falls back to VOF2D_THREADS (speed only, results unchanged)")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one scenario to its end time")
    r.add_argument("config")
    c = sub.add_parser("convergence", help="L1 error table over a range of resolutions")
    c.add_argument("config")
    c.add_argument("--levels", type=parse_levels, required=True, help="a..b: cells per unit length 2^a .. 2^b")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if not os.path.isfile(args.config):
        print(f"vof2d: config file not found: {args.config}", file=sys.stderr)
        return 2
    try:
        rc = load_config(args.config)
    except ConfigError as e:
        print(f"vof2d: {args.config}: {e}", file=sys.stderr)
        return 2
    threads = args.threads or rc.threads
    if threads is None and os.environ.get("VOF2D_THREADS"):
        try:
            threads = int(os.environ["VOF2D_THREADS"])
        except ValueError:
            print("vof2d: VOF2D_THREADS must be an integer", file=sys.stderr)
            return 2
    set_threads(threads)
    out_dir = args.output_dir or rc.output_dir
    try:
        if args.command == "run":
            run_simulation(rc.scenario, out_dir, rc.every)
        else:
            run_convergence(rc.scenario, args.levels, out_dir)
    except NUMERICAL_ERRORS as e:
        print(f"vof2d: numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError) as e:
        print(f"vof2d: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"vof2d: I/O error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
