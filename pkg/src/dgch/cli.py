"""Command-line entry point: ``dgch run|converge|verify|compare-forms|presets``.

Exit codes
    0  success (t_end reached, order in range, suites passed)
    1  a verification or convergence check failed
    2  configuration error
    3  wave breaking detected
    4  norm cap exceeded
    5  non-finite state
    6  output could not be written
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .diagnostics import write_json, write_snapshot, write_timeseries
from .errors import ConfigurationError, InconclusiveError, NonFiniteError, UndefinedRatioError
from .kato import (
    SUITES,
    SampleSpec,
    check_commutator_hypotheses,
    frozen_growth_suite,
    random_coefficients,
    run_suite,
    synthesize,
)
from .manufactured import TravellingWave, convergence_study
from .operators import PRESETS, ModelParams, operator_from_name, quasilinear_residual
from .spectral import make_grid
from .stepping import StopReason, integrate

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_WAVE_BREAKING = 3
EXIT_NORM_CAP = 4
EXIT_NON_FINITE = 5
EXIT_IO = 6

STOP_CODES = {
    StopReason.REACHED_T_END: EXIT_OK,
    StopReason.WAVE_BREAKING: EXIT_WAVE_BREAKING,
    StopReason.NORM_CAP: EXIT_NORM_CAP,
    StopReason.NON_FINITE: EXIT_NON_FINITE,
}

log = logging.getLogger("dgch")


class _Out:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def __call__(self, *parts):
        if not self.quiet:
            print(*parts)


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.model_copy(update={"seed": args.seed})
    return cfg


def _out_dir(args, cfg: RunConfig) -> Path:
    path = Path(args.out or cfg.output.directory)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {path}: {exc.strerror or exc}") from exc
    return path


# --- run ----------------------------------------------------------------------


def cmd_run(args) -> int:
    cfg = _load(args)
    say = _Out(args.quiet)
    grid = cfg.build_grid()
    params = cfg.build_params(grid)
    stepper, monitor = cfg.build_stepper(), cfg.build_monitor()
    initial = cfg.build_initial(grid)
    out = _out_dir(args, cfg)
    snaps = out / "snapshots"
    snaps.mkdir(exist_ok=True)
    stride = cfg.output.stride

    def snapshot(state, step):
        if step % stride == 0:
            write_snapshot(state, snaps / f"u_{step:06d}.csv")

    res = integrate(initial, params, stepper, monitor, callback=snapshot)
    write_timeseries(res.trail, out / "timeseries.csv")
    write_snapshot(res.final, out / "final.csv")
    last = res.trail[-1]
    summary = {
        "stop_reason": res.stop_reason.value,
        "stop_time": res.stop_time,
        "steps": res.steps,
        "operator": params.L.name,
        "a": params.a,
        "b": params.b,
        "final": dict(zip(
            ("time", "mean_u", "mean_m", "energy", "norm_h1g", "min_slope", "max_abs_u"),
            (last.time, last.mean_u, last.mean_m, last.energy, last.norm_h1g,
             last.min_slope, last.max_abs_u),
        )),
    }
    write_json(summary, out / "summary.json")
    say(f"stop reason: {res.stop_reason.value} at t={res.stop_time:.6g} after {res.steps} steps")
    say(f"  integral u = {last.mean_u:.12g}")
    say(f"  integral m = {last.mean_m:.12g}")
    say(f"  energy     = {last.energy:.12g}")
    say(f"  |u|_1,G    = {last.norm_h1g:.12g}")
    say(f"  min u_x    = {last.min_slope:.6g}")
    say(f"output: {out}")
    return STOP_CODES[res.stop_reason]


# --- converge -----------------------------------------------------------------


def cmd_converge(args) -> int:
    cfg = _load(args)
    say = _Out(args.quiet)
    grid = cfg.build_grid()
    params = cfg.build_params(grid)
    mc = cfg.manufactured
    wave = TravellingWave(mc.amplitude, mc.speed, mc.wavenumber)
    wave.check(grid)
    res = convergence_study(grid, params, wave, mc.dt_sweep, mc.t_end,
                            (mc.order_min, mc.order_max), mc.error_floor)
    out = _out_dir(args, cfg)
    try:
        with (out / "convergence.csv").open("w", newline="") as fh:
            fh.write("dt,error\n")
            for dt, err in zip(res.dts, res.errors):
                fh.write(f"{dt:.17g},{err:.17g}\n")
    except OSError as exc:
        raise OSError(f"cannot write {out / 'convergence.csv'}: {exc.strerror or exc}") from exc
    write_json({
        "dts": res.dts, "errors": res.errors, "order": res.order, "pairwise_orders": res.pairwise,
        "order_range": list(res.order_range), "error_floor": res.error_floor,
        "order_ok": res.order_ok, "floor_ok": res.floor_ok, "passed": res.passed,
    }, out / "convergence.json")
    say(f"{'dt':>12}  {'error':>12}")
    for dt, err in zip(res.dts, res.errors):
        say(f"{dt:12.4e}  {err:12.4e}")
    if res.trivial:
        say("observed order: undefined (all errors are zero), trivially passes")
    else:
        shown = "undefined" if res.order is None else f"{res.order:.4f}"
        say(f"observed order: {shown} (accepted range {res.order_range[0]}..{res.order_range[1]})")
        say(f"error floor: {min(res.errors):.3e} (limit {res.error_floor:g})")
    say("PASS" if res.passed else "FAIL")
    return EXIT_OK if res.passed else EXIT_FAILED


# --- verify -------------------------------------------------------------------


def _sample_spec(args, cfg: RunConfig, count=None) -> SampleSpec:
    v = cfg.verify
    return SampleSpec(
        count=v.count if count is None else count,
        band=args.band if args.band is not None else v.band,
        decay=v.decay,
        seed=cfg.seed,
    )


def cmd_verify(args) -> int:
    if args.suite != "all" and args.suite not in SUITES:
        raise ConfigurationError(
            f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)} or all", "suite"
        )
    cfg = _load(args)
    say = _Out(args.quiet)
    v = cfg.verify
    n = args.n if args.n is not None else v.n
    count = args.count if args.count is not None else v.count
    comm = {
        "n_order": args.comm_n if args.comm_n is not None else v.commutator.n,
        "s": args.comm_s if args.comm_s is not None else v.commutator.s,
        "sigma": args.comm_sigma if args.comm_sigma is not None else v.commutator.sigma,
    }
    names = list(SUITES) if args.suite == "all" else [args.suite]
    if "commutator" in names:
        check_commutator_hypotheses(comm["n_order"], comm["s"], comm["sigma"])
    grid = make_grid(n, cfg.grid.period)
    params = cfg.build_params(grid)
    spec = _sample_spec(args, cfg, count)
    spec.check(grid)
    out = _out_dir(args, cfg)
    ok = True
    for name in names:
        if name == "commutator":
            report = run_suite(name, spec, params, n=n, commutator_args=comm,
                               period=cfg.grid.period)
        elif name == "frozen-growth":
            fspec = _sample_spec(args, cfg, v.frozen_count)
            report = frozen_growth_suite(fspec, params, t=v.frozen_t, n=n, period=cfg.grid.period)
        else:
            report = run_suite(name, spec, params, n=n, s=args.s if args.s is not None else v.s,
                               period=cfg.grid.period)
        write_json(report.to_json(), out / f"report_{name}.json")
        ok = ok and report.passed
        res = report.resolution_max
        stab = report.stability
        say(f"{'PASS' if report.passed else 'FAIL'}  {name:<22} max ratio {report.max_ratio:.6g}"
            + (f"  stability {stab:.4g}" if stab is not None and len(res) > 1 else ""))
    return EXIT_OK if ok else EXIT_FAILED


# --- compare-forms ------------------------------------------------------------


def _stats(values: List[float]) -> dict:
    if not values:
        return {"count": 0}
    a = np.asarray(values)
    return {"count": len(values), "min": float(a.min()), "mean": float(a.mean()),
            "max": float(a.max())}


def cmd_compare_forms(args) -> int:
    cfg = _load(args)
    say = _Out(args.quiet)
    grid = cfg.build_grid()
    c = cfg.compare
    ops = [operator_from_name(name).validate(grid) for name in c.presets]
    spec = SampleSpec(count=c.count, band=c.band, decay=c.decay, seed=cfg.seed)
    if c.count:
        spec.check(grid)
    rng = spec.rng(11)
    fields = [synthesize(grid, random_coefficients(spec, rng)) for _ in range(spec.count)]
    probes = {
        "constant": np.full(grid.n, 0.8),
        "cosine": np.cos(grid.k0 * grid.nodes),
    }
    report = {"a": cfg.params.a, "b": cfg.params.b, "n": grid.n, "count": spec.count,
              "band": spec.band, "decay": spec.decay, "seed": spec.seed, "presets": {}}
    for L in ops:
        params = ModelParams(cfg.params.a, cfg.params.b, L)
        entry = {"samples": _stats([quasilinear_residual(grid, u, params) for u in fields])}
        for name in c.probes:
            entry[name] = quasilinear_residual(grid, probes[name], params)
        report["presets"][L.name] = entry
        line = f"{L.name:<12}"
        for name in c.probes:
            line += f"  {name} {entry[name]:.6g}"
        if fields:
            s = entry["samples"]
            line += f"  samples min {s['min']:.4g} mean {s['mean']:.4g} max {s['max']:.4g}"
        say(line)
    out = _out_dir(args, cfg)
    write_json(report, out / "compare_forms.json")
    return EXIT_OK


# --- presets ------------------------------------------------------------------


def cmd_presets(args) -> int:
    for name, text in PRESETS.items():
        print(f"{name:<16} {text}")
    return EXIT_OK


# --- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = argparse.ArgumentParser(prog="dgch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="integrate one configuration")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("converge", parents=[common], help="manufactured-solution order study")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("suite", help=f"one of {', '.join(SUITES)}, or all")
    p.add_argument("--count", type=int, help="samples per suite")
    p.add_argument("--band", type=int, help="highest sampled mode")
    p.add_argument("--n", type=int, help="base resolution (also checked at 2n)")
    p.add_argument("--s", type=float, help="Sobolev index (default 4 + p)")
    p.add_argument("--comm-n", type=float, help="commutator order n")
    p.add_argument("--comm-s", type=float, help="commutator index s")
    p.add_argument("--comm-sigma", type=float, help="commutator index sigma")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare-forms", parents=[common],
                       help="quasi-linear residual report per preset")
    p.set_defaults(func=cmd_compare_forms)

    p = sub.add_parser("presets", help="list operator presets")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InconclusiveError, UndefinedRatioError) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except NonFiniteError as exc:
        print(f"non-finite state: {exc}", file=sys.stderr)
        return EXIT_NON_FINITE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
