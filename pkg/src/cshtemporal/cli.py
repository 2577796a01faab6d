"""Command-line front end.

Exit codes: 0 on success, 1 on configuration error, 2 when a run hits a non-finite state.
"""

from __future__ import annotations

import argparse
import math
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from fractions import Fraction
from typing import Optional, Sequence

from .artifacts import fmt, ndjson, save_data, load_data, trajectory_csv, write_csv
from .config import ConfigError, RunConfig
from .data import gen_lowreg_data
from .estimates import ExtScalar, angle_bound_sample, verify_claim_registry
from .experiments import continuity_probe, equivalence, perturbation_direction
from .integrator import NonFiniteStateError, StepperConfig, convergence_study, simulate

EXIT_OK, EXIT_CONFIG, EXIT_NAN = 0, 1, 2

_console = threading.Lock()


def say(msg: str, stream=None):
    with _console:
        print(msg, file=stream or sys.stderr, flush=True)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        say(f"{self.prog}: error: {message}")
        raise SystemExit(EXIT_CONFIG)


def _add_config_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("run configuration (overrides --config)")
    g.add_argument("--config", help="flat key = value file")
    g.add_argument("--n", type=int)
    g.add_argument("--period", type=float)
    g.add_argument("--s", type=float)
    g.add_argument("--dt", type=float)
    g.add_argument("--t-end", dest="t_end", type=float)
    g.add_argument("--potential", help="coefficients c0,c1,.. of V(r) = sum c_k r^(k+1)")
    g.add_argument("--seed", type=int)
    g.add_argument("--amplitude", type=float)
    g.add_argument("--kmax", help="spectral cutoff |xi| <= kmax, or none")
    g.add_argument("--formulation")
    g.add_argument("--grouping")
    g.add_argument("--record-every", dest="record_every", type=int)
    g.add_argument("--output", help="artifact path (stdout if omitted)")
    g.add_argument("--report", help="report path (stdout if omitted)")


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    values = {}
    for key in RunConfig.keys():
        v = getattr(args, key, None)
        if v is None:
            continue
        values[key] = RunConfig.parse_value(key, v) if isinstance(v, str) else v
    return cfg.updated(**values)


@contextmanager
def _sink(path: Optional[str]):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _initial_data(cfg: RunConfig, path: Optional[str] = None, seed: Optional[int] = None):
    if path:
        return load_data(path)
    return gen_lowreg_data(cfg.grid, cfg.s, cfg.seed if seed is None else seed, cfg.amplitude, cfg.kmax)


# -- subcommands -------------------------------------------------------------

def _simulate_one(cfg: RunConfig, data, output: Optional[str]) -> int:
    sc = StepperConfig(cfg.dt, cfg.t_end, cfg.record_every, cfg.formulation, cfg.grouping, cfg.s)
    try:
        traj = simulate(data, sc, cfg.potential_fn)
        code, status = EXIT_OK, f"ok t={fmt(traj.final_state.time)}"
    except NonFiniteStateError as e:
        traj = e.trajectory
        code, status = EXIT_NAN, f"nan t={fmt(e.last_state.time)}"
    text = trajectory_csv(traj, status)
    if output is None:
        with _console:
            sys.stdout.write(text)
            sys.stdout.flush()
    else:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    say(f"simulate seed={cfg.seed} status={status}")
    return code


def cmd_simulate(args, cfg: RunConfig) -> int:
    seeds = [int(x) for x in args.seeds.split(",")] if args.seeds else [cfg.seed]
    if len(seeds) == 1:
        return _simulate_one(cfg, _initial_data(cfg, args.data), cfg.output)
    if args.data:
        raise ConfigError("--seeds cannot be combined with --data")
    if not cfg.output or "{seed}" not in cfg.output:
        raise ConfigError("a seed sweep needs --output containing '{seed}'")

    def job(seed):
        c = cfg.updated(seed=seed)
        return _simulate_one(c, _initial_data(c), cfg.output.format(seed=seed))

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        codes = list(pool.map(job, seeds))
    return max(codes)


def cmd_equivalence(args, cfg: RunConfig) -> int:
    rep = equivalence(_initial_data(cfg, args.data), cfg.dt, cfg.t_end, cfg.potential_fn, cfg.grouping)
    if not all(math.isfinite(v) for v in (rep.phi_l2, rep.dphi_l2, rep.gauge_l2)):
        say("equivalence status=nan")
        return EXIT_NAN
    say(rep.line(), sys.stdout)
    return EXIT_OK


def cmd_convergence(args, cfg: RunConfig) -> int:
    dts = [float(Fraction(x)) for x in args.dts.split(",")] if args.dts else [cfg.dt * 2**-k for k in range(3)]
    rows = convergence_study(_initial_data(cfg, args.data), dts, cfg.potential_fn, cfg.t_end,
                             cfg.formulation, cfg.grouping)
    with _sink(cfg.output) as fh:
        write_csv(fh, ("dt", "error", "gauss_drift", "order"),
                  ((r.dt, r.error, r.gauss_drift, r.order if r.order is not None else float("nan")) for r in rows),
                  "ok")
    say("convergence status=ok " + " ".join(f"{r.verdict}" for r in rows[1:]))
    return EXIT_OK


def cmd_probe_continuity(args, cfg: RunConfig) -> int:
    deltas = [float(x) for x in args.deltas.split(",")]
    data = _initial_data(cfg, args.data)
    direction = perturbation_direction(cfg.grid, cfg.s, args.direction_seed, kmax=cfg.kmax)
    rows = continuity_probe(data, direction, deltas, cfg.t_end, cfg.dt, cfg.s, cfg.potential_fn, cfg.grouping)
    with _sink(cfg.output) as fh:
        write_csv(fh, ("delta", "distance", "ratio"), ((r.delta, r.distance, r.ratio) for r in rows), "ok")
    say("probe-continuity status=ok")
    return EXIT_OK


def cmd_check_estimates(args, cfg: RunConfig) -> int:
    s = ExtScalar.parse(args.at) if args.at else ExtScalar(Fraction(str(cfg.s)))
    if not s > 0:
        raise ConfigError("s must be positive")
    entries = verify_claim_registry(s)
    with _sink(cfg.report) as fh:
        fh.write(ndjson(e.to_json() for e in entries))
    failed = [e.label for e in entries if not e.verdict.passed]
    say(f"check-estimates s={s} status=ok failed={','.join(failed) or 'none'}")
    return EXIT_OK


def cmd_angle_sample(args, cfg: RunConfig) -> int:
    if args.samples < 1:
        raise ConfigError("--samples must be >= 1")
    res = angle_bound_sample(args.samples, cfg.seed)
    with _sink(cfg.report) as fh:
        fh.write(ndjson([res.to_json()]))
    say(f"angle-sample status=ok max_ratio={fmt(res.max_ratio)}")
    return EXIT_OK


def cmd_gen_data(args, cfg: RunConfig) -> int:
    if not cfg.output:
        raise ConfigError("gen-data needs --output")
    data = _initial_data(cfg)
    save_data(cfg.output, data, s=cfg.s, seed=cfg.seed, amplitude=cfg.amplitude, kmax=cfg.kmax)
    say(f"gen-data status=ok path={cfg.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cshtemporal", description="Temporal-gauge Chern-Simons-Higgs experiments on the torus")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        _add_config_flags(sp)
        sp.set_defaults(func=fn)
        return sp

    sp = add("simulate", cmd_simulate, "run one trajectory and write diagnostics CSV")
    sp.add_argument("--data", help="npz bundle from gen-data instead of generated data")
    sp.add_argument("--seeds", help="comma list; runs concurrently, --output must contain {seed}")
    sp.add_argument("--jobs", type=int, default=2)
    sp = add("equivalence", cmd_equivalence, "terminal distance between the two formulations")
    sp.add_argument("--data")
    sp = add("convergence", cmd_convergence, "self-convergence table")
    sp.add_argument("--data")
    sp.add_argument("--dts", help="comma list of decreasing step sizes (fractions allowed)")
    sp = add("probe-continuity", cmd_probe_continuity, "terminal distance under data perturbations")
    sp.add_argument("--data")
    sp.add_argument("--deltas", default="1e-3,1e-4,1e-5")
    sp.add_argument("--direction-seed", type=int, default=1)
    sp = add("check-estimates", cmd_check_estimates, "exponent registry as NDJSON")
    sp.add_argument("--at", help="exponent s, e.g. 1/4+ or 3/10 (default: config s)")
    sp = add("angle-sample", cmd_angle_sample, "angle-bound sampler as NDJSON")
    sp.add_argument("--samples", type=int, default=10**6)
    add("gen-data", cmd_gen_data, "write seeded low-regularity data to npz")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        return args.func(args, cfg)
    except (ConfigError, OSError, ValueError) as e:
        say(f"{args.command}: status=config-error {e}")
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
