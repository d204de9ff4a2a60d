"""Command-line interface.

Subcommands: gen-world, plan, run-trial, run-sweep, export-map, report.
All randomness is controlled by explicit --seed arguments; exit status is 0
on success and nonzero on any error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bench, plots
from .foothold import SearchConfig, VelocityCommand, select_target
from .gait import BehaviorParams, LEG_NAMES
from .gridmap import GridSpec, Pose2D, export_map_csv, sample_dual_map
from .scenario import ScenarioError, generate_track, load_world, save_world
from .simulator import run_trial


def _add_params_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("behavior parameters")
    group.add_argument("--params", metavar="JSON", help="JSON file with BehaviorParams fields")
    group.add_argument("--base-height", type=float, help="base height (m)")
    group.add_argument("--swing-height", type=float, help="footswing apex above the margin (m)")
    group.add_argument("--frequency", type=float, help="contact frequency (Hz)")
    group.add_argument("--duty", type=float, help="duty factor in (0, 1)")
    group.add_argument("--stance-width", type=float, help="stance width (m)")
    group.add_argument("--stance-length", type=float, help="stance length (m)")


def _load_params(args, default: BehaviorParams) -> BehaviorParams:
    fields = {}
    if args.params:
        with open(args.params, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        for key, value in raw.items():
            if key in ("phase_offsets", "contact_timers"):
                value = tuple(value)
            fields[key] = value
    overrides = {
        "base_height": args.base_height,
        "swing_height": args.swing_height,
        "frequency_hz": args.frequency,
        "duty_factor": args.duty,
        "stance_width": args.stance_width,
        "stance_length": args.stance_length,
    }
    fields.update({k: v for k, v in overrides.items() if v is not None})
    merged = {**default.__dict__, **fields}
    return BehaviorParams(**merged)


def _add_search_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("foothold search")
    group.add_argument("--search-side", type=int, default=bench.BENCH_SEARCH.side_count,
                       help="candidate grid side count (odd)")
    group.add_argument("--search-spacing", type=float, default=bench.BENCH_SEARCH.spacing,
                       help="candidate spacing (m)")
    group.add_argument("--w-dev", type=float, default=bench.BENCH_SEARCH.deviation_weight,
                       help="deviation weight")
    group.add_argument("--w-col", type=float, default=bench.BENCH_SEARCH.collision_weight,
                       help="collision weight")
    group.add_argument("--foot-radius", type=float, default=bench.BENCH_SEARCH.foot_radius,
                       help="foot radius used for obstacle dilation (m)")


def _search_from_args(args) -> SearchConfig:
    return SearchConfig(
        side_count=args.search_side,
        spacing=args.search_spacing,
        deviation_weight=args.w_dev,
        collision_weight=args.w_col,
        foot_radius=args.foot_radius,
    )


def _cmd_from_args(values) -> VelocityCommand:
    return VelocityCommand(*values)


def cmd_gen_world(args) -> int:
    world = generate_track(
        density=args.density,
        seed=args.seed,
        length=args.length,
        width=args.width,
        mode=args.mode,
        allow_stacking=args.allow_stacking,
        half_extent_range=tuple(args.half_extents),
        height_range=tuple(args.heights),
    )
    save_world(world, args.out)
    print(f"wrote {args.out}: {len(world.obstacles)} obstacles on a "
          f"{world.track_length:g} x {world.track_width:g} m track")
    return 0


def cmd_plan(args) -> int:
    world = load_world(args.scenario)
    params = _load_params(args, bench.BENCH_PARAMS)
    base = Pose2D(*args.pose)
    plan = select_target(params, _cmd_from_args(args.cmd), base, world, _search_from_args(args))
    header = f"{'leg':<4} {'nom_x':>8} {'nom_y':>8} {'rai_x':>8} {'rai_y':>8} " \
             f"{'tgt_x':>8} {'tgt_y':>8} {'cost':>8} free"
    print(header)
    for leg, name in enumerate(LEG_NAMES):
        print(
            f"{name:<4} {plan.nominal[leg, 0]:8.4f} {plan.nominal[leg, 1]:8.4f} "
            f"{plan.raibert[leg, 0]:8.4f} {plan.raibert[leg, 1]:8.4f} "
            f"{plan.target[leg, 0]:8.4f} {plan.target[leg, 1]:8.4f} "
            f"{plan.cost[leg]:8.4f} {'yes' if plan.collision_free[leg] else 'no'}"
        )
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write("leg,nom_x,nom_y,raibert_x,raibert_y,target_x,target_y,cost,collision_free\r\n")
            for leg, name in enumerate(LEG_NAMES):
                fh.write(
                    f"{name},{plan.nominal[leg, 0]!r},{plan.nominal[leg, 1]!r},"
                    f"{plan.raibert[leg, 0]!r},{plan.raibert[leg, 1]!r},"
                    f"{plan.target[leg, 0]!r},{plan.target[leg, 1]!r},"
                    f"{plan.cost[leg]!r},{int(plan.collision_free[leg])}\r\n"
                )
        print(f"wrote {args.csv}")
    return 0


def cmd_run_trial(args) -> int:
    world = load_world(args.scenario)
    params = _load_params(args, bench.BENCH_PARAMS)
    policy = bench.make_policy(args.policy, search=_search_from_args(args))
    result = run_trial(
        world,
        policy,
        _cmd_from_args(args.cmd),
        max_time=args.max_time,
        dt=args.dt,
        params=params,
        velocity_noise=args.velocity_noise,
        noise_seed=args.noise_seed,
        tracking_lag=args.tracking_lag,
        traj_log=args.log_traj,
        reward_log=args.log_rewards,
    )
    rate = 100.0 * result.colliding_steps / result.total_steps if result.total_steps else 0.0
    print(f"policy={result.policy} termination={result.termination} "
          f"distance={result.distance:.2f} m steps={result.total_steps} "
          f"colliding={result.colliding_steps} ({rate:.2f}%)")
    return 0


def cmd_run_sweep(args) -> int:
    policies = [bench.make_policy(name, search=_search_from_args(args))
                for name in args.policies.split(",")]
    report = bench.run_sweep(
        policies,
        densities=[float(d) for d in args.densities.split(",")],
        n_trials=args.trials,
        base_seed=args.seed,
        mode=args.mode,
        length=args.length,
        width=args.width,
        allow_stacking=args.allow_stacking,
        cmd=_cmd_from_args(args.cmd),
        max_time=args.max_time,
        params=_load_params(args, bench.BENCH_PARAMS),
        workers=args.workers,
    )
    csv_text = bench.report_csv(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(csv_text)
    if args.figures:
        for path in plots.render_sweep_figures(report, args.figures):
            print(f"wrote {path}")
    return 0


def cmd_export_map(args) -> int:
    world = load_world(args.scenario)
    rng = np.random.default_rng(args.noise_seed) if args.noise > 0 else None
    dual = sample_dual_map(
        world, Pose2D(*args.pose), GridSpec(), noise_amplitude=args.noise, noise_rng=rng
    )
    export_map_csv(dual, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_report(args) -> int:
    with open(args.input, "r", encoding="utf-8") as fh:
        report = bench.parse_report_csv(fh.read())
    sys.stdout.write(bench.render_report(report, args.format))
    if args.figures:
        for path in plots.render_sweep_figures(report, args.figures):
            print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="footplan",
        description="Foothold planning, kinematic trials, and cluttered-track benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-world", help="generate a seeded cluttered track")
    p.add_argument("--density", type=float, required=True, help="obstacles per square meter")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--mode", choices=("virtual", "rigid"), default="rigid")
    p.add_argument("--out", required=True, help="scenario file to write")
    p.add_argument("--length", type=float, default=10.0)
    p.add_argument("--width", type=float, default=2.0)
    p.add_argument("--allow-stacking", action="store_true",
                   help="permit overlapping footprints (heights stack)")
    p.add_argument("--half-extents", type=float, nargs=2, default=list(bench.BENCH_HALF_EXTENTS),
                   metavar=("LO", "HI"))
    p.add_argument("--heights", type=float, nargs=2, default=list(bench.BENCH_HEIGHTS),
                   metavar=("LO", "HI"))
    p.set_defaults(func=cmd_gen_world)

    p = sub.add_parser("plan", help="print per-leg foothold plans at a pose")
    p.add_argument("--scenario", required=True)
    p.add_argument("--pose", type=float, nargs=3, required=True, metavar=("X", "Y", "YAW"))
    p.add_argument("--cmd", type=float, nargs=3, default=[0.7, 0.0, 0.0],
                   metavar=("VX", "VY", "WZ"))
    p.add_argument("--csv", help="also write the plan as CSV")
    _add_search_args(p)
    _add_params_args(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("run-trial", help="roll a single trial on a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--policy", default="semantic", help="blind, geo, or sem")
    p.add_argument("--cmd", type=float, nargs=3, default=[0.7, 0.0, 0.0],
                   metavar=("VX", "VY", "WZ"))
    p.add_argument("--max-time", type=float, default=30.0)
    p.add_argument("--dt", type=float, default=0.02)
    p.add_argument("--velocity-noise", type=float, default=0.0)
    p.add_argument("--noise-seed", type=int, default=0)
    p.add_argument("--tracking-lag", type=float, default=0.0,
                   help="first-order swing-height lag time constant (s)")
    p.add_argument("--log-traj", metavar="CSV", help="per-step trajectory log")
    p.add_argument("--log-rewards", metavar="CSV", help="per-step reward breakdown log")
    _add_search_args(p)
    _add_params_args(p)
    p.set_defaults(func=cmd_run_trial)

    p = sub.add_parser("run-sweep", help="run the policy x density benchmark grid")
    p.add_argument("--policies", default="blind,geo,sem", help="comma-separated policy names")
    p.add_argument("--densities", default="10,15,20,25", help="comma-separated densities")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--mode", choices=("virtual", "rigid"), default="rigid")
    p.add_argument("--length", type=float, default=10.0)
    p.add_argument("--width", type=float, default=2.0)
    p.add_argument("--no-stacking", dest="allow_stacking", action="store_false",
                   help="force disjoint obstacle footprints")
    p.add_argument("--cmd", type=float, nargs=3, default=[0.7, 0.0, 0.0],
                   metavar=("VX", "VY", "WZ"))
    p.add_argument("--max-time", type=float, default=30.0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="CSV report path (stdout when omitted)")
    p.add_argument("--figures", metavar="DIR", help="also render metric figures into DIR")
    _add_search_args(p)
    _add_params_args(p)
    p.set_defaults(func=cmd_run_sweep)

    p = sub.add_parser("export-map", help="sample the dual map at a pose and export CSV")
    p.add_argument("--scenario", required=True)
    p.add_argument("--pose", type=float, nargs=3, required=True, metavar=("X", "Y", "YAW"))
    p.add_argument("--out", required=True)
    p.add_argument("--noise", type=float, default=0.0, help="uniform height noise amplitude (m)")
    p.add_argument("--noise-seed", type=int, default=0)
    p.set_defaults(func=cmd_export_map)

    p = sub.add_parser("report", help="render a sweep CSV as a table, CSV, or figures")
    p.add_argument("--input", "--in", dest="input", required=True, help="sweep CSV file")
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.add_argument("--figures", metavar="DIR", help="also render metric figures into DIR")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
