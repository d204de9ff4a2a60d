"""Benchmark harness: seeded world suites, policy x density sweeps, and the
three traversal metrics.

Metrics per (policy, density) cell:

    S  success rate, percent of trials that reach the end of the track
    D  mean distance traveled, successes counting the full track length
    C  step collision rate, percent of all footsteps landing in collision

Worlds are paired: every policy runs the exact same seeded world for a given
(density, trial index), so policies are compared on identical clutter.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .foothold import SearchConfig, VelocityCommand
from .gait import BehaviorParams
from .scenario import World, generate_track
from .simulator import (
    DEFAULT_DT,
    DEFAULT_MAX_TIME,
    Policy,
    TrialResult,
    resolve_policy_kind,
    run_trial,
)

#: Benchmark walking configuration: a higher swing apex than the library
#: default so the reference profile clears the tallest generated obstacles
#: everywhere outside the foot-radius free zone around the swing endpoints,
#: even for strides stretched by foothold deviations.
BENCH_PARAMS = BehaviorParams(swing_height=0.15)

#: Benchmark search window: wide enough (+/-0.12 m) that a single dilated
#: obstacle cannot blanket every candidate.
BENCH_SEARCH = SearchConfig(side_count=9, spacing=0.03, foot_radius=0.025)

#: Obstacle footprint and height ranges for generated benchmark tracks.
BENCH_HALF_EXTENTS = (0.02, 0.06)
BENCH_HEIGHTS = (0.01, 0.08)

DEFAULT_DENSITIES = (10.0, 15.0, 20.0, 25.0)
DEFAULT_COMMAND = VelocityCommand(0.7, 0.0, 0.0)


def make_policy(name: str, search: SearchConfig = BENCH_SEARCH, **kwargs) -> Policy:
    """Build a benchmark policy from a kind name or alias."""
    return Policy(kind=resolve_policy_kind(name), search=search, **kwargs)


@dataclass(frozen=True)
class SweepCell:
    """Aggregated metrics for one (policy, density) combination."""

    policy: str
    density: float
    distance_m: float
    success_pct: float
    collision_pct: float
    n_trials: int

    def __post_init__(self):
        if not 0 <= self.success_pct <= 100 or not 0 <= self.collision_pct <= 100:
            raise ValueError("rates must lie in [0, 100]")


@dataclass(frozen=True)
class SweepReport:
    cells: tuple[SweepCell, ...]
    trials: tuple[TrialResult, ...]

    def cell(self, policy: str, density: float) -> SweepCell:
        for c in self.cells:
            if c.policy == policy and c.density == density:
                return c
        raise KeyError(f"no cell for ({policy}, {density})")


def world_seed(base_seed: int, density_index: int, trial_index: int) -> int:
    """Stable per-(density, trial) world seed shared by every policy."""
    ss = np.random.SeedSequence([int(base_seed), int(density_index), int(trial_index)])
    return int(ss.generate_state(1)[0])


def _build_world(density: float, seed: int, mode: str, length: float, width: float,
                 allow_stacking: bool) -> World:
    return generate_track(
        density,
        seed,
        length=length,
        width=width,
        mode=mode,
        allow_stacking=allow_stacking,
        half_extent_range=BENCH_HALF_EXTENTS,
        height_range=BENCH_HEIGHTS,
    )


def _run_cell_trial(args) -> list[tuple[tuple[int, int, int], TrialResult]]:
    """Run every policy on one seeded world; used by the worker pool."""
    (density_index, density, trial_index, seed, policies, mode, length, width,
     allow_stacking, cmd, max_time, dt, params) = args
    world = _build_world(density, seed, mode, length, width, allow_stacking)
    results = []
    for policy_index, policy in enumerate(policies):
        result = run_trial(world, policy, cmd, max_time=max_time, dt=dt, params=params)
        result = replace(result, density=density)
        results.append(((policy_index, density_index, trial_index), result))
    return results


def run_sweep(
    policies: Sequence[Policy | str],
    densities: Sequence[float] = DEFAULT_DENSITIES,
    n_trials: int = 100,
    base_seed: int = 7,
    mode: str = "rigid",
    length: float = 10.0,
    width: float = 2.0,
    allow_stacking: bool = True,
    cmd: VelocityCommand = DEFAULT_COMMAND,
    max_time: float = DEFAULT_MAX_TIME,
    dt: float = DEFAULT_DT,
    params: BehaviorParams = BENCH_PARAMS,
    workers: int = 1,
) -> SweepReport:
    """Run the full policy x density grid on paired seeded worlds.

    Results are merged in sorted (policy, density, trial) order, so the
    report is byte-for-byte reproducible for a fixed base seed regardless of
    worker count.
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    policy_objs = [p if isinstance(p, Policy) else make_policy(p) for p in policies]

    tasks = []
    for density_index, density in enumerate(densities):
        for trial_index in range(n_trials):
            seed = world_seed(base_seed, density_index, trial_index)
            tasks.append(
                (density_index, density, trial_index, seed, policy_objs, mode,
                 length, width, allow_stacking, cmd, max_time, dt, params)
            )

    keyed: dict[tuple[int, int, int], TrialResult] = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for chunk in pool.map(_run_cell_trial, tasks, chunksize=4):
                keyed.update(chunk)
    else:
        for task in tasks:
            keyed.update(_run_cell_trial(task))

    ordered = [keyed[k] for k in sorted(keyed)]
    cells = []
    for policy_index, policy in enumerate(policy_objs):
        for density_index, density in enumerate(densities):
            group = [
                keyed[(policy_index, density_index, t)] for t in range(n_trials)
            ]
            total_steps = sum(r.total_steps for r in group)
            colliding = sum(r.colliding_steps for r in group)
            cells.append(
                SweepCell(
                    policy=policy.kind,
                    density=float(density),
                    distance_m=float(np.mean([r.distance for r in group])),
                    success_pct=100.0 * sum(r.success for r in group) / len(group),
                    collision_pct=(100.0 * colliding / total_steps) if total_steps else 0.0,
                    n_trials=len(group),
                )
            )
    return SweepReport(cells=tuple(cells), trials=tuple(ordered))


def report_csv(report: SweepReport) -> str:
    """RFC-4180-style CSV with a header row and two-decimal metric columns."""
    lines = ["policy,density,D_m,S_pct,C_pct,n_trials"]
    for c in report.cells:
        lines.append(
            f"{c.policy},{c.density:g},{c.distance_m:.2f},{c.success_pct:.2f},"
            f"{c.collision_pct:.2f},{c.n_trials}"
        )
    return "\r\n".join(lines) + "\r\n"


def report_table(report: SweepReport) -> str:
    """Fixed-width table rendering of the same numbers as the CSV."""
    headers = ("policy", "density", "D (m)", "S (%)", "C (%)", "n")
    rows = [
        (
            c.policy,
            f"{c.density:g}",
            f"{c.distance_m:.2f}",
            f"{c.success_pct:.2f}",
            f"{c.collision_pct:.2f}",
            str(c.n_trials),
        )
        for c in report.cells
    ]
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    def fmt(row):
        return "  ".join(s.ljust(w) if i == 0 else s.rjust(w) for i, (s, w) in enumerate(zip(row, widths)))
    lines = [fmt(headers), fmt(tuple("-" * w for w in widths))]
    lines.extend(fmt(r) for r in rows)
    return "\n".join(lines) + "\n"


def render_report(report: SweepReport, fmt: str = "table") -> str:
    if fmt == "table":
        return report_table(report)
    if fmt == "csv":
        return report_csv(report)
    raise ValueError(f"unknown report format {fmt!r}; expected 'table' or 'csv'")


def parse_report_csv(text: str) -> SweepReport:
    """Rebuild a (cells-only) report from CSV produced by report_csv."""
    lines = [ln for ln in text.replace("\r\n", "\n").split("\n") if ln]
    if not lines or lines[0] != "policy,density,D_m,S_pct,C_pct,n_trials":
        raise ValueError("not a sweep report CSV (bad or missing header)")
    cells = []
    for ln in lines[1:]:
        policy, density, d, s, c, n = ln.split(",")
        cells.append(
            SweepCell(policy, float(density), float(d), float(s), float(c), int(n))
        )
    return SweepReport(cells=tuple(cells), trials=())
