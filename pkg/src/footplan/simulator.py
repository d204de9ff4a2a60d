"""Kinematic quadruped rollout: the base integrates the commanded velocity,
swing feet track planned footholds along the reference height profile, and
trials end on success, a trip, or timeout.

Obstacle interaction follows the two regimes of the world: virtual obstacles
only ever show up in perception and in the step-collision count, while rigid
obstacles also provide physical support under stance feet and can trip the
robot. A trip ("stub") happens when a swing foot's height drops below an
obstacle's top while its xy lies inside that obstacle's undilated footprint;
because the swing trajectory is fixed at liftoff, stubs are detected
analytically over the whole swing rather than sampled per control step.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .foothold import (
    SearchConfig,
    VelocityCommand,
    _search_leg,
    map_indicator,
    nominal_stance,
    raibert_position,
    world_indicator,
)
from .gait import (
    BehaviorParams,
    GaitState,
    advance,
    initial_gait_state,
    swing_reference_height,
)
from .gridmap import GridSpec, Pose2D, body_to_world, sample_dual_map
from .reward import RewardConfig, clearance_penalty, total_reward, velocity_tracking
from .scenario import World

RUNNING = "running"
SUCCESS = "success"
TRIP = "trip"
TIMEOUT = "timeout"

BLIND = "blind"
GEOMETRIC = "geometric_proxy"
SEMANTIC = "semantic"
POLICY_KINDS = (BLIND, GEOMETRIC, SEMANTIC)

POLICY_ALIASES = {
    "blind": BLIND,
    "geo": GEOMETRIC,
    "geometric": GEOMETRIC,
    "geometric_proxy": GEOMETRIC,
    "sem": SEMANTIC,
    "semantic": SEMANTIC,
}

DEFAULT_DT = 0.02
DEFAULT_MAX_TIME = 30.0

_NO_TRIP = math.inf


def resolve_policy_kind(name: str) -> str:
    try:
        return POLICY_ALIASES[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown policy {name!r}; expected one of {sorted(POLICY_ALIASES)}") from None


@dataclass(frozen=True)
class Policy:
    """Foothold-selection behavior of one benchmark contestant.

    ``blind`` ignores perception entirely and steps on the raw Raibert
    points. ``geometric_proxy`` plans against the sampled elevation map,
    flagging cells above a height threshold. ``semantic`` plans against
    ground-truth obstacle boxes by default, or against the sampled semantic
    cost map when ``use_sampled_maps`` is set (perception-limited mode).
    """

    kind: str = SEMANTIC
    search: SearchConfig = field(default_factory=SearchConfig)
    use_sampled_maps: bool = False
    height_threshold: float = 0.03
    map_spec: GridSpec = field(default_factory=GridSpec)
    elevation_noise: float = 0.0

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"kind must be one of {POLICY_KINDS}, got {self.kind!r}")

    @property
    def needs_maps(self) -> bool:
        return self.kind == GEOMETRIC or (self.kind == SEMANTIC and self.use_sampled_maps)


@dataclass(frozen=True)
class RobotState:
    """Full kinematic state between control steps.

    ``swing_origin``/``swing_target`` are world-frame xy liftoff and landing
    points of the current (or last) swing of each leg; ``swing_trip_phase``
    is the swing progress at which the current swing will stub a rigid
    obstacle, or +inf when the swing is clear.
    """

    base: Pose2D
    base_height: float
    feet_world: np.ndarray
    gait: GaitState
    swing_origin: np.ndarray
    swing_target: np.ndarray
    swing_trip_phase: np.ndarray

    def __post_init__(self):
        for name, shape in (
            ("feet_world", (4, 3)),
            ("swing_origin", (4, 2)),
            ("swing_target", (4, 2)),
            ("swing_trip_phase", (4,)),
        ):
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
            arr.flags.writeable = False


@dataclass(frozen=True)
class StepOutcome:
    """Result of one control step.

    ``landings`` marks legs that touched down this step; ``foot_collisions``
    marks those landings that sit inside a dilated obstacle footprint.
    ``terminated`` is running, success, or trip; timeouts are imposed by
    run_trial, not by step.
    """

    state: RobotState
    landings: tuple[bool, bool, bool, bool]
    foot_collisions: tuple[bool, bool, bool, bool]
    stub_events: tuple[bool, bool, bool, bool]
    terminated: str
    distance: float


@dataclass(frozen=True)
class TrialResult:
    """One benchmark run, the unit every sweep metric aggregates over."""

    seed: int
    policy: str
    density: float | None
    distance: float
    success: bool
    total_steps: int
    colliding_steps: int
    termination: str

    def __post_init__(self):
        if self.colliding_steps > self.total_steps:
            raise ValueError("colliding_steps cannot exceed total_steps")


def initial_state(world: World, params: BehaviorParams, base: Pose2D = Pose2D()) -> RobotState:
    """Standing start: feet at their nominal stance points on local support.

    Legs whose phase starts mid-swing swing in place (origin == target), so
    the very first footfalls land back on the starting stance.
    """
    gait = initial_gait_state(params)
    feet = np.zeros((4, 3))
    xy = np.zeros((4, 2))
    for leg in range(4):
        xy[leg] = body_to_world(base, nominal_stance(params, leg))
    feet[:, :2] = xy
    feet[:, 2] = world.elevation_at(xy, rigid_only=True)
    for leg in range(4):
        if not gait.in_contact[leg]:
            feet[leg, 2] = swing_reference_height(gait.swing_progress[leg], params.swing_height)
    return RobotState(
        base=base,
        base_height=params.base_height,
        feet_world=feet,
        gait=gait,
        swing_origin=xy.copy(),
        swing_target=xy.copy(),
        swing_trip_phase=np.full(4, _NO_TRIP),
    )


def _integrate_base(base: Pose2D, vx: float, vy: float, wz: float, dt: float) -> Pose2D:
    """Exact unicycle integration of constant body-frame velocity over dt."""
    if abs(wz) < 1e-12:
        cos_y, sin_y = math.cos(base.yaw), math.sin(base.yaw)
        return Pose2D(
            base.x + (vx * cos_y - vy * sin_y) * dt,
            base.y + (vx * sin_y + vy * cos_y) * dt,
            base.yaw,
        )
    theta = wz * dt
    s = math.sin(theta) / wz
    c = (1.0 - math.cos(theta)) / wz
    dx_body = vx * s - vy * c
    dy_body = vx * c + vy * s
    cos_y, sin_y = math.cos(base.yaw), math.sin(base.yaw)
    return Pose2D(
        base.x + dx_body * cos_y - dy_body * sin_y,
        base.y + dx_body * sin_y + dy_body * cos_y,
        base.yaw + theta,
    )


def _swing_trip_phase(
    origin: np.ndarray, target: np.ndarray, world: World, params: BehaviorParams
) -> float:
    """Earliest swing progress at which the reference-height trajectory from
    origin to target dips below the top of a rigid obstacle it passes over,
    or +inf if the swing is clear.

    The reference profile is unimodal, so over any sub-interval of the swing
    its minimum height sits at one of the interval's endpoints.
    """
    x_lo = min(origin[0], target[0])
    x_hi = max(origin[0], target[0])
    sub = world.boxes_near(x_lo, x_hi)
    rigid = sub["rigid"]
    if not rigid.any():
        return _NO_TRIP
    centers = sub["centers"][rigid]
    halves = sub["halves"][rigid]
    heights = sub["heights"][rigid]

    d = target - origin
    lo = np.zeros(centers.shape[0])
    hi = np.ones(centers.shape[0])
    ok = np.ones(centers.shape[0], dtype=bool)
    for axis in range(2):
        mn = centers[:, axis] - halves[:, axis]
        mx = centers[:, axis] + halves[:, axis]
        if abs(d[axis]) < 1e-15:
            ok &= (origin[axis] >= mn) & (origin[axis] <= mx)
        else:
            t1 = (mn - origin[axis]) / d[axis]
            t2 = (mx - origin[axis]) / d[axis]
            lo = np.maximum(lo, np.minimum(t1, t2))
            hi = np.minimum(hi, np.maximum(t1, t2))
    ok &= lo <= hi
    if not ok.any():
        return _NO_TRIP

    s_h = params.swing_height
    margin_z = swing_reference_height(0.0, s_h)
    trip = _NO_TRIP
    for k in np.flatnonzero(ok):
        h = float(heights[k])
        enter, leave = float(lo[k]), float(hi[k])
        if swing_reference_height(enter, s_h) < h:
            trip = min(trip, enter)
        elif swing_reference_height(leave, s_h) < h:
            # Clear at entry, below the top at exit: the crossing sits on the
            # descending branch of the profile.
            q = (h - margin_z) / s_h
            phi_cross = 1.0 - math.asin(min(1.0, q * q)) / math.pi
            trip = min(trip, max(enter, phi_cross))
    return trip


class _MapCache:
    """Samples the dual map at most once per (control step, base pose)."""

    def __init__(self, world: World, policy: Policy, rng: np.random.Generator | None):
        self.world = world
        self.policy = policy
        self.rng = rng
        self.base: Pose2D | None = None
        self.dual = None

    def indicator(self, base: Pose2D):
        if self.base != base:
            self.dual = sample_dual_map(
                self.world,
                base,
                self.policy.map_spec,
                noise_amplitude=self.policy.elevation_noise,
                noise_rng=self.rng,
            )
            self.base = base
        return map_indicator(
            self.dual,
            self.policy.search.foot_radius,
            use_semantics=self.policy.kind == SEMANTIC,
            height_threshold=self.policy.height_threshold,
        )


def _leg_indicator(policy: Policy, world: World, base: Pose2D, map_cache: _MapCache):
    if policy.kind == BLIND:
        return lambda pts: np.zeros(pts.shape[0], dtype=bool)
    if policy.needs_maps:
        return map_cache.indicator(base)
    return world_indicator(world, policy.search.foot_radius)


def step(
    state: RobotState,
    cmd: VelocityCommand,
    world: World,
    policy: Policy,
    dt: float = DEFAULT_DT,
    params: BehaviorParams = BehaviorParams(),
    actual_velocity: tuple[float, float, float] | None = None,
    map_cache: _MapCache | None = None,
    tracking_lag: float = 0.0,
) -> StepOutcome:
    """Advance the rollout by one control period.

    The base integrates ``actual_velocity`` (defaults to the command). At
    each stance-to-swing transition a foothold is planned for the lifting leg
    per the policy and the swing target frozen in the world frame; swing feet
    interpolate liftoff to target in xy and follow the reference profile in z
    (optionally lagged toward it by a first-order filter with time constant
    ``tracking_lag``). Landings inside dilated obstacle footprints are
    flagged as foot collisions; a stub against a rigid obstacle terminates
    the trial as a trip, while in an all-virtual world trips cannot happen.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    vx, vy, wz = actual_velocity if actual_velocity is not None else (cmd.vx, cmd.vy, cmd.wz)
    new_base = _integrate_base(state.base, vx, vy, wz, dt)
    new_gait = advance(state.gait, params, dt)
    if map_cache is None:
        map_cache = _MapCache(world, policy, None)

    feet = state.feet_world.copy()
    origin = state.swing_origin.copy()
    target = state.swing_target.copy()
    trip_phase = state.swing_trip_phase.copy()
    landings = [False] * 4
    collisions = [False] * 4
    stubs = [False] * 4
    rigid_world = world.has_rigid

    for leg in range(4):
        was_contact = state.gait.in_contact[leg]
        now_contact = new_gait.in_contact[leg]
        if was_contact and not now_contact:
            # Liftoff: plan this leg's foothold under the new base pose.
            indicator = _leg_indicator(policy, world, new_base, map_cache)
            rb = raibert_position(params, cmd, leg)
            target_body, _cost, _free = _search_leg(rb, new_base, indicator, policy.search)
            origin[leg] = feet[leg, :2]
            target[leg] = body_to_world(new_base, target_body)
            trip_phase[leg] = (
                _swing_trip_phase(origin[leg], target[leg], world, params)
                if rigid_world
                else _NO_TRIP
            )
        if not now_contact:
            phi = new_gait.swing_progress[leg]
            feet[leg, :2] = origin[leg] + phi * (target[leg] - origin[leg])
            z_ref = swing_reference_height(phi, params.swing_height)
            if tracking_lag > 0.0:
                feet[leg, 2] = feet[leg, 2] + (z_ref - feet[leg, 2]) * min(1.0, dt / tracking_lag)
            else:
                feet[leg, 2] = z_ref
            if phi >= trip_phase[leg]:
                stubs[leg] = True
        elif not was_contact:
            # Touchdown: land exactly on the frozen target, on local support.
            if trip_phase[leg] <= 1.0:
                stubs[leg] = True
            landings[leg] = True
            feet[leg, :2] = target[leg]
            feet[leg, 2] = float(world.elevation_at(target[leg].reshape(1, 2), rigid_only=True)[0])
            collisions[leg] = bool(
                world.covered(target[leg].reshape(1, 2), dilation=policy.search.foot_radius)[0]
            )
            trip_phase[leg] = _NO_TRIP

    new_state = RobotState(
        base=new_base,
        base_height=state.base_height,
        feet_world=feet,
        gait=new_gait,
        swing_origin=origin,
        swing_target=target,
        swing_trip_phase=trip_phase,
    )
    distance = max(0.0, min(new_base.x, world.track_length))
    if any(stubs):
        terminated = TRIP
    elif new_base.x >= world.track_length:
        terminated = SUCCESS
        distance = world.track_length
    else:
        terminated = RUNNING
    return StepOutcome(
        new_state, tuple(landings), tuple(collisions), tuple(stubs), terminated, distance
    )


class _TrialLogger:
    """Optional per-step CSV logging of trajectory and reward breakdowns."""

    def __init__(self, traj_path, reward_path, reward_cfg: RewardConfig | None, cmd: VelocityCommand):
        self.cmd = cmd
        self.reward_cfg = reward_cfg or RewardConfig()
        self._files = []
        self.traj = self._open(traj_path, self._traj_header())
        self.rewards = self._open(reward_path, self._reward_header())

    def _open(self, path, header):
        if path is None:
            return None
        fh = open(path, "w", newline="", encoding="utf-8")
        self._files.append(fh)
        writer = csv.writer(fh)
        writer.writerow(header)
        return writer

    @staticmethod
    def _traj_header():
        cols = ["t", "base_x", "base_y", "base_yaw"]
        for name in ("fl", "fr", "rl", "rr"):
            cols += [f"{name}_x", f"{name}_y", f"{name}_z"]
        cols += [f"contact_{n}" for n in ("fl", "fr", "rl", "rr")]
        cols += [f"collision_{n}" for n in ("fl", "fr", "rl", "rr")]
        return cols

    @staticmethod
    def _reward_header():
        return [
            "t", "r_vel", "r_sem", "clearance", "torque_proxy",
            "base_collision", "r_penalty", "total",
        ]

    def log(self, t: float, outcome: StepOutcome, params: BehaviorParams,
            actual_velocity: tuple[float, float, float]) -> None:
        state = outcome.state
        if self.traj is not None:
            row = [f"{t:.3f}", repr(state.base.x), repr(state.base.y), repr(state.base.yaw)]
            for leg in range(4):
                row += [repr(float(v)) for v in state.feet_world[leg]]
            row += [int(c) for c in state.gait.in_contact]
            row += [int(c) for c in outcome.foot_collisions]
            self.traj.writerow(row)
        if self.rewards is not None:
            cfg = self.reward_cfg
            r_vel = velocity_tracking(actual_velocity[:2], self.cmd, actual_velocity[2], cfg)
            r_sem = 0.0
            for leg in range(4):
                if state.gait.in_contact[leg]:
                    continue
                d = state.feet_world[leg, :2] - state.swing_target[leg]
                r_sem += math.exp(-float(d @ d) / cfg.sigma_foothold)
            clear = clearance_penalty(state.feet_world[:, 2], state.gait, params, cfg)
            breakdown = total_reward(
                r_vel, r_sem,
                {"clearance": clear, "torque_proxy": 0.0, "base_collision": 0.0},
                cfg,
            )
            self.rewards.writerow(
                [
                    f"{t:.3f}",
                    repr(breakdown.velocity),
                    repr(breakdown.foothold),
                    repr(breakdown.penalties["clearance"]),
                    repr(breakdown.penalties["torque_proxy"]),
                    repr(breakdown.penalties["base_collision"]),
                    repr(breakdown.penalty_total),
                    repr(breakdown.total),
                ]
            )

    def close(self):
        for fh in self._files:
            fh.close()


def run_trial(
    world: World,
    policy: Policy,
    cmd: VelocityCommand,
    max_time: float = DEFAULT_MAX_TIME,
    dt: float = DEFAULT_DT,
    params: BehaviorParams = BehaviorParams(),
    velocity_noise: float = 0.0,
    noise_seed: int = 0,
    tracking_lag: float = 0.0,
    traj_log=None,
    reward_log=None,
    reward_cfg: RewardConfig | None = None,
) -> TrialResult:
    """Roll one trial to success, trip, or timeout and tally its footsteps.

    Deterministic given the arguments: optional velocity and perception
    noise draw from a generator seeded with ``noise_seed``.
    """
    rng = (
        np.random.default_rng(noise_seed)
        if (velocity_noise > 0 or policy.elevation_noise > 0)
        else None
    )
    state = initial_state(world, params)
    map_cache = _MapCache(world, policy, rng)
    logger = _TrialLogger(traj_log, reward_log, reward_cfg, cmd)

    t = 0.0
    total_steps = 0
    colliding = 0
    termination = TIMEOUT
    distance = 0.0
    try:
        while t < max_time - 1e-12:
            actual = (cmd.vx, cmd.vy, cmd.wz)
            if velocity_noise > 0 and rng is not None:
                actual = tuple(v + rng.uniform(-velocity_noise, velocity_noise) for v in actual)
            outcome = step(
                state, cmd, world, policy, dt, params,
                actual_velocity=actual, map_cache=map_cache, tracking_lag=tracking_lag,
            )
            t += dt
            state = outcome.state
            total_steps += sum(outcome.landings)
            colliding += sum(outcome.foot_collisions)
            distance = outcome.distance
            logger.log(t, outcome, params, actual)
            if outcome.terminated != RUNNING:
                termination = outcome.terminated
                break
    finally:
        logger.close()
    return TrialResult(
        seed=world.seed,
        policy=policy.kind,
        density=None,
        distance=distance,
        success=termination == SUCCESS,
        total_steps=total_steps,
        colliding_steps=colliding,
        termination=termination,
    )
