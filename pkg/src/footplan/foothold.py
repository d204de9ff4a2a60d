"""Per-leg foothold selection: Raibert-heuristic targets refined by a local
grid search that trades deviation against collision.

Each swing leg gets a nominal stance point from the stance rectangle, a
velocity-proportional Raibert offset, and finally the lowest-cost point of an
M x M candidate grid centered on the Raibert point. Candidate cost is

    J(p) = deviation_weight * |p - p_raibert| + collision_weight * collides(p)

so with a sufficiently punitive collision weight every collision-free
candidate beats every colliding one, and the planner degrades gracefully to
the least-deviating candidate when the whole window is blocked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gait import BehaviorParams, FL, FR, RL, RR, stance_duration
from .gridmap import DualMap, Pose2D, body_to_world, world_to_body
from .scenario import World

#: Default command bounds: |vx| <= 1.0 m/s, |vy| <= 0.5 m/s, |wz| <= 1.0 rad/s.
COMMAND_BOUNDS = (1.0, 0.5, 1.0)

#: Indicator over world-frame points: 1/True where a foothold would collide.
CollisionIndicator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class VelocityCommand:
    """Commanded planar base velocity (vx, vy forward/left m/s, wz yaw rad/s)."""

    vx: float = 0.0
    vy: float = 0.0
    wz: float = 0.0

    def __post_init__(self):
        for value, bound, name in zip((self.vx, self.vy, self.wz), COMMAND_BOUNDS, ("vx", "vy", "wz")):
            if abs(value) > bound + 1e-12:
                raise ValueError(f"{name}={value} exceeds command bound {bound}")


@dataclass(frozen=True)
class SearchConfig:
    """Geometry and weights of the local candidate search.

    ``collision_weight`` must exceed deviation_weight * spacing * side_count
    * sqrt(2); that bound guarantees any collision-free candidate costs less
    than any colliding one, so safety always dominates deviation.
    """

    side_count: int = 7
    spacing: float = 0.025
    deviation_weight: float = 1.0
    collision_weight: float = 10.0
    foot_radius: float = 0.02

    def __post_init__(self):
        if self.side_count < 1 or self.side_count % 2 == 0:
            raise ValueError(f"side_count must be odd and >= 1, got {self.side_count}")
        if self.spacing <= 0:
            raise ValueError(f"spacing must be > 0, got {self.spacing}")
        if self.deviation_weight < 0 or self.foot_radius < 0:
            raise ValueError("deviation_weight and foot_radius must be >= 0")
        bound = self.deviation_weight * self.spacing * self.side_count * math.sqrt(2)
        if not self.collision_weight > bound:
            raise ValueError(
                f"collision_weight {self.collision_weight} must exceed "
                f"deviation_weight*spacing*side_count*sqrt(2) = {bound}"
            )

    def offsets(self) -> np.ndarray:
        """1D candidate offsets along one axis, centered on zero."""
        half = (self.side_count - 1) // 2
        return (np.arange(self.side_count) - half) * self.spacing


@dataclass(frozen=True)
class FootholdPlan:
    """Planned footholds for all four legs, in the body frame.

    Row i holds leg i (FL, FR, RL, RR). ``cost`` is the search cost of the
    chosen candidate and ``collision_free`` whether it avoids every dilated
    obstacle footprint.
    """

    nominal: np.ndarray
    raibert: np.ndarray
    target: np.ndarray
    cost: np.ndarray
    collision_free: np.ndarray

    def __post_init__(self):
        for name in ("nominal", "raibert", "target"):
            arr = getattr(self, name)
            if arr.shape != (4, 2):
                raise ValueError(f"{name} must be a 4x2 array, got {arr.shape}")
            arr.flags.writeable = False
        for name in ("cost", "collision_free"):
            arr = getattr(self, name)
            if arr.shape != (4,):
                raise ValueError(f"{name} must have shape (4,), got {arr.shape}")
            arr.flags.writeable = False


def nominal_stance(params: BehaviorParams, leg: int) -> tuple[float, float]:
    """Default body-frame foot position from stance length and width.

    Front legs sit at +length/2, rear at -length/2; left legs at +width/2,
    right at -width/2.
    """
    if leg not in (FL, FR, RL, RR):
        raise ValueError(f"leg index must be 0..3, got {leg}")
    x = params.stance_length / 2 if leg in (FL, FR) else -params.stance_length / 2
    y = params.stance_width / 2 if leg in (FL, RL) else -params.stance_width / 2
    return (x, y)


def raibert_position(params: BehaviorParams, cmd: VelocityCommand, leg: int) -> tuple[float, float]:
    """Nominal stance shifted by the velocity-proportional Raibert offsets.

    The forward command shifts the foothold along x by half a stance duration
    of travel; the yaw command shifts it along y in proportion to the leg's
    longitudinal position, so front and rear legs step to opposite sides when
    turning.
    """
    nom_x, nom_y = nominal_stance(params, leg)
    half_stance = 0.5 * stance_duration(params.frequency_hz, params.duty_factor)
    return (nom_x + half_stance * cmd.vx, nom_y + half_stance * cmd.wz * nom_x)


def collision_indicator(p_body, base: Pose2D, world: World, foot_radius: float) -> int:
    """1 if the world-frame image of a body-frame point lands inside any
    obstacle footprint dilated by the foot radius, else 0. Points exactly on
    the dilated boundary count as colliding."""
    p_world = body_to_world(base, np.asarray(p_body, dtype=float))
    return int(world.covered(p_world.reshape(1, 2), dilation=foot_radius)[0])


def world_indicator(world: World, foot_radius: float) -> CollisionIndicator:
    """Ground-truth collision indicator over world-frame points."""

    def check(points_world: np.ndarray) -> np.ndarray:
        return world.covered(points_world, dilation=foot_radius)

    return check


def map_indicator(
    dual: DualMap,
    foot_radius: float,
    use_semantics: bool = True,
    height_threshold: float = 0.03,
) -> CollisionIndicator:
    """Perception-limited collision indicator built from a sampled map.

    Occupied cells are those with nonzero semantic cost, or, for the
    elevation-only proxy, cells whose height exceeds ``height_threshold``.
    Maps sample obstacles only at cell centers, so an obstacle edge can fall
    up to one full cell short of the nearest occupied center; each occupied
    cell is therefore inflated by a whole cell plus the foot radius. For
    obstacles at least one cell wide seen from an axis-aligned pose this
    makes the perceived region contain the true dilated footprint; rotated
    poses and sub-cell obstacles keep the usual discretization gaps. Points
    beyond the map window read as free.
    """
    spec = dual.spec
    if use_semantics:
        occupied = dual.semantic.costs > 0.0
    else:
        occupied = dual.elevation.heights > height_threshold
    centers = spec.cell_centers_body()[occupied.ravel()]
    reach = spec.resolution + foot_radius

    def check(points_world: np.ndarray) -> np.ndarray:
        if centers.shape[0] == 0:
            return np.zeros(points_world.shape[0], dtype=bool)
        points_body = world_to_body(dual.center, points_world)
        d = np.abs(points_body[:, None, :] - centers[None, :, :])
        return (d <= reach).all(axis=2).any(axis=1)

    return check


def collision_indicator_from_map(
    p_body,
    base: Pose2D,
    dual: DualMap,
    foot_radius: float,
    use_semantics: bool = True,
    height_threshold: float = 0.03,
) -> int:
    """Map-backed counterpart of collision_indicator for perception-limited
    planning: the query goes through the sampled grid instead of ground
    truth."""
    check = map_indicator(dual, foot_radius, use_semantics, height_threshold)
    p_world = body_to_world(base, np.asarray(p_body, dtype=float))
    return int(check(p_world.reshape(1, 2))[0])


def foothold_cost(p_candidate, p_raibert, collision: int, cfg: SearchConfig) -> float:
    """Candidate cost: weighted deviation from the Raibert point plus the
    punitive collision term."""
    dx = float(p_candidate[0]) - float(p_raibert[0])
    dy = float(p_candidate[1]) - float(p_raibert[1])
    deviation = math.sqrt(dx * dx + dy * dy)
    return cfg.deviation_weight * deviation + cfg.collision_weight * collision


def _search_leg(
    raibert_body: tuple[float, float],
    base: Pose2D,
    indicator: CollisionIndicator,
    cfg: SearchConfig,
) -> tuple[np.ndarray, float, bool]:
    """Enumerate the candidate window around one Raibert point and return
    (target_body, cost, collision_free) of the argmin candidate.

    Candidates are laid out row-major (x-offset major, y-offset minor); cost
    ties break toward the smaller deviation, then the smaller candidate index.
    """
    offs = cfg.offsets()
    xx, yy = np.meshgrid(raibert_body[0] + offs, raibert_body[1] + offs, indexing="ij")
    candidates = np.column_stack([xx.ravel(), yy.ravel()])
    collides = indicator(body_to_world(base, candidates)).astype(float)
    dx = candidates[:, 0] - raibert_body[0]
    dy = candidates[:, 1] - raibert_body[1]
    deviation = np.sqrt(dx * dx + dy * dy)
    cost = cfg.deviation_weight * deviation + cfg.collision_weight * collides
    best_cost = cost.min()
    tied = np.flatnonzero(cost == best_cost)
    best = int(min(tied, key=lambda k: (deviation[k], k)))
    return candidates[best].copy(), float(cost[best]), collides[best] == 0.0


def select_target_with_indicator(
    params: BehaviorParams,
    cmd: VelocityCommand,
    base: Pose2D,
    indicator: CollisionIndicator,
    cfg: SearchConfig,
) -> FootholdPlan:
    """Plan all four legs against an arbitrary collision indicator."""
    nominal = np.zeros((4, 2))
    raibert = np.zeros((4, 2))
    target = np.zeros((4, 2))
    cost = np.zeros(4)
    free = np.zeros(4, dtype=bool)
    for leg in (FL, FR, RL, RR):
        nominal[leg] = nominal_stance(params, leg)
        rb = raibert_position(params, cmd, leg)
        raibert[leg] = rb
        target[leg], cost[leg], free[leg] = _search_leg(rb, base, indicator, cfg)
    return FootholdPlan(nominal, raibert, target, cost, free)


def select_target(
    params: BehaviorParams,
    cmd: VelocityCommand,
    base: Pose2D,
    world: World,
    cfg: SearchConfig,
) -> FootholdPlan:
    """Plan all four legs against ground-truth obstacle boxes."""
    return select_target_with_indicator(params, cmd, base, world_indicator(world, cfg.foot_radius), cfg)
