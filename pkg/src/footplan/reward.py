"""Reward stack: velocity tracking, foothold tracking during swing, the ReLU
clearance penalty, and the multiplicative total.

The total reward is the weighted primary term scaled by an exponential of the
(nonpositive) aggregated penalties, so penalties can shrink but never
sign-flip the primary reward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .foothold import FootholdPlan, VelocityCommand
from .gait import BehaviorParams, GaitState, swing_reference_height

DEFAULT_PENALTY_WEIGHTS = MappingProxyType(
    {"clearance": 1.0, "torque_proxy": 0.05, "base_collision": 1.0}
)


@dataclass(frozen=True)
class RewardConfig:
    velocity_weight: float = 1.0
    foothold_weight: float = 0.5
    penalty_scale: float = 0.1
    sigma_linear: float = 0.25
    sigma_angular: float = 0.25
    sigma_foothold: float = 0.0025
    safety_margin: float = 0.02
    penalty_weights: Mapping[str, float] = field(default_factory=lambda: DEFAULT_PENALTY_WEIGHTS)

    def __post_init__(self):
        if min(self.sigma_linear, self.sigma_angular, self.sigma_foothold) <= 0:
            raise ValueError("all sigmas must be > 0")
        if self.penalty_scale <= 0:
            raise ValueError(f"penalty_scale must be > 0, got {self.penalty_scale}")
        if self.safety_margin < 0:
            raise ValueError(f"safety_margin must be >= 0, got {self.safety_margin}")
        if any(w < 0 for w in self.penalty_weights.values()):
            raise ValueError("penalty weights must be >= 0")
        object.__setattr__(self, "penalty_weights", MappingProxyType(dict(self.penalty_weights)))


@dataclass(frozen=True)
class RewardBreakdown:
    """One step's reward, split into its parts.

    ``penalties`` holds the weighted, nonpositive contribution of each named
    penalty; their sum is ``penalty_total`` and the exponential factor
    exp(penalty_scale * penalty_total) lies in (0, 1].
    """

    velocity: float
    foothold: float
    primary: float
    penalties: Mapping[str, float]
    penalty_total: float
    total: float


def velocity_tracking(v_xy, cmd: VelocityCommand, wz: float, cfg: RewardConfig) -> float:
    """Tracking reward in (0, 2]: one Gaussian bump for the planar linear
    velocity error, one for the yaw rate error."""
    ex = float(v_xy[0]) - cmd.vx
    ey = float(v_xy[1]) - cmd.vy
    ew = wz - cmd.wz
    return math.exp(-(ex * ex + ey * ey) / cfg.sigma_linear) + math.exp(
        -(ew * ew) / cfg.sigma_angular
    )


def velocity_tracking_grad_v(v_xy, cmd: VelocityCommand, cfg: RewardConfig) -> np.ndarray:
    """Analytic gradient of the linear term of velocity_tracking w.r.t. v_xy."""
    e = np.asarray(v_xy, dtype=float) - np.array([cmd.vx, cmd.vy])
    return -2.0 * e / cfg.sigma_linear * math.exp(-float(e @ e) / cfg.sigma_linear)


def semantic_foothold_tracking(
    foot_pos: np.ndarray, plan: FootholdPlan, gait: GaitState, cfg: RewardConfig
) -> float:
    """Foothold tracking reward in [0, 4]: per swinging leg, a Gaussian bump
    on the distance between the foot and its planned target. Foot positions
    and plan targets must be expressed in the same frame."""
    foot_pos = np.asarray(foot_pos, dtype=float)
    if foot_pos.shape != (4, 2):
        raise ValueError(f"foot_pos must be 4x2, got {foot_pos.shape}")
    total = 0.0
    for leg in range(4):
        if gait.in_contact[leg]:
            continue
        d = foot_pos[leg] - plan.target[leg]
        total += math.exp(-float(d @ d) / cfg.sigma_foothold)
    return total


def clearance_penalty(
    foot_heights, gait: GaitState, params: BehaviorParams, cfg: RewardConfig
) -> float:
    """Nonnegative penalty magnitude for swing feet dipping below the
    reference height profile; feet at or above the reference contribute 0,
    and stance feet are ignored."""
    total = 0.0
    for leg in range(4):
        if gait.in_contact[leg]:
            continue
        z_ref = swing_reference_height(
            gait.swing_progress[leg], params.swing_height, cfg.safety_margin
        )
        shortfall = max(0.0, z_ref - float(foot_heights[leg]))
        total += shortfall * shortfall
    return total


def torque_proxy_penalty(cmd_prev: VelocityCommand, cmd: VelocityCommand) -> float:
    """Joint-dynamics stand-in for a jointless simulator: squared command
    change magnitude between consecutive steps."""
    dv = (cmd.vx - cmd_prev.vx, cmd.vy - cmd_prev.vy, cmd.wz - cmd_prev.wz)
    return dv[0] * dv[0] + dv[1] * dv[1] + dv[2] * dv[2]


def total_reward(
    velocity: float,
    foothold: float,
    penalty_magnitudes: Mapping[str, float],
    cfg: RewardConfig,
) -> RewardBreakdown:
    """Assemble the full multiplicative breakdown.

    ``penalty_magnitudes`` are nonnegative per-term magnitudes; each is
    weighted by the config table and negated into a contribution. Unknown
    penalty names are rejected, as is any negative magnitude (which would
    smuggle in a positive penalty).
    """
    contributions: dict[str, float] = {}
    for name, magnitude in penalty_magnitudes.items():
        if name not in cfg.penalty_weights:
            raise ValueError(f"unknown penalty term {name!r}")
        if magnitude < 0:
            raise ValueError(f"penalty magnitude for {name!r} must be >= 0, got {magnitude}")
        contributions[name] = -cfg.penalty_weights[name] * magnitude
    penalty_total = sum(contributions.values())
    primary = cfg.velocity_weight * velocity + cfg.foothold_weight * foothold
    total = primary * math.exp(cfg.penalty_scale * penalty_total)
    return RewardBreakdown(
        velocity=velocity,
        foothold=foothold,
        primary=primary,
        penalties=MappingProxyType(contributions),
        penalty_total=penalty_total,
        total=total,
    )
