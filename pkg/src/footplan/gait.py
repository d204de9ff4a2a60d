"""Four-beat walking gait: behavior parameters, phase bookkeeping, and the
swing-foot reference height profile.

Legs are indexed FL=0, FR=1, RL=2, RR=3 throughout the package. Leg phase
offsets are built as (0, o1, o2, o3) from the three configured offsets; the
defaults (0.5, 0.75, 0.25) give the classic four-beat walk ordering
FL, RR, FR, RL.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

FL, FR, RL, RR = 0, 1, 2, 3
LEG_NAMES = ("FL", "FR", "RL", "RR")

#: Fixed safety margin added to the swing height reference, in meters.
DEFAULT_SAFETY_MARGIN = 0.02


@dataclass(frozen=True)
class BehaviorParams:
    """The 13 scalar behavior parameters shaping the walk.

    ``phase_offsets`` are the timing offsets of legs FR, RL, RR relative to
    FL; ``contact_timers`` mirror the per-leg phases and are derived state,
    recomputed from the gait rather than integrated separately.
    """

    base_height: float = 0.32
    swing_height: float = 0.09
    phase_offsets: tuple[float, float, float] = (0.5, 0.75, 0.25)
    contact_timers: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    frequency_hz: float = 2.0
    duty_factor: float = 0.5
    stance_width: float = 0.30
    stance_length: float = 0.40

    def __post_init__(self):
        if self.frequency_hz <= 0:
            raise ValueError(f"frequency must be > 0, got {self.frequency_hz}")
        if not 0 < self.duty_factor < 1:
            raise ValueError(f"duty factor must lie in (0, 1), got {self.duty_factor}")
        if self.stance_width <= 0 or self.stance_length <= 0:
            raise ValueError("stance width and length must be > 0")
        if self.swing_height < 0:
            raise ValueError(f"swing height must be >= 0, got {self.swing_height}")
        if len(self.phase_offsets) != 3 or len(self.contact_timers) != 4:
            raise ValueError("expected 3 phase offsets and 4 contact timers")
        for o in self.phase_offsets:
            if not 0 <= o < 1:
                raise ValueError(f"phase offsets must lie in [0, 1), got {o}")

    def leg_offsets(self) -> tuple[float, float, float, float]:
        """Per-leg phase offsets in FL, FR, RL, RR order."""
        return (0.0, *self.phase_offsets)

    def as_vector(self) -> tuple[float, ...]:
        """The 13 scalars in observation order."""
        return (
            self.base_height,
            self.swing_height,
            *self.phase_offsets,
            *self.contact_timers,
            self.frequency_hz,
            self.duty_factor,
            self.stance_width,
            self.stance_length,
        )


@dataclass(frozen=True)
class GaitState:
    """Phase snapshot for all four legs.

    A leg is in contact while its phase is below the duty factor; otherwise it
    swings with ``swing_progress`` running 0 -> 1 over the swing window.
    ``swing_progress`` is only meaningful for swinging legs and is 0 in stance.
    """

    global_phase: float
    per_leg_phase: tuple[float, float, float, float]
    in_contact: tuple[bool, bool, bool, bool]
    swing_progress: tuple[float, float, float, float]


def stance_duration(frequency_hz: float, duty_factor: float) -> float:
    """Seconds a foot stays planted per cycle: duty_factor / frequency_hz."""
    if frequency_hz <= 0:
        raise ValueError(f"frequency must be > 0, got {frequency_hz}")
    if not 0 < duty_factor < 1:
        raise ValueError(f"duty factor must lie in (0, 1), got {duty_factor}")
    return duty_factor / frequency_hz


def _wrap01(x: float) -> float:
    return x - math.floor(x)


def gait_state_at(global_phase: float, params: BehaviorParams) -> GaitState:
    """Derive the full per-leg state from a global phase in [0, 1)."""
    global_phase = _wrap01(global_phase)
    d = params.duty_factor
    phases = tuple(_wrap01(global_phase + o) for o in params.leg_offsets())
    contact = tuple(p < d for p in phases)
    progress = tuple(
        0.0 if c else (p - d) / (1.0 - d) for p, c in zip(phases, contact)
    )
    return GaitState(global_phase, phases, contact, progress)


def initial_gait_state(params: BehaviorParams) -> GaitState:
    return gait_state_at(0.0, params)


def advance(state: GaitState, params: BehaviorParams, dt: float) -> GaitState:
    """Advance the gait clock by dt seconds."""
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    return gait_state_at(state.global_phase + params.frequency_hz * dt, params)


def swing_reference_height(
    phi: float, swing_height: float, safety_margin: float = DEFAULT_SAFETY_MARGIN
) -> float:
    """Reference foot height at normalized swing progress phi in [0, 1].

    The square-root-of-sine profile rises faster than a plain sine near
    liftoff and holds a long airborne plateau; both endpoints sit at the
    safety margin and the apex at swing_height + safety_margin.
    """
    if not 0.0 <= phi <= 1.0:
        raise ValueError(f"swing progress must lie in [0, 1], got {phi}")
    # sin(pi*phi) evaluated via its half-period symmetry so the endpoints are
    # exactly zero instead of picking up sin(pi) rounding.
    s = math.sin(math.pi * (phi if phi <= 0.5 else 1.0 - phi))
    return swing_height * math.sqrt(s) + safety_margin
