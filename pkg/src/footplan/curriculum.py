"""Adaptive training curricula: a velocity-command grid whose bin sampling
probabilities chase low tracking rewards, and a monotone obstacle-density
schedule.

The grid keeps an exponential moving average of the tracking reward seen per
bin and sets sampling weights to (2 - ema) + eps before renormalizing, so
poorly tracked bins are revisited more often while a small exploration floor
keeps every bin reachable.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .foothold import COMMAND_BOUNDS, VelocityCommand

#: Exploration floor added to every bin's sampling weight.
DEFAULT_WEIGHT_FLOOR = 0.01

#: EMA decay per observed reward.
EMA_DECAY = 0.99

#: Maximum attainable tracking reward; weights are (MAX_TRACKING - ema) + eps.
MAX_TRACKING = 2.0

DEFAULT_BIN_COUNTS = (11, 5, 11)


@dataclass(frozen=True)
class VelocityGrid:
    """Lattice of (vx, vy, wz) command bins with adaptive sampling weights.

    ``edges`` holds the per-axis bin edges; ``probs`` and ``reward_ema`` are
    flat over bins in C order. The probability floor implied by the weight
    floor is eps / (n_bins * (MAX_TRACKING + eps)).
    """

    edges: tuple[np.ndarray, np.ndarray, np.ndarray]
    probs: np.ndarray
    reward_ema: np.ndarray
    weight_floor: float = DEFAULT_WEIGHT_FLOOR

    def __post_init__(self):
        n = self.n_bins
        if self.probs.shape != (n,) or self.reward_ema.shape != (n,):
            raise ValueError("probs and reward_ema must be flat over all bins")
        if abs(float(self.probs.sum()) - 1.0) > 1e-9:
            raise ValueError(f"probs must sum to 1, got {self.probs.sum()}")
        if (self.probs < self.prob_floor - 1e-15).any():
            raise ValueError("probs fall below the exploration floor")
        for arr in (*self.edges, self.probs, self.reward_ema):
            arr.flags.writeable = False

    @property
    def bins_per_axis(self) -> tuple[int, int, int]:
        return tuple(len(e) - 1 for e in self.edges)

    @property
    def n_bins(self) -> int:
        bx, by, bz = self.bins_per_axis
        return bx * by * bz

    @property
    def prob_floor(self) -> float:
        return self.weight_floor / (self.n_bins * (MAX_TRACKING + self.weight_floor))

    def bin_bounds(self, index: int) -> tuple[tuple[float, float], ...]:
        """(lo, hi) per axis of one flat bin index."""
        bx, by, bz = self.bins_per_axis
        if not 0 <= index < self.n_bins:
            raise IndexError(f"bin index {index} out of range")
        i, rem = divmod(index, by * bz)
        j, k = divmod(rem, bz)
        e = self.edges
        return (
            (float(e[0][i]), float(e[0][i + 1])),
            (float(e[1][j]), float(e[1][j + 1])),
            (float(e[2][k]), float(e[2][k + 1])),
        )


def make_velocity_grid(
    bin_counts: tuple[int, int, int] = DEFAULT_BIN_COUNTS,
    bounds: tuple[float, float, float] = COMMAND_BOUNDS,
    weight_floor: float = DEFAULT_WEIGHT_FLOOR,
) -> VelocityGrid:
    """Uniform grid over [-bound, +bound] per axis, starting at uniform probs
    and zero reward history."""
    if any(c < 1 for c in bin_counts):
        raise ValueError(f"bin counts must be >= 1, got {bin_counts}")
    if weight_floor <= 0:
        raise ValueError(f"weight floor must be > 0, got {weight_floor}")
    edges = tuple(np.linspace(-b, b, c + 1) for b, c in zip(bounds, bin_counts))
    n = int(np.prod(bin_counts))
    return VelocityGrid(
        edges=edges,
        probs=np.full(n, 1.0 / n),
        reward_ema=np.zeros(n),
        weight_floor=weight_floor,
    )


def sample_command(grid: VelocityGrid, rng: np.random.Generator) -> tuple[VelocityCommand, int]:
    """Draw a bin by its probability, then a command uniformly inside it."""
    index = int(rng.choice(grid.n_bins, p=grid.probs))
    bounds = grid.bin_bounds(index)
    vx, vy, wz = (rng.uniform(lo, hi) for lo, hi in bounds)
    return VelocityCommand(vx, vy, wz), index


def update_probs(grid: VelocityGrid, bin_index: int, observed_reward: float) -> VelocityGrid:
    """Fold one tracking-reward observation into a bin and refresh the probs.

    Rewards outside (0, 2] are rejected. Weights are (2 - ema) + eps so bins
    with poor tracking are sampled more; renormalization keeps the vector a
    distribution and the eps floor keeps every bin's probability positive.
    """
    if not 0.0 < observed_reward <= MAX_TRACKING:
        raise ValueError(f"tracking reward must lie in (0, {MAX_TRACKING}], got {observed_reward}")
    if not 0 <= bin_index < grid.n_bins:
        raise IndexError(f"bin index {bin_index} out of range")
    ema = grid.reward_ema.copy()
    ema[bin_index] = EMA_DECAY * ema[bin_index] + (1.0 - EMA_DECAY) * observed_reward
    weights = (MAX_TRACKING - ema) + grid.weight_floor
    probs = weights / weights.sum()
    return replace(grid, probs=probs, reward_ema=ema)


@dataclass(frozen=True)
class DensitySchedule:
    """Monotone obstacle-density progression gated on tracking quality."""

    current: float = 5.0
    maximum: float = 25.0
    step: float = 5.0
    promote_threshold: float = 1.6

    def __post_init__(self):
        if not 0 <= self.current <= self.maximum:
            raise ValueError("current density must lie in [0, maximum]")
        if self.step < 0:
            raise ValueError(f"step must be >= 0, got {self.step}")


def maybe_promote(sched: DensitySchedule, mean_tracking_reward: float) -> DensitySchedule:
    """Bump the density one step when tracking is good enough; never lowers."""
    if mean_tracking_reward >= sched.promote_threshold:
        return replace(sched, current=min(sched.current + sched.step, sched.maximum))
    return sched


def save_state(grid: VelocityGrid, sched: DensitySchedule, path) -> None:
    """Dump curriculum state as plain text so long campaigns can resume."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"weight_floor {grid.weight_floor!r}\n")
        for name, axis in zip(("vx", "vy", "wz"), grid.edges):
            fh.write(f"edges_{name} " + " ".join(repr(float(v)) for v in axis) + "\n")
        fh.write("probs " + " ".join(repr(float(v)) for v in grid.probs) + "\n")
        fh.write("reward_ema " + " ".join(repr(float(v)) for v in grid.reward_ema) + "\n")
        fh.write(
            f"density {sched.current!r} {sched.maximum!r} {sched.step!r} {sched.promote_threshold!r}\n"
        )


def load_state(path) -> tuple[VelocityGrid, DensitySchedule]:
    """Inverse of save_state."""
    fields: dict[str, list[str]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if parts:
                fields[parts[0]] = parts[1:]
    try:
        edges = tuple(
            np.array([float(v) for v in fields[f"edges_{name}"]]) for name in ("vx", "vy", "wz")
        )
        grid = VelocityGrid(
            edges=edges,
            probs=np.array([float(v) for v in fields["probs"]]),
            reward_ema=np.array([float(v) for v in fields["reward_ema"]]),
            weight_floor=float(fields["weight_floor"][0]),
        )
        cur, mx, step_, thr = (float(v) for v in fields["density"])
        sched = DensitySchedule(cur, mx, step_, thr)
    except KeyError as missing:
        raise ValueError(f"curriculum state file is missing record {missing}") from None
    return grid, sched
