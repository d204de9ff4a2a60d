"""Flat observation vector assembly with a fixed, documented index layout.

Layout (inclusive index ranges):

    command    0 .. 2       vx, vy, wz
    behavior   3 .. 15      the 13 behavior parameters
    proprio    16 .. 72     57 proprioceptive scalars
    elevation  73 .. 792    720 map cells, row-major, rows along body x
    semantic   793 .. 1512  720 cost cells, same ordering

for 1513 scalars total. Map blocks are flattened row-major with the row index
increasing forward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .foothold import VelocityCommand
from .gait import BehaviorParams
from .gridmap import DualMap

OBSERVATION_DIM = 1513

LAYOUT = {
    "command": slice(0, 3),
    "behavior": slice(3, 16),
    "proprio": slice(16, 73),
    "elevation": slice(73, 793),
    "semantic": slice(793, 1513),
}

BLOCK_SIZES = {name: s.stop - s.start for name, s in LAYOUT.items()}


@dataclass(frozen=True)
class Proprio:
    """57 proprioceptive scalars: estimated base linear velocity, base angular
    velocity, gravity direction, 12 joint angles, 12 joint velocities, and the
    two previous 12-dim actions.

    The gravity vector must be unit length; an all-zero Proprio (placeholder
    when no estimate exists) is also accepted.
    """

    v_hat: tuple[float, float, float] = (0.0, 0.0, 0.0)
    omega: tuple[float, float, float] = (0.0, 0.0, 0.0)
    gravity: tuple[float, float, float] = (0.0, 0.0, 0.0)
    q: tuple[float, ...] = (0.0,) * 12
    dq: tuple[float, ...] = (0.0,) * 12
    a_prev1: tuple[float, ...] = (0.0,) * 12
    a_prev2: tuple[float, ...] = (0.0,) * 12

    def __post_init__(self):
        for name in ("q", "dq", "a_prev1", "a_prev2"):
            if len(getattr(self, name)) != 12:
                raise ValueError(f"{name} must have 12 entries")
        g = self.gravity
        norm = math.sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2])
        if norm != 0.0 and abs(norm - 1.0) > 1e-6:
            raise ValueError(f"gravity must be unit length (or all zero), norm={norm}")

    def as_vector(self) -> tuple[float, ...]:
        return (*self.v_hat, *self.omega, *self.gravity, *self.q, *self.dq, *self.a_prev1, *self.a_prev2)


def assemble(
    cmd: VelocityCommand, params: BehaviorParams, prop: Proprio, maps: DualMap
) -> np.ndarray:
    """Concatenate command, behavior, proprioception, and both map blocks."""
    spec = maps.spec
    if (spec.rows, spec.cols) != (30, 24):
        raise ValueError(f"observation maps must be 30x24, got {spec.rows}x{spec.cols}")
    vec = np.empty(OBSERVATION_DIM)
    vec[LAYOUT["command"]] = (cmd.vx, cmd.vy, cmd.wz)
    vec[LAYOUT["behavior"]] = params.as_vector()
    vec[LAYOUT["proprio"]] = prop.as_vector()
    vec[LAYOUT["elevation"]] = maps.elevation.heights.ravel()
    vec[LAYOUT["semantic"]] = maps.semantic.costs.ravel()
    return vec


def split(vec: np.ndarray) -> dict[str, np.ndarray]:
    """Slice an observation vector back into its named blocks (copies)."""
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (OBSERVATION_DIM,):
        raise ValueError(f"observation must have shape ({OBSERVATION_DIM},), got {vec.shape}")
    return {name: vec[s].copy() for name, s in LAYOUT.items()}


def write_text(vec: np.ndarray, stream: TextIO) -> None:
    """Text export for golden tests: a block header line, then one scalar per
    line using repr so values round-trip exactly."""
    blocks = split(vec)
    for name in LAYOUT:
        stream.write(f"# {name} {BLOCK_SIZES[name]}\n")
        for value in blocks[name]:
            stream.write(repr(float(value)) + "\n")


def read_text(stream: TextIO) -> np.ndarray:
    """Inverse of write_text."""
    values: list[float] = []
    expected: list[tuple[str, int]] = []
    for line in stream:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            name, size = line[1:].split()
            expected.append((name, int(size)))
        else:
            values.append(float(line))
    if [(n, BLOCK_SIZES[n]) for n in LAYOUT] != expected:
        raise ValueError("text export block headers do not match the layout")
    if len(values) != OBSERVATION_DIM:
        raise ValueError(f"expected {OBSERVATION_DIM} scalars, got {len(values)}")
    return np.array(values)
