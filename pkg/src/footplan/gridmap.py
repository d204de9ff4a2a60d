"""Robot-centered dual grid maps: elevation plus semantic traversal cost.

Both maps cover the same window around the robot base (1.5 m along body x,
1.2 m along body y at 0.05 m resolution by default, a 30 x 24 grid) and are
sampled analytically from ground-truth obstacle boxes. Rows index body x
(increasing forward), columns index body y (increasing left).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .scenario import World

#: Cells per map in the default window; fixed so exteroception vectors always
#: have the same length.
CELLS_PER_MAP = 720

#: Marker returned by cell_at for points outside the map window.
OUT_OF_RANGE = None


class GridSpecError(ValueError):
    """Raised for grid geometries that do not tile the window exactly."""


@dataclass(frozen=True)
class GridSpec:
    """Geometry of one robot-centered map window.

    The window must tile exactly into rows x cols square cells and contain
    exactly 720 of them.
    """

    span_x: float = 1.5
    span_y: float = 1.2
    resolution: float = 0.05

    def __post_init__(self):
        if self.resolution <= 0:
            raise GridSpecError(f"resolution must be > 0, got {self.resolution}")
        for name, span in (("span_x", self.span_x), ("span_y", self.span_y)):
            n = span / self.resolution
            if abs(n - round(n)) > 1e-9 or round(n) < 1:
                raise GridSpecError(f"{name}={span} is not a whole number of {self.resolution} m cells")
        if self.rows * self.cols != CELLS_PER_MAP:
            raise GridSpecError(
                f"grid must hold exactly {CELLS_PER_MAP} cells, got {self.rows}x{self.cols}"
            )

    @property
    def rows(self) -> int:
        return int(round(self.span_x / self.resolution))

    @property
    def cols(self) -> int:
        return int(round(self.span_y / self.resolution))

    def cell_centers_body(self) -> np.ndarray:
        """(rows*cols, 2) body-frame cell centers in row-major order."""
        r = np.arange(self.rows)
        c = np.arange(self.cols)
        x = -self.span_x / 2 + (r + 0.5) * self.resolution
        y = -self.span_y / 2 + (c + 0.5) * self.resolution
        xx, yy = np.meshgrid(x, y, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])


def _normalize_yaw(yaw: float) -> float:
    """Wrap into (-pi, pi]."""
    wrapped = math.fmod(yaw + math.pi, 2 * math.pi)
    if wrapped <= 0:
        wrapped += 2 * math.pi
    return wrapped - math.pi


@dataclass(frozen=True)
class Pose2D:
    """Planar base pose in the world frame; yaw normalized to (-pi, pi]."""

    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "yaw", _normalize_yaw(self.yaw))


def body_to_world(base: Pose2D, p_body) -> np.ndarray:
    """Rigid transform of body-frame point(s) into the world frame."""
    p = np.asarray(p_body, dtype=float)
    cos_y, sin_y = math.cos(base.yaw), math.sin(base.yaw)
    x = p[..., 0]
    y = p[..., 1]
    return np.stack(
        [base.x + x * cos_y - y * sin_y, base.y + x * sin_y + y * cos_y], axis=-1
    )


def world_to_body(base: Pose2D, p_world) -> np.ndarray:
    """Inverse of body_to_world."""
    p = np.asarray(p_world, dtype=float)
    cos_y, sin_y = math.cos(base.yaw), math.sin(base.yaw)
    dx = p[..., 0] - base.x
    dy = p[..., 1] - base.y
    return np.stack([dx * cos_y + dy * sin_y, -dx * sin_y + dy * cos_y], axis=-1)


@dataclass(frozen=True)
class ElevationMap:
    spec: GridSpec
    heights: np.ndarray
    center: Pose2D

    def __post_init__(self):
        _check_grid(self.spec, self.heights, float)
        if not np.isfinite(self.heights).all():
            raise ValueError("elevation map contains non-finite cells")


@dataclass(frozen=True)
class SemanticMap:
    spec: GridSpec
    costs: np.ndarray
    class_ids: np.ndarray
    center: Pose2D

    def __post_init__(self):
        _check_grid(self.spec, self.costs, float)
        _check_grid(self.spec, self.class_ids, int)
        if (self.costs < 0).any():
            raise ValueError("semantic costs must be nonnegative")
        if ((self.class_ids == 0) != (self.costs == 0)).any():
            raise ValueError("class id 0 must coincide with cost 0 (free ground)")


@dataclass(frozen=True)
class DualMap:
    """Paired elevation and semantic maps sharing one spec and center."""

    elevation: ElevationMap
    semantic: SemanticMap

    def __post_init__(self):
        if self.elevation.spec != self.semantic.spec or self.elevation.center != self.semantic.center:
            raise ValueError("elevation and semantic maps must share spec and center")

    @property
    def spec(self) -> GridSpec:
        return self.elevation.spec

    @property
    def center(self) -> Pose2D:
        return self.elevation.center


def _check_grid(spec: GridSpec, arr: np.ndarray, kind: type) -> None:
    if arr.shape != (spec.rows, spec.cols):
        raise ValueError(f"grid array shape {arr.shape} does not match spec {spec.rows}x{spec.cols}")
    if kind is int and not np.issubdtype(arr.dtype, np.integer):
        raise ValueError("class id grid must be integer-typed")
    arr.flags.writeable = False


def sample_dual_map(
    world: World,
    base: Pose2D,
    spec: GridSpec = GridSpec(),
    noise_amplitude: float = 0.0,
    noise_rng: np.random.Generator | None = None,
) -> DualMap:
    """Sample both maps from ground truth at the given base pose.

    Each cell reads the obstacle state at its center: elevation is the terrain
    height there (0 on bare ground), semantics are the cost/class of the
    covering obstacle with the highest cost. Cells beyond the track read as
    flat ground. With ``noise_amplitude`` > 0 an additive uniform height noise
    in [-a, +a] is drawn per cell from ``noise_rng``; the default of 0 keeps
    sampling a pure function of (world, base, spec).
    """
    centers_world = body_to_world(base, spec.cell_centers_body())
    heights = world.elevation_at(centers_world)
    if noise_amplitude > 0.0:
        if noise_rng is None:
            raise ValueError("noise_amplitude > 0 requires a noise_rng")
        heights = heights + noise_rng.uniform(-noise_amplitude, noise_amplitude, heights.shape)
    costs, class_ids = world.semantics_at(centers_world)
    shape = (spec.rows, spec.cols)
    elevation = ElevationMap(spec, heights.reshape(shape), base)
    semantic = SemanticMap(spec, costs.reshape(shape), class_ids.reshape(shape), base)
    return DualMap(elevation, semantic)


def cell_index(spec: GridSpec, p_body) -> tuple[int, int] | None:
    """Map a body-frame point to its (row, col) cell, or None outside the window.

    Points exactly on an interior cell boundary belong to the lower-index
    cell; by the same rule the window's low edges (x = -span_x/2, y =
    -span_y/2) fall outside.
    """
    u = float(p_body[0]) + spec.span_x / 2
    v = float(p_body[1]) + spec.span_y / 2
    row = math.ceil(u / spec.resolution) - 1
    col = math.ceil(v / spec.resolution) - 1
    if 0 <= row < spec.rows and 0 <= col < spec.cols:
        return row, col
    return OUT_OF_RANGE


def cell_at(dual: DualMap, p_body) -> tuple[float, float, int] | None:
    """(height, cost, class_id) of the cell containing a body-frame point,
    or the out-of-range marker (None) outside the 1.5 x 1.2 m window."""
    idx = cell_index(dual.spec, p_body)
    if idx is OUT_OF_RANGE:
        return OUT_OF_RANGE
    r, c = idx
    return (
        float(dual.elevation.heights[r, c]),
        float(dual.semantic.costs[r, c]),
        int(dual.semantic.class_ids[r, c]),
    )


def export_map_csv(dual: DualMap, path) -> None:
    """Write one row per cell: row, col, height_m, cost, class_id."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "height_m", "cost", "class_id"])
        for r in range(dual.spec.rows):
            for c in range(dual.spec.cols):
                writer.writerow(
                    [
                        r,
                        c,
                        repr(float(dual.elevation.heights[r, c])),
                        repr(float(dual.semantic.costs[r, c])),
                        int(dual.semantic.class_ids[r, c]),
                    ]
                )
