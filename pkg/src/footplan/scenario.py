"""Procedural cluttered-track worlds and the line-oriented scenario file format.

A world is a flat rectangular track scattered with axis-aligned box obstacles.
Each obstacle carries a semantic class (which fixes its traversal cost) and an
interaction mode: ``virtual`` obstacles are visible to perception but have no
physical effect, ``rigid`` obstacles can trip the robot.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

VIRTUAL = "virtual"
RIGID = "rigid"

SCENARIO_VERSION = 1

# Default class table: ground is reserved id 0 / cost 0; costs for the others
# only need a strict ordering above zero.
DEFAULT_CLASSES = (
    ("ground", 0.0, False),
    ("box", 5.0, False),
    ("cable", 10.0, True),
    ("device", 10.0, True),
)

# Obstacle size ranges used by generate_track when none are given. Chosen for
# low-lying clutter (cables, small devices, boxes) that a quadruped should
# step around rather than climb.
DEFAULT_HALF_EXTENT_RANGE = (0.03, 0.10)
DEFAULT_HEIGHT_RANGE = (0.02, 0.12)

START_CLEAR_ZONE = 1.0
END_CLEAR_ZONE = 0.5


class ScenarioError(Exception):
    """Raised for malformed worlds or scenario files."""


class PlacementError(ScenarioError):
    """Raised when disjoint placement cannot satisfy the requested density."""


@dataclass(frozen=True)
class SemanticClass:
    """One entry of the semantic class table."""

    id: int
    name: str
    cost: float
    fragile: bool = False

    def __post_init__(self):
        if self.id < 0:
            raise ScenarioError(f"class id must be >= 0, got {self.id}")
        if self.cost < 0:
            raise ScenarioError(f"class cost must be >= 0, got {self.cost}")
        if self.id == 0 and self.cost != 0.0:
            raise ScenarioError("class id 0 is reserved for ground with cost 0")


@dataclass(frozen=True)
class Obstacle:
    """Axis-aligned box obstacle standing on the ground plane.

    ``center`` and ``half_extents`` describe the footprint in world xy;
    ``height`` is the top surface above the ground.
    """

    center: tuple[float, float]
    half_extents: tuple[float, float]
    height: float
    class_id: int
    mode: str = RIGID

    def __post_init__(self):
        if self.half_extents[0] <= 0 or self.half_extents[1] <= 0:
            raise ScenarioError(f"half_extents must be > 0, got {self.half_extents}")
        if self.height <= 0:
            raise ScenarioError(f"height must be > 0, got {self.height}")
        if self.mode not in (VIRTUAL, RIGID):
            raise ScenarioError(f"mode must be 'virtual' or 'rigid', got {self.mode!r}")

    def footprint_overlaps(self, other: "Obstacle") -> bool:
        """True when the two footprints share interior area (touching is ok)."""
        return (
            abs(self.center[0] - other.center[0]) < self.half_extents[0] + other.half_extents[0]
            and abs(self.center[1] - other.center[1]) < self.half_extents[1] + other.half_extents[1]
        )


def default_class_table() -> tuple[SemanticClass, ...]:
    return tuple(
        SemanticClass(i, name, cost, fragile) for i, (name, cost, fragile) in enumerate(DEFAULT_CLASSES)
    )


@dataclass(frozen=True)
class World:
    """Immutable track plus obstacle set.

    The track spans x in [0, track_length], y in [-track_width/2, +track_width/2].
    ``stacked`` records whether overlapping footprints were permitted at
    generation time; it selects whether overlapped heights sum or take the max.
    """

    obstacles: tuple[Obstacle, ...]
    track_length: float
    track_width: float
    classes: tuple[SemanticClass, ...] = field(default_factory=default_class_table)
    seed: int = 0
    stacked: bool = False

    def __post_init__(self):
        if self.track_length <= 0 or self.track_width <= 0:
            raise ScenarioError("track dimensions must be positive")
        ids = {c.id for c in self.classes}
        if len(ids) != len(self.classes):
            raise ScenarioError("duplicate class ids in class table")
        if 0 not in ids:
            raise ScenarioError("class table must include ground (id 0)")
        half_w = self.track_width / 2
        for k, ob in enumerate(self.obstacles):
            if ob.class_id not in ids:
                raise ScenarioError(f"obstacle {k} references unknown class id {ob.class_id}")
            if not (
                ob.center[0] - ob.half_extents[0] >= -1e-9
                and ob.center[0] + ob.half_extents[0] <= self.track_length + 1e-9
                and ob.center[1] - ob.half_extents[1] >= -half_w - 1e-9
                and ob.center[1] + ob.half_extents[1] <= half_w + 1e-9
            ):
                raise ScenarioError(f"obstacle {k} footprint extends outside the track")

    def class_by_id(self, class_id: int) -> SemanticClass:
        for c in self.classes:
            if c.id == class_id:
                return c
        raise ScenarioError(f"unknown class id {class_id}")

    @cached_property
    def has_rigid(self) -> bool:
        return any(ob.mode == RIGID for ob in self.obstacles)

    # Packed obstacle arrays, sorted by center x for fast range pre-filtering.
    # Cached lazily; the world is immutable so this is safe to share.
    @cached_property
    def _packed(self) -> dict[str, np.ndarray]:
        n = len(self.obstacles)
        centers = np.zeros((n, 2))
        halves = np.zeros((n, 2))
        heights = np.zeros(n)
        costs = np.zeros(n)
        class_ids = np.zeros(n, dtype=np.int64)
        rigid = np.zeros(n, dtype=bool)
        cost_of = {c.id: c.cost for c in self.classes}
        for k, ob in enumerate(self.obstacles):
            centers[k] = ob.center
            halves[k] = ob.half_extents
            heights[k] = ob.height
            costs[k] = cost_of[ob.class_id]
            class_ids[k] = ob.class_id
            rigid[k] = ob.mode == RIGID
        order = np.argsort(centers[:, 0], kind="stable")
        packed = {
            "centers": centers[order],
            "halves": halves[order],
            "heights": heights[order],
            "costs": costs[order],
            "class_ids": class_ids[order],
            "rigid": rigid[order],
        }
        packed["max_half_x"] = float(halves[:, 0].max()) if n else 0.0
        for arr in packed.values():
            if isinstance(arr, np.ndarray):
                arr.flags.writeable = False
        return packed

    def boxes_near(self, x_lo: float, x_hi: float) -> dict[str, np.ndarray]:
        """Slice of the packed arrays whose footprints can reach [x_lo, x_hi]."""
        p = self._packed
        xs = p["centers"][:, 0]
        pad = p["max_half_x"]
        lo = int(np.searchsorted(xs, x_lo - pad, side="left"))
        hi = int(np.searchsorted(xs, x_hi + pad, side="right"))
        return {k: (v[lo:hi] if isinstance(v, np.ndarray) else v) for k, v in p.items()}

    def _cover_matrix(self, points: np.ndarray, dilation: float, sub: dict[str, np.ndarray]) -> np.ndarray:
        """(n_points, n_obstacles) bool matrix of dilated footprint coverage.

        A point on the dilated boundary counts as covered (conservative).
        """
        if sub["centers"].shape[0] == 0:
            return np.zeros((points.shape[0], 0), dtype=bool)
        d = np.abs(points[:, None, :] - sub["centers"][None, :, :])
        return (d <= sub["halves"][None, :, :] + dilation).all(axis=2)

    def covered(self, points: np.ndarray, dilation: float = 0.0) -> np.ndarray:
        """Per-point flag: inside any obstacle footprint dilated by ``dilation``."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        x_lo = float(points[:, 0].min())
        x_hi = float(points[:, 0].max())
        sub = self.boxes_near(x_lo - dilation, x_hi + dilation)
        return self._cover_matrix(points, dilation, sub).any(axis=1)

    def elevation_at(self, points: np.ndarray, rigid_only: bool = False) -> np.ndarray:
        """Terrain height at each point: max covering obstacle height, or the
        sum of covering heights for stacked worlds. Bare ground reads 0."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        sub = self.boxes_near(float(points[:, 0].min()), float(points[:, 0].max()))
        cover = self._cover_matrix(points, 0.0, sub)
        heights = sub["heights"]
        if rigid_only:
            cover = cover & sub["rigid"][None, :]
        if cover.shape[1] == 0:
            return np.zeros(points.shape[0])
        contrib = cover * heights[None, :]
        if self.stacked:
            return contrib.sum(axis=1)
        return contrib.max(axis=1, initial=0.0)

    def semantics_at(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-point (cost, class_id) of the covering obstacle with the highest
        cost; ties go to the lowest obstacle index. Bare ground reads (0, 0)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        sub = self.boxes_near(float(points[:, 0].min()), float(points[:, 0].max()))
        cover = self._cover_matrix(points, 0.0, sub)
        n = points.shape[0]
        if cover.shape[1] == 0:
            return np.zeros(n), np.zeros(n, dtype=np.int64)
        masked = np.where(cover, sub["costs"][None, :], -1.0)
        best = masked.argmax(axis=1)
        any_cover = cover.any(axis=1)
        costs = np.where(any_cover, sub["costs"][best], 0.0)
        class_ids = np.where(any_cover, sub["class_ids"][best], 0)
        return costs, class_ids


def generate_track(
    density: float,
    seed: int,
    length: float = 10.0,
    width: float = 2.0,
    mode: str = RIGID,
    allow_stacking: bool = False,
    half_extent_range: tuple[float, float] = DEFAULT_HALF_EXTENT_RANGE,
    height_range: tuple[float, float] = DEFAULT_HEIGHT_RANGE,
    classes: Sequence[SemanticClass] | None = None,
    max_attempts_per_obstacle: int = 10_000,
) -> World:
    """Generate a seeded cluttered track.

    Obstacle count is round(density * length * width). Footprints stay fully
    inside the track minus a 1 m start zone and a 0.5 m end zone. With
    ``allow_stacking=False`` footprints are rejection-sampled to be pairwise
    disjoint; generation fails if the attempt budget runs out, which signals
    that the density is too high for disjoint placement.
    """
    if density < 0:
        raise ScenarioError(f"density must be >= 0, got {density}")
    if length <= 0 or width <= 0:
        raise ScenarioError("track dimensions must be positive")
    if mode not in (VIRTUAL, RIGID):
        raise ScenarioError(f"mode must be 'virtual' or 'rigid', got {mode!r}")
    class_table = tuple(classes) if classes is not None else default_class_table()
    placeable = [c.id for c in class_table if c.id != 0]
    if not placeable:
        raise ScenarioError("class table has no non-ground classes to place")

    count = int(round(density * length * width))
    rng = np.random.default_rng(seed)
    obstacles: list[Obstacle] = []
    for _ in range(count):
        placed = False
        for _attempt in range(max_attempts_per_obstacle):
            hx = rng.uniform(*half_extent_range)
            hy = rng.uniform(*half_extent_range)
            h = rng.uniform(*height_range)
            cx = rng.uniform(START_CLEAR_ZONE + hx, length - END_CLEAR_ZONE - hx)
            cy = rng.uniform(-width / 2 + hy, width / 2 - hy)
            class_id = int(placeable[rng.integers(len(placeable))])
            candidate = Obstacle((cx, cy), (hx, hy), h, class_id, mode)
            if allow_stacking or not any(candidate.footprint_overlaps(o) for o in obstacles):
                obstacles.append(candidate)
                placed = True
                break
        if not placed:
            raise PlacementError(
                f"could not place obstacle {len(obstacles) + 1}/{count} without overlap; "
                f"density {density} is too high for disjoint placement"
            )
    return World(
        obstacles=tuple(obstacles),
        track_length=length,
        track_width=width,
        classes=class_table,
        seed=seed,
        stacked=allow_stacking,
    )


def _parse_field(line_no: int, field_name: str, raw: str, kind: type):
    try:
        if kind is bool:
            value = int(raw)
            if value not in (0, 1):
                raise ValueError
            return bool(value)
        return kind(raw)
    except ValueError:
        raise ScenarioError(
            f"line {line_no}: field '{field_name}' is not a valid {kind.__name__}: {raw!r}"
        ) from None


def _world_mode(world: World) -> str:
    modes = {ob.mode for ob in world.obstacles}
    if len(modes) == 1:
        return modes.pop()
    return "mixed" if modes else RIGID


def save_world(world: World, path) -> None:
    """Write a world to a scenario file (plain text, one record per line)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"version {SCENARIO_VERSION}\n")
        fh.write(f"seed {world.seed}\n")
        fh.write(f"length {world.track_length!r}\n")
        fh.write(f"width {world.track_width!r}\n")
        fh.write(f"mode {_world_mode(world)}\n")
        fh.write(f"stacked {int(world.stacked)}\n")
        fh.write(f"classes {len(world.classes)}\n")
        for c in world.classes:
            fh.write(f"class {c.id} {c.name} {c.cost!r} {int(c.fragile)}\n")
        fh.write(f"obstacles {len(world.obstacles)}\n")
        for ob in world.obstacles:
            fh.write(
                f"obstacle {ob.center[0]!r} {ob.center[1]!r} "
                f"{ob.half_extents[0]!r} {ob.half_extents[1]!r} "
                f"{ob.height!r} {ob.class_id} {ob.mode}\n"
            )


def load_world(path) -> World:
    """Parse a scenario file; errors name the offending line and field."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    def tokens(line_no: int, expect_key: str, n_fields: int) -> list[str]:
        if line_no > len(lines):
            raise ScenarioError(f"line {line_no}: unexpected end of file, expected '{expect_key}'")
        parts = lines[line_no - 1].split()
        if not parts or parts[0] != expect_key:
            raise ScenarioError(f"line {line_no}: expected '{expect_key}' record, got {lines[line_no - 1]!r}")
        if len(parts) != n_fields + 1:
            raise ScenarioError(
                f"line {line_no}: '{expect_key}' expects {n_fields} fields, got {len(parts) - 1}"
            )
        return parts[1:]

    ln = 1
    (version,) = tokens(ln, "version", 1)
    if _parse_field(ln, "version", version, int) != SCENARIO_VERSION:
        raise ScenarioError(f"line 1: unsupported scenario version {version}")
    ln += 1
    seed = _parse_field(ln, "seed", tokens(ln, "seed", 1)[0], int)
    ln += 1
    length = _parse_field(ln, "length", tokens(ln, "length", 1)[0], float)
    ln += 1
    width = _parse_field(ln, "width", tokens(ln, "width", 1)[0], float)
    ln += 1
    (header_mode,) = tokens(ln, "mode", 1)
    if header_mode not in (VIRTUAL, RIGID, "mixed"):
        raise ScenarioError(
            f"line {ln}: field 'mode' must be virtual, rigid or mixed, got {header_mode!r}"
        )
    ln += 1
    stacked = _parse_field(ln, "stacked", tokens(ln, "stacked", 1)[0], bool)
    ln += 1
    n_classes = _parse_field(ln, "classes", tokens(ln, "classes", 1)[0], int)
    classes = []
    for _ in range(n_classes):
        ln += 1
        cid, name, cost, fragile = tokens(ln, "class", 4)
        classes.append(
            SemanticClass(
                _parse_field(ln, "id", cid, int),
                name,
                _parse_field(ln, "cost", cost, float),
                _parse_field(ln, "fragile", fragile, bool),
            )
        )
    ln += 1
    n_obstacles = _parse_field(ln, "obstacles", tokens(ln, "obstacles", 1)[0], int)
    obstacles = []
    for _ in range(n_obstacles):
        ln += 1
        cx, cy, hx, hy, h, cid, mode = tokens(ln, "obstacle", 7)
        obstacles.append(
            Obstacle(
                (_parse_field(ln, "cx", cx, float), _parse_field(ln, "cy", cy, float)),
                (_parse_field(ln, "hx", hx, float), _parse_field(ln, "hy", hy, float)),
                _parse_field(ln, "height", h, float),
                _parse_field(ln, "class_id", cid, int),
                mode,
            )
        )
    if len(lines) > ln and any(s.strip() for s in lines[ln:]):
        raise ScenarioError(f"line {ln + 1}: trailing content after obstacle list")
    if header_mode != "mixed" and any(ob.mode != header_mode for ob in obstacles):
        raise ScenarioError(f"line 5: header mode {header_mode!r} inconsistent with obstacle modes")
    return World(
        obstacles=tuple(obstacles),
        track_length=length,
        track_width=width,
        classes=tuple(classes),
        seed=seed,
        stacked=stacked,
    )
