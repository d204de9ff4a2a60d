"""Semantic-aware foothold planning for quadrupeds on cluttered flat ground.

The package pairs a planning library (dual grid maps, Raibert-based foothold
search with collision costs, gait scheduling, reward stack, curricula) with a
deterministic kinematic simulator and a benchmark harness that compares
semantic, elevation-proxy, and blind foothold policies on procedurally
generated obstacle tracks.
"""

from .bench import (
    BENCH_PARAMS,
    BENCH_SEARCH,
    SweepCell,
    SweepReport,
    make_policy,
    render_report,
    run_sweep,
)
from .curriculum import (
    DensitySchedule,
    VelocityGrid,
    make_velocity_grid,
    maybe_promote,
    sample_command,
    update_probs,
)
from .foothold import (
    FootholdPlan,
    SearchConfig,
    VelocityCommand,
    collision_indicator,
    collision_indicator_from_map,
    foothold_cost,
    map_indicator,
    nominal_stance,
    raibert_position,
    select_target,
    select_target_with_indicator,
)
from .gait import (
    BehaviorParams,
    GaitState,
    advance,
    gait_state_at,
    stance_duration,
    swing_reference_height,
)
from .gridmap import (
    DualMap,
    ElevationMap,
    GridSpec,
    Pose2D,
    SemanticMap,
    body_to_world,
    cell_at,
    export_map_csv,
    sample_dual_map,
    world_to_body,
)
from .observation import Proprio, assemble, split
from .reward import (
    RewardBreakdown,
    RewardConfig,
    clearance_penalty,
    semantic_foothold_tracking,
    total_reward,
    velocity_tracking,
)
from .scenario import (
    Obstacle,
    SemanticClass,
    World,
    generate_track,
    load_world,
    save_world,
)
from .simulator import (
    Policy,
    RobotState,
    StepOutcome,
    TrialResult,
    initial_state,
    run_trial,
    step,
)

__version__ = "0.1.0"
