"""Reachability analysis for polygonal differential inclusions.

The package decides whether a flow that is constrained, region by region,
to a cone of directions can steer from one set of edge intervals to
another.  Successors of edge intervals are affine interval maps, cycles
are accelerated from their limit behaviour instead of being iterated, and
the signature search runs either sequentially or on a work-stealing
thread pool with identical verdicts.
"""

from .bench import BenchError, BenchReport, RunRecord, aggregate, render_table, run_bench, to_csv
from .cycles import (
    MAX_CYCLE_ITER,
    CycleAnalysis,
    CycleOracleResult,
    CycleOrientationError,
    CycleOutcome,
    CycleType,
    classify_cycle,
    endpoint_limit,
    iterate_cycle_oracle,
    test_cycle_and_get_final_images,
)
from .explorer import (
    REACHABLE,
    UNREACHABLE,
    ReachResult,
    ReplayError,
    SolveLimitExceeded,
    SolveStats,
    SolveTimeout,
    Witness,
    WitnessCycle,
    WitnessStep,
    replay_witness,
    solve_sequential,
)
from .generator import GenConfig, GenerationError, generate_spdi, generate_tasks
from .geometry import GeometryError, Point2, Vector2
from .io_formats import (
    FormatError,
    parse_spdi,
    parse_task,
    parse_tasks,
    parse_witness,
    write_spdi,
    write_task,
    write_tasks,
    write_witness,
)
from .model import (
    Edge,
    EdgeInterval,
    EdgeKind,
    GoodnessViolation,
    ModelError,
    ReachTask,
    Region,
    Spdi,
    build_spdi,
    validate_spdi,
    validate_task,
)
from .parallel import EngineConfig, EngineError, solve, solve_parallel
from .plot import render_plot
from .sampling import SimulationReport, simulate_task
from .successor import (
    AffineMap1,
    IntervalMap,
    SignatureError,
    compose_signature,
    merge_intervals,
    signature_steps,
    succ_affine,
    succ_interval,
    succ_point,
    succ_signature,
)

__version__ = "0.1.0"

__all__ = [
    "AffineMap1",
    "BenchError",
    "BenchReport",
    "CycleAnalysis",
    "CycleOracleResult",
    "CycleOrientationError",
    "CycleOutcome",
    "CycleType",
    "Edge",
    "EdgeInterval",
    "EdgeKind",
    "EngineConfig",
    "EngineError",
    "FormatError",
    "GenConfig",
    "GenerationError",
    "GeometryError",
    "GoodnessViolation",
    "IntervalMap",
    "MAX_CYCLE_ITER",
    "ModelError",
    "Point2",
    "REACHABLE",
    "ReachResult",
    "ReachTask",
    "Region",
    "ReplayError",
    "RunRecord",
    "SignatureError",
    "SimulationReport",
    "SolveLimitExceeded",
    "SolveStats",
    "SolveTimeout",
    "Spdi",
    "UNREACHABLE",
    "Vector2",
    "Witness",
    "WitnessCycle",
    "WitnessStep",
    "aggregate",
    "build_spdi",
    "classify_cycle",
    "compose_signature",
    "endpoint_limit",
    "generate_spdi",
    "generate_tasks",
    "iterate_cycle_oracle",
    "merge_intervals",
    "parse_spdi",
    "parse_task",
    "parse_tasks",
    "parse_witness",
    "render_plot",
    "render_table",
    "replay_witness",
    "run_bench",
    "simulate_task",
    "solve",
    "solve_parallel",
    "solve_sequential",
    "succ_affine",
    "succ_interval",
    "succ_point",
    "succ_signature",
    "signature_steps",
    "test_cycle_and_get_final_images",
    "to_csv",
    "validate_spdi",
    "validate_task",
    "write_spdi",
    "write_task",
    "write_tasks",
    "write_witness",
]
