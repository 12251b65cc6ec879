"""Random walk reflected off of infinity on transient weighted graphs.

The walk lives on a growing family of finite truncations with free
boundary: a vertex of the level-n graph keeps only the neighbors the
truncation retains, and nothing is killed. Passes "through infinity"
re-enter by the harmonic measure of the level set seen from far away.
On top of the level chains the package samples free spanning forests
(loop-erased branches and first-entrance windows), computes Green's
functions and the pinned Gaussian free field, and draws Tutte
embeddings of planar maps with finitely many ends.
"""

from .config import RunConfig, Tolerances, load_config, merge_config
from .errors import (
    BudgetError,
    ConvergenceError,
    FreewalkError,
    GraphConsistencyError,
    SolverError,
    VerificationError,
)
from .forest import (
    Forest,
    TreeDistribution,
    WilsonSummary,
    aldous_broder_window,
    enumerate_ust,
    loop_erase,
    matrix_tree_edge_prob,
    tree_weight,
    wilson_batch,
    wilson_sample,
)
from .graphs import (
    ComplementComponents,
    Exhaustion,
    GraphOracle,
    LevelGraph,
    WeightedGraph,
    ZOO_NAMES,
    complement_components,
    finite,
    truncate,
    zoo_oracle,
)
from .green import (
    GffSamples,
    GreenMatrix,
    GreenReport,
    gff_sample,
    green,
    kirkhoff_edge_prob,
    validate_green,
)
from .harmonic import (
    EnergyReport,
    Extension,
    HarmonicMeasure,
    OrthogonalityReport,
    cycle_orthogonality_check,
    energy_report,
    harmonic_measure,
    min_energy_extension,
    solve_free_dirichlet,
)
from .planar import (
    ConvexityReport,
    Embedding,
    EndImage,
    MapOracle,
    PlanarMap,
    boundary_trace,
    cylinder_map,
    end_image,
    export_svg,
    face_convexity,
    grid_map,
    pendant_map,
    ring_tree_map,
    tutte_embed,
    wheel_map,
)
from .rng import Stream, normals, stream_key, uniforms
from .verify import CheckResult, SUITES, VerifyReport, run_suites
from .walk import (
    ConsistencyReport,
    CoverSet,
    FixedSteps,
    HitSet,
    LevelChainKernel,
    RateSchedule,
    ScheduleReport,
    Trajectory,
    batch_first_hit,
    batch_visit_counts,
    build_kernel,
    consistency_check,
    schedule_report,
    simulate,
)

import types as _types

__version__ = "0.1.0"

__all__ = [name for name in dir()
           if not name.startswith("_")
           and not isinstance(globals()[name], _types.ModuleType)]
