"""contactlab: an event-driven simulation and verification lab for the
contact process on finite graphs."""

from .graphs import (
    Decomposition,
    DecompositionKind,
    Graph,
    GraphError,
    TreeSplit,
    bridge_subgraph,
    centroid_vertex,
    classify_tree,
    find_star_or_segment,
    iterated_split,
    load_edge_list,
    make_line,
    make_star,
    parse_graph_spec,
    random_tree,
    save_edge_list,
    spanning_tree,
    split_edge_balanced,
)
from .harris import Configuration, HarrisError, HarrisSystem, SpaceTimePoint, sample_harris
from .oracle import (
    CapacityError,
    exact_cdf_extinction,
    exact_expected_extinction,
    exact_transient_survival,
)
from .process import (
    CouplingStatus,
    Trajectory,
    coupling_status,
    coupling_statuses,
    crossing_time,
    extinction_time,
    is_lit,
    right_edge_trace,
    run_trajectory,
    survival_probability,
)
from .reporting import BoundCheck, Constants, ExperimentReport
from .experiments import (
    CalibrationResult,
    Exp1Result,
    GrowthResult,
    calibrate_constants,
    check_attract_bound,
    check_product_bound,
    coupling_decay_curve,
    estimate_mean_extinction,
    exp1_test,
    growth_curve,
    survival_floor_check,
)

__version__ = "0.1.0"
