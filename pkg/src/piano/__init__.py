"""piano: a pin-assignment-aware floorplanning engine.

Places and shapes circuit modules on a fixed grid canvas, assigns every
net's pins on module boundaries through a capacity resource graph, removes
whitespace, and refines the layout with simulated annealing over three
local operators, reporting HPWL, feedthrough, and unplaced-pin metrics.
"""

from .geometry import (
    BLANK_BASE,
    BORDER,
    EMPTY,
    BoundarySegment,
    adjacency_length,
    boundary_segments,
    connected_components,
    region_center,
)
from .legalizer import (
    compute_position_mask,
    compute_wiremask,
    legalize,
    module_footprint,
    random_initial,
)
from .metrics import LayoutMetrics, avr, hpwl, objective, regularity
from .model import (
    FloorplanState,
    GridProblem,
    LayoutError,
    LegalizationError,
    ModuleRecord,
    NetRecord,
    ParseError,
    PianoError,
    ProblemInstance,
    TwoPinNet,
)
from .netlist import decompose_nets, register_blank_modules
from .optimizer import (
    SAConfig,
    op_adjacent_exchange,
    op_p2p_enhance,
    op_random_exchange,
    remove_whitespace,
    sa_optimize,
)
from .pin_graph import (
    AssignmentResult,
    ResourceGraph,
    StalePathError,
    assign_all,
    astar_path,
    beam_assign,
    build_mask_graph,
    build_resource_graph,
    pin_space,
)
from .pipeline import RunConfig, build_grid_problem, evaluate, plan, refine

__version__ = "0.1.0"
