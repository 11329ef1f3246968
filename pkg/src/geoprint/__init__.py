"""Multi-robot raster printing planner: balanced pixel cells, robot assignment,
serpentine print plans, print-time model and a deterministic simulator."""

from .assignment import (AssignmentResult, Fleet, RobotSpec, Trajectory, assign_cells,
                         check_clearance, cost_matrix, make_trajectories, min_separation,
                         solve_assignment)
from .clustering import (ClusterConfig, GeodesicCells, assign_balanced, cluster,
                         seed_kmeanspp, update_means)
from .errors import ClearanceError, EmptyImageError, InfeasibleError
from .pathplan import (CostReport, Mode, MotionPlan, MotionSegment, bresenham, objective,
                       printing_time, serpentine_plan)
from .raster_io import (BinaryRaster, PhysicalScale, PixelPoint, load_pbm, printable_set,
                        to_physical, write_pbm)
from .simulate import SimConfig, SimOutcome, proximity_events, render_frame, simulate

__version__ = "0.1.0"
