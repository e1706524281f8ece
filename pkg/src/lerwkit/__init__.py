"""Loop-erased random walk simulation and discrete potential theory on
planar lattices: exact dyadic geometry, reproducible walk sampling,
Wilson's algorithm, the discrete harmonic potential, two-scale hybrid
graphs, and a square-to-disk conformal map for hitting-probability
verification."""

from .errors import (InvalidInputError, LerwkitError, NoTransitionError,
                     PrecisionError, SingularPointError, SingularSystemError,
                     StepBudgetError, TableRangeError)
from .geometry import (Difference, Disk, FinitePointSet, PlanePoint, Polygon,
                       Rectangle, Region, Union, open_square)
from .graph import (EmbeddedWeightedGraph, LatticePath, SimplePath,
                    graph_boundary, graph_laplacian, loop_erase,
                    nearest_vertex, rect_lattice)
from .rng import RngStream
from .walk import (MCEstimate, StopRule, estimate_hit, exit_histogram,
                   merge_estimates, run_walk, step_distribution)
from .potential import PotentialTable, potential, potential_half, shared_table
from .solver import (DirichletProblem, GreenFunction, green_function,
                     harmonic_measure, hitting_from_green, solve_dirichlet,
                     spanning_tree_count)
from .hybrid import (BETA_CONFIGS, BETA_EXPECTED, CellSet, FiniteCells,
                     HybridGraph, LambdaCells, annihilation_order, b_v_eval,
                     beta_table, build_hybrid, classify_seams)
from .conformal import (RecenteredMap, SquareDiskMap, structure_constant,
                        verify_hit_formula)
from .lerw import (QuasiLoopReport, SpanningTree, detect_quasi_loops,
                   h_transform_graph, quasi_loop_census,
                   sample_conditioned_lerw, total_variation, wilson_ust)
from .experiments import (ConvergenceRow, RhoDiagnostics,
                          convergence_experiment, interpolation_sweep,
                          puncture_demo, rho_diagnostics)

__all__ = [n for n in dir() if not n.startswith("_")]
__version__ = "0.1.0"
