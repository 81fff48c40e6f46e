"""Multilevel weighted Max-Cut with pluggable subproblem solvers."""
from .coarsening import (ContractionMap, Hierarchy, build_hierarchy, contract,
                         match_pairs, sparsify)
from .embedding import Embedding, embed, embedding_objective, nearest_unpaired
from .graph import (CutAssignment, Graph, InvalidInstanceError, MalformedInputError,
                    apply_flip, compute_gains, cut_value, load_graph)
from .pipeline import (RunConfig, RunReport, interpolate, multistart_refine,
                       refine_level, solve)
from .qaoa import (QaoaAngles, build_hamiltonian, evolve, expectation,
                   optimize_angles, solve_qaoa)
from .solvers import (CapacityError, SolverContractError, SolverRequest, SolverResult,
                      checked_solve, get_solver, solve_exact, solve_tabu)
from .subproblem import Subproblem, build_subproblem, merge_solution

__version__ = "0.1.0"
