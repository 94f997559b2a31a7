"""Combined task allocation and multi-agent path finding on grid maps."""
from .baselines import (AssignmentPlan, cbs_solve, decoupled_assign, greedy_assign,
                        solve_decoupled, solve_greedy)
from .grid import Cell, GridMap, manhattan, neighbors, parse_map, true_distance
from .model import (Conflict, Problem, Solution, Task, detect_conflicts, implicit_assignment,
                    solution_cost, validate_solution)
from .oracle import brute_force_solve
from .scenario import ScenarioSpec, gen_scenario
from .search import NN2, OPTIMAL, BudgetExceeded, SolverConfig, solve
from .spacetime import Constraint, InfeasibleError, Path, pad_paths, plan_constrained

__all__ = [
    "AssignmentPlan", "BudgetExceeded", "Cell", "Conflict", "Constraint", "GridMap",
    "InfeasibleError", "NN2", "OPTIMAL", "Path", "Problem", "ScenarioSpec", "Solution",
    "SolverConfig", "Task", "brute_force_solve", "cbs_solve", "decoupled_assign",
    "detect_conflicts", "gen_scenario", "greedy_assign", "implicit_assignment", "manhattan",
    "neighbors", "pad_paths", "parse_map", "plan_constrained", "solution_cost", "solve",
    "solve_decoupled", "solve_greedy", "true_distance", "validate_solution",
]
