"""Caregiver-to-patient assignment balancing efficiency, equity and efficacy."""
from .exact import (
    NoIncumbentError,
    OptimalSolution,
    SolveLimits,
    SolveStatus,
    all_optima,
    enumerate_all,
    solve_exact,
    upper_bound,
)
from .greedy import GreedyState, greedy_construct, greedy_subproblem, solve_unit_knapsack
from .instance_io import (
    GeneratorParams,
    generate,
    load_instance,
    load_solution,
    save_instance,
    save_solution,
)
from .model import (
    Assignment,
    FeasibilityReport,
    Instance,
    InstanceError,
    PenaltyWeights,
    SolutionMetrics,
    check_feasibility,
    compute_metrics,
    evaluate_objective,
    fill_rates,
    utilizations,
)
from .reduction import (
    KnapsackInstance,
    extract_knapsack_solution,
    knapsack_to_assignment,
    solve_knapsack_bruteforce,
)
from .tabu import TabuParams, neighborhood, tabu_improve

__version__ = "0.1.0"
