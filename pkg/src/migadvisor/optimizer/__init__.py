"""Multi-objective plan search: NSGA-II selection with a learned crossover."""

from .agent import BudgetExhausted, CrossoverAgent, TrainingResult, train_agent
from .ga import AGENT, UNIFORM, GAConfig, GAResult, init_population, reward, run_ga
from .nsga import (
    ScoredPlan,
    binary_tournament,
    crowding_distance,
    dominates,
    environmental_selection,
    hypervolume,
    non_dominated_sort,
    pareto_front,
    rank_population,
    reference_point,
)

__all__ = [
    "AGENT",
    "UNIFORM",
    "BudgetExhausted",
    "CrossoverAgent",
    "GAConfig",
    "GAResult",
    "ScoredPlan",
    "TrainingResult",
    "binary_tournament",
    "crowding_distance",
    "dominates",
    "environmental_selection",
    "hypervolume",
    "init_population",
    "non_dominated_sort",
    "pareto_front",
    "rank_population",
    "reference_point",
    "reward",
    "run_ga",
    "train_agent",
]
