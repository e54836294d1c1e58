"""Genetic search over migration plans with a learned crossover operator.

The loop is standard NSGA-II (tournament selection, elitist truncation) with
two crossover modes: plain uniform crossover, and a neural operator trained
on parent pairs harvested during the warm-up generations.  An evaluation
budget caps the number of distinct plans scored; repeated visits to a plan
hit the cache and are free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..plans import MigrationPlan
from ..quality import EvaluationContext
from .agent import (
    DEFAULT_TRAIN_BATCH,
    DEFAULT_TRAIN_ITERATIONS,
    BudgetExhausted,
    CrossoverAgent,
    TrainingResult,
    train_agent,
)
from .nsga import (
    ScoredPlan,
    binary_tournament,
    environmental_selection,
    pareto_front,
    rank_population,
)

AGENT = "agent"
UNIFORM = "uniform"


@dataclass(frozen=True)
class GAConfig:
    population: int = 100
    eval_budget: int = 10000
    crossover: str = AGENT  # "agent" or "uniform"
    warmup_generations: int = 10
    train_iterations: int = DEFAULT_TRAIN_ITERATIONS
    train_batch: int = DEFAULT_TRAIN_BATCH
    learning_rate: float = 1e-3
    mutation_rate: Optional[float] = None  # uniform mode only; default 1/n
    penalize_infeasible: bool = False
    max_generations: Optional[int] = None
    stagnation_limit: int = 10  # stop after this many generations with no new plans
    polish_fraction: float = 0.25  # budget share reserved for final local refinement

    def __post_init__(self) -> None:
        if self.population < 4:
            raise ValueError("population must be at least 4")
        if self.crossover not in (AGENT, UNIFORM):
            raise ValueError(f"unknown crossover mode {self.crossover!r}")

    def to_dict(self) -> dict:
        return {
            "population": self.population,
            "eval_budget": self.eval_budget,
            "crossover": self.crossover,
            "warmup_generations": self.warmup_generations,
            "train_iterations": self.train_iterations,
            "train_batch": self.train_batch,
            "learning_rate": self.learning_rate,
            "mutation_rate": self.mutation_rate,
            "penalize_infeasible": self.penalize_infeasible,
        }


@dataclass(frozen=True)
class GAResult:
    front: tuple[ScoredPlan, ...]
    evaluations: int
    generations: int
    reward_curve: tuple[float, ...]
    training_aborted: bool
    agent: Optional[CrossoverAgent]

    def front_points(self) -> list[tuple[float, float, float]]:
        return [sp.objectives for sp in self.front]


class _BudgetScorer:
    """Scores plans through the context, charging only first-time visits."""

    def __init__(self, context: EvaluationContext, budget: int):
        self.context = context
        self.budget = budget
        self.evaluations = 0
        self.archive: dict = {}

    def score(self, plan: MigrationPlan) -> ScoredPlan:
        key = plan.key()
        if key in self.archive:
            return self.archive[key]
        if self.evaluations >= self.budget:
            raise BudgetExhausted
        quality, feasibility = self.context.evaluate(plan)
        self.evaluations += 1
        sp = ScoredPlan(plan, quality, feasibility)
        self.archive[key] = sp
        return sp


def reward(
    child: ScoredPlan,
    parent_a: ScoredPlan,
    parent_b: ScoredPlan,
    penalize_infeasible: bool = False,
) -> int:
    """Improvement count over the better parent per objective, sign-flipped
    when the child is infeasible."""
    improvements = 0
    for c, a, b in zip(child.objectives, parent_a.objectives, parent_b.objectives):
        if min(a, b) > c:
            improvements += 1
    if child.feasible:
        return improvements
    if improvements == 0 and penalize_infeasible:
        return -1
    return -improvements


def init_population(
    context: EvaluationContext,
    size: int,
    rng: np.random.Generator,
    max_tries: int = 200,
) -> list[MigrationPlan]:
    """Distinct random plans honoring placement pins."""
    order = context.component_order
    free, pins = _pin_arrays(context, order)
    if not free.any():
        import warnings

        warnings.warn("all components pinned; population is degenerate")
    plans: dict = {}
    tries = 0
    while len(plans) < size and tries < size * max_tries:
        bits = (rng.random(len(order)) < 0.5).astype(int)
        bits[~free] = pins[~free]
        plan = MigrationPlan.from_bits(order, bits)
        plans.setdefault(plan.key(), plan)
        tries += 1
    result = list(plans.values())
    if not result:
        raise ValueError("could not build any plan")
    k = 0
    while len(result) < size:  # tiny or fully pinned spaces: allow repeats
        result.append(result[k % len(plans)])
        k += 1
    return result[:size]


def _pin_arrays(
    context: EvaluationContext, order: Sequence[str]
) -> tuple[np.ndarray, np.ndarray]:
    pins_map = context.prefs.placement_pins
    free = np.array([c not in pins_map for c in order], dtype=bool)
    pins = np.array(
        [1 if pins_map.get(c) == "cloud" else 0 for c in order], dtype=int
    )
    return free, pins


def _uniform_child(
    pa: tuple[int, ...],
    pb: tuple[int, ...],
    rng: np.random.Generator,
    mutation_rate: float,
) -> tuple[int, ...]:
    n = len(pa)
    pick = rng.random(n) < 0.5
    bits = np.where(pick, np.asarray(pa), np.asarray(pb))
    flip = rng.random(n) < mutation_rate
    bits = np.where(flip, 1 - bits, bits)
    return tuple(int(b) for b in bits)


def _polish_front(
    scorer: _BudgetScorer,
    order: Sequence[str],
    free: np.ndarray,
    depth: int = 2,
) -> None:
    """Pareto local search around the current front within leftover budget.

    Scores all neighbors of front plans up to ``depth`` bit flips; plans that
    a neighbor dominates drop off the front, and better neighbors join the
    archive.  Repeats until the front is locally stable or the budget runs
    out.
    """
    from itertools import combinations

    free_idx = [k for k in range(len(order)) if free[k]]
    flip_sets = [
        flips for d in range(1, depth + 1) for flips in combinations(free_idx, d)
    ]
    try:
        while True:
            feasible = [sp for sp in scorer.archive.values() if sp.feasible]
            if not feasible:
                return
            before = scorer.evaluations
            for sp in pareto_front(feasible):
                bits = np.asarray(sp.plan.as_bits(order))
                for flips in flip_sets:
                    neighbor = bits.copy()
                    for k in flips:
                        neighbor[k] = 1 - neighbor[k]
                    scorer.score(MigrationPlan.from_bits(order, neighbor))
            if scorer.evaluations == before:
                return
    except BudgetExhausted:
        return


def run_ga(
    context: EvaluationContext,
    config: GAConfig,
    rng: np.random.Generator,
) -> GAResult:
    """Full search: warm-up, optional agent training, NSGA-II loop."""
    order = context.component_order
    n = len(order)
    free, pins = _pin_arrays(context, order)
    mutation_rate = config.mutation_rate if config.mutation_rate is not None else 1.0 / n
    scorer = _BudgetScorer(context, config.eval_budget)
    # hold back part of the budget for the final refinement pass
    reserve = int(config.polish_fraction * config.eval_budget)
    scorer.budget = max(config.eval_budget - reserve, config.population)

    population: list[ScoredPlan] = []
    try:
        for plan in init_population(context, config.population, rng):
            population.append(scorer.score(plan))
    except BudgetExhausted:
        pass
    if not population:
        return GAResult((), scorer.evaluations, 0, (), False, None)

    max_gens = (
        config.max_generations
        if config.max_generations is not None
        else max(10 * config.eval_budget // config.population, 200)
    )
    dataset: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    agent: Optional[CrossoverAgent] = None
    training: Optional[TrainingResult] = None
    generation = 0
    stagnant = 0

    def reward_fn(child_bits, pa_bits, pb_bits) -> int:
        child = scorer.score(MigrationPlan.from_bits(order, child_bits))
        pa = scorer.archive[MigrationPlan.from_bits(order, pa_bits).key()]
        pb = scorer.archive[MigrationPlan.from_bits(order, pb_bits).key()]
        return reward(child, pa, pb, config.penalize_infeasible)

    while generation < max_gens and scorer.evaluations < scorer.budget:
        in_warmup = generation < config.warmup_generations
        if (
            config.crossover == AGENT
            and agent is None
            and not in_warmup
            and dataset
        ):
            training = train_agent(
                dataset,
                reward_fn,
                n,
                rng,
                iterations=config.train_iterations,
                batch_size=config.train_batch,
                learning_rate=config.learning_rate,
                free_mask=free,
                pin_bits=pins,
            )
            agent = training.agent
            if scorer.evaluations >= scorer.budget:
                break

        ranks, dists = rank_population(population)
        children: list[ScoredPlan] = []
        seen_before = scorer.evaluations
        try:
            for _ in range(config.population):
                i = binary_tournament(rng, ranks, dists)
                j = binary_tournament(rng, ranks, dists)
                pa = population[i].plan.as_bits(order)
                pb = population[j].plan.as_bits(order)
                if in_warmup or agent is None:
                    bits = _uniform_child(pa, pb, rng, mutation_rate)
                    if in_warmup and config.crossover == AGENT:
                        dataset.append((pa, pb))
                else:
                    bits = np.asarray(agent.sample_child(pa, pb, rng))
                    bits[~free] = pins[~free]
                    bits = tuple(int(b) for b in bits)
                bits = np.asarray(bits)
                bits[~free] = pins[~free]
                children.append(scorer.score(MigrationPlan.from_bits(order, bits)))
        except BudgetExhausted:
            pass
        population = environmental_selection(population + children, config.population)
        generation += 1
        if scorer.evaluations == seen_before:
            stagnant += 1
            if stagnant >= config.stagnation_limit:
                break
        else:
            stagnant = 0

    scorer.budget = config.eval_budget
    _polish_front(scorer, order, free)
    feasible = [sp for sp in scorer.archive.values() if sp.feasible]
    front = tuple(pareto_front(feasible))
    return GAResult(
        front=front,
        evaluations=scorer.evaluations,
        generations=generation,
        reward_curve=training.reward_curve if training else (),
        training_aborted=training.aborted if training else False,
        agent=agent,
    )
