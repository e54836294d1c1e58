"""Neural crossover operator trained with an actor-critic policy gradient.

The actor maps two concatenated parent placement vectors to per-component
Bernoulli probabilities for the child; a critic head on the shared body
provides the baseline.  Everything is plain numpy with a hand-rolled Adam
update so runs are bitwise reproducible from a single seeded generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

HIDDEN = 128
N_LAYERS = 3
DEFAULT_TRAIN_ITERATIONS = 1000
DEFAULT_TRAIN_BATCH = 8


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -30.0, 30.0)))


class Adam:
    """Textbook Adam optimizer over a dict of numpy parameter arrays."""

    def __init__(self, params: dict[str, np.ndarray], lr: float = 1e-3):
        self.lr = lr
        self.beta1, self.beta2, self.eps = 0.9, 0.999, 1e-8
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        b1t = 1.0 - self.beta1**self.t
        b2t = 1.0 - self.beta2**self.t
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1 - self.beta2) * g * g
            params[k] -= self.lr * (self.m[k] / b1t) / (np.sqrt(self.v[k] / b2t) + self.eps)


@dataclass
class CrossoverAgent:
    """Policy over child placements given two parents.

    Shared body of three rectified-linear layers; a logistic actor head with
    one output per component and a scalar critic head.  Output layers start
    at zero so the untrained policy is exactly uniform (p = 0.5).
    """

    n_components: int
    params: dict[str, np.ndarray] = field(default_factory=dict)

    @staticmethod
    def create(n_components: int, rng: np.random.Generator) -> "CrossoverAgent":
        params: dict[str, np.ndarray] = {}
        sizes = [2 * n_components] + [HIDDEN] * N_LAYERS
        for layer in range(N_LAYERS):
            fan_in = sizes[layer]
            params[f"W{layer}"] = rng.normal(
                0.0, np.sqrt(2.0 / fan_in), size=(fan_in, sizes[layer + 1])
            )
            params[f"b{layer}"] = np.zeros(sizes[layer + 1])
        # zero heads: uniform initial policy, zero initial value
        params["Wa"] = np.zeros((HIDDEN, n_components))
        params["ba"] = np.zeros(n_components)
        params["Wc"] = np.zeros((HIDDEN, 1))
        params["bc"] = np.zeros(1)
        return CrossoverAgent(n_components, params)

    def _body(self, x: np.ndarray) -> list[np.ndarray]:
        """Activations per layer; x has shape (batch, 2n)."""
        acts = [x]
        h = x
        for layer in range(N_LAYERS):
            h = np.maximum(h @ self.params[f"W{layer}"] + self.params[f"b{layer}"], 0.0)
            acts.append(h)
        return acts

    def probabilities(self, x: np.ndarray) -> np.ndarray:
        h = self._body(np.atleast_2d(x))[-1]
        return _sigmoid(h @ self.params["Wa"] + self.params["ba"])

    def value(self, x: np.ndarray) -> np.ndarray:
        h = self._body(np.atleast_2d(x))[-1]
        return (h @ self.params["Wc"] + self.params["bc"])[:, 0]

    def sample_child(
        self,
        parent_a: Sequence[int],
        parent_b: Sequence[int],
        rng: np.random.Generator,
    ) -> tuple[int, ...]:
        x = np.concatenate([np.asarray(parent_a, float), np.asarray(parent_b, float)])
        probs = self.probabilities(x)[0]
        bits = (rng.random(self.n_components) < probs).astype(int)
        return tuple(int(b) for b in bits)

    def copy(self) -> "CrossoverAgent":
        return CrossoverAgent(self.n_components, {k: v.copy() for k, v in self.params.items()})

    def finite(self) -> bool:
        return all(np.isfinite(v).all() for v in self.params.values())


@dataclass(frozen=True)
class TrainingResult:
    agent: CrossoverAgent
    reward_curve: tuple[float, ...]  # mean reward per iteration
    aborted: bool  # True when training hit divergence or ran out of budget


class BudgetExhausted(Exception):
    """Raised by a reward function when the evaluation budget is spent."""


def train_agent(
    dataset: Sequence[tuple[tuple[int, ...], tuple[int, ...]]],
    reward_fn: Callable[[tuple[int, ...], tuple[int, ...], tuple[int, ...]], int],
    n_components: int,
    rng: np.random.Generator,
    iterations: int = DEFAULT_TRAIN_ITERATIONS,
    batch_size: int = DEFAULT_TRAIN_BATCH,
    learning_rate: float = 1e-3,
    free_mask: Optional[Sequence[bool]] = None,
    pin_bits: Optional[Sequence[int]] = None,
) -> TrainingResult:
    """Policy-gradient training over parent pairs from the warm-up dataset.

    ``reward_fn(child, parent_a, parent_b)`` scores one sampled child; it may
    raise BudgetExhausted to stop training early.  Pinned components (where
    ``free_mask`` is False) are forced to ``pin_bits`` and excluded from the
    gradient.
    """
    if not dataset:
        raise ValueError("training dataset is empty")
    agent = CrossoverAgent.create(n_components, rng)
    optimizer = Adam(agent.params, lr=learning_rate)
    free = (
        np.asarray(free_mask, bool) if free_mask is not None else np.ones(n_components, bool)
    )
    pins = np.asarray(pin_bits, int) if pin_bits is not None else np.zeros(n_components, int)
    checkpoint = agent.copy()
    curve: list[float] = []
    aborted = False

    for _ in range(iterations):
        idx = rng.integers(0, len(dataset), size=batch_size)
        x = np.empty((batch_size, 2 * n_components))
        pa_list, pb_list = [], []
        for row, k in enumerate(idx):
            pa, pb = dataset[int(k)]
            pa_list.append(pa)
            pb_list.append(pb)
            x[row] = np.concatenate([np.asarray(pa, float), np.asarray(pb, float)])

        acts = agent._body(x)
        h = acts[-1]
        logits = h @ agent.params["Wa"] + agent.params["ba"]
        probs = _sigmoid(logits)
        values = (h @ agent.params["Wc"] + agent.params["bc"])[:, 0]

        actions = (rng.random(probs.shape) < probs).astype(int)
        actions[:, ~free] = pins[~free]

        rewards = np.empty(batch_size)
        try:
            for row in range(batch_size):
                child = tuple(int(b) for b in actions[row])
                rewards[row] = reward_fn(child, pa_list[row], pb_list[row])
        except BudgetExhausted:
            aborted = True
            break

        mean_reward = float(rewards.mean())
        if not np.isfinite(mean_reward) or not agent.finite():
            agent = checkpoint
            aborted = True
            break
        curve.append(mean_reward)
        checkpoint = agent.copy()

        advantage = rewards - values
        # d/dlogits of -adv*logpi: -(adv) * (action - p); pinned columns excluded
        g_logits = -(advantage[:, None] * (actions - probs)) / batch_size
        g_logits[:, ~free] = 0.0
        g_value = ((values - rewards) / batch_size)[:, None]

        grads = {
            "Wa": h.T @ g_logits,
            "ba": g_logits.sum(axis=0),
            "Wc": h.T @ g_value,
            "bc": g_value.sum(axis=0),
        }
        g_h = g_logits @ agent.params["Wa"].T + g_value @ agent.params["Wc"].T
        for layer in reversed(range(N_LAYERS)):
            g_pre = g_h * (acts[layer + 1] > 0)
            grads[f"W{layer}"] = acts[layer].T @ g_pre
            grads[f"b{layer}"] = g_pre.sum(axis=0)
            g_h = g_pre @ agent.params[f"W{layer}"].T
        optimizer.step(agent.params, grads)

    if not agent.finite():
        agent = checkpoint
        aborted = True
    return TrainingResult(agent=agent, reward_curve=tuple(curve), aborted=aborted)
