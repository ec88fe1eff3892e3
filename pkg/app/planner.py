"""
Receding-horizon random-shooting planner.

At step t the planner draws N action sequences of length K uniformly from the
action box, predicts each with the world model, appends the prediction to the
trace observed so far and scores the whole thing from index 0. The violation
cost is max(0, -score); the first action of the cheapest sequence is applied
and the loop repeats from the new observation.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Protocol, Sequence, Union

import numpy as np
from loguru import logger

from .config import settings
from .core import Embedding, Trace
from .exceptions import InvalidInputError
from .logic import Formula, is_extension_monotone
from .schemas import EpisodeResult, PlanConfig
from .semantics import ScoreContext, score, score_batch
from .worldmodel import WorldModel


class Environment(Protocol):
    def observe(self) -> Embedding:
        ...

    def apply(self, action: np.ndarray) -> None:
        ...


@dataclass(frozen=True)
class PlanDecision:
    action: np.ndarray
    index: int
    cost: float
    score: float


def violation(value: float) -> float:
    return max(0.0, -float(value))


def cost(f: Formula, trace: Trace) -> float:
    """J(f, trace) = max(0, -score over [0, len - 1])."""
    if len(trace) == 0:
        raise InvalidInputError("cost needs a non-empty trace")
    return violation(score(f, ScoreContext.full(trace)))


def sample_sequences(model: WorldModel, cfg: PlanConfig, step: int) -> np.ndarray:
    rng = np.random.default_rng([cfg.seed, step])
    return rng.uniform(-model.a_max, model.a_max, size=(cfg.samples, cfg.horizon, model.action_dim))


def _candidate_scores(
    model: WorldModel,
    observed: Trace,
    actions_so_far: Sequence,
    f: Formula,
    sequences: np.ndarray,
) -> np.ndarray:
    past = observed.as_array()
    predicted = model.rollout_batch(observed, actions_so_far, sequences)
    history = np.broadcast_to(past, (len(sequences),) + past.shape)
    return score_batch(f, np.concatenate([history, predicted], axis=1), item_ndim=past.ndim - 1)


def evaluate_candidates(
    model: WorldModel,
    observed: Trace,
    actions_so_far: Sequence,
    f: Formula,
    sequences: np.ndarray,
    workers: int = 1,
) -> np.ndarray:
    """Predictive-trace scores of every candidate, in candidate order."""
    if workers <= 1 or len(sequences) < 2:
        return _candidate_scores(model, observed, actions_so_far, f, sequences)
    chunks = np.array_split(sequences, min(workers, len(sequences)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda chunk: _candidate_scores(model, observed, actions_so_far, f, chunk), chunks))
    return np.concatenate(parts)


def choose_candidate(
    model: WorldModel,
    observed: Trace,
    actions_so_far: Sequence,
    f: Formula,
    cfg: PlanConfig,
    step: Optional[int] = None,
) -> PlanDecision:
    if len(observed) == 0:
        raise InvalidInputError("planning needs at least one observed embedding")
    step = len(actions_so_far) if step is None else step
    sequences = sample_sequences(model, cfg, step)
    workers = max(cfg.workers, settings.planner_workers)
    scores = evaluate_candidates(model, observed, actions_so_far, f, sequences, workers)
    costs = np.maximum(0.0, -scores)

    # lowest cost, then highest score, then lowest index
    order = np.lexsort((np.arange(len(scores)), -scores, costs))
    best = int(order[0])
    decision = PlanDecision(
        action=np.array(sequences[best, 0]),
        index=best,
        cost=float(costs[best]),
        score=float(scores[best]),
    )
    logger.debug("step {}: candidate {} cost={:.6g} score={:.6g}", step, best, decision.cost, decision.score)
    return decision


def plan_step(
    model: WorldModel,
    observed: Trace,
    actions_so_far: Sequence,
    f: Formula,
    cfg: PlanConfig,
) -> np.ndarray:
    return choose_candidate(model, observed, actions_so_far, f, cfg).action


def run_receding_horizon(
    env: Environment,
    model: WorldModel,
    f: Formula,
    cfg: PlanConfig,
    timings: Optional[List[float]] = None,
) -> EpisodeResult:
    observed = Trace((env.observe(),))
    actions: List[np.ndarray] = []
    costs: List[float] = []
    scores = [score(f, ScoreContext.full(observed))]
    track_states = hasattr(env, "state")
    states = [np.array(env.state, dtype=float).tolist()] if track_states else []
    stop_when_satisfied = cfg.early_stop and is_extension_monotone(f)

    for t in range(cfg.max_steps):
        if stop_when_satisfied and scores[-1] > 0:
            logger.debug("score {:.6g} > 0 after {} steps, stopping early", scores[-1], t)
            break
        started = time.perf_counter()
        decision = choose_candidate(model, observed, actions, f, cfg, step=t)
        env.apply(decision.action)
        observed = observed.extend([env.observe()])
        actions.append(decision.action)
        costs.append(decision.cost)
        scores.append(score(f, ScoreContext.full(observed)))
        if track_states:
            states.append(np.array(env.state, dtype=float).tolist())
        if timings is not None:
            timings.append(time.perf_counter() - started)

    final = scores[-1]
    logger.info("episode finished after {} steps, final score {:.6g}", len(actions), final)
    return EpisodeResult(
        actions=[a.tolist() for a in actions],
        trace=[item.data.tolist() for item in observed],
        costs=costs,
        scores=scores,
        states=states,
        final_score=final,
        satisfied=final > 0,
    )


def episode_rows(result: EpisodeResult) -> np.ndarray:
    """One row per applied action: step, score after it, chosen cost, action components."""
    rows = [
        [step, result.scores[step + 1], result.costs[step], *action]
        for step, action in enumerate(result.actions)
    ]
    width = 3 + (len(result.actions[0]) if result.actions else 2)
    return np.array(rows, dtype=float).reshape(-1, width)


def to_csv(result: EpisodeResult, path: Union[str, Path]) -> Path:
    rows = episode_rows(result)
    header = ",".join(["step", "score", "cost"] + [f"a{i}" for i in range(rows.shape[1] - 3)])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, rows, delimiter=",", header=header, comments="", fmt="%.17g")
    return path
