"""
Desk-scale experiments on the point-mass world, distance heatmaps and the
benchmark table.

Rooms and obstacles are discs in the plane. A disc becomes a target by
encoding its center; its radius becomes the predicate threshold through
`threshold_for`, so thresholds stay physically meaningful.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import ValidationError

from .core import Embedding, EmbeddingKind, Trace, make_embedding
from .exceptions import (
    ConfigError,
    DimensionMismatchError,
    IncompatibleMetricError,
    InvalidInputError,
)
from .logic import (
    Formula,
    TargetRef,
    avoid,
    reach,
    reach_avoid,
    sequenced_visit,
    stability,
    visit_either,
)
from .metrics import DistanceMetric, check_compatible, distance
from .planner import run_receding_horizon
from .schemas import (
    BenchmarkTable,
    EnvConfig,
    ExperimentConfig,
    ModelConfig,
    PlanConfig,
    Region,
    Report,
)
from .semantics import ScoreContext, score
from .speclang import Manifest, load_manifest, parse_spec, pretty
from .utils import read_text
from .worldmodel import PointMassWorld, make_world_model

# every built-in scene sits away from the origin so cosine thresholds exist
START = (3.0, 3.0)

Bound = Dict[str, Tuple[TargetRef, float]]


class PointMassEnv:
    """Ground-truth point mass observed through a world model's encoder."""

    def __init__(self, model: PointMassWorld, start: Sequence[float]):
        self.model = model
        self._state = np.array(start, dtype=np.float64)

    @property
    def state(self) -> np.ndarray:
        return self._state.copy()

    def observe(self) -> Embedding:
        return self.model.encode(self._state)

    def apply(self, action) -> None:
        action = self.model.check_actions(action)
        self._state = self._state + action + self.model.drift


def threshold_for(metric: Union[str, DistanceMetric], center: Sequence[float], radius: float, scale: float) -> float:
    """Latent threshold equivalent to a physical disc for the given metric."""
    metric = DistanceMetric.parse(metric)
    if metric in (DistanceMetric.L1, DistanceMetric.L2):
        return float(radius * scale)
    if metric == DistanceMetric.COSINE:
        ratio = radius / float(np.linalg.norm(center))
        if not ratio < 1.0:
            raise ConfigError(f"disc at {tuple(center)} with radius {radius} contains the origin")
        # angular radius of the disc as seen from the origin
        return float(1.0 - np.sqrt(1.0 - ratio * ratio))
    raise ConfigError("region targets are vectors; chamfer needs patch sets")


def region_targets(model: PointMassWorld, env: EnvConfig, metric: Union[str, DistanceMetric]) -> Bound:
    bound = {}
    for role, regions in (("goal", env.goals), ("avoid", env.avoid)):
        for name, region in regions.items():
            target = TargetRef(name, model.encode(region.center), metric, role)
            bound[name] = (target, threshold_for(metric, region.center, region.radius, model.scale))
    return bound


# ---- built-in experiments ----

def _ring(center, radius: float, count: int, disc: float) -> Dict[str, Region]:
    angles = 2 * np.pi * np.arange(count) / count
    return {
        f"obstacle{i}": Region(center=(center[0] + radius * np.cos(a), center[1] + radius * np.sin(a)), radius=disc)
        for i, a in enumerate(angles)
    }


def _offset(dx: float, dy: float):
    return (START[0] + dx, START[1] + dy)


def _avoid_all(bound: Bound, env: EnvConfig) -> Formula:
    formula = None
    for name in env.avoid:
        term = avoid(*bound[name])
        formula = term if formula is None else formula & term
    return formula


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    env: EnvConfig
    build: Callable[[Bound, EnvConfig], Formula]
    model: ModelConfig = field(default_factory=ModelConfig)


EXPERIMENTS: Dict[str, Experiment] = {
    e.name: e
    for e in [
        Experiment(
            "phi1",
            "Reach a single room: F(goal)",
            EnvConfig(start=START, goals={"goal": Region(center=_offset(1.0, 0.0), radius=0.2)}),
            lambda b, env: reach(*b["goal"]),
        ),
        Experiment(
            "phi2",
            "Visit either of two rooms, one of them out of reach: F(near) | F(far)",
            EnvConfig(
                start=START,
                goals={
                    "near": Region(center=_offset(0.0, 1.0), radius=0.2),
                    "far": Region(center=_offset(20.0, 0.0), radius=0.2),
                },
            ),
            lambda b, env: visit_either(*b["near"], *b["far"]),
        ),
        Experiment(
            "phi3",
            "Visit two rooms in order: F(first & F(second))",
            EnvConfig(
                start=START,
                goals={
                    "first": Region(center=_offset(1.0, 0.0), radius=0.2),
                    "second": Region(center=_offset(1.0, 1.0), radius=0.2),
                },
            ),
            lambda b, env: sequenced_visit(*b["first"], *b["second"]),
        ),
        Experiment(
            "psi_reach",
            "Move the object to the goal: F(goal)",
            EnvConfig(start=START, goals={"goal": Region(center=_offset(0.0, 1.0), radius=0.2)}),
            lambda b, env: reach(*b["goal"]),
        ),
        Experiment(
            "psi_avoid",
            "Keep clear of a ring of obstacles: G(!obstacle_i) for all i",
            EnvConfig(start=START, avoid=_ring(START, 1.5, 8, 0.25)),
            _avoid_all,
        ),
        Experiment(
            "psi_reach_avoid",
            "Reach the goal through a gap between two obstacles",
            EnvConfig(
                start=START,
                goals={"goal": Region(center=_offset(1.5, 0.0), radius=0.2)},
                avoid={
                    "upper": Region(center=_offset(0.75, 0.6), radius=0.2),
                    "lower": Region(center=_offset(0.75, -0.6), radius=0.2),
                },
            ),
            lambda b, env: reach_avoid(*b["goal"], [b[name] for name in env.avoid]),
        ),
        Experiment(
            "stability",
            "Reach the goal and stay there: F G(goal)",
            EnvConfig(start=START, goals={"goal": Region(center=_offset(0.5, 0.5), radius=0.3)}),
            lambda b, env: stability(*b["goal"]),
        ),
        Experiment(
            "psi_avoid_drift",
            "Hold position against a constant drift toward an obstacle",
            EnvConfig(start=START, avoid={"obstacle": Region(center=_offset(1.0, 0.0), radius=0.25)}),
            _avoid_all,
            ModelConfig(model="drift", drift=(0.05, 0.0)),
        ),
    ]
}


def experiment_config(name: str, metric: str = "l2", **overrides) -> ExperimentConfig:
    """Default configuration of a built-in experiment."""
    try:
        experiment = EXPERIMENTS[name]
    except KeyError:
        raise ConfigError(f"unknown experiment '{name}', expected one of {sorted(EXPERIMENTS)}")
    values = {"name": name, "spec": name, "metric": metric, "env": experiment.env, "model": experiment.model}
    values.update(overrides)
    try:
        return ExperimentConfig(**values)
    except ValidationError as exc:
        raise ConfigError(f"invalid settings for experiment '{name}': {exc}")


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(read_text(path))
        cfg = ExperimentConfig.parse_obj(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}")
    except ValidationError as exc:
        raise ConfigError(f"{path} is not a valid experiment config: {exc}")
    if cfg.manifest and not Path(cfg.manifest).is_absolute():
        cfg = cfg.copy(update={"manifest": str(path.parent / cfg.manifest)})
    return cfg


def build_formula(cfg: ExperimentConfig, model: PointMassWorld, metric: Union[str, DistanceMetric]) -> Formula:
    if cfg.spec is not None:
        if cfg.spec not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment '{cfg.spec}', expected one of {sorted(EXPERIMENTS)}")
        return EXPERIMENTS[cfg.spec].build(region_targets(model, cfg.env, metric), cfg.env)

    if cfg.manifest:
        manifest = load_manifest(cfg.manifest)
    else:
        bound = region_targets(model, cfg.env, metric)
        manifest = Manifest.from_targets(
            [target for target, _ in bound.values()],
            {name: eps for name, (_, eps) in bound.items()},
        )
    return parse_spec(cfg.spec_text, manifest)


def _decoded_trace(rows: List[list]) -> Trace:
    return Trace(tuple(make_embedding(EmbeddingKind.VECTOR, row) for row in rows))


def _first_entries(states: np.ndarray, regions: Dict[str, Region]) -> Dict[str, Optional[int]]:
    entries = {}
    for name, region in regions.items():
        inside = np.flatnonzero(np.linalg.norm(states - np.array(region.center), axis=1) < region.radius)
        entries[name] = int(inside[0]) if inside.size else None
    return entries


def _entered(states: np.ndarray, regions: Dict[str, Region]) -> Dict[str, bool]:
    return {
        name: bool(np.any(np.linalg.norm(states - np.array(region.center), axis=1) <= region.radius))
        for name, region in regions.items()
    }


def run_experiment(cfg: ExperimentConfig) -> Report:
    model = make_world_model(cfg.model)
    try:
        formula = build_formula(cfg, model, cfg.metric)
    except IncompatibleMetricError as exc:
        raise ConfigError(f"metric {cfg.metric} cannot be used here: {exc.message}")

    name = cfg.name or cfg.spec or "custom"
    logger.info("running experiment {} with metric {}", name, cfg.metric)
    env = PointMassEnv(model, cfg.env.start)
    timings: List[float] = []
    episode = run_receding_horizon(env, model, formula, cfg.plan, timings)

    trace = _decoded_trace(episode.trace)
    score_table: Dict[str, Optional[float]] = {}
    for metric in cfg.score_metrics or [cfg.metric]:
        if cfg.manifest and metric != cfg.metric:
            score_table[metric] = None
            continue
        try:
            score_table[metric] = score(build_formula(cfg, model, metric), ScoreContext.full(trace))
        except (ConfigError, IncompatibleMetricError) as exc:
            logger.debug("no {} score for {}: {}", metric, name, exc.message)
            score_table[metric] = None

    states = np.array(episode.states)
    report = Report(
        experiment=name,
        spec_text=cfg.spec_text if cfg.spec_text is not None else pretty(formula),
        metric=cfg.metric,
        satisfied=episode.satisfied,
        episode=episode,
        score_table=score_table,
        goal_first_entry=_first_entries(states, cfg.env.goals),
        avoid_entered=_entered(states, cfg.env.avoid),
        step_seconds=timings,
    )
    logger.info("{}: satisfied={} final score {:.6g}", name, report.satisfied, episode.final_score)
    return report


def run_benchmark(
    names: Optional[Sequence[str]] = None,
    metrics: Sequence[str] = ("l1", "l2", "cosine"),
    plan: Optional[PlanConfig] = None,
) -> BenchmarkTable:
    """Final score of every (experiment, metric) pair, each metric planned separately."""
    names = list(names or EXPERIMENTS)
    metrics = [DistanceMetric.parse(m).value for m in metrics]
    scores: Dict[str, Dict[str, float]] = {}
    satisfied: Dict[str, Dict[str, bool]] = {}
    for name in names:
        scores[name], satisfied[name] = {}, {}
        for metric in metrics:
            overrides = {"plan": plan} if plan is not None else {}
            try:
                report = run_experiment(experiment_config(name, metric, **overrides))
            except ConfigError as exc:
                logger.warning("skipping {} under {}: {}", name, metric, exc.message)
                continue
            scores[name][metric] = report.episode.final_score
            satisfied[name][metric] = report.satisfied
    return BenchmarkTable(specs=names, metrics=metrics, scores=scores, satisfied=satisfied)


# ---- heatmaps ----

def heatmap(embeddings: Sequence[Embedding], metric: Union[str, DistanceMetric]) -> np.ndarray:
    """Symmetric pairwise distance matrix with a zero diagonal."""
    metric = DistanceMetric.parse(metric)
    if len(embeddings) < 2:
        raise InvalidInputError("a heatmap needs at least two embeddings")
    head = embeddings[0]
    for position, item in enumerate(embeddings):
        if item.kind != head.kind or item.shape != head.shape:
            raise DimensionMismatchError(f"embedding {position} is {item!r}, expected the shape of {head!r}")
    check_compatible(metric, head)

    count = len(embeddings)
    matrix = np.zeros((count, count))
    for i in range(count):
        for j in range(i + 1, count):
            matrix[i, j] = matrix[j, i] = distance(metric, embeddings[i], embeddings[j])
    return matrix


def write_heatmap_csv(matrix: np.ndarray, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, matrix, delimiter=",", fmt="%.17g")
    return path


def synthetic_embeddings(model: PointMassWorld, count: int = 8, patches: int = 0, seed: int = 0) -> List[Embedding]:
    """
    `count` views split between two well separated clusters.

    With `patches > 0` each view is a patch set: the encodings of `patches`
    points jittered around the view's position, usable with chamfer.
    """
    rng = np.random.default_rng(seed)
    centers = np.array([[2.0, 1.0], [-1.0, 3.0]])
    views = []
    for index in range(count):
        position = centers[index % 2] + rng.normal(scale=0.1, size=2)
        if patches:
            points = position + rng.normal(scale=0.05, size=(patches, 2))
            views.append(make_embedding(EmbeddingKind.PATCH_SET, model.encode_many(points).as_array()))
        else:
            views.append(model.encode(position))
    return views

