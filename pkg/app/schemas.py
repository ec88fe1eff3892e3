from pydantic import BaseModel, confloat, conint, constr, root_validator, validator
from typing import Any, Dict, List, Literal, Optional, Tuple

IDENT_REGEX = r"^[A-Za-z_][A-Za-z0-9_]*$"
METRIC_NAMES = ("l1", "l2", "cosine", "chamfer")


def _metric_name(value: str) -> str:
    value = str(value).strip().lower()
    if value not in METRIC_NAMES:
        raise ValueError(f"metric must be one of {', '.join(METRIC_NAMES)}")
    return value


# ---- embeddings and manifests ----

class EmbeddingIn(BaseModel):
    kind: str
    data: List[Any]

    def to_embedding(self):
        from .core import make_embedding

        return make_embedding(self.kind, self.data)


class ManifestTarget(BaseModel):
    file: str
    metric: str = "l2"
    threshold: Optional[confloat(ge=0)] = None
    role: Optional[str] = None

    _check_metric = validator("metric", allow_reuse=True)(_metric_name)


class ManifestFile(BaseModel):
    targets: Dict[constr(regex=IDENT_REGEX), ManifestTarget]


class InlineTarget(EmbeddingIn):
    metric: Optional[str] = None
    threshold: Optional[confloat(ge=0)] = None
    role: Optional[str] = None

    _check_metric = validator("metric", allow_reuse=True)(_metric_name)


# ---- world model / environment / planner configuration ----

class ModelConfig(BaseModel):
    model: Literal["point_mass", "drift"] = "point_mass"
    latent_dim: int = 16
    scale: float = 1.0
    a_max: float = 0.25
    seed: int = 7
    drift: Tuple[float, float] = (0.0, 0.0)


class Region(BaseModel):
    center: Tuple[float, float]
    radius: confloat(gt=0)


class EnvConfig(BaseModel):
    start: Tuple[float, float] = (1.0, 1.0)
    goals: Dict[constr(regex=IDENT_REGEX), Region] = {}
    avoid: Dict[constr(regex=IDENT_REGEX), Region] = {}

    @root_validator(skip_on_failure=True)
    def names_are_unique(cls, values):
        shared = set(values.get("goals", {})) & set(values.get("avoid", {}))
        if shared:
            raise ValueError(f"region names used as both goal and avoid: {sorted(shared)}")
        return values


class PlanConfig(BaseModel):
    horizon: conint(ge=1) = 8
    samples: conint(ge=1) = 512
    seed: int = 7
    max_steps: conint(ge=1) = 40
    bound_policy: Literal["fixed"] = "fixed"
    workers: conint(ge=1) = 1
    early_stop: bool = True


class EpisodeResult(BaseModel):
    actions: List[List[float]]
    trace: List[List[Any]]
    costs: List[float]
    scores: List[float]
    states: List[List[float]] = []
    final_score: float
    satisfied: bool

    @property
    def steps(self) -> int:
        return len(self.actions)


class ExperimentConfig(BaseModel):
    name: Optional[str] = None
    spec: Optional[str] = None
    spec_text: Optional[str] = None
    manifest: Optional[str] = None
    metric: str = "l2"
    env: EnvConfig = EnvConfig()
    model: ModelConfig = ModelConfig()
    plan: PlanConfig = PlanConfig()
    score_metrics: List[str] = []

    _check_metric = validator("metric", allow_reuse=True)(_metric_name)

    @validator("score_metrics", each_item=True)
    def known_score_metric(cls, value):
        return _metric_name(value)

    @root_validator(skip_on_failure=True)
    def one_spec_source(cls, values):
        if (values.get("spec") is None) == (values.get("spec_text") is None):
            raise ValueError("give exactly one of 'spec' (a built-in name) or 'spec_text'")
        return values


class Report(BaseModel):
    experiment: str
    spec_text: str
    metric: str
    satisfied: bool
    episode: EpisodeResult
    score_table: Dict[str, Optional[float]]
    goal_first_entry: Dict[str, Optional[int]]
    avoid_entered: Dict[str, bool]
    step_seconds: List[float]


class BenchmarkTable(BaseModel):
    specs: List[str]
    metrics: List[str]
    scores: Dict[str, Dict[str, float]]
    satisfied: Dict[str, Dict[str, bool]]


# ---- HTTP payloads ----

class MonitorRequest(BaseModel):
    spec: str
    targets: Dict[constr(regex=IDENT_REGEX), InlineTarget]
    trace: List[EmbeddingIn]
    start: conint(ge=0) = 0
    bound: Optional[conint(ge=0)] = None


class MonitorOut(BaseModel):
    sat: bool
    # null when the score is unbounded, e.g. for `true`
    score: Optional[float]
    window: Tuple[int, int]


class PrefixScoresOut(BaseModel):
    scores: List[Optional[float]]
    sat: List[bool]


class HeatmapRequest(BaseModel):
    embeddings: List[EmbeddingIn]
    metric: Optional[str] = None

    _check_metric = validator("metric", allow_reuse=True)(_metric_name)


class HeatmapOut(BaseModel):
    metric: str
    matrix: List[List[float]]


class SpecListing(BaseModel):
    name: str
    description: str
