"""
World models: an observation model (encode), a transition model (step) and
an optional decoder, all deterministic.

PointMassWorld is exact rather than learned: a 2-D point mass observed
through a fixed linear encoder E (d x 2, orthogonal columns of norm s), so
latent L2 distances are physical distances times s and latent dynamics are
linear, z_{t+1} = z_t + E a_t.
"""

from abc import ABC, abstractmethod
from typing import Sequence, Union

import numpy as np
from loguru import logger

from .core import Embedding, EmbeddingKind, Trace, make_embedding, trace_from_array
from .exceptions import (
    ActionOutOfBoundsError,
    DimensionMismatchError,
    InsufficientHistoryError,
    InvalidDimensionError,
    InvalidInputError,
    NonFiniteInputError,
)

ACTION_TOLERANCE = 1e-12

ActionLike = Union[Sequence[float], np.ndarray]


class WorldModel(ABC):
    """Interface every model the planner can roll out implements."""

    context_horizon: int = 1

    @property
    @abstractmethod
    def action_dim(self) -> int:
        ...

    @property
    @abstractmethod
    def latent_dim(self) -> int:
        ...

    @property
    @abstractmethod
    def a_max(self) -> float:
        ...

    @abstractmethod
    def encode(self, observation) -> Embedding:
        ...

    @abstractmethod
    def step(self, z_hist: Sequence[Embedding], a_hist: Sequence[ActionLike], action: ActionLike) -> Embedding:
        ...

    def decode(self, z: Embedding) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no decoder")

    def check_actions(self, actions) -> np.ndarray:
        actions = np.asarray(actions, dtype=np.float64)
        if actions.size and actions.shape[-1] != self.action_dim:
            raise DimensionMismatchError(
                f"actions must have {self.action_dim} components, got shape {actions.shape}"
            )
        if not np.all(np.isfinite(actions)):
            raise NonFiniteInputError("actions must be finite")
        if actions.size and np.max(np.abs(actions)) > self.a_max + ACTION_TOLERANCE:
            raise ActionOutOfBoundsError(f"action component outside [-{self.a_max}, {self.a_max}]")
        return actions

    def _check_history(self, z_hist: Trace) -> None:
        if len(z_hist) < self.context_horizon:
            raise InsufficientHistoryError(
                f"needs {self.context_horizon} past embeddings, got {len(z_hist)}"
            )

    def rollout(self, z_hist: Trace, a_hist: Sequence[ActionLike], a_future: Sequence[ActionLike]) -> Trace:
        """Predict one embedding per future action, feeding predictions back as context."""
        self._check_history(z_hist)
        future = self.check_actions(a_future) if len(a_future) else []
        context = list(z_hist.items)
        actions = [np.asarray(a, dtype=np.float64) for a in a_hist]
        predicted = []
        for action in future:
            z_next = self.step(context[-self.context_horizon:], actions[-self.context_horizon:], action)
            predicted.append(z_next)
            context.append(z_next)
            actions.append(action)
        return Trace(tuple(predicted))

    def rollout_batch(self, z_hist: Trace, a_hist: Sequence[ActionLike], sequences: np.ndarray) -> np.ndarray:
        """Rollouts for a (N, K, action_dim) batch, returned as (N, K, *latent_shape)."""
        sequences = np.asarray(sequences, dtype=np.float64)
        return np.stack([self.rollout(z_hist, a_hist, seq).as_array() for seq in sequences])


class PointMassWorld(WorldModel):
    def __init__(self, encoder: np.ndarray, scale: float, a_max: float, seed: int):
        self.encoder = encoder
        self.scale = float(scale)
        self._a_max = float(a_max)
        self.seed = seed

    def __repr__(self):
        return f"{type(self).__name__}(d={self.latent_dim}, s={self.scale}, a_max={self.a_max}, seed={self.seed})"

    @property
    def action_dim(self) -> int:
        return 2

    @property
    def latent_dim(self) -> int:
        return int(self.encoder.shape[0])

    @property
    def a_max(self) -> float:
        return self._a_max

    @property
    def drift(self) -> np.ndarray:
        return np.zeros(2)

    def _lift(self, xy: np.ndarray) -> np.ndarray:
        # column-wise so every row is computed the same way at any batch size
        return xy[..., 0:1] * self.encoder[:, 0] + xy[..., 1:2] * self.encoder[:, 1]

    def encode(self, observation) -> Embedding:
        x = np.asarray(observation, dtype=np.float64)
        if x.shape != (2,):
            raise DimensionMismatchError(f"positions are 2-d, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise NonFiniteInputError("position must be finite")
        return make_embedding(EmbeddingKind.VECTOR, self._lift(x))

    def encode_many(self, positions) -> Trace:
        """Encode an (n, 2) array of positions as a trace of n latents."""
        x = np.asarray(positions, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != 2:
            raise DimensionMismatchError(f"positions are 2-d, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise NonFiniteInputError("positions must be finite")
        return trace_from_array(EmbeddingKind.VECTOR, self._lift(x))

    def decode(self, z: Embedding) -> np.ndarray:
        """Least-squares inverse E^T z / s^2."""
        if z.shape != (self.latent_dim,):
            raise DimensionMismatchError(f"expected a {self.latent_dim}-d latent, got {z!r}")
        return self.encoder.T @ z.data / (self.scale * self.scale)

    def step(self, z_hist, a_hist, action) -> Embedding:
        if len(z_hist) < self.context_horizon:
            raise InsufficientHistoryError("step needs the current latent")
        action = self.check_actions(action)
        z = z_hist[-1].data
        return make_embedding(EmbeddingKind.VECTOR, z + self._lift(action + self.drift))

    def rollout_batch(self, z_hist: Trace, a_hist, sequences) -> np.ndarray:
        self._check_history(z_hist)
        sequences = self.check_actions(sequences)
        if sequences.ndim != 3:
            raise DimensionMismatchError(f"expected (N, K, 2) action sequences, got shape {sequences.shape}")
        steps = self._lift(sequences + self.drift)
        return z_hist[-1].data + np.cumsum(steps, axis=1)

    def rollout(self, z_hist: Trace, a_hist, a_future) -> Trace:
        self._check_history(z_hist)
        if len(a_future) == 0:
            return Trace()
        latents = self.rollout_batch(z_hist, a_hist, np.asarray(a_future, dtype=np.float64)[None])[0]
        return trace_from_array(EmbeddingKind.VECTOR, latents)


class DriftWorld(PointMassWorld):
    """Point mass pushed by a constant bias b every step: z_{t+1} = z_t + E(a_t + b)."""

    def __init__(self, encoder, scale, a_max, seed, drift):
        super().__init__(encoder, scale, a_max, seed)
        drift = np.asarray(drift, dtype=np.float64)
        if drift.shape != (2,) or not np.all(np.isfinite(drift)):
            raise InvalidInputError("drift must be two finite numbers")
        self._drift = drift

    @property
    def drift(self) -> np.ndarray:
        return self._drift


def make_encoder(latent_dim: int, scale: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((latent_dim, 2)))
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    encoder = scale * (q * signs)
    encoder.setflags(write=False)
    return encoder


def _check_parameters(latent_dim: int, scale: float, a_max: float) -> None:
    if int(latent_dim) != latent_dim or latent_dim < 2:
        raise InvalidDimensionError(f"latent_dim must be an integer >= 2, got {latent_dim}")
    if not np.isfinite(scale) or scale <= 0:
        raise InvalidDimensionError(f"scale must be > 0, got {scale}")
    if not np.isfinite(a_max) or a_max <= 0:
        raise InvalidDimensionError(f"a_max must be > 0, got {a_max}")


def make_point_mass(latent_dim: int = 16, scale: float = 1.0, a_max: float = 0.25, seed: int = 7) -> PointMassWorld:
    _check_parameters(latent_dim, scale, a_max)
    return PointMassWorld(make_encoder(int(latent_dim), scale, seed), scale, a_max, seed)


def make_drift_world(latent_dim=16, scale=1.0, a_max=0.25, seed=7, drift=(0.0, 0.0)) -> DriftWorld:
    _check_parameters(latent_dim, scale, a_max)
    return DriftWorld(make_encoder(int(latent_dim), scale, seed), scale, a_max, seed, drift)


def make_world_model(cfg) -> PointMassWorld:
    """Build the model described by a `ModelConfig` block."""
    if cfg.model == "drift":
        model = make_drift_world(cfg.latent_dim, cfg.scale, cfg.a_max, cfg.seed, cfg.drift)
    else:
        model = make_point_mass(cfg.latent_dim, cfg.scale, cfg.a_max, cfg.seed)
    logger.debug("built world model {}", model)
    return model
