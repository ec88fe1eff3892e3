"""
Distance functions between embeddings.

Every metric follows "smaller = more similar"; cosine is reported as
1 - similarity. L1, L2 and cosine flatten patch sets row-major, chamfer needs
patch sets on both sides.
"""

from enum import Enum
from typing import Optional, Union

import numpy as np
from scipy.spatial.distance import cdist

from .config import settings
from .core import Embedding, EmbeddingKind
from .exceptions import (
    DimensionMismatchError,
    EmptySetError,
    IncompatibleMetricError,
    InvalidInputError,
    ZeroVectorError,
)

PAIRWISE_BLOCK = 1024


class DistanceMetric(str, Enum):
    L1 = "l1"
    L2 = "l2"
    COSINE = "cosine"
    CHAMFER = "chamfer"

    @classmethod
    def parse(cls, value: Union[str, "DistanceMetric"]) -> "DistanceMetric":
        if isinstance(value, DistanceMetric):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidInputError(
                f"unknown metric '{value}', expected one of {[m.value for m in cls]}"
            )


def _accumulate(terms: np.ndarray) -> float:
    # fixed split points keep the summation order independent of the caller
    if terms.size <= PAIRWISE_BLOCK:
        return float(np.sum(terms))
    middle = terms.size // 2
    return _accumulate(terms[:middle]) + _accumulate(terms[middle:])


def _paired(a: Embedding, b: Embedding):
    if a.kind != b.kind or a.shape != b.shape:
        raise DimensionMismatchError(f"cannot compare {a!r} with {b!r}")
    return a.flat(), b.flat()


def check_compatible(metric: DistanceMetric, embedding: Embedding) -> None:
    metric = DistanceMetric.parse(metric)
    if metric == DistanceMetric.CHAMFER and embedding.kind != EmbeddingKind.PATCH_SET:
        raise IncompatibleMetricError("chamfer distance needs patch-set embeddings")


def dist_l1(a: Embedding, b: Embedding) -> float:
    x, y = _paired(a, b)
    return _accumulate(np.abs(x - y))


def dist_l2(a: Embedding, b: Embedding) -> float:
    x, y = _paired(a, b)
    diff = x - y
    return float(np.sqrt(_accumulate(diff * diff)))


def dist_cosine(a: Embedding, b: Embedding) -> float:
    x, y = _paired(a, b)
    norm_x = np.sqrt(_accumulate(x * x))
    norm_y = np.sqrt(_accumulate(y * y))
    if norm_x < settings.cosine_tolerance or norm_y < settings.cosine_tolerance:
        raise ZeroVectorError("cosine distance is undefined for a zero vector")
    if np.array_equal(x, y):
        return 0.0
    similarity = _accumulate(x * y) / (norm_x * norm_y)
    return float(1.0 - np.clip(similarity, -1.0, 1.0))


def dist_chamfer(a: Embedding, b: Embedding) -> float:
    """Bidirectional sum of squared nearest-neighbour distances."""
    check_compatible(DistanceMetric.CHAMFER, a)
    check_compatible(DistanceMetric.CHAMFER, b)
    if a.data.shape[0] == 0 or b.data.shape[0] == 0:
        raise EmptySetError("chamfer distance needs non-empty patch sets")
    if a.dim != b.dim:
        raise DimensionMismatchError(f"patch dimensions differ: {a.dim} vs {b.dim}")
    squared = cdist(a.data, b.data, metric="sqeuclidean")
    forward = _accumulate(squared.min(axis=1))
    backward = _accumulate(squared.min(axis=0))
    return forward + backward


_DISPATCH = {
    DistanceMetric.L1: dist_l1,
    DistanceMetric.L2: dist_l2,
    DistanceMetric.COSINE: dist_cosine,
    DistanceMetric.CHAMFER: dist_chamfer,
}


def distance(metric: Union[str, DistanceMetric], a: Embedding, b: Embedding) -> float:
    return _DISPATCH[DistanceMetric.parse(metric)](a, b)


def distances_to(
    metric: Union[str, DistanceMetric],
    points: np.ndarray,
    target: Embedding,
    item_ndim: Optional[int] = None,
) -> np.ndarray:
    """
    Distances from a stack of embeddings to one target.

    `points` has shape (*batch, *item_shape) where the last `item_ndim` axes
    are one embedding (1 for vectors, 2 for patch sets; defaults to the
    target's rank). The result has shape `batch`. Each entry only depends on
    its own row, so results do not change with the batch size.
    """
    metric = DistanceMetric.parse(metric)
    points = np.asarray(points, dtype=np.float64)
    if item_ndim is None:
        item_ndim = target.data.ndim
    if not 0 < item_ndim <= points.ndim:
        raise InvalidInputError(f"item rank {item_ndim} does not fit points of shape {points.shape}")
    item_shape = points.shape[points.ndim - item_ndim:]

    if metric == DistanceMetric.CHAMFER:
        check_compatible(metric, target)
        if item_ndim != 2:
            raise IncompatibleMetricError("chamfer distance needs patch-set embeddings")
        if item_shape[-1] != target.dim:
            raise DimensionMismatchError(
                f"patch dimensions differ: {item_shape[-1]} vs {target.dim}"
            )
        if item_shape[0] == 0:
            raise EmptySetError("chamfer distance needs non-empty patch sets")
        diff = points[..., :, None, :] - target.data[None, :, :]
        squared = np.sum(diff * diff, axis=-1)
        return squared.min(axis=-1).sum(axis=-1) + squared.min(axis=-2).sum(axis=-1)

    if item_shape != target.shape:
        raise DimensionMismatchError(
            f"trace items of shape {item_shape} cannot be compared with target {target!r}"
        )
    batch = points.shape[:points.ndim - item_ndim]
    flat = points.reshape(batch + (-1,))
    goal = target.flat()

    if metric == DistanceMetric.L1:
        return np.sum(np.abs(flat - goal), axis=-1)
    if metric == DistanceMetric.L2:
        diff = flat - goal
        return np.sqrt(np.sum(diff * diff, axis=-1))

    norms = np.sqrt(np.sum(flat * flat, axis=-1))
    goal_norm = np.sqrt(np.sum(goal * goal))
    if goal_norm < settings.cosine_tolerance or np.any(norms < settings.cosine_tolerance):
        raise ZeroVectorError("cosine distance is undefined for a zero vector")
    similarity = np.sum(flat * goal, axis=-1) / (norms * goal_norm)
    result = 1.0 - np.clip(similarity, -1.0, 1.0)
    return np.where(np.all(flat == goal, axis=-1), 0.0, result)
