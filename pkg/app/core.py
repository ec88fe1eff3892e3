"""
Embedding and trace value types shared by every other module.

Embeddings are immutable: the backing numpy array is copied on construction
and marked read-only.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence, Tuple, Union

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    IndexOutOfRangeError,
    InvalidInputError,
    NonFiniteEntryError,
)


class EmbeddingKind(str, Enum):
    VECTOR = "vector"
    PATCH_SET = "patch_set"

    @classmethod
    def parse(cls, value: Union[str, "EmbeddingKind"]) -> "EmbeddingKind":
        if isinstance(value, EmbeddingKind):
            return value
        normalized = str(value).strip().lower().replace("-", "_")
        try:
            return cls(normalized)
        except ValueError:
            raise InvalidInputError(f"unknown embedding kind '{value}'")


@dataclass(frozen=True, eq=False)
class Embedding:
    kind: EmbeddingKind
    data: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.data.shape[-1])

    @property
    def n_patches(self) -> int:
        return int(self.data.shape[0]) if self.kind == EmbeddingKind.PATCH_SET else 1

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.data.shape)

    def flat(self) -> np.ndarray:
        """Row-major flattening used by the vector metrics."""
        return self.data.reshape(-1)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "data": self.data.tolist()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, Embedding):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.data, other.data)

    def __hash__(self) -> int:
        return hash((self.kind, self.data.shape, self.data.tobytes()))

    def __repr__(self) -> str:
        if self.kind == EmbeddingKind.VECTOR:
            return f"Embedding(vector, d={self.dim})"
        return f"Embedding(patch_set, n={self.n_patches}, d={self.dim})"


def make_embedding(kind: Union[str, EmbeddingKind], data) -> Embedding:
    """Validate raw numbers into an immutable Embedding."""
    kind = EmbeddingKind.parse(kind)
    try:
        array = np.array(data, dtype=np.float64)
    except (TypeError, ValueError):
        # ragged nested lists end up here
        raise DimensionMismatchError("embedding data must be rectangular and numeric")

    expected_ndim = 1 if kind == EmbeddingKind.VECTOR else 2
    if array.ndim != expected_ndim:
        raise DimensionMismatchError(
            f"{kind.value} embedding needs a {expected_ndim}-d array, got shape {array.shape}"
        )
    if array.size == 0 or array.shape[-1] < 1 or array.shape[0] < 1:
        raise DimensionMismatchError("embedding data must be non-empty")
    if not np.all(np.isfinite(array)):
        raise NonFiniteEntryError("embedding entries must be finite")

    array.setflags(write=False)
    return Embedding(kind=kind, data=array)


@dataclass(frozen=True)
class Trace:
    items: Tuple[Embedding, ...] = ()

    def __post_init__(self):
        items = tuple(self.items)
        object.__setattr__(self, "items", items)
        if items:
            head = items[0]
            for position, item in enumerate(items[1:], start=1):
                if item.kind != head.kind or item.shape != head.shape:
                    raise DimensionMismatchError(
                        f"trace item {position} is {item!r}, expected the shape of {head!r}"
                    )

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[Embedding]:
        return iter(self.items)

    def __getitem__(self, index: int) -> Embedding:
        return self.items[index]

    @property
    def kind(self) -> EmbeddingKind:
        if not self.items:
            raise InvalidInputError("empty trace has no kind")
        return self.items[0].kind

    def as_array(self) -> np.ndarray:
        """Stack items into shape (len, *item_shape)."""
        if not self.items:
            raise InvalidInputError("cannot stack an empty trace")
        return np.stack([item.data for item in self.items])

    def extend(self, items: Iterable[Embedding]) -> "Trace":
        return Trace(self.items + tuple(items))

    def to_list(self) -> list:
        return [item.to_dict() for item in self.items]


def trace_from_array(kind: Union[str, EmbeddingKind], array: np.ndarray) -> Trace:
    return Trace(tuple(make_embedding(kind, row) for row in np.asarray(array)))


def make_trace(embeddings: Sequence[Embedding]) -> Trace:
    return Trace(tuple(embeddings))


def trace_slice(trace: Trace, i: int, t: int) -> Trace:
    """Items i..t inclusive."""
    if not (0 <= i <= t < len(trace)):
        raise IndexOutOfRangeError(f"window [{i}, {t}] is outside a trace of length {len(trace)}")
    return Trace(trace.items[i:t + 1])
