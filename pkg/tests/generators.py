"""Seeded random formulas and traces for the property tests."""

from typing import List, Sequence

import numpy as np

from app.core import Trace, make_embedding, trace_from_array
from app.logic import (
    TRUE,
    Always,
    And,
    Eventually,
    Formula,
    Not,
    Or,
    Predicate,
    Sense,
    TargetRef,
    Until,
)

UNARY = (Not, Eventually, Always)
BINARY = (And, Or, Until)


def random_targets(rng: np.random.Generator, dim: int, count: int = 3, metrics=("l1", "l2", "cosine")) -> List[TargetRef]:
    return [
        TargetRef(f"t{i}", make_embedding("vector", rng.normal(size=dim)), metrics[i % len(metrics)])
        for i in range(count)
    ]


def random_predicate(rng: np.random.Generator, targets: Sequence[TargetRef]) -> Predicate:
    target = targets[rng.integers(len(targets))]
    threshold = float(np.round(rng.uniform(0.0, 2.0), 3))
    sense = Sense.REACH if rng.random() < 0.5 else Sense.AVOID
    return Predicate(target, threshold, sense)


def random_formula(
    rng: np.random.Generator,
    targets: Sequence[TargetRef],
    max_depth: int,
    negation: bool = True,
    allow_true: bool = True,
) -> Formula:
    """A formula with depth <= max_depth."""
    if max_depth <= 1 or rng.random() < 0.25:
        if allow_true and rng.random() < 0.05:
            return TRUE
        return random_predicate(rng, targets)
    unary = UNARY if negation else UNARY[1:]
    choice = rng.integers(len(unary) + len(BINARY))
    if choice < len(unary):
        return unary[choice](random_formula(rng, targets, max_depth - 1, negation, allow_true))
    node = BINARY[choice - len(unary)]
    return node(
        random_formula(rng, targets, max_depth - 1, negation, allow_true),
        random_formula(rng, targets, max_depth - 1, negation, allow_true),
    )


def random_trace(rng: np.random.Generator, dim: int, length: int) -> Trace:
    return trace_from_array("vector", rng.normal(size=(length, dim)))
