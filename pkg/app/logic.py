"""
ETL formula trees.

Predicates are kept in the normal form f_u(z) > 0:

    reach:  f_u(z) = eps - dist(z, z_target)
    avoid:  f_u(z) = dist(z, z_target) - eps

Or, Eventually and Always are first-class nodes; `normalize` rewrites them
into the core {Pred, True, Not, And, Until}.
"""

import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List, Sequence, Tuple

from .core import Embedding
from .exceptions import InvalidInputError, NegativeThresholdError
from .metrics import DistanceMetric, check_compatible

IDENTIFIER = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class Sense(str, Enum):
    REACH = "reach"
    AVOID = "avoid"


@dataclass(frozen=True)
class TargetRef:
    name: str
    embedding: Embedding
    metric: DistanceMetric = DistanceMetric.L2
    role: str = ""

    def __post_init__(self):
        if not IDENTIFIER.match(self.name or ""):
            raise InvalidInputError(f"target name '{self.name}' is not an identifier")
        object.__setattr__(self, "metric", DistanceMetric.parse(self.metric))
        check_compatible(self.metric, self.embedding)


def _checked_threshold(eps) -> float:
    try:
        value = float(eps)
    except (TypeError, ValueError):
        raise InvalidInputError(f"threshold {eps!r} is not a number")
    if not math.isfinite(value):
        raise InvalidInputError("threshold must be finite")
    if value < 0:
        raise NegativeThresholdError(f"threshold must be >= 0, got {value}")
    # folds -0.0 into 0.0 so pretty-printing never emits a sign
    return value + 0.0


class Formula:
    """Base of the formula tree; subclasses are frozen dataclasses."""

    def children(self) -> Tuple["Formula", ...]:
        return ()

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)

    def __str__(self) -> str:
        from .speclang import pretty

        return pretty(self)


@dataclass(frozen=True)
class Predicate(Formula):
    target: TargetRef
    threshold: float
    sense: Sense = Sense.REACH

    def __post_init__(self):
        object.__setattr__(self, "threshold", _checked_threshold(self.threshold))
        object.__setattr__(self, "sense", Sense(self.sense))


@dataclass(frozen=True)
class TrueFormula(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    child: Formula

    def children(self):
        return (self.child,)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Eventually(Formula):
    child: Formula

    def children(self):
        return (self.child,)


@dataclass(frozen=True)
class Always(Formula):
    child: Formula

    def children(self):
        return (self.child,)


TRUE = TrueFormula()


def walk(f: Formula) -> Iterator[Formula]:
    pending = [f]
    while pending:
        node = pending.pop()
        yield node
        pending.extend(reversed(node.children()))


def depth(f: Formula) -> int:
    kids = f.children()
    return 1 + (max(depth(k) for k in kids) if kids else 0)


def predicates(f: Formula) -> List[Predicate]:
    seen = []
    for node in walk(f):
        if isinstance(node, Predicate) and node not in seen:
            seen.append(node)
    return seen


# ---- builders for the standard task patterns ----

def reach_predicate(target: TargetRef, eps: float) -> Predicate:
    return Predicate(target, eps, Sense.REACH)


def avoid_predicate(target: TargetRef, eps: float) -> Predicate:
    return Predicate(target, eps, Sense.AVOID)


def reach(target: TargetRef, eps: float) -> Formula:
    """F(dist(z, target) <= eps)"""
    return Eventually(reach_predicate(target, eps))


def avoid(target: TargetRef, eps: float) -> Formula:
    """G(dist(z, target) > eps)"""
    return Always(avoid_predicate(target, eps))


def reach_avoid(goal: TargetRef, eps_g: float, avoids: Sequence[Tuple[TargetRef, float]]) -> Formula:
    formula = reach(goal, eps_g)
    for target, eps in avoids:
        formula = And(formula, avoid(target, eps))
    return formula


def visit_either(g1: TargetRef, e1: float, g2: TargetRef, e2: float) -> Formula:
    return Or(reach(g1, e1), reach(g2, e2))


def sequenced_visit(g1: TargetRef, e1: float, g2: TargetRef, e2: float) -> Formula:
    """F(pred_g1 & F(pred_g2)): g1 first, then g2."""
    return Eventually(And(reach_predicate(g1, e1), reach(g2, e2)))


def stability(goal: TargetRef, eps: float) -> Formula:
    """F G(dist(z, goal) <= eps)"""
    return Eventually(Always(reach_predicate(goal, eps)))


def normalize(f: Formula) -> Formula:
    """Rewrite into {Pred, True, Not, And, Until}."""
    if isinstance(f, (Predicate, TrueFormula)):
        return f
    if isinstance(f, Not):
        return Not(normalize(f.child))
    if isinstance(f, And):
        return And(normalize(f.left), normalize(f.right))
    if isinstance(f, Or):
        return Not(And(Not(normalize(f.left)), Not(normalize(f.right))))
    if isinstance(f, Until):
        return Until(normalize(f.left), normalize(f.right))
    if isinstance(f, Eventually):
        return Until(TRUE, normalize(f.child))
    if isinstance(f, Always):
        return Not(Until(TRUE, Not(normalize(f.child))))
    raise InvalidInputError(f"unknown formula node {type(f).__name__}")


def _grows(f: Formula) -> bool:
    # score at index 0 is non-decreasing as the trace grows
    if isinstance(f, (Predicate, TrueFormula)):
        return True
    if isinstance(f, Not):
        return _shrinks(f.child)
    if isinstance(f, (And, Or, Until)):
        return _grows(f.left) and _grows(f.right)
    if isinstance(f, Eventually):
        return _grows(f.child)
    return False


def _shrinks(f: Formula) -> bool:
    if isinstance(f, (Predicate, TrueFormula)):
        return True
    if isinstance(f, Not):
        return _grows(f.child)
    if isinstance(f, (And, Or)):
        return _shrinks(f.left) and _shrinks(f.right)
    if isinstance(f, Always):
        return _shrinks(f.child)
    return False


def is_extension_monotone(f: Formula) -> bool:
    """True when extending the trace can never lower the score of `f`."""
    return _grows(f)
