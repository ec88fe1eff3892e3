"""
Boolean and quantitative satisfaction over bounded trace windows.

All operators quantify over the window [i, T] supplied by the caller. The
quantitative score follows

    rho(u, k)        = f_u(z_k)
    rho(!phi, k)     = -rho(phi, k)
    rho(a & b, k)    = min(rho(a, k), rho(b, k))
    rho(a | b, k)    = max(rho(a, k), rho(b, k))
    rho(G phi, k)    = inf_{j in [k, T]} rho(phi, j)
    rho(F phi, k)    = sup_{j in [k, T]} rho(phi, j)
    rho(a U b, k)    = sup_{j in [k, T]} min(rho(b, j), inf_{l in [k, j)} rho(a, l))
    rho(true, k)     = +inf

`score`/`sat` evaluate every node over the whole window at once (last array
axis is time, leading axes are a batch), which is what the planner relies on.
`oracle_score` is an independent scalar evaluator used to cross-check it.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from .config import settings
from .core import Embedding, Trace
from .exceptions import (
    FormulaTooDeepError,
    IndexOutOfRangeError,
    InvalidInputError,
    WindowTooLargeError,
)
from .logic import (
    Always,
    And,
    Eventually,
    Formula,
    Not,
    Or,
    Predicate,
    Sense,
    TrueFormula,
    Until,
    depth,
    normalize,
)
from .metrics import distance, distances_to

# predicate -> f_u over the window, shape (*batch, window_length)
PredicateValues = Callable[[Predicate], np.ndarray]


@dataclass(frozen=True)
class ScoreContext:
    trace: Trace
    start: int
    bound: int

    def __post_init__(self):
        if not (0 <= self.start <= self.bound < len(self.trace)):
            raise IndexOutOfRangeError(
                f"window [{self.start}, {self.bound}] is outside a trace of length {len(self.trace)}"
            )

    @classmethod
    def full(cls, trace: Trace) -> "ScoreContext":
        return cls(trace, 0, len(trace) - 1)

    @property
    def window(self):
        return self.start, self.bound

    @property
    def length(self) -> int:
        return self.bound - self.start + 1


def eval_pred(p: Predicate, z: Embedding) -> float:
    d = distance(p.target.metric, z, p.target.embedding)
    if p.sense == Sense.REACH:
        return p.threshold - d
    return d - p.threshold


def _predicate_field(p: Predicate, distances: np.ndarray) -> np.ndarray:
    if p.sense == Sense.REACH:
        return p.threshold - distances
    return distances - p.threshold


def _suffix(values: np.ndarray, ufunc) -> np.ndarray:
    # running reduction from the window end backwards
    return ufunc.accumulate(values[..., ::-1], axis=-1)[..., ::-1]


def _until_scores(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    out = np.empty_like(right)
    out[..., -1] = right[..., -1]
    for k in range(right.shape[-1] - 2, -1, -1):
        out[..., k] = np.maximum(right[..., k], np.minimum(left[..., k], out[..., k + 1]))
    return out


def _until_sat(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    out = np.empty_like(right)
    out[..., -1] = right[..., -1]
    for k in range(right.shape[-1] - 2, -1, -1):
        out[..., k] = right[..., k] | (left[..., k] & out[..., k + 1])
    return out


def _robustness(f: Formula, values: PredicateValues, shape) -> np.ndarray:
    if isinstance(f, Predicate):
        return values(f)
    if isinstance(f, TrueFormula):
        return np.full(shape, np.inf)
    if isinstance(f, Not):
        return -_robustness(f.child, values, shape)
    if isinstance(f, And):
        return np.minimum(_robustness(f.left, values, shape), _robustness(f.right, values, shape))
    if isinstance(f, Or):
        return np.maximum(_robustness(f.left, values, shape), _robustness(f.right, values, shape))
    if isinstance(f, Eventually):
        return _suffix(_robustness(f.child, values, shape), np.maximum)
    if isinstance(f, Always):
        return _suffix(_robustness(f.child, values, shape), np.minimum)
    if isinstance(f, Until):
        return _until_scores(_robustness(f.left, values, shape), _robustness(f.right, values, shape))
    raise InvalidInputError(f"unknown formula node {type(f).__name__}")


def _satisfaction(f: Formula, values: PredicateValues, shape) -> np.ndarray:
    if isinstance(f, Predicate):
        return values(f) > 0
    if isinstance(f, TrueFormula):
        return np.ones(shape, dtype=bool)
    if isinstance(f, Not):
        return ~_satisfaction(f.child, values, shape)
    if isinstance(f, And):
        return _satisfaction(f.left, values, shape) & _satisfaction(f.right, values, shape)
    if isinstance(f, Or):
        return _satisfaction(f.left, values, shape) | _satisfaction(f.right, values, shape)
    if isinstance(f, Eventually):
        return _suffix(_satisfaction(f.child, values, shape), np.logical_or)
    if isinstance(f, Always):
        return _suffix(_satisfaction(f.child, values, shape), np.logical_and)
    if isinstance(f, Until):
        return _until_sat(_satisfaction(f.left, values, shape), _satisfaction(f.right, values, shape))
    raise InvalidInputError(f"unknown formula node {type(f).__name__}")


class _WindowValues:
    """Predicate values over a stacked window, computed once per predicate."""

    def __init__(self, window: np.ndarray, item_ndim: int):
        self.window = window
        self.item_ndim = item_ndim
        self.cache: Dict[Predicate, np.ndarray] = {}

    @property
    def shape(self):
        return self.window.shape[:self.window.ndim - self.item_ndim]

    def __call__(self, p: Predicate) -> np.ndarray:
        if p not in self.cache:
            distances = distances_to(p.target.metric, self.window, p.target.embedding, self.item_ndim)
            self.cache[p] = _predicate_field(p, distances)
        return self.cache[p]


class _SignalValues:
    def __init__(self, signals: Mapping[Predicate, Sequence[float]], start: int, bound: Optional[int]):
        arrays = {p: np.asarray(v, dtype=np.float64) for p, v in signals.items()}
        lengths = {a.shape[-1] for a in arrays.values()}
        if len(lengths) > 1:
            raise InvalidInputError("predicate signals have different lengths")
        length = lengths.pop() if lengths else bound + 1 if bound is not None else 0
        bound = length - 1 if bound is None else bound
        if not (0 <= start <= bound < length):
            raise IndexOutOfRangeError(f"window [{start}, {bound}] is outside signals of length {length}")
        self.arrays = {p: a[..., start:bound + 1] for p, a in arrays.items()}
        self.start, self.bound = start, bound
        self.shape = (bound - start + 1,)

    def __call__(self, p: Predicate) -> np.ndarray:
        try:
            return self.arrays[p]
        except KeyError:
            raise InvalidInputError(f"no signal supplied for predicate on '{p.target.name}'")

    def value(self, p: Predicate, k: int) -> float:
        return float(self(p)[k - self.start])


def _context_values(ctx: ScoreContext) -> _WindowValues:
    stacked = ctx.trace.as_array()[ctx.start:ctx.bound + 1]
    return _WindowValues(stacked, stacked.ndim - 1)


def robustness(f: Formula, ctx: ScoreContext) -> np.ndarray:
    """rho(f, sigma, k, T) for every k in [i, T]."""
    values = _context_values(ctx)
    return _robustness(f, values, values.shape)


def score(f: Formula, ctx: ScoreContext) -> float:
    return float(robustness(f, ctx)[0])


def sat(f: Formula, ctx: ScoreContext) -> bool:
    values = _context_values(ctx)
    return bool(_satisfaction(f, values, values.shape)[0])


def score_batch(f: Formula, latents: np.ndarray, item_ndim: int = 1) -> np.ndarray:
    """
    Scores at index 0 with T = last index for a batch of equal-length traces.

    `latents` has shape (*batch, length, *item_shape); `item_ndim` is 1 for
    vectors and 2 for patch sets.
    """
    values = _WindowValues(np.asarray(latents, dtype=np.float64), item_ndim)
    return _robustness(f, values, values.shape)[..., 0]


def score_signals(
    f: Formula,
    signals: Mapping[Predicate, Sequence[float]],
    start: int = 0,
    bound: Optional[int] = None,
) -> float:
    """Score with the predicate values f_u(z_k) supplied directly."""
    values = _SignalValues(signals, start, bound)
    return float(_robustness(f, values, values.shape)[0])


def sat_signals(
    f: Formula,
    signals: Mapping[Predicate, Sequence[float]],
    start: int = 0,
    bound: Optional[int] = None,
) -> bool:
    values = _SignalValues(signals, start, bound)
    return bool(_satisfaction(f, values, values.shape)[0])


def score_prefixes(f: Formula, trace: Trace) -> List[float]:
    """Monitoring series: the score over [0, t] for every t."""
    return [score(f, ScoreContext(trace, 0, t)) for t in range(len(trace))]


def sat_prefixes(f: Formula, trace: Trace) -> List[bool]:
    return [sat(f, ScoreContext(trace, 0, t)) for t in range(len(trace))]


# ---- independent scalar oracle ----

def _oracle(f: Formula, value: Callable[[Predicate, int], float], start: int, bound: int) -> float:
    core = normalize(f)
    memo: Dict[tuple, float] = {}

    def rho(node: Formula, k: int) -> float:
        key = (id(node), k)
        if key in memo:
            return memo[key]
        if isinstance(node, Predicate):
            result = value(node, k)
        elif isinstance(node, TrueFormula):
            result = float("inf")
        elif isinstance(node, Not):
            result = -rho(node.child, k)
        elif isinstance(node, And):
            result = min(rho(node.left, k), rho(node.right, k))
        elif isinstance(node, Until):
            # enumerate every split j; prefix holds the inf over [k, j)
            result = float("-inf")
            prefix = float("inf")
            for j in range(k, bound + 1):
                result = max(result, min(rho(node.right, j), prefix))
                prefix = min(prefix, rho(node.left, j))
        else:
            raise InvalidInputError(f"normalize left a {type(node).__name__} node")
        memo[key] = result
        return result

    return rho(core, start)


def _check_oracle_limits(f: Formula, start: int, bound: int) -> None:
    if bound - start + 1 > settings.oracle_max_window:
        raise WindowTooLargeError(
            f"oracle windows are limited to {settings.oracle_max_window} items, got {bound - start + 1}"
        )
    if depth(f) > settings.oracle_max_depth:
        raise FormulaTooDeepError(f"oracle formulas are limited to depth {settings.oracle_max_depth}")


def oracle_score(f: Formula, ctx: ScoreContext) -> float:
    _check_oracle_limits(f, ctx.start, ctx.bound)
    cache: Dict[tuple, float] = {}

    def value(p: Predicate, k: int) -> float:
        key = (id(p), k)
        if key not in cache:
            cache[key] = eval_pred(p, ctx.trace[k])
        return cache[key]

    return _oracle(f, value, ctx.start, ctx.bound)


def oracle_score_signals(
    f: Formula,
    signals: Mapping[Predicate, Sequence[float]],
    start: int = 0,
    bound: Optional[int] = None,
) -> float:
    values = _SignalValues(signals, start, bound)
    _check_oracle_limits(f, values.start, values.bound)
    return _oracle(f, values.value, values.start, values.bound)

