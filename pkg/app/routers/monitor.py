from fastapi import APIRouter, Depends, HTTPException

from ..config import Settings, get_settings
from ..core import Trace, make_trace
from ..exceptions import ETLError
from ..logic import TargetRef
from ..schemas import MonitorOut, MonitorRequest, PrefixScoresOut
from ..semantics import ScoreContext, sat, sat_prefixes, score, score_prefixes
from ..speclang import Manifest, parse_spec
from ..utils import embeddings_from_payload, finite_or_none

router = APIRouter(prefix="/monitor", tags=['Monitor'])


def _prepare(payload: MonitorRequest, settings: Settings):
    targets = [
        TargetRef(name, target.to_embedding(), target.metric or settings.default_metric, target.role or "")
        for name, target in payload.targets.items()
    ]
    defaults = {name: t.threshold for name, t in payload.targets.items() if t.threshold is not None}
    formula = parse_spec(payload.spec, Manifest.from_targets(targets, defaults))
    trace = make_trace(embeddings_from_payload(payload.trace))
    return formula, trace


def _context(payload: MonitorRequest, trace: Trace) -> ScoreContext:
    bound = len(trace) - 1 if payload.bound is None else payload.bound
    return ScoreContext(trace, payload.start, bound)


def _evaluate(payload: MonitorRequest, settings: Settings, need_score: bool) -> MonitorOut:
    try:
        formula, trace = _prepare(payload, settings)
        ctx = _context(payload, trace)
        value = score(formula, ctx) if need_score else None
        return MonitorOut(
            sat=sat(formula, ctx),
            score=finite_or_none(value) if value is not None else None,
            window=ctx.window,
        )
    except ETLError as exc:
        raise HTTPException(status_code=400, detail=exc.message)


@router.post("/check", response_model=MonitorOut)
def check_trace(payload: MonitorRequest, settings: Settings = Depends(get_settings)):
    """Boolean satisfaction of the spec over the window [start, bound]"""
    return _evaluate(payload, settings, need_score=False)


@router.post("/score", response_model=MonitorOut)
def score_trace(payload: MonitorRequest, settings: Settings = Depends(get_settings)):
    """Satisfaction score of the spec over the window [start, bound]"""
    return _evaluate(payload, settings, need_score=True)


@router.post("/prefixes", response_model=PrefixScoresOut)
def score_trace_prefixes(payload: MonitorRequest, settings: Settings = Depends(get_settings)):
    """Score and verdict over [0, t] for every prefix end t, as a runtime monitor would report them"""
    try:
        formula, trace = _prepare(payload, settings)
        if len(trace) == 0:
            raise HTTPException(status_code=400, detail="trace is empty")
        return PrefixScoresOut(
            scores=[finite_or_none(v) for v in score_prefixes(formula, trace)],
            sat=sat_prefixes(formula, trace),
        )
    except ETLError as exc:
        raise HTTPException(status_code=400, detail=exc.message)
