from typing import List, Optional

from fastapi import APIRouter, Depends, HTTPException
from loguru import logger

from ..config import Settings, get_settings
from ..exceptions import ETLError
from ..harness import EXPERIMENTS, experiment_config, run_experiment
from ..schemas import ExperimentConfig, Report, SpecListing

router = APIRouter(prefix="/experiments", tags=['Experiments'])


@router.get("/specs", response_model=List[SpecListing])
def list_specs():
    """Built-in experiments that /demo/{name} accepts"""
    return [SpecListing(name=e.name, description=e.description) for e in EXPERIMENTS.values()]


@router.post("/run", response_model=Report)
def run(cfg: ExperimentConfig):
    """Plan one episode for a full experiment config"""
    try:
        return run_experiment(cfg)
    except ETLError as exc:
        raise HTTPException(status_code=400, detail=exc.message)


@router.post("/demo/{name}", response_model=Report)
def demo(name: str, metric: Optional[str] = None, max_steps: Optional[int] = None,
         settings: Settings = Depends(get_settings)):
    """Run a built-in experiment with its default scene"""
    if name not in EXPERIMENTS:
        raise HTTPException(status_code=404, detail=f"Unknown experiment '{name}'")
    try:
        cfg = experiment_config(name, metric or settings.default_metric)
        if max_steps is not None:
            cfg = cfg.copy(update={"plan": cfg.plan.copy(update={"max_steps": max_steps})})
        logger.debug("demo {} requested with metric {}", name, cfg.metric)
        return run_experiment(cfg)
    except ETLError as exc:
        raise HTTPException(status_code=400, detail=exc.message)
