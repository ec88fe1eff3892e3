from fastapi import APIRouter, Depends, HTTPException

from ..config import Settings, get_settings
from ..exceptions import ETLError
from ..harness import heatmap
from ..metrics import DistanceMetric
from ..schemas import HeatmapOut, HeatmapRequest
from ..utils import embeddings_from_payload

router = APIRouter(prefix="/heatmaps", tags=['Heatmaps'])


@router.post("", response_model=HeatmapOut)
def pairwise_distances(payload: HeatmapRequest, settings: Settings = Depends(get_settings)):
    """Pairwise distance matrix of the posted embeddings"""
    try:
        metric = DistanceMetric.parse(payload.metric or settings.default_metric)
        matrix = heatmap(embeddings_from_payload(payload.embeddings), metric)
    except ETLError as exc:
        raise HTTPException(status_code=400, detail=exc.message)
    return HeatmapOut(metric=metric.value, matrix=matrix.tolist())
