import json
import math
from pathlib import Path
from typing import Any, Iterable, List, Optional, Union

from pydantic import BaseModel, ValidationError

from .core import Embedding, Trace, make_trace
from .exceptions import ManifestIOError, ManifestSchemaError
from .schemas import EmbeddingIn


def read_text(path: Union[str, Path]) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestIOError(f"cannot read {path}: {exc}")


def _embedding_from_obj(obj: Any, origin: str) -> Embedding:
    try:
        return EmbeddingIn.parse_obj(obj).to_embedding()
    except ValidationError as exc:
        raise ManifestSchemaError(f"{origin}: not an embedding object: {exc}")


def load_embedding(path: Union[str, Path]) -> Embedding:
    """Read `{"kind": ..., "data": ...}` from a JSON file."""
    text = read_text(path)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestSchemaError(f"{path} is not valid JSON: {exc}")
    return _embedding_from_obj(obj, str(path))


def parse_trace_text(text: str, origin: str = "<trace>") -> Trace:
    """A JSON array of embeddings, a single embedding, or JSON Lines."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError:
        document = None
        objects = []
        for number, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                objects.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ManifestSchemaError(f"{origin}:{number}: invalid JSON line: {exc}")
    else:
        objects = document if isinstance(document, list) else [document]

    return make_trace([_embedding_from_obj(obj, f"{origin}[{i}]") for i, obj in enumerate(objects)])


def load_trace(path: Union[str, Path]) -> Trace:
    return parse_trace_text(read_text(path), str(path))


def dump_trace(trace: Trace, path: Union[str, Path], lines: bool = False) -> None:
    path = Path(path)
    if lines:
        path.write_text("".join(json.dumps(item) + "\n" for item in trace.to_list()), encoding="utf-8")
    else:
        path.write_text(json.dumps(trace.to_list()), encoding="utf-8")


def embeddings_from_payload(items: Iterable[EmbeddingIn]) -> List[Embedding]:
    return [item.to_embedding() for item in items]


def write_model(model: BaseModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.json(indent=2), encoding="utf-8")
    return path


def finite_or_none(value: float) -> Optional[float]:
    """Scores of +-inf have no JSON form; report them as null."""
    return value if math.isfinite(value) else None
