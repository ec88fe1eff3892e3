import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from app.core import make_embedding
from app.logic import TargetRef
from app.main import app
from app.schemas import PlanConfig
from app.speclang import Manifest
from app.worldmodel import make_point_mass


def vec(*values):
    return make_embedding("vector", list(values))


@pytest.fixture
def origin():
    return TargetRef("g", vec(0.0, 0.0))


@pytest.fixture
def targets():
    return {
        "g1": TargetRef("g1", vec(1.0, 0.0), "l2", "goal"),
        "g2": TargetRef("g2", vec(0.0, 1.0), "l2", "goal"),
        "a": TargetRef("a", vec(-1.0, -1.0), "l2", "avoid"),
    }


@pytest.fixture
def manifest(targets):
    return Manifest.from_targets(targets.values(), {"g1": 0.5})


@pytest.fixture
def model():
    return make_point_mass(latent_dim=16, scale=1.0, a_max=0.25, seed=7)


@pytest.fixture
def small_plan():
    return PlanConfig(horizon=4, samples=64, seed=7, max_steps=6)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def manifest_dir(tmp_path):
    """A manifest with two vector targets written to disk, plus a 4-step trace."""
    (tmp_path / "g1.json").write_text(json.dumps({"kind": "vector", "data": [1.0, 0.0]}))
    (tmp_path / "a.json").write_text(json.dumps({"kind": "vector", "data": [-1.0, 0.0]}))
    (tmp_path / "manifest.json").write_text(json.dumps({
        "targets": {
            "g1": {"file": "g1.json", "metric": "l2", "threshold": 0.5},
            "a": {"file": "a.json", "metric": "l2"},
        }
    }))
    trace = [{"kind": "vector", "data": [x, 0.0]} for x in (0.0, 0.25, 0.75, 1.0)]
    (tmp_path / "trace.json").write_text(json.dumps(trace))
    return tmp_path


@pytest.fixture
def client():
    with TestClient(app) as test_client:
        yield test_client
