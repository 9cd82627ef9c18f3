import json

import numpy as np
import pytest

from src.curve_model import load_spec, normal_form_curve
from src.data_constants import MODEL_FAMILY_G, MODEL_FLATTENING


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def family_g():
    return load_spec(MODEL_FAMILY_G)


@pytest.fixture
def fr_model():
    return load_spec(MODEL_FLATTENING)


@pytest.fixture
def twisted_cubic():
    return load_spec({"kind": "curve", "label": "twisted cubic",
                      "x": "t", "y": "t^2", "z": "t^3", "t_range": [-1.0, 1.0]})


@pytest.fixture
def helix():
    return load_spec({"kind": "curve", "label": "helix",
                      "x": "cos(t)", "y": "sin(t)", "z": "t", "t_range": [0.0, 6.0]})


@pytest.fixture
def space_cusp():
    return load_spec({"kind": "curve", "label": "space cusp",
                      "x": "t^2", "y": "t^3", "z": "t^4", "t_range": [-1.0, 1.0]})


@pytest.fixture
def vertex_curve():
    # b2 = c3 = 1, b3 = 0.5, c4 = 0.3 and b4 chosen on the vertex condition
    return normal_form_curve(1.0, b3=0.5, b4=-1.0 / 3.0 + 0.15, b5=0.2, c3=1.0, c4=0.3, c5=-0.4)


@pytest.fixture
def write_spec(tmp_path):
    """Dump a spec dict to a JSON file and return its path."""

    def _write(spec, name="spec.json"):
        path = tmp_path / name
        path.write_text(json.dumps(spec), encoding="utf-8")
        return str(path)

    return _write
