import json

import numpy as np
import pytest

from app.core import EmbeddingKind, Trace, make_embedding, make_trace, trace_from_array, trace_slice
from app.exceptions import (
    DimensionMismatchError,
    IndexOutOfRangeError,
    InvalidInputError,
    ManifestIOError,
    ManifestSchemaError,
    NonFiniteEntryError,
)
from app.utils import dump_trace, load_embedding, load_trace, parse_trace_text


class TestMakeEmbedding:
    """Test validation of raw embedding data"""

    def test_vector(self):
        """Test a well-formed vector"""
        e = make_embedding("vector", [1.0, 2.0])
        assert e.kind == EmbeddingKind.VECTOR
        assert e.dim == 2

    def test_patch_set(self):
        """Test a well-formed patch set, accepting the hyphenated kind"""
        e = make_embedding("patch-set", [[0, 0], [1, 0]])
        assert e.kind == EmbeddingKind.PATCH_SET
        assert e.n_patches == 2
        assert e.dim == 2

    def test_non_finite_rejected(self):
        """Test NaN and infinite entries are rejected"""
        with pytest.raises(NonFiniteEntryError):
            make_embedding("vector", [1.0, float("nan")])
        with pytest.raises(NonFiniteEntryError):
            make_embedding("patch_set", [[float("inf"), 0.0]])

    def test_shape_rejected(self):
        """Test wrong rank, ragged and empty data"""
        with pytest.raises(DimensionMismatchError):
            make_embedding("vector", [[1.0, 2.0]])
        with pytest.raises(DimensionMismatchError):
            make_embedding("patch_set", [[1.0, 2.0], [3.0]])
        with pytest.raises(DimensionMismatchError):
            make_embedding("vector", [])

    def test_unknown_kind(self):
        """Test an unknown kind is an input error"""
        with pytest.raises(InvalidInputError):
            make_embedding("matrix", [1.0])

    def test_immutable(self):
        """Test the stored array is a read-only copy"""
        raw = np.array([1.0, 2.0])
        e = make_embedding("vector", raw)
        raw[0] = 99.0
        assert e.data[0] == 1.0
        with pytest.raises(ValueError):
            e.data[0] = 5.0

    def test_equality_and_hash(self):
        """Test value equality"""
        a = make_embedding("vector", [1.0, 2.0])
        b = make_embedding("vector", [1.0, 2.0])
        assert a == b
        assert hash(a) == hash(b)
        assert a != make_embedding("vector", [1.0, 2.5])


class TestTrace:
    """Test traces and windows"""

    def trace(self, n=4):
        return make_trace([make_embedding("vector", [float(i), 0.0]) for i in range(n)])

    def test_full_window(self):
        """Test slicing the full window returns every item"""
        t = self.trace()
        assert len(trace_slice(t, 0, 3)) == 4

    def test_singleton_window(self):
        """Test a single-item window"""
        t = self.trace()
        window = trace_slice(t, 2, 2)
        assert len(window) == 1
        assert window[0] == t[2]

    def test_out_of_range(self):
        """Test windows past the end or inverted are rejected"""
        t = self.trace()
        with pytest.raises(IndexOutOfRangeError):
            trace_slice(t, 3, 5)
        with pytest.raises(IndexOutOfRangeError):
            trace_slice(t, 2, 1)

    def test_mixed_shapes_rejected(self):
        """Test every item must share kind and shape"""
        with pytest.raises(DimensionMismatchError):
            make_trace([make_embedding("vector", [1.0, 2.0]), make_embedding("vector", [1.0])])
        with pytest.raises(DimensionMismatchError):
            make_trace([make_embedding("vector", [1.0, 2.0]), make_embedding("patch_set", [[1.0, 2.0]])])

    def test_empty_trace(self):
        """Test the empty trace is legal but cannot be stacked"""
        t = Trace()
        assert len(t) == 0
        with pytest.raises(InvalidInputError):
            t.as_array()

    def test_as_array_and_extend(self):
        """Test stacking and extension"""
        t = trace_from_array("vector", np.arange(6.0).reshape(3, 2))
        assert t.as_array().shape == (3, 2)
        longer = t.extend([make_embedding("vector", [9.0, 9.0])])
        assert len(longer) == 4
        assert len(t) == 3


class TestTraceFiles:
    """Test the JSON and JSON Lines trace formats"""

    def test_json_array(self, tmp_path):
        """Test dumping and loading a JSON array"""
        t = trace_from_array("vector", [[0.1, 0.2], [0.3, 0.4]])
        dump_trace(t, tmp_path / "t.json")
        assert load_trace(tmp_path / "t.json") == t

    def test_json_lines(self, tmp_path):
        """Test JSON Lines input"""
        t = trace_from_array("vector", [[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]])
        dump_trace(t, tmp_path / "t.jsonl", lines=True)
        assert load_trace(tmp_path / "t.jsonl") == t

    def test_single_object(self):
        """Test a single embedding object is a length-1 trace"""
        t = parse_trace_text(json.dumps({"kind": "vector", "data": [1, 2]}))
        assert len(t) == 1

    def test_bad_inputs(self, tmp_path):
        """Test missing files and malformed documents"""
        with pytest.raises(ManifestIOError):
            load_trace(tmp_path / "missing.json")
        with pytest.raises(ManifestSchemaError):
            parse_trace_text('[{"kind": "vector"}]')
        with pytest.raises(ManifestSchemaError):
            parse_trace_text("not json\nstill not")

    def test_load_embedding(self, tmp_path):
        """Test reading one embedding file"""
        (tmp_path / "e.json").write_text(json.dumps({"kind": "patch_set", "data": [[1, 2], [3, 4]]}))
        e = load_embedding(tmp_path / "e.json")
        assert e.shape == (2, 2)
