import json

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal
from pytest import mark, raises

from bb84_probe.analysis import CSV_FIELDS, tradeoff_curve
from bb84_probe.bases import Basis
from bb84_probe.errors import RejectedInputError
from bb84_probe.export import (
    export_strategy_to_json,
    format_float,
    load_strategy,
    round_floats,
    rows_to_csv,
    rows_to_json,
    strategy_from_dict,
    strategy_to_dict,
    write_rows,
)
from bb84_probe.probe import build_optimal


class TestStrategyDocument:
    @mark.parametrize("d_xy,d_uv", [(0.0, 0.0), (0.1, 0.1), (0.2, 0.1)])
    def test_lossless_through_json(self, d_xy, d_uv):
        s = build_optimal(d_xy, d_uv).strategy()
        restored = strategy_from_dict(json.loads(json.dumps(strategy_to_dict(s))))
        assert_array_equal(restored.isometry, s.isometry)
        for b in Basis:
            for a, e in zip(restored.measurement(b), s.measurement(b)):
                assert_array_equal(a, e)

    def test_schema(self):
        doc = strategy_to_dict(build_optimal(0.1, 0.1).strategy())
        assert doc["format"] == "bb84-probe/strategy"
        assert doc["version"] == 1
        assert doc["probe_dim"] == 4
        assert sorted(doc["images"]) == ["u", "v", "x", "y"]
        assert len(doc["measurements"]["xy"]) == 4
        assert len(doc["images"]["x"]["real"]) == 8

    def test_rejects_other_documents(self):
        with raises(RejectedInputError):
            strategy_from_dict({"format": "something-else", "version": 1})

    def test_rejects_inconsistent_images(self):
        doc = strategy_to_dict(build_optimal(0.1, 0.1).strategy())
        doc["images"]["u"]["real"][0] += 0.01
        with raises(RejectedInputError):
            strategy_from_dict(doc)

    def test_file_round_trip(self, tmp_path):
        s = build_optimal(0.2, 0.1).strategy()
        path = tmp_path / "strategy.json"
        export_strategy_to_json(s, path)
        assert path.read_bytes().endswith(b"}\n")
        assert_allclose(load_strategy(path).isometry, s.isometry, rtol=0, atol=0)


class TestRows:
    def test_format_float(self):
        assert format_float(0.1) == "0.1"
        assert format_float(1 / 3) == "0.333333333333"
        assert format_float(0.0) == "0"

    def test_round_floats(self):
        out = round_floats({"a": [1 / 3, True, 2], "b": None, "c": np.float64(2 / 3)})
        assert out == {"a": [0.333333333333, True, 2], "b": None, "c": 0.666666666667}

    def test_csv(self):
        text = rows_to_csv(tradeoff_curve(0.0, 0.5, 0.01))
        lines = text.split("\n")
        assert lines[0] == ",".join(CSV_FIELDS)
        assert len(lines) == 53 and lines[-1] == ""
        assert "\r" not in text
        assert lines[1].endswith(",true")
        assert lines[-2].startswith("0.5,1,")
        assert lines[-2].endswith(",false")

    def test_json_matches_csv_fields(self):
        rows = rows_to_json(tradeoff_curve(0.0, 0.1, 0.05))
        assert len(rows) == 3
        assert all(list(r) == list(CSV_FIELDS) for r in rows)
        assert rows[2]["secure"] is True

    def test_write_rows(self, tmp_path):
        path = tmp_path / "out" / "curve.csv"
        write_rows(tradeoff_curve(0.0, 0.5, 0.25), "csv", path)
        assert path.read_text().count("\n") == 4

    def test_unknown_format(self):
        with raises(RejectedInputError):
            write_rows([], "xml")
