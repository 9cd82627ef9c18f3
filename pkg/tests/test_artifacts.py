import json
import os

import numpy as np
import pytest

from src.artifacts import ArtifactWriter, csv_text, format_number, read_csv


@pytest.mark.parametrize(
    "value, expected",
    [
        (True, "true"),
        (np.bool_(False), "false"),
        (3, "3"),
        (np.int64(-7), "-7"),
        (0.1, "0.10000000000000001"),
        (np.float64(2.5), "2.5"),
        (None, ""),
        ("F", "F"),
    ],
)
def test_format_number(value, expected):
    assert format_number(value) == expected


def test_floats_survive_the_text_form():
    value = 1.0 / 3.0
    assert float(format_number(value)) == value


def test_csv_text_follows_the_column_order():
    text = csv_text(["kind", "t"], [{"t": 0.5, "kind": "Vertex", "extra": 1}])
    assert text == "kind,t\nVertex,0.5\n"


def test_writer_creates_the_directory(tmp_path):
    out = tmp_path / "nested" / "run"
    writer = ArtifactWriter(str(out))
    assert out.is_dir()
    assert writer.written == []


def test_write_csv_and_read_back(tmp_path):
    writer = ArtifactWriter(str(tmp_path))
    rows = [{"stratum": "F", "s1": 0.1, "s2": -1e-17, "residual": 0.0},
            {"stratum": "T", "s1": np.float64(1.0 / 7.0), "s2": 2.0, "residual": 3e-12}]
    path = writer.write_csv("loci.csv", ["stratum", "s1", "s2", "residual"], rows)
    assert writer.written == [path]
    back = read_csv(path)
    assert [r["stratum"] for r in back] == ["F", "T"]
    assert back[0]["s2"] == -1e-17
    assert back[1]["s1"] == 1.0 / 7.0


def test_write_json_converts_numpy(tmp_path):
    writer = ArtifactWriter(str(tmp_path))
    payload = {"direction": np.array([0.6, 0.8]), "points": np.int64(4),
               "generic": np.bool_(True), "pole": float("nan")}
    path = writer.write_json("report.json", payload)
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    assert data == {"direction": [0.6, 0.8], "points": 4, "generic": True, "pole": None}


def test_write_svg(tmp_path):
    writer = ArtifactWriter(str(tmp_path))
    path = writer.write_svg("plot.svg", "<svg/>\n")
    assert os.path.basename(path) == "plot.svg"
    with open(path, encoding="utf-8") as f:
        assert f.read() == "<svg/>\n"


def test_write_failure_is_an_os_error(tmp_path):
    writer = ArtifactWriter(str(tmp_path))
    (tmp_path / "report.json").mkdir()
    with pytest.raises(OSError):
        writer.write_json("report.json", {})
    assert writer.written == []
