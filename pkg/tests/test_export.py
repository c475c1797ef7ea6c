import json

from qcrb.export import (
    format_for_path,
    format_number,
    render_csv,
    render_json,
    render_table,
    write_auto,
    write_csv,
    write_json,
    write_table,
)

import numpy as np


def test_format_number():
    assert format_number(None) == ""
    assert format_number(0.0) == "0"
    assert format_number(2) == "2"
    assert format_number(2.0975) == "2.0975"
    assert format_number(1.0 / 3.0) == "0.333333333333"
    assert format_number(1.5e-5) == "1.50000000000e-05"
    assert format_number(-2.5e6) == "-2.50000000000e+06"
    assert format_number(True) == "true"
    assert format_number("sld") == "sld"
    assert format_number(np.float64(0.25)) == "0.25"


def test_render_csv_lf_and_columns():
    rows = [{"r": 0.0, "c_sld": 2.0}, {"r": 0.1, "c_sld": 2.5, "extra": 1}]
    text = render_csv(rows, ["r", "c_sld"])
    assert "\r" not in text
    assert text.splitlines() == ["r,c_sld", "0,2", "0.1,2.5"]
    assert text.endswith("\n")
    # column order follows first appearance when not given
    assert render_csv(rows).splitlines()[0] == "r,c_sld,extra"
    assert render_csv(rows).splitlines()[1] == "0,2,"
    assert render_csv([]) == ""


def test_render_table_alignment():
    rows = [{"quantity": "C_sld", "value": 2.0}, {"quantity": "C_holevo", "value": 2.0975}]
    lines = render_table(rows, ["quantity", "value"]).splitlines()
    assert lines[0].split() == ["quantity", "value"]
    assert set(lines[1].replace(" ", "")) == {"-"}
    assert lines[2].split() == ["C_sld", "2"]
    assert lines[3].split() == ["C_holevo", "2.0975"]
    assert lines[2].index("2") == lines[3].index("2.0975") == lines[0].index("value")
    assert render_table([]) == ""


def test_render_json_arrays():
    text = render_json({"b": np.array([1.0, 2.0]), "a": (1, 2), 0.5: None})
    data = json.loads(text)
    assert data == {"0.5": None, "a": [1, 2], "b": [1.0, 2.0]}
    assert text.endswith("\n")


def test_writers(tmp_path):
    rows = [{"x": 1.0, "y": 2.0}]
    p = tmp_path / "out.csv"
    write_csv(str(p), rows)
    assert p.read_bytes() == b"x,y\n1,2\n"
    t = tmp_path / "out.txt"
    write_table(str(t), rows)
    assert t.read_text().splitlines()[2].split() == ["1", "2"]
    j = tmp_path / "out.json"
    write_json(str(j), {"k": np.arange(2)})
    assert json.loads(j.read_text()) == {"k": [0, 1]}


def test_write_auto(tmp_path):
    rows = [{"x": 1.0}]
    write_auto(str(tmp_path / "a.csv"), rows)
    assert (tmp_path / "a.csv").read_text() == "x\n1\n"
    write_auto(str(tmp_path / "a.txt"), rows)
    assert (tmp_path / "a.txt").read_text().startswith("x")
    write_auto(str(tmp_path / "a.json"), {"k": 1})
    assert json.loads((tmp_path / "a.json").read_text()) == {"k": 1}
    write_auto(str(tmp_path / "b.json"), [1, 2])
    assert json.loads((tmp_path / "b.json").read_text()) == {"data": [1, 2]}


def test_format_for_path():
    assert format_for_path("out.csv") == "csv"
    assert format_for_path("dir/OUT.TXT") == "table"
    assert format_for_path("report.json") == "json"
    assert format_for_path("report.dat") is None
    assert format_for_path("noext") is None


def test_write_auto_format_and_columns(tmp_path):
    rows = [{"x": 1.0, "y": 2.0}]
    p = tmp_path / "out.dat"
    write_auto(str(p), rows, ["y", "x"], fmt="csv")
    assert p.read_text() == "y,x\n2,1\n"
    write_auto(str(p), rows, ["y"], fmt="table")
    assert p.read_text().splitlines()[0].split() == ["y"]
    # rows asked for as json are wrapped
    write_auto(str(p), rows, fmt="json")
    assert json.loads(p.read_text()) == {"data": [{"x": 1.0, "y": 2.0}]}
