import json

from nonmarkov.output import OutputFormat, format_output, read_csv, write_csv, write_json


def test_write_csv_keeps_full_precision(tmp_path):
    rows = [{"t": 0.1, "g": 1 / 3, "in_idi": 1}, {"t": 0.2, "g": 2e-17, "in_idi": 0}]
    path = write_csv(tmp_path / "nested" / "m.csv", ("t", "g", "in_idi"), rows)
    text = path.read_text()
    assert text.splitlines() == ["t,g,in_idi", "0.1,0.3333333333333333,1", "0.2,2e-17,0"]
    header, back = read_csv(path)
    assert header == ["t", "g", "in_idi"]
    assert float(back[0]["g"]) == 1 / 3


def test_write_csv_is_deterministic(tmp_path):
    rows = [{"t": float(i) / 7, "x": float(i) ** 0.5} for i in range(20)]
    first = write_csv(tmp_path / "a.csv", ("t", "x"), rows).read_bytes()
    second = write_csv(tmp_path / "b.csv", ("t", "x"), rows).read_bytes()
    assert first == second


def test_read_empty_csv(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    assert read_csv(path) == ([], [])


def test_write_json(tmp_path):
    path = write_json(tmp_path / "i.json", {"idi": [[0.0, 1.5]], "ibi": []})
    assert json.loads(path.read_text()) == {"idi": [[0.0, 1.5]], "ibi": []}


def test_format_output_json(capsys):
    format_output({"label": "1a", "points": 3}, OutputFormat.json)
    assert json.loads(capsys.readouterr().out) == {"label": "1a", "points": 3}


def test_format_output_csv(capsys):
    format_output([{"a": 1, "b": [1, 2]}], OutputFormat.csv)
    assert capsys.readouterr().out.splitlines() == ["a,b", '1,"[1, 2]"']
