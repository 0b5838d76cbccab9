import math

import pytest

from omniport import io as tio
from omniport.metrics import SpectrumRecord


def sample():
    return tio.Table(
        ("xi", "T_fwd", "I", "stable"),
        ((0.1, 1 / 3, math.inf, True), (0.2, 2.0e-300, float("nan"), False)),
        (("xi", (0.1, 0.2)),),
        "abc",
    )


def test_one_record_table_is_two_lines():
    t = tio.Table(("xi", "T_fwd"), ((0.0, 1.0),))
    assert tio.to_csv(t) == "xi,T_fwd\n0.0,1.0\n"


def test_csv_roundtrip_keeps_full_precision():
    t = sample()
    back = tio.from_csv(tio.to_csv(t))
    assert back.columns == t.columns
    assert back.rows[0][:3] == (0.1, 1 / 3, math.inf)
    assert back.rows[0][3] is True
    assert math.isnan(back.rows[1][2])
    assert back.rows[1][1] == 2.0e-300


def test_csv_writes_inf_marker():
    assert ",inf," in tio.to_csv(sample())


def test_json_roundtrip():
    t = sample()
    back = tio.from_json(tio.to_json(t))
    assert back.columns == t.columns and back.axes == t.axes
    assert back.scenario_hash == "abc"
    assert back.rows[0] == t.rows[0]
    assert math.isnan(back.rows[1][2])


def test_json_document_shape():
    import json

    doc = json.loads(tio.to_json(sample()))
    assert doc["schema"] == "omniport.table/1"
    assert set(doc) == {"schema", "scenario_hash", "axes", "columns", "records"}
    assert doc["records"][0]["I"] == "inf"


def test_json_rejects_other_schema():
    with pytest.raises(ValueError):
        tio.from_json('{"schema": "other/2"}')


def test_row_width_checked():
    with pytest.raises(ValueError):
        tio.Table(("a", "b"), ((1.0,),))


def test_unknown_format():
    with pytest.raises(ValueError):
        tio.render(sample(), "xml")


def test_emit_to_file_and_unwritable(tmp_path, capsys):
    path = tmp_path / "t.csv"
    text = tio.emit(sample(), "csv", path)
    assert path.read_text() == text
    tio.emit(sample(), "csv", "-")
    assert capsys.readouterr().out == text
    with pytest.raises(OSError):
        tio.emit(sample(), "csv", tmp_path / "missing" / "t.csv")


def test_spectrum_table_columns():
    rec = SpectrumRecord(0.0, 2.0, 0.0, math.inf, (1.0, 0.5), 0.25)
    t = tio.spectrum_table([rec], ("xi", "S2", "I", "log10_I"))
    assert t.rows == ((0.0, 0.5, math.inf, math.inf),)
