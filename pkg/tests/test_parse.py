import io

import pytest

from stormweave.basins import basin_config
from stormweave.errors import InputError
from stormweave.ibtracs import parse_archive, write_rejects_report

CFG = basin_config("NI").with_overrides(record_start_year=1990, modern_cutoff_year=1990, record_end_year=2000)

HEADER = "SID,SEASON,NUMBER,BASIN,SUBBASIN,NAME,ISO_TIME,NATURE,LAT,LON,WMO_WIND,WMO_PRES\n"
UNITS = ",Year,,,,,,,degrees_north,degrees_east,kts,mb\n"


def _parse(body):
    return parse_archive(io.StringIO(HEADER + UNITS + body), CFG)


def test_three_rows_pass_through_in_time_order():
    rows, rejects = _parse(
        "A1,1995,1,NI,,X,1995-06-01 00:00:00,TS,10.0,85.0,40,\n"
        "A1,1995,1,NI,,X,1995-06-01 06:00:00,TS,10.5,84.5,45,\n"
        "A1,1995,1,NI,,X,1995-06-01 12:00:00,TS,11.0,84.0,50,\n"
    )
    assert rejects == []
    assert [r.lat for r in rows] == [10.0, 10.5, 11.0]
    assert [r.wind_kt for r in rows] == [40.0, 45.0, 50.0]


def test_other_basin_rows_excluded():
    rows, rejects = _parse("B1,1995,1,SP,,X,1995-06-01 00:00:00,TS,-10.0,160.0,40,\n")
    assert rows == [] and rejects == []


def test_sentinel_latitude_goes_to_rejects():
    rows, rejects = _parse("C1,1995,1,NI,,X,1995-06-01 00:00:00,TS,999,85.0,40,\n")
    assert rows == []
    assert len(rejects) == 1
    assert "latitude" in rejects[0].reason
    assert rejects[0].line_number == 3  # header and units rows precede it


def test_missing_position_rejected_missing_wind_kept():
    rows, rejects = _parse(
        "D1,1995,1,NI,,X,1995-06-01 00:00:00,TS,,85.0,40,\n"
        "D1,1995,1,NI,,X,1995-06-01 06:00:00,TS,10.0,85.0,,\n"
    )
    assert len(rejects) == 1 and "position" in rejects[0].reason
    assert len(rows) == 1 and rows[0].wind_kt is None


def test_rows_sorted_by_storm_then_time():
    rows, _ = _parse(
        "E2,1995,2,NI,,X,1995-06-01 00:00:00,TS,12.0,85.0,40,\n"
        "E1,1995,1,NI,,X,1995-06-02 00:00:00,TS,10.0,85.0,40,\n"
        "E1,1995,1,NI,,X,1995-06-01 00:00:00,TS,11.0,85.0,40,\n"
    )
    assert [(r.storm_id, r.lat) for r in rows] == [("E1", 11.0), ("E1", 10.0), ("E2", 12.0)]


def test_season_outside_record_window_excluded():
    rows, rejects = _parse("F1,1989,1,NI,,X,1989-06-01 00:00:00,TS,10.0,85.0,40,\n")
    assert rows == [] and rejects == []


def test_longitudes_normalized():
    rows, _ = _parse("G1,1995,1,NI,,X,1995-06-01 00:00:00,TS,10.0,270.0,40,\n")
    assert rows[0].lon == -90.0


def test_unreadable_source_is_fatal(tmp_path):
    with pytest.raises(InputError):
        parse_archive(tmp_path / "missing.csv", CFG)


def test_missing_column_is_fatal():
    with pytest.raises(InputError, match="WMO_WIND"):
        parse_archive(io.StringIO("SID,SEASON,BASIN,ISO_TIME,LAT,LON\n"), CFG)


def test_bad_timestamp_rejected_not_fatal():
    rows, rejects = _parse("H1,1995,1,NI,,X,yesterday,TS,10.0,85.0,40,\n")
    assert rows == []
    assert len(rejects) == 1 and "timestamp" in rejects[0].reason


def test_rejects_report_roundtrip(tmp_path):
    _, rejects = _parse("C1,1995,1,NI,,X,1995-06-01 00:00:00,TS,999,85.0,40,\n")
    path = tmp_path / "rejects.csv"
    write_rejects_report(path, rejects)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "line,reason"
    assert lines[1].startswith("3,")


def test_custom_column_mapping():
    # archive-version drift: logical fields can be remapped per config
    cfg = CFG.with_overrides(columns={
        "storm_id": "ID", "season": "YR", "basin": "BSN",
        "time": "WHEN", "lat": "Y", "lon": "X", "wind": "VMAX",
    })
    body = (
        "ID,YR,BSN,WHEN,Y,X,VMAX\n"
        "Z1,1995,NI,1995-06-01 00:00:00,10.0,85.0,40\n"
        "Z1,1995,NI,1995-06-01 06:00:00,10.5,84.5,45\n"
    )
    rows, rejects = parse_archive(io.StringIO(body), cfg)
    assert rejects == []
    assert len(rows) == 2
    assert rows[0].storm_id == "Z1" and rows[0].wind_kt == 40.0


def test_negative_wind_sentinel_kept_as_missing():
    rows, rejects = _parse("N1,1995,1,NI,,X,1995-06-01 00:00:00,TS,10.0,85.0,-99,\n")
    assert rejects == []
    assert len(rows) == 1 and rows[0].wind_kt is None
