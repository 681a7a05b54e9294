"""Best-track archive parsing (point-per-row CSV, "list" layout).

The parser is deliberately forgiving at row level: a malformed row goes to a
rejects report with its line number and reason instead of aborting the whole
ingest. Only an unreadable source is fatal.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from datetime import datetime

from .basins import BasinConfig
from .errors import InputError
from .geo import wrap_lon_scalar

LOGGER = logging.getLogger(__name__)

# Values the archive uses where a field is unknown.
MISSING_TOKENS = {"", " ", "NA", "NAN", "MM", "-999", "-999.0"}

TIME_FORMATS = ("%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M")


@dataclass
class RawBestTrackRow:
    storm_id: str
    season: int
    basin_code: str
    time: datetime
    lat: float
    lon: float
    wind_kt: float | None  # agency-native averaging; None when unreported
    line_number: int


@dataclass
class RejectedRow:
    line_number: int
    reason: str


def _parse_float(token: str) -> float | None:
    tok = token.strip()
    if tok.upper() in MISSING_TOKENS:
        return None
    try:
        return float(tok)
    except ValueError:
        raise InputError(f"not a number: {token!r}") from None


def _parse_time(token: str) -> datetime:
    tok = token.strip()
    for fmt in TIME_FORMATS:
        try:
            return datetime.strptime(tok, fmt)
        except ValueError:
            continue
    raise InputError(f"unparseable timestamp: {token!r}")


def parse_archive(csv_source, config: BasinConfig) -> tuple[list[RawBestTrackRow], list[RejectedRow]]:
    """Parse an archive CSV into rows for one basin.

    Returns (rows, rejects). Rows are filtered to ``config.basin_code`` and
    to the record window, dropped if the position is missing or out of
    range, and sorted by (storm_id, time). ``csv_source`` is a path or an
    open text file.
    """
    if hasattr(csv_source, "read"):
        rows, rejects = _parse_stream(csv_source, config)
    else:
        try:
            fh = open(csv_source, "r", newline="", encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read archive {csv_source}: {exc}") from exc
        with fh:
            rows, rejects = _parse_stream(fh, config)

    rows.sort(key=lambda r: (r.storm_id, r.time))
    return rows, rejects


def _parse_stream(fh, config: BasinConfig):
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("archive is empty") from None
    header = [h.strip() for h in header]

    cols = {}
    for logical, name in config.columns.items():
        try:
            cols[logical] = header.index(name)
        except ValueError:
            raise InputError(f"archive is missing required column {name!r}") from None

    rows: list[RawBestTrackRow] = []
    rejects: list[RejectedRow] = []
    for line_no, record in enumerate(reader, start=2):
        if not record or all(not c.strip() for c in record):
            continue
        season_tok = record[cols["season"]].strip() if len(record) > cols["season"] else ""
        if line_no == 2 and not season_tok.lstrip("+-").isdigit():
            continue  # units row under the header
        try:
            row = _parse_row(record, cols, line_no, config)
        except InputError as exc:
            rejects.append(RejectedRow(line_no, str(exc)))
            continue
        if row is not None:
            rows.append(row)
    return rows, rejects


def _parse_row(record, cols, line_no, config) -> RawBestTrackRow | None:
    needed = max(cols.values())
    if len(record) <= needed:
        raise InputError(f"row has {len(record)} fields, need at least {needed + 1}")

    basin = record[cols["basin"]].strip()
    if basin != config.basin_code:
        return None

    try:
        season = int(record[cols["season"]].strip())
    except ValueError:
        raise InputError(f"bad season: {record[cols['season']]!r}") from None
    if not (config.record_start_year <= season <= config.record_end_year):
        return None

    lat = _parse_float(record[cols["lat"]])
    lon = _parse_float(record[cols["lon"]])
    if lat is None or lon is None:
        raise InputError("missing position")
    if not -90.0 <= lat <= 90.0:
        raise InputError(f"latitude {lat} out of range")
    if not -540.0 <= lon <= 540.0:
        raise InputError(f"longitude {lon} out of range")
    lon = wrap_lon_scalar(lon)

    wind = _parse_float(record[cols["wind"]])
    if wind is not None and wind < 0:
        wind = None  # negative sentinel: the position is still usable

    return RawBestTrackRow(
        storm_id=record[cols["storm_id"]].strip(),
        season=season,
        basin_code=basin,
        time=_parse_time(record[cols["time"]]),
        lat=lat,
        lon=lon,
        wind_kt=wind,
        line_number=line_no,
    )


def write_rejects_report(path, rejects: list[RejectedRow]) -> None:
    """CSV report of dropped rows: line, reason."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["line", "reason"])
        for rej in rejects:
            writer.writerow([rej.line_number, rej.reason])
