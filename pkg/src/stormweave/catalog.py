"""Catalog files: point-per-row CSV plus a JSON metadata sidecar.

Columns: year, storm_index, step_index, timestamp, lat, lon, wind_u10_kt,
join_flag. Floats serialize with repr (shortest round-trip), so identical
catalogs produce byte-identical files. Timestamps use a synthetic 365-day
calendar seeded from each storm's genesis day of year; storms crossing the
year boundary roll the printed year label only.

The same layout doubles as the generic interchange format: any external
catalog converted to these columns can be fed to the diagnostics.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .geo import wrap_lon
from .simulate import SyntheticCatalog, SyntheticTrack

CATALOG_COLUMNS = ["year", "storm_index", "step_index", "timestamp", "lat", "lon", "wind_u10_kt", "join_flag"]

_MONTH_DAYS = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31]
_MONTH_STARTS = np.cumsum([0] + _MONTH_DAYS[:-1])


def synthetic_timestamp(year: int, genesis_day_of_year: int, step_index: int) -> str:
    """ISO-style stamp on a fixed 365-day calendar, 3 hours per step."""
    total_hours = (genesis_day_of_year - 1) * 24 + 3 * step_index
    day = total_hours // 24
    hour = total_hours % 24
    year_label = year + day // 365
    doy = day % 365  # zero-based
    month = int(np.searchsorted(_MONTH_STARTS, doy, side="right"))
    dom = doy - int(_MONTH_STARTS[month - 1]) + 1
    return f"{year_label:04d}-{month:02d}-{dom:02d}T{hour:02d}:00:00"


def write_catalog(path, catalog: SyntheticCatalog, provenance_path=None) -> None:
    """Write the catalog CSV, its metadata sidecar, and optional provenance."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CATALOG_COLUMNS)
        by_year = catalog.tracks_by_year()
        for year in range(1, catalog.n_years + 1):
            for storm_index, track in enumerate(by_year[year]):
                joins = {j["index"] for j in track.joins}
                lon = wrap_lon(track.lon_unwrapped)
                for k in range(len(track)):
                    writer.writerow(
                        [
                            year,
                            storm_index,
                            k,
                            synthetic_timestamp(year, track.genesis_day_of_year, k),
                            repr(float(track.lat[k])),
                            repr(float(lon[k])),
                            repr(float(track.wind[k])),
                            1 if k in joins else 0,
                        ]
                    )

    meta = {
        "basin": catalog.basin_code,
        "n_years": catalog.n_years,
        "n_tracks": len(catalog.tracks),
        "params": catalog.params.to_dict(),
        "library_checksum": catalog.library_checksum,
        "table_checksum": catalog.table_checksum,
        "generator_version": catalog.generator_version,
        "backend": catalog.backend_name,
        "early_terminated_tracks": sum(1 for t in catalog.tracks if t.early_terminated),
    }
    with open(str(path) + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")

    if provenance_path is not None:
        write_provenance(provenance_path, catalog)


def write_provenance(path, catalog: SyntheticCatalog) -> None:
    records = []
    by_year = catalog.tracks_by_year()
    for year in range(1, catalog.n_years + 1):
        for storm_index, track in enumerate(by_year[year]):
            records.append(
                {
                    "year": year,
                    "storm_index": storm_index,
                    "genesis_day_of_year": track.genesis_day_of_year,
                    "sampled_lifetime": track.sampled_lifetime,
                    "early_terminated": track.early_terminated,
                    "segments": [
                        {
                            "storm_id": seg.storm_id,
                            "track_index": seg.track_index,
                            "src_start": seg.src_start,
                            "synth_start": seg.synth_start,
                            "length": seg.length,
                        }
                        for seg in track.segments
                    ],
                    "joins": track.joins,
                }
            )
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(records, fh, sort_keys=True, indent=1)
        fh.write("\n")


@dataclass
class CatalogView:
    """A catalog as read back from the generic CSV format."""

    tracks: list[SyntheticTrack]
    n_years: int
    meta: dict


def read_catalog(path, n_years: int | None = None) -> CatalogView:
    """Read a catalog (ours or any external one in the generic format).

    Files with our metadata sidecar keep their year labels. For sidecar-less
    external files the labels normalize so the earliest becomes year 1 (some
    public catalogs are 0-based), and ``n_years`` defaults to the largest
    normalized label, so a catalog with leading or trailing empty years
    should pass ``n_years`` explicitly. Raises InputError naming the first
    missing column when the header does not match the generic format.
    """
    try:
        fh = open(path, "r", newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read catalog {path}: {exc}") from exc

    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: catalog file is empty") from None
        idx = {}
        for col in CATALOG_COLUMNS:
            if col == "timestamp" or col == "join_flag":
                continue  # optional for external catalogs
            try:
                idx[col] = header.index(col)
            except ValueError:
                raise InputError(f"{path}: catalog is missing required column {col!r}") from None

        storms: dict[tuple[int, int], dict] = {}
        for record in reader:
            if not record:
                continue
            key = (int(record[idx["year"]]), int(record[idx["storm_index"]]))
            storm = storms.setdefault(key, {"lat": [], "lon": [], "wind": []})
            storm["lat"].append(float(record[idx["lat"]]))
            storm["lon"].append(float(record[idx["lon"]]))
            storm["wind"].append(float(record[idx["wind_u10_kt"]]))

    meta = {}
    meta_path = str(path) + ".meta.json"
    try:
        with open(meta_path, "r", encoding="utf-8") as mfh:
            meta = json.load(mfh)
    except OSError:
        pass

    # sidecar-less external catalogs may label years from 0 (or any base);
    # our own files carry a sidecar and keep their labels untouched
    year_offset = 0
    if storms and "n_years" not in meta:
        year_offset = 1 - min(year for year, _ in storms)

    tracks = []
    for (year, _), storm in sorted(storms.items()):
        lat = np.array(storm["lat"])
        lon = np.array(storm["lon"])
        tracks.append(
            SyntheticTrack(
                year=year + year_offset,
                genesis_day_of_year=1,
                lat=lat,
                lon_unwrapped=np.unwrap(lon, period=360.0) if len(lon) > 1 else lon,
                wind=np.array(storm["wind"]),
                segments=[],
                joins=[],
                early_terminated=False,
                sampled_lifetime=max(len(lat) - 1, 0),
            )
        )

    if n_years is None:
        n_years = meta.get("n_years")
    if n_years is None:
        n_years = max((t.year for t in tracks), default=0)
    return CatalogView(tracks=tracks, n_years=int(n_years), meta=meta)
