"""Gridded validation diagnostics.

Two fields on a fixed lat/lon raster (2 x 2 degrees by default):

  * track density — track points per year per cell;
  * wind-hit probability — the annual probability that the summed U10 wind
    over all track points in a cell reaches hurricane/typhoon force (64 kt).

Simulated catalogs are summarized by drawing many window-length year samples
and keeping the cell-wise median, so observed and simulated fields share the
same per-year normalization basis.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .geo import wrap_lon

HURRICANE_FORCE_KT = 64.0
DEFAULT_N_DRAWS = 100

# Display extents by basin; Pacific panels use 0-360 longitudes so cells do
# not straddle the antimeridian.
DEFAULT_PANELS = {
    "NA": dict(lat_min=0, lat_max=62, lon_min=-110, lon_max=2, lon_mode="signed"),
    "EP": dict(lat_min=0, lat_max=36, lon_min=180, lon_max=286, lon_mode="positive"),
    "WP": dict(lat_min=0, lat_max=56, lon_min=94, lon_max=184, lon_mode="positive"),
    "NI": dict(lat_min=0, lat_max=34, lon_min=40, lon_max=104, lon_mode="signed"),
    "SI": dict(lat_min=-42, lat_max=0, lon_min=10, lon_max=136, lon_mode="signed"),
    "SP": dict(lat_min=-42, lat_max=2, lon_min=136, lon_max=250, lon_mode="positive"),
}


@dataclass(frozen=True)
class GridSpec:
    """Raster definition; each cell owns its lower-left corner, half-open.

    Points on the global upper boundary fall in the last row/column.
    ``lon_mode`` selects the longitude convention: "signed" for (-180, 180],
    "positive" for [0, 360).
    """

    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float
    cell_deg: float = 2.0
    lon_mode: str = "signed"

    def __post_init__(self):
        if self.cell_deg <= 0:
            raise InputError("cell_deg must be positive")
        for lo, hi, name in ((self.lat_min, self.lat_max, "lat"), (self.lon_min, self.lon_max, "lon")):
            if hi < lo:  # equal bounds give a zero-cell panel, which is legal
                raise InputError(f"{name} bounds are inverted")
            span = (hi - lo) / self.cell_deg
            if abs(span - round(span)) > 1e-9:
                raise InputError(f"{name} bounds are not multiples of the cell size")
        if self.lon_mode not in ("signed", "positive"):
            raise InputError("lon_mode must be 'signed' or 'positive'")

    @property
    def n_lat(self) -> int:
        return int(round((self.lat_max - self.lat_min) / self.cell_deg))

    @property
    def n_lon(self) -> int:
        return int(round((self.lon_max - self.lon_min) / self.cell_deg))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_lat, self.n_lon)

    def project_lon(self, lon):
        """Map longitudes into this grid's convention."""
        lon = wrap_lon(lon)
        if self.lon_mode == "positive":
            lon = np.where(lon < 0.0, lon + 360.0, lon)
        return lon

    def cell_indices(self, lat, lon):
        """(row, col, in_domain mask) for point arrays."""
        lat = np.asarray(lat, dtype=float)
        lon = self.project_lon(np.asarray(lon, dtype=float))
        row = np.floor((lat - self.lat_min) / self.cell_deg).astype(np.int64)
        col = np.floor((lon - self.lon_min) / self.cell_deg).astype(np.int64)
        # upper-boundary points belong to the last cell
        row = np.where(lat == self.lat_max, self.n_lat - 1, row)
        col = np.where(lon == self.lon_max, self.n_lon - 1, col)
        ok = (row >= 0) & (row < self.n_lat) & (col >= 0) & (col < self.n_lon)
        return row, col, ok

    def cell_corners(self):
        lats = self.lat_min + self.cell_deg * np.arange(self.n_lat)
        lons = self.lon_min + self.cell_deg * np.arange(self.n_lon)
        return lats, lons

    def to_dict(self) -> dict:
        return {
            "lat_min": self.lat_min,
            "lat_max": self.lat_max,
            "lon_min": self.lon_min,
            "lon_max": self.lon_max,
            "cell_deg": self.cell_deg,
            "lon_mode": self.lon_mode,
        }

    @classmethod
    def from_dict(cls, d) -> "GridSpec":
        return cls(**d)

    @classmethod
    def for_basin(cls, basin_code: str, cell_deg: float = 2.0) -> "GridSpec":
        try:
            panel = DEFAULT_PANELS[basin_code]
        except KeyError:
            raise InputError(f"no default panel for basin {basin_code!r}") from None
        return cls(cell_deg=cell_deg, **panel)


@dataclass
class GridField:
    grid: GridSpec
    values: np.ndarray          # (n_lat, n_lon) float64
    units: str                  # "points_per_year" | "annual_probability" | "ratio"
    n_years_basis: float
    provenance: dict = field(default_factory=dict)
    counts: np.ndarray | None = None  # raw integer counts when meaningful

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise InputError("field values do not match the grid shape")
        if self.n_years_basis <= 0:
            raise InputError("n_years_basis must be positive")


@dataclass(frozen=True)
class PointSet:
    """Flat per-point view of any catalog: positions, winds, year labels."""

    lat: np.ndarray
    lon: np.ndarray
    wind: np.ndarray
    year: np.ndarray

    @classmethod
    def from_tracks(cls, tracks) -> "PointSet":
        """Build from objects exposing .lat, .lon-ish arrays, .wind and a year.

        Accepts both historical tracks (genesis_year) and synthetic tracks
        (year). Synthetic longitudes are stored unwrapped and re-wrapped here.
        """
        lat, lon, wind, year = [], [], [], []
        for t in tracks:
            n = len(t.lat)
            lat.append(np.asarray(t.lat, dtype=float))
            lon_arr = getattr(t, "lon", None)
            if lon_arr is None:
                lon_arr = wrap_lon(t.lon_unwrapped)
            lon.append(np.asarray(lon_arr, dtype=float))
            wind.append(np.asarray(t.wind, dtype=float))
            y = getattr(t, "year", None)
            if y is None:
                y = t.genesis_year
            year.append(np.full(n, y, dtype=np.int64))
        if not lat:
            return cls(np.empty(0), np.empty(0), np.empty(0), np.empty(0, dtype=np.int64))
        return cls(np.concatenate(lat), np.concatenate(lon), np.concatenate(wind), np.concatenate(year))

    def subset_years(self, years) -> "PointSet":
        mask = np.isin(self.year, years)
        return PointSet(self.lat[mask], self.lon[mask], self.wind[mask], self.year[mask])


def _as_point_set(tracks) -> PointSet:
    return tracks if isinstance(tracks, PointSet) else PointSet.from_tracks(tracks)


def track_density(tracks, grid: GridSpec, n_years: float) -> GridField:
    """Track points per year per cell; in-domain mass is conserved exactly."""
    if n_years <= 0:
        raise InputError("n_years must be positive")
    pts = _as_point_set(tracks)
    row, col, ok = grid.cell_indices(pts.lat, pts.lon)
    counts = np.zeros(grid.shape, dtype=np.int64)
    np.add.at(counts, (row[ok], col[ok]), 1)
    return GridField(
        grid=grid,
        values=counts / float(n_years),
        units="points_per_year",
        n_years_basis=float(n_years),
        provenance={"metric": "track_density"},
        counts=counts,
    )


def p64_field(tracks, grid: GridSpec, n_years: float, threshold_kt: float = HURRICANE_FORCE_KT) -> GridField:
    """Annual probability that a cell's summed track-point wind reaches 64 kt.

    The sum pools every track point of every storm inside the cell within
    one year; a year scores a hit when the pooled sum meets the threshold.
    """
    if n_years <= 0:
        raise InputError("n_years must be positive")
    pts = _as_point_set(tracks)
    n_distinct = len(np.unique(pts.year))
    if n_distinct > n_years:
        raise InputError(f"{n_distinct} distinct years present but n_years={n_years}")

    row, col, ok = grid.cell_indices(pts.lat, pts.lon)
    n_cells = grid.n_lat * grid.n_lon
    hits_flat = np.zeros(n_cells, dtype=np.int64)
    if np.any(ok):
        cell = row[ok] * grid.n_lon + col[ok]
        _, year_idx = np.unique(pts.year[ok], return_inverse=True)
        key = year_idx.astype(np.int64) * n_cells + cell
        uniq, inv = np.unique(key, return_inverse=True)
        sums = np.zeros(len(uniq))
        np.add.at(sums, inv, pts.wind[ok])  # accumulates in point order
        hit_cells = (uniq[sums >= threshold_kt] % n_cells).astype(np.int64)
        hits_flat = np.bincount(hit_cells, minlength=n_cells)
    hits = hits_flat.reshape(grid.shape)
    return GridField(
        grid=grid,
        values=hits / float(n_years),
        units="annual_probability",
        n_years_basis=float(n_years),
        provenance={"metric": "p64", "threshold_kt": threshold_kt},
        counts=hits,
    )


METRICS = {"track_density": track_density, "p64": p64_field}


def median_field(catalog, grid: GridSpec, n_b: int, n_draws: int, metric: str, seed: int = 0) -> GridField:
    """Cell-wise median of a metric over ``n_draws`` samples of ``n_b`` years.

    Each draw picks n_b distinct years from the catalog (without replacement
    within the draw; draws are independent) and computes the metric at the
    n_b-year basis. Draw substreams derive from (seed, draw index), so the
    result does not depend on evaluation order.
    """
    if metric not in METRICS:
        raise InputError(f"unknown metric {metric!r}; expected one of {sorted(METRICS)}")
    if n_draws < 1:
        raise InputError("n_draws must be at least 1")
    n_years = getattr(catalog, "n_years", None)
    if n_years is None:
        raise InputError("median_field needs a catalog with an n_years attribute")
    if n_b > n_years:
        raise InputError(f"cannot draw {n_b} years from a {n_years}-year catalog")

    pts = catalog if isinstance(catalog, PointSet) else PointSet.from_tracks(catalog.tracks)
    fn = METRICS[metric]
    stack = np.empty((n_draws,) + grid.shape)
    for d in range(n_draws):
        rng = np.random.default_rng(np.random.SeedSequence((seed, d)))
        years = rng.choice(np.arange(1, n_years + 1), size=n_b, replace=False)
        stack[d] = fn(pts.subset_years(years), grid, n_b).values
    return GridField(
        grid=grid,
        values=np.median(stack, axis=0),
        units="points_per_year" if metric == "track_density" else "annual_probability",
        n_years_basis=float(n_b),
        provenance={"metric": metric, "protocol": "cellwise_median", "n_draws": n_draws, "seed": seed},
    )


@dataclass(frozen=True)
class FieldComparison:
    log_correlation: float | None   # None when no jointly positive cells
    mean_ratio: float               # mean(field_b) / mean(field_a)
    n_joint_cells: int
    n_cells: int

    def to_dict(self) -> dict:
        return {
            "log_correlation": self.log_correlation,
            "correlation_defined": self.log_correlation is not None,
            "mean_ratio": self.mean_ratio,
            "n_joint_cells": self.n_joint_cells,
            "n_cells": self.n_cells,
        }

    def to_text(self) -> str:
        lines = [f"{k} = {v}" for k, v in self.to_dict().items()]
        return "\n".join(lines) + "\n"


def field_compare(field_a: GridField, field_b: GridField) -> FieldComparison:
    """Log-space Pearson correlation over jointly positive cells + mean ratio."""
    if field_a.grid != field_b.grid:
        raise InputError("fields live on different grids")
    a, b = field_a.values, field_b.values
    joint = (a > 0) & (b > 0)
    n_joint = int(joint.sum())

    corr = None
    if n_joint >= 2:
        la, lb = np.log10(a[joint]), np.log10(b[joint])
        if la.std() > 0 and lb.std() > 0:
            corr = float(np.corrcoef(la, lb)[0, 1])

    mean_a, mean_b = float(a.mean()), float(b.mean())
    ratio = mean_b / mean_a if mean_a != 0 else math.inf
    return FieldComparison(corr, ratio, n_joint, int(a.size))


def export_field(field: GridField, path, fmt: str = "csv") -> None:
    """Write a field as CSV (lat_cell, lon_cell, value) plus a JSON sidecar.

    Rows run row-major: latitude outer, longitude inner; the coordinates are
    each cell's lower-left corner. Values serialize at full precision. The
    sidecar records the grid, units, the per-year basis, provenance, and a
    log-scale display hint (the fields span orders of magnitude).
    """
    if fmt != "csv":
        raise InputError(f"unsupported export format {fmt!r}")
    lats, lons = field.grid.cell_corners()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lat_cell", "lon_cell", "value"])
        for i in range(field.grid.n_lat):
            for j in range(field.grid.n_lon):
                writer.writerow([repr(float(lats[i])), repr(float(lons[j])), repr(float(field.values[i, j]))])
    meta = {
        "grid": field.grid.to_dict(),
        "units": field.units,
        "n_years_basis": field.n_years_basis,
        "provenance": field.provenance,
        "display": {"scale": "log"},
        "ordering": "row-major, latitude outer, longitude inner; lower-left corners",
    }
    with open(str(path) + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")


def import_field(path) -> GridField:
    """Round-trip reader for exported fields."""
    with open(str(path) + ".meta.json", "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    grid = GridSpec.from_dict(meta["grid"])
    values = np.zeros(grid.shape)
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["lat_cell", "lon_cell", "value"]:
            raise InputError(f"{path}: unexpected field CSV header {header}")
        lats, lons = grid.cell_corners()
        for lat_s, lon_s, val_s in reader:
            i = int(round((float(lat_s) - grid.lat_min) / grid.cell_deg))
            j = int(round((float(lon_s) - grid.lon_min) / grid.cell_deg))
            values[i, j] = float(val_s)
    return GridField(
        grid=grid,
        values=values,
        units=meta["units"],
        n_years_basis=meta["n_years_basis"],
        provenance=meta.get("provenance", {}),
    )
