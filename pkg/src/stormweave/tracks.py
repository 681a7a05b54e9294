"""Track containers and interpolation onto the uniform 3-hour grid.

A HistoricalTrack stores positions and U10 winds as parallel numpy arrays at
exactly 3-hour spacing, anchored at the first observation. Longitudes are
kept both wrapped (for output) and unwrapped (for interpolation, translation
and smoothing, so antimeridian crossings behave).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .basins import BasinConfig, convert_wind
from .errors import InputError
from .geo import motion_vectors, unwrap_lon, wrap_lon
from .ibtracs import RawBestTrackRow

LOGGER = logging.getLogger(__name__)

STEP_HOURS = 3.0


@dataclass(frozen=True)
class TrackPoint:
    """One 3-hourly sample; step_index counts steps from genesis."""

    step_index: int
    lat: float
    lon: float
    wind_u10: float


@dataclass
class HistoricalTrack:
    """One storm on the 3-hour grid, winds already on the U10 scale."""

    storm_id: str
    basin_code: str
    genesis_year: int
    genesis_day_of_year: int
    lat: np.ndarray
    lon: np.ndarray            # wrapped to (-180, 180]
    lon_unwrapped: np.ndarray  # continuous within the track
    wind: np.ndarray
    wind_filled: bool = False  # any wind linearly filled from neighbors
    wind_converted: bool = True

    def __post_init__(self):
        n = len(self.lat)
        if n < 2:
            raise InputError(f"track {self.storm_id}: needs at least 2 points, got {n}")
        if not (len(self.lon) == len(self.lon_unwrapped) == len(self.wind) == n):
            raise InputError(f"track {self.storm_id}: ragged arrays")
        if np.any(self.wind < 0):
            raise InputError(f"track {self.storm_id}: negative wind")

    def __len__(self) -> int:
        return len(self.lat)

    @property
    def n_steps(self) -> int:
        """Lifetime in 3-h steps (points - 1)."""
        return len(self.lat) - 1

    def point(self, k: int) -> TrackPoint:
        return TrackPoint(k, float(self.lat[k]), float(self.lon[k]), float(self.wind[k]))

    def motion_vectors(self) -> tuple[np.ndarray, np.ndarray]:
        return motion_vectors(self.lat, self.lon_unwrapped, self.wind)


class TrackDropped(Exception):
    """A storm could not be interpolated; carries the reason."""


def interpolate_track(rows: list[RawBestTrackRow], config: BasinConfig) -> HistoricalTrack:
    """Resample one storm's observations onto the 3-hour grid.

    Positions interpolate linearly in time (longitudes unwrapped first so
    crossings take the short arc). Winds are converted to U10 before
    interpolation; interior gaps fill linearly between the nearest valid
    observations, and grid points outside the first/last valid wind are
    dropped rather than extrapolated. Raises TrackDropped when fewer than
    two usable points remain.
    """
    if len(rows) < 2:
        raise TrackDropped(f"{rows[0].storm_id if rows else '?'}: fewer than 2 valid rows")
    storm_id = rows[0].storm_id

    t0 = rows[0].time
    hours = np.array([(r.time - t0).total_seconds() / 3600.0 for r in rows])
    if np.any(np.diff(hours) <= 0):
        order = np.argsort(hours, kind="stable")
        keep = [int(order[0])]
        for idx in order[1:]:
            if hours[idx] > hours[keep[-1]]:
                keep.append(int(idx))
        rows = [rows[k] for k in keep]
        hours = hours[keep]
        if len(rows) < 2:
            raise TrackDropped(f"{storm_id}: fewer than 2 distinct observation times")

    lat_obs = np.array([r.lat for r in rows])
    lon_obs = unwrap_lon(np.array([r.lon for r in rows]))
    wind_obs = np.array(
        [convert_wind(r.wind_kt, config.wind_convention) if r.wind_kt is not None else np.nan for r in rows]
    )

    duration = hours[-1] - hours[0]
    n_points = 1 + int(duration / STEP_HOURS + 1e-9)  # grid never extends past the record
    grid = hours[0] + STEP_HOURS * np.arange(n_points)

    lat_g = np.interp(grid, hours, lat_obs)
    lon_g = np.interp(grid, hours, lon_obs)

    valid = ~np.isnan(wind_obs)
    if not np.any(valid):
        raise TrackDropped(f"{storm_id}: no valid wind observations")
    wind_filled = bool(np.any(~valid))
    vh = hours[valid]
    # interior gaps fill linearly; outside the valid wind span the grid
    # points are dropped below rather than held or extrapolated
    wind_g = np.interp(grid, vh, wind_obs[valid])

    in_span = (grid >= vh[0]) & (grid <= vh[-1])
    if np.count_nonzero(in_span) < 2:
        raise TrackDropped(f"{storm_id}: fewer than 2 points inside the wind record")
    lat_g, lon_g, wind_g, grid_kept = lat_g[in_span], lon_g[in_span], wind_g[in_span], grid[in_span]

    genesis_time = t0 + _timedelta_hours(grid_kept[0])
    return HistoricalTrack(
        storm_id=storm_id,
        basin_code=config.basin_code,
        genesis_year=rows[0].season,
        genesis_day_of_year=genesis_time.timetuple().tm_yday,
        lat=lat_g,
        lon=wrap_lon(lon_g),
        lon_unwrapped=lon_g,
        wind=wind_g,
        wind_filled=wind_filled,
    )


def _timedelta_hours(h: float):
    from datetime import timedelta

    return timedelta(hours=float(h))


def interpolate_storms(rows: list[RawBestTrackRow], config: BasinConfig) -> tuple[list[HistoricalTrack], list[str]]:
    """Group rows by storm and interpolate each; returns (tracks, drop log)."""
    by_storm: dict[str, list[RawBestTrackRow]] = {}
    for row in rows:
        by_storm.setdefault(row.storm_id, []).append(row)

    tracks, dropped = [], []
    for storm_id in sorted(by_storm):
        try:
            tracks.append(interpolate_track(by_storm[storm_id], config))
        except TrackDropped as exc:
            LOGGER.info("dropped storm: %s", exc)
            dropped.append(str(exc))
    return tracks, dropped
