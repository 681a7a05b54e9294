"""The immutable per-basin segment library.

Construction flattens every interpolated track into parallel point arrays,
builds a spherical KD-tree for radius queries, and computes the basin
normalization constants (max comparative-vector difference, max age
difference, max absolute wind difference) over exactly the point pairs the
transition kernel can compare: eligible source x eligible destination inside
the candidate radius. Eligibility excludes each track's reserved terminal
points, which are kept free so joins always have room to continue.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import backend, container
from .basins import BasinConfig
from .errors import InputError
from .geo import chord_for_arc_deg, to_unit_xyz
from .tracks import HistoricalTrack

LOGGER = logging.getLogger(__name__)

LIBRARY_SCHEMA = "stormweave-library/1"

DEFAULT_RADIUS_DEG = 2.5
MIN_RESERVED_STEPS = 3
RESERVED_FRACTION = 0.05

# Normalizer floor when even the global pair population is degenerate
# (single-point fixtures); keeps standardized covariates finite.
NORMALIZER_FLOOR = 1.0


def default_reserved_steps(tracks: list[HistoricalTrack]) -> int:
    mean_steps = float(np.mean([t.n_steps for t in tracks]))
    return max(MIN_RESERVED_STEPS, int(round(RESERVED_FRACTION * mean_steps)))


@dataclass(frozen=True)
class SegmentLibrary:
    basin_code: str
    config: BasinConfig
    tracks: tuple
    modern_mask: np.ndarray        # per-track, genesis in the modern window
    radius_deg: float
    reserved_steps: int
    max_v: float
    max_t: float
    max_dw: float
    # flattened point arrays
    point_lat: np.ndarray
    point_lon: np.ndarray
    point_xyz: np.ndarray
    point_vx: np.ndarray
    point_vy: np.ndarray
    point_age: np.ndarray          # step index within track, float64
    point_wind: np.ndarray
    point_track: np.ndarray        # track index per point
    point_step: np.ndarray         # step index per point (int64)
    track_offsets: np.ndarray      # len n_tracks + 1
    eligible: np.ndarray           # outside the reserved terminal points
    checksum: str
    _kdtree: cKDTree = field(repr=False, compare=False, default=None)

    @property
    def n_tracks(self) -> int:
        return len(self.tracks)

    @property
    def n_points(self) -> int:
        return len(self.point_lat)

    @property
    def modern_track_ids(self) -> list[str]:
        return [t.storm_id for t, m in zip(self.tracks, self.modern_mask) if m]

    def track_len(self, track_idx: int) -> int:
        return int(self.track_offsets[track_idx + 1] - self.track_offsets[track_idx])

    def global_id(self, track_idx: int, step: int) -> int:
        return int(self.track_offsets[track_idx]) + step

    def ball_prefilter(self, gid: int, radius_deg: float) -> np.ndarray:
        """Chord-radius KD prefilter around a library point (sorted ids).

        Slightly over-inclusive by construction; callers decide membership
        with the exact great-circle test.
        """
        chord = chord_for_arc_deg(radius_deg) * (1.0 + 1e-9)
        ids = np.asarray(self._kdtree.query_ball_point(self.point_xyz[gid], chord), dtype=np.int64)
        ids.sort()
        return ids

    def radius_query(self, lat: float, lon: float, radius_deg: float) -> np.ndarray:
        """Global ids of all points within ``radius_deg`` of (lat, lon).

        The KD-tree prefilters by chord distance (slightly inflated); actual
        membership is decided by the exact great-circle test, so results
        match an exhaustive scan with the same metric.
        """
        xyz = to_unit_xyz(lat, lon)
        chord = chord_for_arc_deg(radius_deg) * (1.0 + 1e-9)
        ids = np.asarray(self._kdtree.query_ball_point(xyz, chord), dtype=np.int64)
        if ids.size == 0:
            return ids
        ids.sort()
        arc, _, _, _ = backend.pair_fields(
            xyz, 0.0, 0.0, 0.0, 0.0,
            self.point_xyz[ids], self.point_vx[ids], self.point_vy[ids],
            self.point_age[ids], self.point_wind[ids],
        )
        return ids[arc <= radius_deg]

    def nearest_eligible(self, lat: float, lon: float) -> tuple[int, float]:
        """Nearest eligible point to (lat, lon): (global id, distance in deg).

        Searches inside the candidate radius first; when nothing eligible is
        that close, widens to the global nearest. Exact-distance ties break
        deterministically by (storm_id, step index) via the sorted flat
        point order within each distance.
        """
        ids = self.radius_query(lat, lon, self.radius_deg)
        ids = ids[self.eligible[ids]]
        widened = ids.size == 0
        if widened:
            # ask for progressively more neighbors until one is eligible
            k = 16
            while True:
                k = min(k, self.n_points)
                _, cand = self._kdtree.query(to_unit_xyz(lat, lon), k=k)
                cand = np.atleast_1d(np.asarray(cand, dtype=np.int64))
                cand = cand[cand < self.n_points]
                cand = cand[self.eligible[cand]]
                if cand.size:
                    ids = np.sort(cand)
                    break
                if k >= self.n_points:
                    raise InputError("library has no eligible points")
                k *= 4
            LOGGER.info("genesis attach widened beyond %.3g deg radius", self.radius_deg)
        xyz = to_unit_xyz(lat, lon)
        arc, _, _, _ = backend.pair_fields(
            xyz, 0.0, 0.0, 0.0, 0.0,
            self.point_xyz[ids], self.point_vx[ids], self.point_vy[ids],
            self.point_age[ids], self.point_wind[ids],
        )
        best = arc.min()
        tied = ids[arc == best]
        keys = [(self.tracks[self.point_track[g]].storm_id, int(self.point_step[g])) for g in tied]
        winner = min(range(len(tied)), key=lambda i: keys[i])
        return int(tied[winner]), float(best)


def build_library(
    tracks: list[HistoricalTrack],
    config: BasinConfig,
    radius_deg: float = DEFAULT_RADIUS_DEG,
    reserved_steps: int | None = None,
) -> SegmentLibrary:
    """Assemble the immutable library from interpolated tracks."""
    return _assemble(tracks, config, radius_deg, reserved_steps, normalizers=None)


def _assemble(tracks, config, radius_deg, reserved_steps, normalizers) -> SegmentLibrary:
    if not tracks:
        raise InputError("cannot build a library from zero tracks")
    if radius_deg <= 0:
        raise InputError("radius_deg must be positive")

    tracks = sorted(tracks, key=lambda t: t.storm_id)
    reserve = default_reserved_steps(tracks) if reserved_steps is None else int(reserved_steps)
    if reserve < 1:
        raise InputError("reserved_steps must be at least 1")

    modern = np.array([t.genesis_year >= config.modern_start_year for t in tracks])

    offsets = np.zeros(len(tracks) + 1, dtype=np.int64)
    for i, t in enumerate(tracks):
        offsets[i + 1] = offsets[i] + len(t)
    n = int(offsets[-1])

    lat = np.empty(n)
    lon = np.empty(n)
    wind = np.empty(n)
    age = np.empty(n)
    vx = np.empty(n)
    vy = np.empty(n)
    trk = np.empty(n, dtype=np.int64)
    stp = np.empty(n, dtype=np.int64)
    eligible = np.zeros(n, dtype=bool)

    for i, t in enumerate(tracks):
        s, e = offsets[i], offsets[i + 1]
        lat[s:e] = t.lat
        lon[s:e] = t.lon
        wind[s:e] = t.wind
        age[s:e] = np.arange(len(t), dtype=float)
        tvx, tvy = t.motion_vectors()
        vx[s:e] = tvx
        vy[s:e] = tvy
        trk[s:e] = i
        stp[s:e] = np.arange(len(t))
        cut = len(t) - reserve
        if cut > 0:
            eligible[s : s + cut] = True

    xyz = to_unit_xyz(lat, lon)
    tree = cKDTree(xyz)

    if normalizers is None:
        max_v, max_t, max_dw = _normalizers(xyz, vx, vy, age, wind, eligible, tree, radius_deg)
    else:
        max_v, max_t, max_dw = normalizers

    checksum = _library_checksum(tracks, config, radius_deg, reserve, max_v, max_t, max_dw)

    for arr in (lat, lon, wind, age, vx, vy, trk, stp, eligible, offsets, xyz):
        arr.setflags(write=False)

    return SegmentLibrary(
        basin_code=config.basin_code,
        config=config,
        tracks=tuple(tracks),
        modern_mask=modern,
        radius_deg=float(radius_deg),
        reserved_steps=reserve,
        max_v=max_v,
        max_t=max_t,
        max_dw=max_dw,
        point_lat=lat,
        point_lon=lon,
        point_xyz=xyz,
        point_vx=vx,
        point_vy=vy,
        point_age=age,
        point_wind=wind,
        point_track=trk,
        point_step=stp,
        track_offsets=offsets,
        eligible=eligible,
        checksum=checksum,
        _kdtree=tree,
    )


def _normalizers(xyz, vx, vy, age, wind, eligible, tree, radius_deg):
    """Basin maxima over radius-restricted comparable pairs.

    Falls back per-normalizer to the global all-pairs maximum when the
    radius-restricted population is degenerate (tiny fixtures), then to a
    floor of 1.0.
    """
    chord = chord_for_arc_deg(radius_deg) * (1.0 + 1e-9)
    src_ids = np.flatnonzero(eligible)
    neighbor_lists = tree.query_ball_point(xyz[src_ids], chord) if len(src_ids) else []

    max_v = max_t = max_dw = 0.0
    for i, neighbors in zip(src_ids, neighbor_lists):
        ids = np.asarray(neighbors, dtype=np.int64)
        ids = ids[(ids != i) & eligible[ids]]
        if ids.size == 0:
            continue
        arc, vdiff, adiff, wdiff = backend.pair_fields(
            xyz[i], vx[i], vy[i], age[i], wind[i],
            xyz[ids], vx[ids], vy[ids], age[ids], wind[ids],
        )
        keep = arc <= radius_deg
        if not np.any(keep):
            continue
        max_v = max(max_v, float(vdiff[keep].max()))
        max_t = max(max_t, float(adiff[keep].max()))
        max_dw = max(max_dw, float(wdiff[keep].max()))

    if min(max_v, max_t, max_dw) == 0.0:
        g_v, g_t, g_dw = _global_pair_maxima(vx, vy, age, wind)
        if max_v == 0.0:
            max_v = g_v
        if max_t == 0.0:
            max_t = g_t
        if max_dw == 0.0:
            max_dw = g_dw
    return (max_v or NORMALIZER_FLOOR, max_t or NORMALIZER_FLOOR, max_dw or NORMALIZER_FLOOR)


def _global_pair_maxima(vx, vy, age, wind):
    """All-pairs maxima without forming n^2 arrays.

    max |age_i - age_j| and max |w_i - w_j| are range widths; the vector
    difference maximum is the diameter of the (vx, vy) point set, found on
    the convex hull (O(h^2) after an O(n log n) hull).
    """
    g_t = float(age.max() - age.min()) if age.size else 0.0
    g_dw = float(wind.max() - wind.min()) if wind.size else 0.0

    pts = np.column_stack([vx, vy])
    uniq = np.unique(pts, axis=0)
    if len(uniq) > 2:
        try:
            from scipy.spatial import ConvexHull

            uniq = uniq[ConvexHull(uniq).vertices]
        except Exception:
            pass  # degenerate hull (collinear); fall through to pairwise
    if len(uniq) >= 2:
        diff = uniq[:, None, :] - uniq[None, :, :]
        g_v = float(np.sqrt((diff ** 2).sum(axis=2)).max())
    else:
        g_v = 0.0
    return g_v, g_t, g_dw


def _library_checksum(tracks, config, radius_deg, reserve, max_v, max_t, max_dw) -> str:
    h = hashlib.sha256()
    meta = {
        "basin": config.basin_code,
        "record": [config.record_start_year, config.modern_cutoff_year, config.record_end_year],
        "convention": config.wind_convention,
        "radius_deg": radius_deg,
        "reserved_steps": reserve,
        "max_v": max_v,
        "max_t": max_t,
        "max_dw": max_dw,
    }
    h.update(json.dumps(meta, sort_keys=True).encode())
    for t in tracks:
        h.update(t.storm_id.encode())
        h.update(np.int64(t.genesis_year).tobytes())
        h.update(np.int64(t.genesis_day_of_year).tobytes())
        h.update(np.ascontiguousarray(t.lat).tobytes())
        h.update(np.ascontiguousarray(t.lon).tobytes())
        h.update(np.ascontiguousarray(t.wind).tobytes())
    return h.hexdigest()


@dataclass(frozen=True)
class EmpiricalDistributions:
    """Modern observing-era sampling distributions."""

    genesis_lat: np.ndarray
    genesis_lon: np.ndarray
    genesis_day: np.ndarray     # day of year, paired with the position draw
    lifetimes: np.ndarray       # 3-h steps per track
    annual_counts: np.ndarray   # storms per calendar year, zero years included
    window_years: np.ndarray


def empirical_distributions(library: SegmentLibrary) -> EmpiricalDistributions:
    modern = [t for t, m in zip(library.tracks, library.modern_mask) if m]
    if not modern:
        raise InputError("no modern-era tracks in library")

    cfg = library.config
    years = np.arange(cfg.modern_start_year, cfg.record_end_year + 1)
    counts = np.zeros(len(years), dtype=np.int64)
    for t in modern:
        counts[t.genesis_year - cfg.modern_start_year] += 1

    return EmpiricalDistributions(
        genesis_lat=np.array([t.lat[0] for t in modern]),
        genesis_lon=np.array([t.lon[0] for t in modern]),
        genesis_day=np.array([t.genesis_day_of_year for t in modern], dtype=np.int64),
        lifetimes=np.array([t.n_steps for t in modern], dtype=np.int64),
        annual_counts=counts,
        window_years=years,
    )


def save_library(path, library: SegmentLibrary) -> None:
    header = {
        "schema": LIBRARY_SCHEMA,
        "basin": library.basin_code,
        "config": {
            "basin_code": library.config.basin_code,
            "record_start_year": library.config.record_start_year,
            "modern_cutoff_year": library.config.modern_cutoff_year,
            "record_end_year": library.config.record_end_year,
            "wind_convention": library.config.wind_convention,
            "columns": library.config.columns,
        },
        "radius_deg": library.radius_deg,
        "reserved_steps": library.reserved_steps,
        "normalizers": [library.max_v, library.max_t, library.max_dw],
        "checksum": library.checksum,
        "storm_ids": [t.storm_id for t in library.tracks],
        "genesis_years": [t.genesis_year for t in library.tracks],
        "genesis_days": [t.genesis_day_of_year for t in library.tracks],
        "wind_filled": [bool(t.wind_filled) for t in library.tracks],
    }
    arrays = {
        "lat": library.point_lat,
        "lon": library.point_lon,
        # stored rather than re-derived on load: the simulator translates in
        # unwrapped space and must see bit-identical values either way
        "lon_unwrapped": np.concatenate([t.lon_unwrapped for t in library.tracks]),
        "wind": library.point_wind,
        "offsets": library.track_offsets,
    }
    container.save(path, header, arrays)


def load_library(path) -> SegmentLibrary:
    header, arrays = container.load(path)
    if header.get("schema") != LIBRARY_SCHEMA:
        raise InputError(f"{path}: not a library file (schema {header.get('schema')!r})")
    cfg = BasinConfig(
        basin_code=header["config"]["basin_code"],
        record_start_year=header["config"]["record_start_year"],
        modern_cutoff_year=header["config"]["modern_cutoff_year"],
        record_end_year=header["config"]["record_end_year"],
        wind_convention=header["config"]["wind_convention"],
        columns=header["config"]["columns"],
    )
    offsets = arrays["offsets"]
    tracks = []
    for i, storm_id in enumerate(header["storm_ids"]):
        s, e = int(offsets[i]), int(offsets[i + 1])
        tracks.append(
            HistoricalTrack(
                storm_id=storm_id,
                basin_code=header["basin"],
                genesis_year=int(header["genesis_years"][i]),
                genesis_day_of_year=int(header["genesis_days"][i]),
                lat=arrays["lat"][s:e],
                lon=arrays["lon"][s:e],
                lon_unwrapped=arrays["lon_unwrapped"][s:e],
                wind=arrays["wind"][s:e],
                wind_filled=bool(header["wind_filled"][i]),
            )
        )
    lib = _assemble(
        tracks,
        cfg,
        header["radius_deg"],
        header["reserved_steps"],
        normalizers=tuple(header["normalizers"]),
    )
    if lib.checksum != header["checksum"]:
        raise InputError(f"{path}: library content hash changed after round-trip")
    return lib
