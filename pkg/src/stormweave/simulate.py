"""Synthetic track generation by segment walking with kernel transitions.

A track starts at a genesis draw from the modern-era empirical distribution,
attaches to the nearest eligible historical point, and then walks that host
segment in 3-hour steps. At each step an independent Bernoulli trigger (or
segment exhaustion) fires a transition: a destination point is drawn from
the precomputed table, its segment is translated so the drawn point lands
exactly on the current position, and the walk continues there. Joins are
smoothed afterwards across a short window; segment interiors are exact
rigid translations of historical sub-tracks.

Reproducibility: every synthetic year has its own RNG substream derived
from (seed, year), so any subset of years regenerates identically no matter
how the work is scheduled.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import backend
from ._version import __version__ as _version
from .errors import InputError, InvariantError
from .library import EmpiricalDistributions, SegmentLibrary
from .table import TransitionTable

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimulationParams:
    n_years: int
    seed: int
    jump_probability: float = 0.1
    smoothing_window: int = 5
    reserved_steps: int | None = None  # None: use the table's value

    def __post_init__(self):
        if self.n_years < 0:
            raise InputError("n_years must be non-negative")
        if not 0.0 <= self.jump_probability <= 1.0:
            raise InputError("jump_probability must lie in [0, 1]")
        if self.smoothing_window < 3 or self.smoothing_window % 2 == 0:
            raise InputError("smoothing_window must be odd and at least 3")

    def to_dict(self) -> dict:
        return {
            "n_years": self.n_years,
            "seed": self.seed,
            "jump_probability": self.jump_probability,
            "smoothing_window": self.smoothing_window,
            "reserved_steps": self.reserved_steps,
        }


@dataclass
class SegmentSpan:
    """Provenance for one inter-join stretch: a rigid copy of a sub-track."""

    track_index: int
    storm_id: str
    src_start: int      # step index on the source track
    synth_start: int    # index of the segment's first point in the synthetic track
    length: int         # number of points contributed (including the shared join point)


@dataclass
class SyntheticTrack:
    year: int
    genesis_day_of_year: int
    lat: np.ndarray
    lon_unwrapped: np.ndarray
    wind: np.ndarray
    segments: list[SegmentSpan]
    joins: list[dict]           # {"index": int, "smoothed": bool}
    early_terminated: bool
    sampled_lifetime: int

    def __len__(self) -> int:
        return len(self.lat)


@dataclass
class SyntheticCatalog:
    basin_code: str
    n_years: int
    tracks: list[SyntheticTrack]
    params: SimulationParams
    library_checksum: str
    table_checksum: str
    generator_version: str = _version
    backend_name: str = field(default_factory=backend.backend_name)

    def tracks_for_year(self, year: int) -> list[SyntheticTrack]:
        return [t for t in self.tracks if t.year == year]

    def tracks_by_year(self) -> dict[int, list[SyntheticTrack]]:
        grouped: dict[int, list[SyntheticTrack]] = {y: [] for y in range(1, self.n_years + 1)}
        for t in self.tracks:
            grouped[t.year].append(t)
        return grouped


def year_rng(seed: int, year: int) -> np.random.Generator:
    """The RNG substream that owns one synthetic year."""
    return np.random.default_rng(np.random.SeedSequence((seed, year)))


def sample_annual_counts(dist: EmpiricalDistributions, n_years: int, rng) -> np.ndarray:
    """Draw storm counts per year, with replacement, from the modern record."""
    if len(dist.annual_counts) == 0:
        raise InputError("empirical annual counts are empty")
    return rng.choice(dist.annual_counts, size=n_years, replace=True)


def sample_genesis(dist: EmpiricalDistributions, rng) -> tuple[float, float, int]:
    """One genesis draw: (lat, lon, day of year), kept paired."""
    if len(dist.genesis_lat) == 0:
        raise InputError("empirical genesis list is empty")
    i = int(rng.integers(len(dist.genesis_lat)))
    return float(dist.genesis_lat[i]), float(dist.genesis_lon[i]), int(dist.genesis_day[i])


def select_transition(cand_ids: np.ndarray, weights: np.ndarray, rng) -> int:
    """Categorical draw over candidates; returns the chosen global id."""
    if len(cand_ids) == 0:
        raise InvariantError("select_transition called with an empty candidate list")
    cum = np.cumsum(weights)
    return int(cand_ids[_draw_from_cum(cum, rng)])


def _draw_from_cum(cum: np.ndarray, rng) -> int:
    u = rng.random() * cum[-1]
    idx = int(np.searchsorted(cum, u, side="right"))
    idx = min(idx, len(cum) - 1)
    while idx > 0 and cum[idx] == cum[idx - 1]:  # never land on zero weight
        idx -= 1
    return idx


def translate_segment(lat: np.ndarray, lon_unwrapped: np.ndarray, anchor_lat: float, anchor_lon: float):
    """Rigid shift mapping the segment's first point exactly onto the anchor.

    Anchored form out[k] = anchor + (p[k] - p[0]) guarantees a bit-exact
    zero offset at the first point; a zero shift returns exact copies.
    Winds are untouched by translation and are not passed through here.
    """
    if lat[0] == anchor_lat and lon_unwrapped[0] == anchor_lon:
        return lat.copy(), lon_unwrapped.copy()
    return anchor_lat + (lat - lat[0]), anchor_lon + (lon_unwrapped - lon_unwrapped[0])


def smooth_join(lat: np.ndarray, lon_unwrapped: np.ndarray, wind: np.ndarray, join_index: int, window: int):
    """Linear smoothing across one join window; returns new arrays.

    The window's two end points anchor a straight-line interpolation that
    replaces the interior points (for the default 5-point window: the join
    and its two neighbors). Everything outside the window is untouched.
    """
    half = (window - 1) // 2
    if join_index - half < 0 or join_index + half >= len(lat):
        raise InputError("smoothing window does not fit inside the track")
    lat, lon_unwrapped, wind = lat.copy(), lon_unwrapped.copy(), wind.copy()
    _smooth_inplace((lat, lon_unwrapped, wind), join_index, window)
    return lat, lon_unwrapped, wind


def _smooth_inplace(arrays, join_index: int, window: int) -> None:
    half = (window - 1) // 2
    a, b = join_index - half, join_index + half
    denom = float(window - 1)
    for arr in arrays:
        left, right = arr[a], arr[b]
        for k in range(1, window - 1):
            arr[a + k] = left + (right - left) * (k / denom)


@dataclass
class WalkState:
    """A walk in progress: current host position plus the emitted points.

    Positions are synthetic coordinates (unwrapped longitude); each segment
    is anchored where its first point landed, so emitted points are exact
    rigid translations of the host sub-track.
    """

    library: SegmentLibrary
    track_index: int            # current host track
    pos: int                    # current point index on the host
    anchor_lat: float           # synthetic position of the segment start
    anchor_lon: float
    seg_src_start: int          # host index of the segment start
    seg_synth_start: int
    out_lat: list
    out_lon: list
    out_wind: list
    segments: list
    joins: list
    attach_distance: float
    steps_done: int = 0
    early: bool = False

    @property
    def host(self):
        return self.library.tracks[self.track_index]

    def _close_segment(self) -> None:
        self.segments.append(
            SegmentSpan(
                track_index=self.track_index,
                storm_id=self.host.storm_id,
                src_start=self.seg_src_start,
                synth_start=self.seg_synth_start,
                length=self.pos - self.seg_src_start + 1,
            )
        )

    def _jump_to(self, new_gid: int) -> None:
        self._close_segment()
        self.joins.append({"index": len(self.out_lat) - 1, "smoothed": False})
        self.track_index = int(self.library.point_track[new_gid])
        self.pos = int(self.library.point_step[new_gid])
        self.anchor_lat = self.out_lat[-1]
        self.anchor_lon = self.out_lon[-1]
        self.seg_src_start = self.pos
        self.seg_synth_start = len(self.out_lat) - 1


def start_track(genesis, library: SegmentLibrary, table: TransitionTable, rng=None) -> WalkState:
    """Attach a genesis draw to its host segment and open the walk.

    The nearest eligible historical point wins (exact-distance ties break
    by storm id, then step index); the host is translated so that point
    coincides with the genesis position, which may never have been occupied
    historically. When nothing eligible lies within the candidate radius
    the search widens to the global nearest point with a logged notice.
    """
    g_lat, g_lon = float(genesis[0]), float(genesis[1])
    gid, dist = library.nearest_eligible(g_lat, g_lon)
    t_idx = int(library.point_track[gid])
    pos = int(library.point_step[gid])
    return WalkState(
        library=library,
        track_index=t_idx,
        pos=pos,
        anchor_lat=g_lat,
        anchor_lon=g_lon,
        seg_src_start=pos,
        seg_synth_start=0,
        out_lat=[g_lat],
        out_lon=[g_lon],
        out_wind=[float(library.tracks[t_idx].wind[pos])],
        segments=[],
        joins=[],
        attach_distance=dist,
    )


def step(state: WalkState, table: TransitionTable, params: SimulationParams, rng,
         remaining: int | None = None) -> WalkState:
    """Advance the walk by one 3-hour step (emits one point).

    In order: a voluntary Bernoulli(jump_probability) transition attempt at
    the current point (one with no usable candidates stays on the host),
    then forced transitions chained for as long as advancing would enter a
    host's reserved terminal points. A forced transition with no candidates
    ends the track early, never silently. ``remaining`` bounds the
    translated-latitude guard to the steps that can still be emitted.
    """
    if state.early:
        raise InvariantError("step() called on a terminated walk")
    library = state.library
    reserve = table.reserved_steps if params.reserved_steps is None else params.reserved_steps

    can_advance = state.pos + 1 < len(state.host) - reserve
    if can_advance and params.jump_probability > 0.0 and rng.random() < params.jump_probability:
        new_gid = _draw_candidate(table, library, library.global_id(state.track_index, state.pos),
                                  state.out_lat[-1], remaining, rng)
        if new_gid is not None:
            state._jump_to(new_gid)

    fuse = 0
    while state.pos + 1 >= len(state.host) - reserve:
        new_gid = _draw_candidate(table, library, library.global_id(state.track_index, state.pos),
                                  state.out_lat[-1], remaining, rng)
        fuse += 1
        if new_gid is None or fuse > 64:
            state.early = True
            return state
        state._jump_to(new_gid)

    state.pos += 1
    host = state.host
    lat_next = state.anchor_lat + (host.lat[state.pos] - host.lat[state.seg_src_start])
    lon_next = state.anchor_lon + (host.lon_unwrapped[state.pos] - host.lon_unwrapped[state.seg_src_start])
    if not -90.0 <= lat_next <= 90.0:
        LOGGER.warning("track left the sphere at step %d; terminating early", state.steps_done + 1)
        state.pos -= 1
        state.early = True
        return state
    state.out_lat.append(float(lat_next))
    state.out_lon.append(float(lon_next))
    state.out_wind.append(float(host.wind[state.pos]))
    state.steps_done += 1
    return state


def simulate_track(
    genesis: tuple[float, float, int],
    lifetime: int,
    library: SegmentLibrary,
    table: TransitionTable,
    params: SimulationParams,
    rng,
    year: int = 0,
) -> SyntheticTrack:
    """Walk one synthetic track of ``lifetime`` steps (lifetime + 1 points).

    Composition of start_track and repeated step; transitions translate the
    destination segment onto the current position, and joins are smoothed
    afterwards, in join order, wherever the full window exists. A walk cut
    short by an exhausted candidate set carries the early-terminated flag.
    """
    reserve = table.reserved_steps if params.reserved_steps is None else params.reserved_steps
    if reserve < (params.smoothing_window - 1) // 2 + 1:
        raise InputError("reserved_steps too small for the smoothing window")

    state = start_track(genesis, library, table, rng)
    while state.steps_done < lifetime and not state.early:
        step(state, table, params, rng, remaining=lifetime - state.steps_done)
    state._close_segment()

    lat_arr = np.array(state.out_lat)
    lon_arr = np.array(state.out_lon)
    wind_arr = np.array(state.out_wind)

    half = (params.smoothing_window - 1) // 2
    for join in state.joins:
        j = join["index"]
        if j - half >= 0 and j + half < len(lat_arr):
            _smooth_inplace((lat_arr, lon_arr, wind_arr), j, params.smoothing_window)
            join["smoothed"] = True

    return SyntheticTrack(
        year=year,
        genesis_day_of_year=int(genesis[2]),
        lat=lat_arr,
        lon_unwrapped=lon_arr,
        wind=wind_arr,
        segments=state.segments,
        joins=state.joins,
        early_terminated=state.early,
        sampled_lifetime=lifetime,
    )


def _draw_candidate(table, library, gid, cur_lat, remaining, rng):
    """Draw a destination; reject (and redraw) candidates whose translated
    emittable portion would cross a pole. Returns a global id or None."""
    if not table.has_row(gid):
        return None
    ids, cum = table.row_cum(gid)
    if len(ids) == 0 or cum[-1] <= 0.0:
        return None

    weights = None
    for _ in range(len(ids)):
        idx = _draw_from_cum(cum, rng)
        cand = int(ids[idx])
        if _lat_ok(library, cand, cur_lat, remaining):
            return cand
        LOGGER.info("candidate %d rejected: translation crosses a pole", cand)
        if weights is None:
            s, e = table.row_ptr[gid], table.row_ptr[gid + 1]
            weights = table.weights[s:e].copy()
        weights[idx] = 0.0
        if weights.sum() <= 0.0:
            return None
        cum = np.cumsum(weights)
    return None


def _lat_ok(library, cand_gid, cur_lat, remaining) -> bool:
    t = int(library.point_track[cand_gid])
    q = int(library.point_step[cand_gid])
    trk = library.tracks[t]
    stop = len(trk) if remaining is None else min(q + remaining + 1, len(trk))
    seg = trk.lat[q:stop]
    shifted_max = cur_lat + (seg.max() - seg[0])
    shifted_min = cur_lat + (seg.min() - seg[0])
    return shifted_max <= 90.0 and shifted_min >= -90.0


def generate_catalog(
    library: SegmentLibrary,
    table: TransitionTable,
    dist: EmpiricalDistributions,
    params: SimulationParams,
    workers: int = 1,
) -> SyntheticCatalog:
    """Simulate the full catalog, one independent RNG substream per year."""
    if table.library_checksum != library.checksum:
        raise InputError("table does not belong to this library")

    def build_year(year: int) -> list[SyntheticTrack]:
        rng = year_rng(params.seed, year)
        count = int(sample_annual_counts(dist, 1, rng)[0])
        tracks = []
        for _ in range(count):
            genesis = sample_genesis(dist, rng)
            lifetime = int(dist.lifetimes[int(rng.integers(len(dist.lifetimes)))])
            tracks.append(simulate_track(genesis, lifetime, library, table, params, rng, year=year))
        return tracks

    years = range(1, params.n_years + 1)
    if workers <= 1:
        per_year = [build_year(y) for y in years]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_year = list(pool.map(build_year, years))

    tracks = [t for year_tracks in per_year for t in year_tracks]
    return SyntheticCatalog(
        basin_code=library.basin_code,
        n_years=params.n_years,
        tracks=tracks,
        params=params,
        library_checksum=library.checksum,
        table_checksum=table.checksum(),
    )
