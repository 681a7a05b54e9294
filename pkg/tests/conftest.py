import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fixture_archive import fixture_basin_config, write_archive

from stormweave.basins import basin_config
from stormweave.geo import wrap_lon
from stormweave.ibtracs import parse_archive
from stormweave.kernels import KernelParams
from stormweave.library import build_library, empirical_distributions
from stormweave.table import precompute_table
from stormweave.tracks import HistoricalTrack, interpolate_storms


def make_track(storm_id, lat, lon, wind, year=1990, day=150, basin="NI"):
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    wind = np.asarray(wind, dtype=float)
    return HistoricalTrack(
        storm_id=storm_id,
        basin_code=basin,
        genesis_year=year,
        genesis_day_of_year=day,
        lat=lat,
        lon=wrap_lon(lon),
        lon_unwrapped=lon,
        wind=wind,
    )


def toy_config(**overrides):
    base = dict(record_start_year=1950, modern_cutoff_year=1965, record_end_year=2024)
    base.update(overrides)
    return basin_config("NI").with_overrides(**base)


@pytest.fixture(scope="session")
def toy_library():
    """Three hand-built tracks on dyadic coordinates, 30 points total.

    Everything sits within a few degrees so each point sees candidates on
    the other tracks; used by the brute-force kernel oracles.
    """
    n = 10
    steps = np.arange(n)
    tracks = [
        make_track("ORA", 10.0 + 0.25 * steps, 70.0 + 0.25 * steps, 40.0 + 2.0 * steps, year=1990),
        make_track("ORB", 10.5 + 0.0 * steps, 70.5 + 0.25 * steps, 50.0 + 2.0 * steps, year=1991),
        make_track("ORC", 11.0 + 0.25 * steps, 71.0 + 0.0 * steps, 30.0 + 2.0 * steps, year=1992),
    ]
    return build_library(tracks, toy_config())


@pytest.fixture(scope="session")
def cluster_library():
    """A dense cluster of 14 long parallel tracks for simulation tests.

    Tracks run broadly northwest with similar speeds and overlapping winds,
    so every interior point has many usable candidates.
    """
    rng = np.random.default_rng(77)
    tracks = []
    for i in range(14):
        n = 120
        lat0 = 10.0 + 0.12 * i
        lon0 = 80.0 - 0.12 * i
        dlat = rng.normal(0.10, 0.02, n)
        dlon = rng.normal(-0.11, 0.02, n)
        lat = lat0 + np.concatenate([[0.0], dlat[1:].cumsum()])
        lon = lon0 + np.concatenate([[0.0], dlon[1:].cumsum()])
        wind = np.maximum(35.0 + 25.0 * np.sin(np.linspace(0.1, 2.6, n)) + rng.normal(0, 1.5, n), 12.0)
        tracks.append(make_track(f"CL{i:02d}", lat, lon, wind, year=1970 + i))
    return build_library(tracks, toy_config())


@pytest.fixture(scope="session")
def cluster_table(cluster_library):
    return precompute_table(cluster_library, KernelParams())


@pytest.fixture(scope="session")
def cluster_dist(cluster_library):
    return empirical_distributions(cluster_library)


@pytest.fixture(scope="session")
def archive_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("archive") / "fixture.NI.list.csv"
    write_archive(path)
    return path


@pytest.fixture(scope="session")
def desk_library(archive_path):
    cfg = fixture_basin_config()
    rows, _ = parse_archive(archive_path, cfg)
    tracks, _ = interpolate_storms(rows, cfg)
    return build_library(tracks, cfg)


@pytest.fixture(scope="session")
def desk_table(desk_library):
    return precompute_table(desk_library, KernelParams())


@pytest.fixture(scope="session")
def desk_dist(desk_library):
    return empirical_distributions(desk_library)
