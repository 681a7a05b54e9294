import numpy as np
import pytest

from conftest import make_track, toy_config
from oracles import gc_deg, library_as_plain_tracks, oracle_normalizers

from stormweave.errors import InputError
from stormweave.library import (
    build_library,
    default_reserved_steps,
    empirical_distributions,
    load_library,
    save_library,
)


def test_empty_track_set_fatal():
    with pytest.raises(InputError):
        build_library([], toy_config())


def test_normalizers_match_brute_force(toy_library):
    plain = library_as_plain_tracks(toy_library)
    max_v, max_t, max_dw = oracle_normalizers(plain, toy_library.radius_deg, toy_library.reserved_steps)
    assert toy_library.max_v == pytest.approx(max_v, rel=1e-12)
    assert toy_library.max_t == max_t
    assert toy_library.max_dw == pytest.approx(max_dw, rel=1e-12)


def test_max_dw_two_track_example():
    # winds {40, 60} on both tracks, all points within radius: max |dw| = 20
    n = 4
    steps = np.arange(n)
    tracks = [
        make_track("W1", 10.0 + 0.1 * steps, 70.0 + 0.1 * steps, [40.0, 60.0, 40.0, 60.0]),
        make_track("W2", 10.2 + 0.1 * steps, 70.2 + 0.1 * steps, [40.0, 60.0, 40.0, 60.0]),
    ]
    lib = build_library(tracks, toy_config(), reserved_steps=1)
    assert lib.max_dw == 20.0


def test_single_track_age_normalizer_brute_force():
    # a lone tight spiral: every eligible pair is within the radius
    n = 9
    steps = np.arange(n)
    trk = make_track("SOLO", 10.0 + 0.05 * steps, 70.0 + 0.05 * steps, 40.0 + steps)
    lib = build_library([trk], toy_config(), reserved_steps=2)
    plain = library_as_plain_tracks(lib)
    exp_v, exp_t, exp_dw = oracle_normalizers(plain, lib.radius_deg, lib.reserved_steps)
    assert (lib.max_v, lib.max_t, lib.max_dw) == pytest.approx((exp_v, exp_t, exp_dw), rel=1e-12)
    assert lib.max_t == n - 2 - 1  # eligible span only


def test_default_reserved_steps_formula():
    n = 61  # 60 steps per track
    steps = np.arange(n)
    tracks = [make_track(f"R{i}", 10.0 + 0.1 * steps, 70.0 + 0.1 * steps, 40.0 + steps) for i in range(3)]
    assert default_reserved_steps(tracks) == max(3, round(0.05 * 60))


def test_modern_flags(toy_library):
    # toy tracks have genesis years 1990..1992, cutoff 1965
    assert toy_library.modern_track_ids == ["ORA", "ORB", "ORC"]
    older = make_track("OLD", [10.0, 10.1, 10.2, 10.3, 10.4], [70.0, 70.1, 70.2, 70.3, 70.4],
                       [40.0] * 5, year=1955)
    lib = build_library(list(toy_library.tracks) + [older], toy_config(), reserved_steps=1)
    assert "OLD" not in lib.modern_track_ids
    assert lib.n_tracks == 4


def test_spatial_index_matches_exhaustive_scan(cluster_library):
    lib = cluster_library
    rng = np.random.default_rng(5)
    for _ in range(25):
        qlat = float(rng.uniform(8.0, 14.0))
        qlon = float(rng.uniform(76.0, 81.0))
        radius = float(rng.uniform(0.3, 3.0))
        got = set(lib.radius_query(qlat, qlon, radius).tolist())
        scan = {
            g
            for g in range(lib.n_points)
            if gc_deg(qlat, qlon, lib.point_lat[g], lib.point_lon[g]) <= radius
        }
        # same metric, same comparison: the index is exact up to scalar/batch
        # transcendental ulps, which the fixture keeps away from the rim
        assert got == scan


def test_library_is_immutable(toy_library):
    with pytest.raises(ValueError):
        toy_library.point_lat[0] = 0.0
    with pytest.raises(ValueError):
        toy_library.eligible[0] = False


def test_empirical_distribution_contracts():
    steps = np.arange(41)
    tracks = [
        make_track("M1", 10.0 + 0.05 * steps, 70.0 + 0.05 * steps, 40.0 + steps, year=1966, day=140),
        make_track("M2", 10.5 + 0.05 * steps, 70.5 + 0.05 * steps, 42.0 + steps, year=1966, day=200),
        make_track("M3", 11.0 + 0.05 * steps, 71.0 + 0.05 * steps, 44.0 + steps, year=1968, day=170),
        make_track("PRE", 11.5 + 0.05 * steps, 71.5 + 0.05 * steps, 46.0 + steps, year=1950, day=160),
    ]
    cfg = toy_config(record_start_year=1950, modern_cutoff_year=1965, record_end_year=1969)
    dist = empirical_distributions(build_library(tracks, cfg))

    assert np.array_equal(dist.annual_counts, [0, 2, 0, 1, 0])  # 1965..1969, zero years included
    assert dist.annual_counts.sum() == 3
    assert np.array_equal(dist.lifetimes, [40, 40, 40])  # 41 points = 40 steps
    assert np.array_equal(dist.window_years, np.arange(1965, 1970))
    # pre-cutoff storms are excluded from genesis sampling entirely
    assert 11.5 not in dist.genesis_lat.tolist()
    assert len(dist.genesis_lat) == len(dist.genesis_day) == 3


def test_no_modern_tracks_is_an_error():
    steps = np.arange(10)
    old = make_track("OLD", 10.0 + 0.1 * steps, 70.0 + 0.1 * steps, 40.0 + steps, year=1950)
    lib = build_library([old], toy_config())
    with pytest.raises(InputError):
        empirical_distributions(lib)


def test_save_load_roundtrip(tmp_path, toy_library):
    path = tmp_path / "toy.library.sw"
    save_library(path, toy_library)
    lib2 = load_library(path)
    assert lib2.checksum == toy_library.checksum
    assert lib2.n_tracks == toy_library.n_tracks
    assert (lib2.max_v, lib2.max_t, lib2.max_dw) == (toy_library.max_v, toy_library.max_t, toy_library.max_dw)
    assert np.array_equal(lib2.point_lat, toy_library.point_lat)
    assert np.array_equal(lib2.point_wind, toy_library.point_wind)
    # byte-identical on re-save
    path2 = tmp_path / "toy2.library.sw"
    save_library(path2, lib2)
    assert path.read_bytes() == path2.read_bytes()


def test_truncated_library_file_rejected(tmp_path, toy_library):
    path = tmp_path / "toy.library.sw"
    save_library(path, toy_library)
    blob = path.read_bytes()
    path.write_bytes(blob[: len(blob) - 40])
    with pytest.raises(InputError):
        load_library(path)


def test_nearest_eligible_tie_break(toy_library):
    # genesis exactly on ORA's first point: zero distance, that point wins
    gid, dist = toy_library.nearest_eligible(10.0, 70.0)
    assert dist == 0.0
    t = int(toy_library.point_track[gid])
    assert toy_library.tracks[t].storm_id == "ORA"
    assert int(toy_library.point_step[gid]) == 0


def test_equidistant_tie_breaks_on_storm_id():
    # two eligible points exactly equidistant (mirror longitudes): the
    # lexically smaller storm id wins, then the lower step index
    steps = np.arange(8)
    tracks = [
        make_track("B2", 10.0 + 0.1 * steps, 70.2 + 0.0 * steps, 40.0 + steps),
        make_track("A9", 10.0 + 0.1 * steps, 69.8 + 0.0 * steps, 40.0 + steps),
    ]
    lib = build_library(tracks, toy_config(), reserved_steps=3)
    gid, dist = lib.nearest_eligible(10.0, 70.0)
    assert dist > 0.0
    assert lib.tracks[int(lib.point_track[gid])].storm_id == "A9"
    assert int(lib.point_step[gid]) == 0


def test_ingest_idempotent_library_bytes(tmp_path, toy_library):
    from stormweave.library import save_library

    p1, p2 = tmp_path / "a.sw", tmp_path / "b.sw"
    save_library(p1, toy_library)
    save_library(p2, toy_library)
    assert p1.read_bytes() == p2.read_bytes()


def test_attachment_widens_beyond_radius(cluster_library, caplog):
    import logging

    with caplog.at_level(logging.INFO, logger="stormweave.library"):
        gid, dist = cluster_library.nearest_eligible(30.0, 60.0)  # nowhere near the cluster
    assert dist > cluster_library.radius_deg
    assert cluster_library.eligible[gid]
    assert any("widened" in rec.message for rec in caplog.records)


def test_na_modern_window_boundary():
    # the Atlantic cutoff: a 1943 storm stays out of the modern subset,
    # a 1944 storm is in
    steps = np.arange(8)
    tracks = [
        make_track("PRE1943", 20.0 + 0.1 * steps, -60.0 + 0.1 * steps, 40.0 + steps, year=1943, basin="NA"),
        make_track("POST1944", 20.5 + 0.1 * steps, -60.5 + 0.1 * steps, 42.0 + steps, year=1944, basin="NA"),
    ]
    from stormweave.basins import basin_config

    lib = build_library(tracks, basin_config("NA"), reserved_steps=3)
    assert lib.modern_track_ids == ["POST1944"]


def test_fresh_and_loaded_libraries_generate_identical_catalogs(tmp_path, cluster_library):
    # cross-session determinism: a catalog from a round-tripped library is
    # byte-identical to one from the freshly built library
    from stormweave.catalog import write_catalog
    from stormweave.kernels import KernelParams
    from stormweave.simulate import SimulationParams, generate_catalog
    from stormweave.table import precompute_table

    path = tmp_path / "lib.sw"
    save_library(path, cluster_library)
    loaded = load_library(path)

    params = SimulationParams(n_years=6, seed=404, jump_probability=0.3)
    outs = []
    for lib in (cluster_library, loaded):
        table = precompute_table(lib, KernelParams())
        dist = empirical_distributions(lib)
        catalog = generate_catalog(lib, table, dist, params)
        out = tmp_path / f"cat_{len(outs)}.csv"
        write_catalog(out, catalog)
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
