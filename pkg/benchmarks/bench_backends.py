#!/usr/bin/env python
"""Benchmark the compiled pairwise kernels against the numpy fallback.

Builds a synthetic segment library, then times the transition-table
precompute (the training hot loop) and the raw kernel primitives under each
backend. Each backend runs in its own subprocess with the real import-time
dispatch (STORMWEAVE_PURE_PYTHON=1 selects the fallback), so measurements
cannot contaminate each other. Run from the repo root:

    python benchmarks/bench_backends.py [--points 20000] [--repeat 3]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from stormweave.backend import available_backends, backend_name
from stormweave.basins import basin_config
from stormweave.geo import wrap_lon
from stormweave.kernels import KernelParams
from stormweave.library import build_library
from stormweave.table import precompute_table
from stormweave.tracks import HistoricalTrack


def synthetic_tracks(n_points: int, seed: int = 7):
    """A dense cluster of random-walk tracks, ~60 points each."""
    rng = np.random.default_rng(seed)
    tracks = []
    remaining = n_points
    idx = 0
    while remaining > 0:
        n = int(min(remaining, rng.integers(40, 80)))
        if n < 10:
            break
        lat0 = rng.uniform(8.0, 20.0)
        lon0 = rng.uniform(60.0, 90.0)
        lat = lat0 + rng.normal(0.08, 0.05, n).cumsum()
        lon = lon0 + rng.normal(-0.10, 0.06, n).cumsum()
        peak = rng.uniform(40, 110)
        wind = np.maximum(peak * np.sin(np.linspace(0.15, np.pi - 0.15, n)), 15.0)
        tracks.append(
            HistoricalTrack(
                storm_id=f"BM{idx:05d}",
                basin_code="NI",
                genesis_year=2000,
                genesis_day_of_year=150,
                lat=lat,
                lon=wrap_lon(lon),
                lon_unwrapped=lon,
                wind=wind,
            )
        )
        idx += 1
        remaining -= n
    return tracks


def build_benchmark_library(n_points: int):
    cfg = basin_config("NI").with_overrides(
        record_start_year=1990, modern_cutoff_year=1990, record_end_year=2010
    )
    return build_library(synthetic_tracks(n_points), cfg)


def worker(n_points: int, repeat: int) -> None:
    """Measure the current backend; print one JSON line."""
    library = build_benchmark_library(n_points)

    from stormweave import backend

    gid = library.n_points // 2
    ids = np.arange(library.n_points, dtype=np.int64)
    t_pair = t_weight = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fields = backend.pair_fields(
            library.point_xyz[gid],
            float(library.point_vx[gid]), float(library.point_vy[gid]),
            float(library.point_age[gid]), float(library.point_wind[gid]),
            library.point_xyz[ids], library.point_vx[ids], library.point_vy[ids],
            library.point_age[ids], library.point_wind[ids],
        )
        t_pair = min(t_pair, time.perf_counter() - t0)
        t0 = time.perf_counter()
        backend.raw_weights(*fields, 2.5, library.max_v, library.max_t, library.max_dw, 2.0, 4.0, 2.0, 4.0)
        t_weight = min(t_weight, time.perf_counter() - t0)

    t_table = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        table = precompute_table(library, KernelParams())
        t_table = min(t_table, time.perf_counter() - t0)

    print(json.dumps({
        "backend": backend_name(),
        "pair_ms": t_pair * 1e3,
        "weights_ms": t_weight * 1e3,
        "table_s": t_table,
        "candidates": table.n_candidates,
    }))


def run_isolated(force_python: bool, n_points: int, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("STORMWEAVE_PURE_PYTHON", None)
    if force_python:
        env["STORMWEAVE_PURE_PYTHON"] = "1"
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--worker", "--points", str(n_points), "--repeat", str(repeat)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def check_agreement(n_points: int) -> None:
    impls = available_backends()
    if len(impls) < 2:
        print("agreement: compiled extension not built, nothing to compare")
        return
    library = build_benchmark_library(min(n_points, 4000))
    gid = library.n_points // 3
    ids = np.arange(library.n_points, dtype=np.int64)
    weights = {}
    for name, impl in impls.items():
        fields = impl.pair_fields(
            library.point_xyz[gid],
            float(library.point_vx[gid]), float(library.point_vy[gid]),
            float(library.point_age[gid]), float(library.point_wind[gid]),
            library.point_xyz[ids], library.point_vx[ids], library.point_vy[ids],
            library.point_age[ids], library.point_wind[ids],
        )
        weights[name] = impl.raw_weights(
            *fields, 2.5, library.max_v, library.max_t, library.max_dw, 2.0, 4.0, 2.0, 4.0
        )
    scale = max(weights["python"].max(), 1e-300)
    delta = np.abs(weights["python"] - weights["compiled"]).max() / scale
    print(f"agreement: max relative weight delta {delta:.3e} over {len(ids)} pairs")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.worker:
        worker(args.points, args.repeat)
        return

    have_compiled = "compiled" in available_backends()
    results = {}
    results["python"] = run_isolated(True, args.points, args.repeat)
    if have_compiled:
        results["compiled"] = run_isolated(False, args.points, args.repeat)

    print(f"library: ~{args.points} points, best of {args.repeat}")
    for name, r in results.items():
        print(
            f"{name:>9}: pair_fields {r['pair_ms']:8.2f} ms | raw_weights {r['weights_ms']:8.2f} ms "
            f"| precompute_table {r['table_s']:7.2f} s | {r['candidates']} candidates"
        )
    if have_compiled:
        py, cy = results["python"], results["compiled"]
        assert py["candidates"] == cy["candidates"]
        print(f"speedup (table build): {py['table_s'] / cy['table_s']:.2f}x")
        check_agreement(args.points)


if __name__ == "__main__":
    main()
