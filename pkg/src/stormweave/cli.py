"""Command-line entry point.

Subcommands wire the pipeline end to end:

    stormweave ingest    archive CSV -> segment library (+ rejects report)
    stormweave train     library -> transition table
    stormweave simulate  library + table -> synthetic catalog
    stormweave validate  observed vs simulated gridded diagnostics
    stormweave compare   cross-catalog diagnostics on the generic format

Every command writes a resolved config snapshot beside its outputs and is
byte-deterministic given identical inputs, seed, and worker count.

Exit codes: 0 success, 1 usage, 2 input or schema error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ._version import __version__
from .backend import backend_name
from .basins import BASIN_CODES
from .catalog import read_catalog, write_catalog
from .config import RunConfig, load_config
from .errors import InputError, InvariantError, StormweaveError
from .grids import export_field, field_compare, median_field, p64_field, track_density
from .ibtracs import parse_archive, write_rejects_report
from .library import build_library, empirical_distributions, load_library, save_library
from .simulate import generate_catalog
from .table import load_table, precompute_table, save_table
from .tracks import interpolate_storms

LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p: _Parser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--basin", choices=BASIN_CODES, help="basin code")
    p.add_argument("--out-dir", dest="out_dir", help="output directory (env STORMWEAVE_OUT)")
    p.add_argument("--library", dest="library_path", help="segment library file")
    p.add_argument("--table", dest="table_path", help="transition table file")
    p.add_argument("--workers", type=int, help="parallelism degree (output-invariant, default 1)")
    p.add_argument("-v", "--verbose", action="store_true", help="chatty logging")


def build_parser() -> _Parser:
    parser = _Parser(prog="stormweave", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"stormweave {__version__} ({backend_name()} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse an archive CSV and build the segment library")
    _add_common(p)
    p.add_argument("--archive", help="best-track archive CSV (point per row)")
    p.add_argument("--radius", type=float, dest="radius_deg",
                   help="candidate radius in degrees of arc (default 2.5)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="precompute the transition table")
    _add_common(p)
    p.add_argument("--alpha-vec", type=float, help="comparative-vector kernel exponent (default 4, must exceed 2)")
    p.add_argument("--alpha-wind", type=float, help="wind-magnitude kernel exponent (default 4, must exceed 2)")
    p.add_argument("--reserved-steps", type=int, dest="reserved_steps",
                   help="terminal points reserved per track (default max(3, 5%% of mean track steps))")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("simulate", help="generate a synthetic catalog")
    _add_common(p)
    p.add_argument("--years", type=int, dest="n_years", help="catalog length in synthetic years")
    p.add_argument("--seed", type=int, help="RNG seed; (seed, year) substreams make any year subset reproducible")
    p.add_argument("--jump-probability", type=float, dest="jump_probability",
                   help="per-step transition probability (default 0.1)")
    p.add_argument("--catalog", dest="catalog_path", help="output catalog CSV path")
    p.add_argument("--provenance", action="store_true", help="also write per-track provenance JSON")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="gridded observed-vs-simulated diagnostics")
    _add_common(p)
    p.add_argument("--catalog", dest="catalog_path", help="catalog CSV to validate")
    p.add_argument("--observed-only", action="store_true", help="only export the observed fields")
    p.add_argument("--nb", type=int, dest="n_b", help="years per draw (default: the basin's modern window length)")
    p.add_argument("--n-draws", type=int, dest="n_draws", help="median protocol draws (default 100)")
    p.add_argument("--diag-seed", type=int, dest="diag_seed", help="seed for the draw protocol (default 0)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compare", help="compare two catalogs in the generic CSV format")
    _add_common(p)
    p.add_argument("catalog_a", help="first catalog CSV")
    p.add_argument("catalog_b", help="second catalog CSV")
    p.add_argument("--nb", type=int, dest="n_b", help="years per draw (default: the basin's modern window length)")
    p.add_argument("--n-draws", type=int, dest="n_draws", help="median protocol draws (default 100)")
    p.add_argument("--diag-seed", type=int, dest="diag_seed", help="seed for the draw protocol (default 0)")
    p.set_defaults(func=cmd_compare)

    return parser


_OVERRIDE_KEYS = (
    "basin", "archive", "library_path", "table_path", "catalog_path", "out_dir",
    "n_years", "seed", "jump_probability", "reserved_steps", "n_b", "n_draws",
    "diag_seed", "workers",
)


def _resolve(args) -> RunConfig:
    overrides = {k: getattr(args, k, None) for k in _OVERRIDE_KEYS}
    cfg = load_config(args.config, overrides)
    radius = getattr(args, "radius_deg", None)
    alpha_vec = getattr(args, "alpha_vec", None)
    alpha_wind = getattr(args, "alpha_wind", None)
    if radius is not None or alpha_vec is not None or alpha_wind is not None:
        kp = cfg.kernel.to_dict()
        if radius is not None:
            kp["radius_deg"] = radius
        if alpha_vec is not None:
            kp["alpha_vec"] = alpha_vec
        if alpha_wind is not None:
            kp["alpha_wind"] = alpha_wind
        cfg.kernel = type(cfg.kernel).from_dict(kp)
    return cfg


def cmd_ingest(cfg: RunConfig, args) -> int:
    if not cfg.archive:
        raise InputError("no archive CSV given (config paths.archive or --archive)")
    basin_cfg = cfg.basin_cfg()
    rows, rejects = parse_archive(cfg.archive, basin_cfg)
    tracks, dropped = interpolate_storms(rows, basin_cfg)
    if not tracks:
        raise InputError("no usable storms in the archive for this basin")
    library = build_library(tracks, basin_cfg, radius_deg=cfg.kernel.radius_deg)

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lib_path = cfg.path("library_path", f"{cfg.basin}.library.sw")
    save_library(lib_path, library)
    write_rejects_report(out / f"{cfg.basin}.rejects.csv", rejects)
    cfg.write_snapshot("ingest")

    print(
        f"ingest: {library.n_tracks} tracks ({len(library.modern_track_ids)} modern), "
        f"{library.n_points} points, {len(rejects)} rejected rows, {len(dropped)} dropped storms"
    )
    print(f"library: {lib_path} checksum {library.checksum[:12]}")
    return EXIT_OK


def cmd_train(cfg: RunConfig, args) -> int:
    library = load_library(cfg.path("library_path", f"{cfg.basin}.library.sw"))
    table = precompute_table(library, cfg.kernel, reserved_steps=cfg.reserved_steps, workers=cfg.workers)
    table_path = cfg.path("table_path", f"{cfg.basin}.table.sw")
    Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
    save_table(table_path, table)
    cfg.write_snapshot("train")
    print(
        f"train: {int(table.eligible.sum())} source points, {table.n_candidates} candidates, "
        f"reserved_steps={table.reserved_steps}"
    )
    print(f"table: {table_path} checksum {table.checksum()[:12]}")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, args) -> int:
    library = load_library(cfg.path("library_path", f"{cfg.basin}.library.sw"))
    table = load_table(cfg.path("table_path", f"{cfg.basin}.table.sw"), library)
    dist = empirical_distributions(library)
    catalog = generate_catalog(library, table, dist, cfg.sim_params(), workers=cfg.workers)

    Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
    cat_path = cfg.path("catalog_path", f"{cfg.basin}.catalog.csv")
    prov_path = Path(str(cat_path).removesuffix(".csv") + ".provenance.json") if args.provenance else None
    write_catalog(cat_path, catalog, provenance_path=prov_path)
    cfg.write_snapshot("simulate")

    n_points = sum(len(t) for t in catalog.tracks)
    print(
        f"simulate: {len(catalog.tracks)} storms over {cfg.n_years} years "
        f"({n_points} points, seed {cfg.seed}, {backend_name()} kernels)"
    )
    print(f"catalog: {cat_path}")
    return EXIT_OK


def _observed_fields(cfg: RunConfig, library):
    grid = cfg.grid_spec()
    n_b = cfg.resolve_n_b()
    modern = [t for t, m in zip(library.tracks, library.modern_mask) if m]
    density = track_density(modern, grid, n_b)
    p64 = p64_field(modern, grid, n_b)
    density.provenance.update({"source": "observed", "window_years": n_b})
    p64.provenance.update({"source": "observed", "window_years": n_b})
    return grid, n_b, density, p64


def cmd_validate(cfg: RunConfig, args) -> int:
    library = load_library(cfg.path("library_path", f"{cfg.basin}.library.sw"))
    grid, n_b, obs_density, obs_p64 = _observed_fields(cfg, library)

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    export_field(obs_density, out / f"{cfg.basin}.observed.density.csv")
    export_field(obs_p64, out / f"{cfg.basin}.observed.p64.csv")
    written = 2

    if not args.observed_only:
        view = read_catalog(cfg.path("catalog_path", f"{cfg.basin}.catalog.csv"))
        if view.n_years < n_b:
            raise InputError(f"catalog covers {view.n_years} years but the draw length is {n_b}")
        sim_density = median_field(view, grid, n_b, cfg.n_draws, "track_density", seed=cfg.diag_seed)
        sim_p64 = median_field(view, grid, n_b, cfg.n_draws, "p64", seed=cfg.diag_seed)
        export_field(sim_density, out / f"{cfg.basin}.simulated.density.csv")
        export_field(sim_p64, out / f"{cfg.basin}.simulated.p64.csv")
        written = 4
        for name, obs, sim in (("density", obs_density, sim_density), ("p64", obs_p64, sim_p64)):
            summary = field_compare(obs, sim)
            _write_summary(out / f"{cfg.basin}.compare.{name}", summary)
            print(f"validate[{name}]: log-corr={_fmt(summary.log_correlation)} "
                  f"mean-ratio={summary.mean_ratio:.3f} joint-cells={summary.n_joint_cells}")

    cfg.write_snapshot("validate")
    print(f"validate: wrote {written} fields to {out}")
    return EXIT_OK


def cmd_compare(cfg: RunConfig, args) -> int:
    grid = cfg.grid_spec()
    n_b = cfg.resolve_n_b()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    views = [read_catalog(args.catalog_a), read_catalog(args.catalog_b)]
    for v, label in zip(views, ("a", "b")):
        if v.n_years < n_b:
            raise InputError(f"catalog {label} covers {v.n_years} years but the draw length is {n_b}")

    for metric in ("track_density", "p64"):
        fields = [median_field(v, grid, n_b, cfg.n_draws, metric, seed=cfg.diag_seed) for v in views]
        summary = field_compare(fields[0], fields[1])
        _write_summary(out / f"compare.{metric}", summary)
        print(f"compare[{metric}]: log-corr={_fmt(summary.log_correlation)} "
              f"mean-ratio={summary.mean_ratio:.3f} joint-cells={summary.n_joint_cells}")

    cfg.write_snapshot("compare")
    return EXIT_OK


def _fmt(x) -> str:
    return "undefined" if x is None else f"{x:.4f}"


def _write_summary(stem, summary) -> None:
    with open(f"{stem}.json", "w", encoding="utf-8") as fh:
        json.dump(summary.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    with open(f"{stem}.txt", "w", encoding="utf-8") as fh:
        fh.write(summary.to_text())


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve(args)
        return args.func(cfg, args)
    except InvariantError as exc:
        print(f"stormweave: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (InputError, StormweaveError) as exc:
        print(f"stormweave: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
