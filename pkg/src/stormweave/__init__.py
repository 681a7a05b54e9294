"""stormweave: synthetic tropical-cyclone track catalogs by segment resampling.

Pipeline: ingest a best-track archive into a per-basin segment library,
precompute a kernel-weighted transition table, generate multi-thousand-year
catalogs by walking and rejoining historical segments, and validate the
output with gridded track-density and wind-hit-probability diagnostics.
"""

from ._version import __version__
from .backend import backend_name
from .basins import BASINS, BasinConfig, basin_config, convert_wind
from .grids import GridField, GridSpec, field_compare, median_field, p64_field, track_density
from .kernels import Covariates, KernelParams, bisquare, covariates, transition_weights
from .library import (
    EmpiricalDistributions,
    SegmentLibrary,
    build_library,
    empirical_distributions,
    load_library,
    save_library,
)
from .simulate import (
    SimulationParams,
    SyntheticCatalog,
    SyntheticTrack,
    WalkState,
    generate_catalog,
    sample_annual_counts,
    sample_genesis,
    select_transition,
    simulate_track,
    smooth_join,
    start_track,
    step,
    translate_segment,
)
from .table import TransitionTable, load_table, precompute_table, save_table
from .tracks import HistoricalTrack, TrackPoint, interpolate_track

__all__ = [
    "__version__",
    "backend_name",
    "BASINS",
    "BasinConfig",
    "basin_config",
    "convert_wind",
    "GridField",
    "GridSpec",
    "field_compare",
    "median_field",
    "p64_field",
    "track_density",
    "Covariates",
    "KernelParams",
    "bisquare",
    "covariates",
    "transition_weights",
    "EmpiricalDistributions",
    "SegmentLibrary",
    "build_library",
    "empirical_distributions",
    "load_library",
    "save_library",
    "SimulationParams",
    "SyntheticCatalog",
    "SyntheticTrack",
    "generate_catalog",
    "sample_annual_counts",
    "sample_genesis",
    "select_transition",
    "simulate_track",
    "smooth_join",
    "start_track",
    "step",
    "translate_segment",
    "WalkState",
    "TransitionTable",
    "load_table",
    "precompute_table",
    "save_table",
    "HistoricalTrack",
    "TrackPoint",
    "interpolate_track",
]
