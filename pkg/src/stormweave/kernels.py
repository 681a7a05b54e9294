"""Transition kernel: standardized covariates and the bisquare product weight.

A candidate destination point j is compared to a source point i through four
standardized covariates, each in [0, 1]:

    distance   great-circle separation over the candidate radius
    motion     comparative wind-vector difference over the basin maximum
    age        absolute step-count difference over the basin maximum
    wind       absolute wind-speed difference over the basin maximum

Each covariate passes through a generalized bisquare (1 - u^2)^alpha, zero
outside [0, 1]; the transition weight is the product of the four kernels.
The distance and age exponents stay at 2; the motion and wind exponents are
sharpened above 2 (default 4) to suppress dynamically inconsistent jumps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import InputError
from .geo import great_circle_deg
from .library import SegmentLibrary

DEFAULT_ALPHA_SHARP = 4.0


@dataclass(frozen=True)
class KernelParams:
    alpha_dist: float = 2.0
    alpha_age: float = 2.0
    alpha_vec: float = DEFAULT_ALPHA_SHARP
    alpha_wind: float = DEFAULT_ALPHA_SHARP
    radius_deg: float = 2.5

    def __post_init__(self):
        if self.radius_deg <= 0:
            raise InputError("radius_deg must be positive")
        if self.alpha_vec <= 2 or self.alpha_wind <= 2:
            raise InputError("alpha_vec and alpha_wind must exceed 2")
        if self.alpha_dist <= 0 or self.alpha_age <= 0:
            raise InputError("alpha exponents must be positive")

    def to_dict(self) -> dict:
        return {
            "alpha_dist": self.alpha_dist,
            "alpha_age": self.alpha_age,
            "alpha_vec": self.alpha_vec,
            "alpha_wind": self.alpha_wind,
            "radius_deg": self.radius_deg,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KernelParams":
        return cls(**d)


@dataclass(frozen=True)
class Covariates:
    """Standardized comparison of one candidate against one source point."""

    distance: float
    motion: float
    age: float
    wind: float

    def clamped(self) -> "Covariates":
        return Covariates(*(min(max(v, 0.0), 1.0) for v in (self.distance, self.motion, self.age, self.wind)))


def bisquare(u: float, alpha: float) -> float:
    """Generalized bisquare weight (1 - u^2)^alpha; zero for u >= 1."""
    if u >= 1.0:
        return 0.0
    core = 1.0 - u * u
    return core**alpha


def covariates(
    library: SegmentLibrary,
    src_track: int,
    src_step: int,
    dst_track: int,
    dst_step: int,
    radius_deg: float | None = None,
) -> Covariates:
    """Standardized covariates for one (source, candidate) point pair.

    Scalar reference path; the table builder uses the vectorized backend.
    Values standardize against the library's basin maxima and clamp to
    [0, 1] (values beyond 1 carry zero weight anyway).
    """
    radius = library.radius_deg if radius_deg is None else radius_deg
    gi = library.global_id(src_track, src_step)
    gj = library.global_id(dst_track, dst_step)

    d = great_circle_deg(
        library.point_lat[gi], library.point_lon[gi], library.point_lat[gj], library.point_lon[gj]
    )
    v = float(np.hypot(library.point_vx[gj] - library.point_vx[gi], library.point_vy[gj] - library.point_vy[gi]))
    t = abs(float(library.point_age[gj] - library.point_age[gi]))
    w = abs(float(library.point_wind[gj] - library.point_wind[gi]))

    return Covariates(
        distance=min(d, radius) / radius,
        motion=v / library.max_v,
        age=t / library.max_t,
        wind=w / library.max_dw,
    ).clamped()


def pair_weight(cov: Covariates, params: KernelParams) -> float:
    return (
        bisquare(cov.distance, params.alpha_dist)
        * bisquare(cov.motion, params.alpha_vec)
        * bisquare(cov.age, params.alpha_age)
        * bisquare(cov.wind, params.alpha_wind)
    )


def transition_weights(
    library: SegmentLibrary,
    src_track: int,
    src_step: int,
    params: KernelParams,
    reserved_steps: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Candidate global ids and normalized weights for one source point.

    Candidates are every eligible library point inside the radius except the
    source point itself (a storm may rejoin its own track at a different
    step). An empty result — no candidates, or all weights at the kernel's
    support edge — is returned as empty arrays, not an error.
    """
    reserve = library.reserved_steps if reserved_steps is None else reserved_steps
    if src_step > library.track_len(src_track) - 1 - reserve:
        raise InputError(
            f"source point (track {src_track}, step {src_step}) is inside its reserved terminal steps"
        )

    gi = library.global_id(src_track, src_step)
    ids = library.ball_prefilter(gi, params.radius_deg)
    ids = ids[(ids != gi) & library.eligible[ids]]
    if ids.size == 0:
        return ids, np.empty(0)

    arc, vdiff, adiff, wdiff = backend.pair_fields(
        library.point_xyz[gi],
        float(library.point_vx[gi]),
        float(library.point_vy[gi]),
        float(library.point_age[gi]),
        float(library.point_wind[gi]),
        library.point_xyz[ids],
        library.point_vx[ids],
        library.point_vy[ids],
        library.point_age[ids],
        library.point_wind[ids],
    )
    keep = arc <= params.radius_deg  # exact metric decides membership
    if not np.any(keep):
        return np.empty(0, dtype=np.int64), np.empty(0)
    ids = ids[keep]
    raw = backend.raw_weights(
        arc[keep], vdiff[keep], adiff[keep], wdiff[keep],
        params.radius_deg, library.max_v, library.max_t, library.max_dw,
        params.alpha_dist, params.alpha_vec, params.alpha_age, params.alpha_wind,
    )
    total = float(raw.sum())
    if total <= 0.0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    return ids, raw / total
