"""Spherical geometry helpers: arc distances, bearings, longitude handling.

All distances are central angles in degrees of arc (1 degree ~ 111 km), the
natural unit for degree-radius candidate searches. Longitudes are stored in
(-180, 180] and unwrapped to a continuous series within a track, so
antimeridian crossings interpolate and translate along the short arc.
"""

from __future__ import annotations

import math

import numpy as np

EARTH_TO_XYZ_DTYPE = np.float64


def wrap_lon(lon):
    """Map longitude(s) into (-180, 180]."""
    return 180.0 - ((180.0 - np.asarray(lon, dtype=float)) % 360.0)


def wrap_lon_scalar(lon: float) -> float:
    return 180.0 - ((180.0 - lon) % 360.0)


def unwrap_lon(lon_deg) -> np.ndarray:
    """Remove 360-degree jumps from a longitude series."""
    arr = np.asarray(lon_deg, dtype=float)
    if arr.size <= 1:
        return arr.astype(float, copy=True)
    return np.unwrap(arr, period=360.0)


def to_unit_xyz(lat_deg, lon_deg) -> np.ndarray:
    """Unit vectors on the sphere, shape (..., 3)."""
    lat = np.radians(np.asarray(lat_deg, dtype=EARTH_TO_XYZ_DTYPE))
    lon = np.radians(np.asarray(lon_deg, dtype=EARTH_TO_XYZ_DTYPE))
    cos_lat = np.cos(lat)
    return np.stack([cos_lat * np.cos(lon), cos_lat * np.sin(lon), np.sin(lat)], axis=-1)


def great_circle_deg(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Central angle between two points, in degrees of arc.

    Uses the atan2 form, which is well conditioned at both small and
    antipodal separations.
    """
    p1, l1, p2, l2 = map(math.radians, (lat1, lon1, lat2, lon2))
    sp1, cp1 = math.sin(p1), math.cos(p1)
    sp2, cp2 = math.sin(p2), math.cos(p2)
    dl = l2 - l1
    sdl, cdl = math.sin(dl), math.cos(dl)
    y = math.hypot(cp2 * sdl, cp1 * sp2 - sp1 * cp2 * cdl)
    x = sp1 * sp2 + cp1 * cp2 * cdl
    return math.degrees(math.atan2(y, x))


def chord_for_arc_deg(arc_deg: float) -> float:
    """Euclidean chord length on the unit sphere subtending ``arc_deg``."""
    return 2.0 * math.sin(math.radians(arc_deg) / 2.0)


def forward_bearing(lat1: float, lon1_unwrapped: float, lat2: float, lon2_unwrapped: float) -> float:
    """Forward-motion angle in radians, east = 0, counterclockwise positive.

    Local equirectangular approximation: the east displacement is scaled by
    the cosine of the mid latitude. Returns nan for zero displacement.
    """
    dlat = lat2 - lat1
    dlon = (lon2_unwrapped - lon1_unwrapped) * math.cos(math.radians(0.5 * (lat1 + lat2)))
    if dlat == 0.0 and dlon == 0.0:
        return math.nan
    return math.atan2(dlat, dlon)


def motion_vector(
    prev_lat: float,
    prev_lon_unwrapped: float,
    lat: float,
    lon_unwrapped: float,
    wind: float,
    carried_bearing: float | None = None,
) -> tuple[float, float]:
    """Comparative wind vector at the current point of one track step.

    Magnitude is the current point's wind; direction is the forward-motion
    bearing from the previous point (east = 0). A stationary step falls back
    to ``carried_bearing`` (the previous step's heading).
    """
    bearing = forward_bearing(prev_lat, prev_lon_unwrapped, lat, lon_unwrapped)
    if math.isnan(bearing):
        if carried_bearing is None:
            raise ValueError("stationary step with no carried bearing")
        bearing = carried_bearing
    return wind * math.cos(bearing), wind * math.sin(bearing)


def motion_vectors(lat: np.ndarray, lon_unwrapped: np.ndarray, wind: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-point comparative wind vectors along a track.

    The vector at point k has magnitude wind[k] and the direction of motion
    from point k-1 to point k (east = 0 convention). Stationary steps carry
    the previous step's bearing; the first point uses the first moving
    step's bearing (normally the bearing to the second point). A track that
    never moves gets due-east headings.
    """
    n = len(lat)
    vx = np.empty(n, dtype=float)
    vy = np.empty(n, dtype=float)
    bearings = np.full(n, math.nan)
    for k in range(1, n):
        bearings[k] = forward_bearing(lat[k - 1], lon_unwrapped[k - 1], lat[k], lon_unwrapped[k])
    # first point looks ahead; interior nans inherit the previous heading
    first = math.nan
    for k in range(1, n):
        if not math.isnan(bearings[k]):
            first = bearings[k]
            break
    bearings[0] = first
    last = bearings[0]
    if math.isnan(last):
        last = 0.0  # fully stationary track
    for k in range(n):
        if math.isnan(bearings[k]):
            bearings[k] = last
        else:
            last = bearings[k]
    np.cos(bearings, out=vx)
    np.sin(bearings, out=vy)
    vx *= wind
    vy *= wind
    return vx, vy
