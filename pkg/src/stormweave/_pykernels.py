"""Numpy implementations of the hot pairwise kernels.

These are the fallback for the compiled extension in ``_ckernels.pyx``. Both
backends implement the same signatures with the same operation order; they
agree to ~1e-15 relative (vectorized transcendentals may differ from libm in
the last ulp, so exact bit-equality across backends is not promised).
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def pair_fields(src_xyz, src_vx, src_vy, src_age, src_wind,
                cand_xyz, cand_vx, cand_vy, cand_age, cand_wind):
    """Raw comparison fields between one source point and candidate arrays.

    Returns (arc_deg, vec_diff, age_diff, wind_diff), each shape (n,):
    great-circle separation in degrees, comparative wind-vector difference
    magnitude, absolute age difference in steps, absolute wind difference.
    """
    sx, sy, sz = src_xyz
    cx = cand_xyz[:, 0]
    cy = cand_xyz[:, 1]
    cz = cand_xyz[:, 2]

    dot = sx * cx + sy * cy + sz * cz
    rx = sy * cz - sz * cy
    ry = sz * cx - sx * cz
    rz = sx * cy - sy * cx
    cross = np.sqrt(rx * rx + ry * ry + rz * rz)
    arc_deg = np.degrees(np.arctan2(cross, dot))

    dvx = cand_vx - src_vx
    dvy = cand_vy - src_vy
    vec_diff = np.sqrt(dvx * dvx + dvy * dvy)
    age_diff = np.abs(cand_age - src_age)
    wind_diff = np.abs(cand_wind - src_wind)
    return arc_deg, vec_diff, age_diff, wind_diff


def raw_weights(arc_deg, vec_diff, age_diff, wind_diff,
                radius_deg, max_v, max_t, max_dw,
                alpha_dist, alpha_vec, alpha_age, alpha_wind):
    """Product of the four bisquare kernels on standardized fields.

    Standardization clamps to [0, 1]; anything at or past a kernel's support
    edge contributes weight 0.
    """
    u1 = np.minimum(arc_deg, radius_deg) / radius_deg
    u2 = vec_diff / max_v
    u3 = age_diff / max_t
    u4 = wind_diff / max_dw

    w = _bisquare(u1, alpha_dist)
    w = w * _bisquare(u2, alpha_vec)
    w = w * _bisquare(u3, alpha_age)
    w = w * _bisquare(u4, alpha_wind)
    return w


def _bisquare(u, alpha):
    core = 1.0 - u * u
    core = np.maximum(core, 0.0)
    if alpha == int(alpha) and 1.0 <= alpha <= 16.0:
        # binary exponentiation, same multiplication order as the compiled
        # backend so the two agree to the last few ulps
        n = int(alpha)
        result = np.ones_like(core)
        base = core
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result
    return np.power(core, alpha)
