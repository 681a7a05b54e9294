# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the pairwise kernels in ``_pykernels``.

Same signatures, same operation order; selected at import by
``stormweave.backend`` when the extension built successfully.
"""

import numpy as np

cimport cython
from libc.math cimport atan2, fabs, pow, sqrt

BACKEND_NAME = "compiled"

cdef double RAD2DEG = 57.29577951308232087679815481410517


def pair_fields(src_xyz, double src_vx, double src_vy, double src_age, double src_wind,
                double[:, ::1] cand_xyz, double[::1] cand_vx, double[::1] cand_vy,
                double[::1] cand_age, double[::1] cand_wind):
    cdef double sx = src_xyz[0]
    cdef double sy = src_xyz[1]
    cdef double sz = src_xyz[2]
    cdef Py_ssize_t n = cand_xyz.shape[0]

    arc = np.empty(n, dtype=np.float64)
    vec = np.empty(n, dtype=np.float64)
    age = np.empty(n, dtype=np.float64)
    wnd = np.empty(n, dtype=np.float64)
    cdef double[::1] arc_v = arc
    cdef double[::1] vec_v = vec
    cdef double[::1] age_v = age
    cdef double[::1] wnd_v = wnd

    cdef Py_ssize_t k
    cdef double cx, cy, cz, dot, rx, ry, rz, cross, dvx, dvy
    for k in range(n):
        cx = cand_xyz[k, 0]
        cy = cand_xyz[k, 1]
        cz = cand_xyz[k, 2]
        dot = sx * cx + sy * cy + sz * cz
        rx = sy * cz - sz * cy
        ry = sz * cx - sx * cz
        rz = sx * cy - sy * cx
        cross = sqrt(rx * rx + ry * ry + rz * rz)
        arc_v[k] = atan2(cross, dot) * RAD2DEG
        dvx = cand_vx[k] - src_vx
        dvy = cand_vy[k] - src_vy
        vec_v[k] = sqrt(dvx * dvx + dvy * dvy)
        age_v[k] = fabs(cand_age[k] - src_age)
        wnd_v[k] = fabs(cand_wind[k] - src_wind)
    return arc, vec, age, wnd


cdef inline double _bisq(double u, double alpha) nogil:
    cdef double core = 1.0 - u * u
    cdef double result, base
    cdef long n
    if core < 0.0:
        core = 0.0
    if alpha == <double>(<long>alpha) and 1.0 <= alpha <= 16.0:
        # binary exponentiation, same multiplication order as the numpy
        # fallback; much faster than libm pow for the default exponents
        n = <long>alpha
        result = 1.0
        base = core
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result
    return pow(core, alpha)


def raw_weights(double[::1] arc_deg, double[::1] vec_diff, double[::1] age_diff,
                double[::1] wind_diff, double radius_deg, double max_v, double max_t,
                double max_dw, double alpha_dist, double alpha_vec, double alpha_age,
                double alpha_wind):
    cdef Py_ssize_t n = arc_deg.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] out_v = out

    cdef Py_ssize_t k
    cdef double d, u1, w
    for k in range(n):
        d = arc_deg[k]
        if d > radius_deg:
            d = radius_deg
        u1 = d / radius_deg
        w = _bisq(u1, alpha_dist)
        w = w * _bisq(vec_diff[k] / max_v, alpha_vec)
        w = w * _bisq(age_diff[k] / max_t, alpha_age)
        w = w * _bisq(wind_diff[k] / max_dw, alpha_wind)
        out_v[k] = w
    return out
