# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled periodic-distance kernels (hot loop of validity filtering and
structure matching). Mirrors symadit/_kernels_py.py exactly."""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt, round as c_round

cnp.import_array()


def min_pairwise_distance(frac, lattice):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] f = np.ascontiguousarray(frac, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] lat = np.ascontiguousarray(lattice, dtype=np.float64)
    cdef Py_ssize_t m = f.shape[0]
    cdef double best = 1e300
    cdef double dx, dy, dz, cx, cy, cz, d2
    cdef Py_ssize_t i, j
    cdef int si, sj, sk
    # shortest nonzero lattice vector in the 3x3x3 sweep
    for si in range(-1, 2):
        for sj in range(-1, 2):
            for sk in range(-1, 2):
                if si == 0 and sj == 0 and sk == 0:
                    continue
                cx = si * lat[0, 0] + sj * lat[1, 0] + sk * lat[2, 0]
                cy = si * lat[0, 1] + sj * lat[1, 1] + sk * lat[2, 1]
                cz = si * lat[0, 2] + sj * lat[1, 2] + sk * lat[2, 2]
                d2 = cx * cx + cy * cy + cz * cz
                if d2 < best:
                    best = d2
    for i in range(m):
        for j in range(i + 1, m):
            dx = f[i, 0] - f[j, 0]
            dy = f[i, 1] - f[j, 1]
            dz = f[i, 2] - f[j, 2]
            for si in range(-1, 2):
                for sj in range(-1, 2):
                    for sk in range(-1, 2):
                        cx = (dx + si) * lat[0, 0] + (dy + sj) * lat[1, 0] + (dz + sk) * lat[2, 0]
                        cy = (dx + si) * lat[0, 1] + (dy + sj) * lat[1, 1] + (dz + sk) * lat[2, 1]
                        cz = (dx + si) * lat[0, 2] + (dy + sj) * lat[1, 2] + (dz + sk) * lat[2, 2]
                        d2 = cx * cx + cy * cy + cz * cz
                        if d2 < best:
                            best = d2
    return sqrt(best)


def min_image_distance_matrix(frac_a, frac_b, lattice):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] fa = np.ascontiguousarray(frac_a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] fb = np.ascontiguousarray(frac_b, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] lat = np.ascontiguousarray(lattice, dtype=np.float64)
    cdef Py_ssize_t n = fa.shape[0], m = fb.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, m), dtype=np.float64)
    cdef double dx, dy, dz, cx, cy, cz, d2, best
    cdef Py_ssize_t i, j
    cdef int si, sj, sk
    for i in range(n):
        for j in range(m):
            dx = fa[i, 0] - fb[j, 0]
            dy = fa[i, 1] - fb[j, 1]
            dz = fa[i, 2] - fb[j, 2]
            dx -= c_round(dx)
            dy -= c_round(dy)
            dz -= c_round(dz)
            best = 1e300
            for si in range(-1, 2):
                for sj in range(-1, 2):
                    for sk in range(-1, 2):
                        cx = (dx + si) * lat[0, 0] + (dy + sj) * lat[1, 0] + (dz + sk) * lat[2, 0]
                        cy = (dx + si) * lat[0, 1] + (dy + sj) * lat[1, 1] + (dz + sk) * lat[2, 1]
                        cz = (dx + si) * lat[0, 2] + (dy + sj) * lat[1, 2] + (dz + sk) * lat[2, 2]
                        d2 = cx * cx + cy * cy + cz * cz
                        if d2 < best:
                            best = d2
            out[i, j] = sqrt(best)
    return out
