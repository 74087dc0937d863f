# cython: boundscheck=False, wraparound=False, cdivision=False
"""Compiled rasterization kernels (hot-path backend).

Expression order mirrors the numpy fallback exactly (and the extension is
built with -ffp-contract=off) so both backends produce bit-identical
buffers.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, floor, fabs

cnp.import_array()

NAME = "cython"


def raster_forward(cnp.ndarray[cnp.float64_t, ndim=2] xy,
                   cnp.ndarray[cnp.float64_t, ndim=1] z,
                   cnp.ndarray[cnp.int32_t, ndim=2] faces,
                   int height, int width, double det_eps=1e-12):
    """Z-buffer rasterization; see the numpy twin for the full contract."""
    cdef cnp.ndarray[cnp.int32_t, ndim=2] face_id = np.full((height, width), -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] bary = np.zeros((height, width, 3), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] zbuf = np.full((height, width), np.inf, dtype=np.float64)

    cdef Py_ssize_t nf = faces.shape[0]
    cdef Py_ssize_t fi, px, py
    cdef int ia, ib, ic, x0, x1, y0, y1
    cdef double ax, ay, bx, by, cx, cy, za, zb, zc
    cdef double det, qx, qy, w0, w1, w2, depth
    cdef double minx, maxx, miny, maxy

    for fi in range(nf):
        ia = faces[fi, 0]
        ib = faces[fi, 1]
        ic = faces[fi, 2]
        ax = xy[ia, 0]; ay = xy[ia, 1]
        bx = xy[ib, 0]; by = xy[ib, 1]
        cx = xy[ic, 0]; cy = xy[ic, 1]
        det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if not fabs(det) > det_eps:
            continue
        minx = ax
        if bx < minx: minx = bx
        if cx < minx: minx = cx
        maxx = ax
        if bx > maxx: maxx = bx
        if cx > maxx: maxx = cx
        miny = ay
        if by < miny: miny = by
        if cy < miny: miny = cy
        maxy = ay
        if by > maxy: maxy = by
        if cy > maxy: maxy = cy
        x0 = <int>ceil(minx - 0.5)
        if x0 < 0: x0 = 0
        x1 = <int>floor(maxx - 0.5)
        if x1 > width - 1: x1 = width - 1
        y0 = <int>ceil(miny - 0.5)
        if y0 < 0: y0 = 0
        y1 = <int>floor(maxy - 0.5)
        if y1 > height - 1: y1 = height - 1
        if x0 > x1 or y0 > y1:
            continue
        za = z[ia]; zb = z[ib]; zc = z[ic]
        for py in range(y0, y1 + 1):
            qy = py + 0.5
            for px in range(x0, x1 + 1):
                qx = px + 0.5
                w0 = ((bx - qx) * (cy - qy) - (by - qy) * (cx - qx)) / det
                w1 = ((cx - qx) * (ay - qy) - (cy - qy) * (ax - qx)) / det
                w2 = 1.0 - w0 - w1
                if w0 >= 0.0 and w1 >= 0.0 and w2 >= 0.0:
                    depth = w0 * za + w1 * zb + w2 * zc
                    if depth < zbuf[py, px]:
                        zbuf[py, px] = depth
                        face_id[py, px] = <cnp.int32_t>fi
                        bary[py, px, 0] = w0
                        bary[py, px, 1] = w1
                        bary[py, px, 2] = w2
    return face_id, bary, zbuf


def add_at_vec(cnp.ndarray[cnp.float64_t, ndim=2] out,
               cnp.ndarray[cnp.int64_t, ndim=1] idx,
               cnp.ndarray[cnp.float64_t, ndim=2] vals):
    """out[idx[i]] += vals[i], accumulated strictly in index order."""
    cdef Py_ssize_t n = idx.shape[0]
    cdef Py_ssize_t c = vals.shape[1]
    cdef Py_ssize_t i, j
    cdef cnp.int64_t row
    for i in range(n):
        row = idx[i]
        for j in range(c):
            out[row, j] += vals[i, j]
    return out
