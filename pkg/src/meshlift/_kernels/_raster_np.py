"""Pure-numpy rasterization kernels (fallback backend).

Semantics are kept expression-for-expression identical to the compiled
backend so results match bit for bit: same barycentric formulas, same
strict depth test (ties keep the lower face index because faces are
processed in index order), same row-major accumulation order.
"""

import numpy as np

NAME = "numpy"


def raster_forward(xy, z, faces, height, width, det_eps=1e-12):
    """Z-buffer rasterization of triangles in continuous pixel coordinates.

    xy: (V, 2) float64 screen positions (pixel units, origin top-left).
    z:  (V,) float64 depth, smaller is nearer.
    faces: (F, 3) int32.
    Returns (face_id int32 (H, W) with -1 for background,
             bary float64 (H, W, 3),
             zbuf float64 (H, W) with +inf for background).
    """
    face_id = np.full((height, width), -1, dtype=np.int32)
    bary = np.zeros((height, width, 3), dtype=np.float64)
    zbuf = np.full((height, width), np.inf, dtype=np.float64)
    if len(faces) == 0:
        return face_id, bary, zbuf

    xs = np.arange(width, dtype=np.float64) + 0.5
    ys = np.arange(height, dtype=np.float64) + 0.5

    fx = xy[:, 0][faces]  # (F, 3)
    fy = xy[:, 1][faces]
    fz = z[faces]

    for fi in range(len(faces)):
        ax, bx, cx = fx[fi]
        ay, by, cy = fy[fi]
        det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if not abs(det) > det_eps:
            continue
        x0 = max(int(np.ceil(min(ax, bx, cx) - 0.5)), 0)
        x1 = min(int(np.floor(max(ax, bx, cx) - 0.5)), width - 1)
        y0 = max(int(np.ceil(min(ay, by, cy) - 0.5)), 0)
        y1 = min(int(np.floor(max(ay, by, cy) - 0.5)), height - 1)
        if x0 > x1 or y0 > y1:
            continue
        qx = xs[x0 : x1 + 1][None, :]
        qy = ys[y0 : y1 + 1][:, None]
        w0 = ((bx - qx) * (cy - qy) - (by - qy) * (cx - qx)) / det
        w1 = ((cx - qx) * (ay - qy) - (cy - qy) * (ax - qx)) / det
        w2 = 1.0 - w0 - w1
        za, zb, zc = fz[fi]
        depth = w0 * za + w1 * zb + w2 * zc
        window = (slice(y0, y1 + 1), slice(x0, x1 + 1))
        hit = (w0 >= 0.0) & (w1 >= 0.0) & (w2 >= 0.0) & (depth < zbuf[window])
        if not hit.any():
            continue
        zbuf[window][hit] = depth[hit]
        face_id[window][hit] = fi
        sub = bary[window]
        sub[hit, 0] = w0[hit]
        sub[hit, 1] = w1[hit]
        sub[hit, 2] = w2[hit]
    return face_id, bary, zbuf


def add_at_vec(out, idx, vals):
    """out[idx[i]] += vals[i], accumulated strictly in index order."""
    np.add.at(out, idx, vals)
    return out
