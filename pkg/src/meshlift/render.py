"""Forward rasterization and the differentiable view loss.

The rasterizer produces color / normal / alpha / depth rasters per
orthographic camera.  Coverage is hard except for a one-pixel
antialiased band along the silhouette, built from the exact crossing
point of the silhouette edge between adjacent pixel centers; that band
is what makes the alpha term differentiable with respect to vertex
positions.

The view loss is

    w_normal * MSE(normal raster, target)   weighted to foreground overlap
  + w_alpha  * MSE(alpha raster, target)
  + lambda   * sum over vertices |uniform Laplacian|^2

with each image term averaged over all pixels (and channels) of all
views so weights stay resolution independent.  The normal term uses a
continuous foreground weight clip(2*alpha - 1, 0, 1) on both sides: the
antialiased alpha passes exactly through 0.5 whenever a pixel flips
coverage, so the weighted term stays continuous in vertex positions
(a hard mask would jump there and finite differences would disagree).
Gradients are analytic: interior pixels differentiate through
barycentric weights and through the vertex-normal computation;
silhouette pixels differentiate through the antialiased band; the
smoothness term is exact.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ._kernels import add_at_vec, raster_forward
from .cameras import CameraRig, OrthoCamera
from .errors import ContractError
from .mesh import TriangleMesh

_NORM_EPS = 1e-20


def encode_normal(n):
    """Map a world normal in [-1, 1]^3 to raster channels in [0, 1]."""
    return (n + 1.0) / 2.0


def decode_normal(e):
    return 2.0 * np.asarray(e, dtype=np.float64) - 1.0


@dataclass
class ViewRecord:
    """One rendered (or generated) view plus its camera."""

    camera: OrthoCamera
    color: np.ndarray  # (H, W, 3) in [0, 1]
    normal: np.ndarray  # (H, W, 3) encoded world normals
    alpha: np.ndarray  # (H, W) in [0, 1]
    depth: Optional[np.ndarray] = None  # (H, W) world-unit depth

    def __post_init__(self):
        res = self.camera.resolution
        for name in ("color", "normal", "alpha"):
            arr = getattr(self, name)
            if arr.shape[:2] != (res, res):
                raise ContractError(f"{name} raster does not match camera resolution {res}")

    @property
    def foreground(self) -> np.ndarray:
        return self.alpha > 0.5


@dataclass
class MultiviewSet:
    views: List[ViewRecord]

    def __post_init__(self):
        if not self.views:
            raise ContractError("multiview set needs at least one view")
        res = {v.camera.resolution for v in self.views}
        ext = {v.camera.ortho_half_extent for v in self.views}
        if len(res) != 1 or len(ext) != 1:
            raise ContractError("views must share resolution and half extent")

    def __iter__(self):
        return iter(self.views)

    def __len__(self):
        return len(self.views)

    def __getitem__(self, i):
        return self.views[i]

    @property
    def resolution(self) -> int:
        return self.views[0].camera.resolution

    @property
    def half_extent(self) -> float:
        return self.views[0].camera.ortho_half_extent

    def cameras(self):
        return [v.camera for v in self.views]


@dataclass
class LossWeights:
    w_normal: float = 1.0
    w_alpha: float = 1.0
    lambda_smooth: float = 0.02

    def __post_init__(self):
        if self.w_normal < 0 or self.w_alpha < 0 or self.lambda_smooth < 0:
            raise ValueError("loss weights must be non-negative")
        if self.w_normal == 0 and self.w_alpha == 0 and self.lambda_smooth == 0:
            raise ValueError("at least one loss weight must be positive")


# ---------------------------------------------------------------------------
# Geometry helpers shared by forward and backward passes


def vertex_normal_sums(positions, faces):
    """Unnormalized face normals and their per-vertex sums.

    Returns (face cross products (F, 3), per-vertex sums (V, 3),
    sum lengths (V,), unit vertex normals (V, 3)).
    """
    nv = len(positions)
    if len(faces) == 0:
        zeros = np.zeros((nv, 3))
        return np.zeros((0, 3)), zeros, np.zeros(nv), zeros
    p = positions[faces]
    m = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    sums = np.zeros((nv, 3))
    idx = faces.astype(np.int64).reshape(-1)
    vals = np.repeat(m, 3, axis=0).reshape(len(faces), 3, 3).reshape(-1, 3)
    add_at_vec(sums, idx, np.ascontiguousarray(vals))
    lens = np.linalg.norm(sums, axis=1)
    unit = sums / np.maximum(lens, _NORM_EPS)[:, None]
    return m, sums, lens, unit


def project(camera: OrthoCamera, positions):
    """Screen-space xy (pixels) and depth for all vertices."""
    px, py, depth = camera.world_to_pixel_array(positions)
    return np.ascontiguousarray(np.stack([px, py], axis=1)), np.ascontiguousarray(depth)


@dataclass
class _AAPairs:
    """Silhouette pixel pairs used by the antialiased alpha band."""

    pix_in: np.ndarray  # flat index of the covered pixel
    pix_out: np.ndarray  # flat index of the background pixel
    q_in: np.ndarray  # (N, 2) covered pixel center
    step: np.ndarray  # (N, 2) unit step toward the background pixel
    s_lose: np.ndarray  # crossing nearest the covered pixel
    v_lose: np.ndarray  # (N, 2) its silhouette edge endpoints
    s_gain: np.ndarray  # crossing nearest the background pixel
    v_gain: np.ndarray
    gain_winner: np.ndarray = None  # pair carrying its background pixel's max
    lose_winner: np.ndarray = None  # pair carrying its covered pixel's max

    @classmethod
    def empty(cls):
        z = np.zeros(0, dtype=np.int64)
        z2 = np.zeros((0, 2), dtype=np.int64)
        f = np.zeros(0)
        f2 = np.zeros((0, 2))
        b = np.zeros(0, dtype=bool)
        return cls(z, z, f2, f2, f, z2, f, z2, b, b)

    def __len__(self):
        return len(self.pix_in)


@dataclass
class RasterData:
    """Internal per-view rasterization products."""

    camera: OrthoCamera
    xy: np.ndarray
    z: np.ndarray
    faces: np.ndarray
    face_id: np.ndarray
    bary: np.ndarray
    zbuf: np.ndarray
    alpha: np.ndarray
    alpha_raw: np.ndarray = field(repr=False, default=None)
    pairs: _AAPairs = field(repr=False, default=None)

    @property
    def covered(self):
        return self.face_id >= 0


def _silhouette_edges(xy, faces):
    """Vertex index pairs of screen-space silhouette edges.

    An edge is on the silhouette when it borders exactly one face or
    when its two faces have opposite screen orientation (one front, one
    back facing).  The set is combinatorial, so it does not jump when
    the depth-test winner at a pixel switches between interior faces.
    """
    if len(faces) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    f = faces.astype(np.int64)
    a, b, c = xy[f[:, 0]], xy[f[:, 1]], xy[f[:, 2]]
    det = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    sign = np.sign(det)
    edges = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    edges = np.sort(edges, axis=1)
    uniq, inverse, counts = np.unique(edges, axis=0, return_inverse=True, return_counts=True)
    edge_sign_min = np.full(len(uniq), 2.0)
    edge_sign_max = np.full(len(uniq), -2.0)
    face_sign = np.tile(sign, 3)  # matches the [e01; e12; e20] block layout
    np.minimum.at(edge_sign_min, inverse, face_sign)
    np.maximum.at(edge_sign_max, inverse, face_sign)
    silhouette = (counts == 1) | ((counts == 2) & (edge_sign_min * edge_sign_max <= 0))
    return uniq[silhouette]


def _silhouette_crossing(xy, sil_edges, q_in, step, chunk=512):
    """Extreme crossings of silhouette edges along q_in -> q_out per pair.

    Returns (s_lo, v_lo, s_hi, v_hi, valid): s_lo is the crossing nearest
    the covered pixel (drives its coverage loss), s_hi the crossing
    nearest the background pixel (drives its coverage gain).  Both
    coincide for the common single-crossing case; keeping both makes
    alpha continuous when a pixel flips coverage.
    """
    n = len(q_in)
    s_lo = np.full(n, np.inf)
    s_hi = np.full(n, -np.inf)
    v_lo = np.zeros((n, 2), dtype=np.int64)
    v_hi = np.zeros((n, 2), dtype=np.int64)
    if len(sil_edges) == 0 or n == 0:
        return s_lo, v_lo, s_hi, v_hi, np.zeros(n, dtype=bool)
    e1 = xy[sil_edges[:, 0]]  # (S, 2)
    evec = xy[sil_edges[:, 1]] - e1
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        q = q_in[lo:hi]
        d = step[lo:hi]
        denom = d[:, 0, None] * evec[None, :, 1] - d[:, 1, None] * evec[None, :, 0]
        num = (e1[None, :, 0] - q[:, 0, None]) * evec[None, :, 1] - (
            e1[None, :, 1] - q[:, 1, None]
        ) * evec[None, :, 0]
        # parameter along the edge itself: the crossing must land on the
        # edge segment, not just its supporting line
        u_num = (q[:, 0, None] - e1[None, :, 0]) * d[:, 1, None] - (
            q[:, 1, None] - e1[None, :, 1]
        ) * d[:, 0, None]
        ok = np.abs(denom) > 1e-12
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(ok, num / np.where(ok, denom, 1.0), np.inf)
            u = np.where(ok, u_num / np.where(ok, -denom, 1.0), np.inf)
        ok &= (t >= 0.0) & (t <= 1.0) & (u >= 0.0) & (u <= 1.0)
        t_lo = np.where(ok, t, np.inf)
        t_hi = np.where(ok, t, -np.inf)
        rows = np.arange(hi - lo)
        pick = np.argmin(t_lo, axis=1)  # first extremum: deterministic
        s_lo[lo:hi] = t_lo[rows, pick]
        v_lo[lo:hi] = sil_edges[pick]
        pick = np.argmax(t_hi, axis=1)
        s_hi[lo:hi] = t_hi[rows, pick]
        v_hi[lo:hi] = sil_edges[pick]
    valid = np.isfinite(s_lo)
    return s_lo, v_lo, s_hi, v_hi, valid


def _antialias(data: RasterData):
    """Fill data.alpha with the one-pixel antialiased coverage band."""
    face_id, xy, faces = data.face_id, data.xy, data.faces
    h, w = face_id.shape
    covered = face_id >= 0
    alpha_raw = covered.astype(np.float64).ravel()
    sil_edges = _silhouette_edges(xy, faces) if covered.any() else np.zeros((0, 2), np.int64)

    pair_chunks = []
    # horizontal then vertical neighbours, each scanned row-major
    for axis in ("h", "v"):
        if axis == "h":
            left = covered[:, :-1]
            right = covered[:, 1:]
            diff = left != right
            ii, jj = np.nonzero(diff)
            a_is_left = left[ii, jj]
            ai = ii
            aj = np.where(a_is_left, jj, jj + 1)
            bi = ii
            bj = np.where(a_is_left, jj + 1, jj)
        else:
            top = covered[:-1, :]
            bot = covered[1:, :]
            diff = top != bot
            ii, jj = np.nonzero(diff)
            a_is_top = top[ii, jj]
            ai = np.where(a_is_top, ii, ii + 1)
            aj = jj
            bi = np.where(a_is_top, ii + 1, ii)
            bj = jj
        if len(ii) == 0:
            continue
        pix_in = (ai * w + aj).astype(np.int64)
        pix_out = (bi * w + bj).astype(np.int64)
        q_in = np.stack([aj + 0.5, ai + 0.5], axis=1).astype(np.float64)
        step = np.stack([bj - aj, bi - ai], axis=1).astype(np.float64)
        s_lo, v_lo, s_hi, v_hi, valid = _silhouette_crossing(xy, sil_edges, q_in, step)
        if not valid.any():
            continue
        pair_chunks.append(
            _AAPairs(
                pix_in[valid],
                pix_out[valid],
                q_in[valid],
                step[valid],
                s_lo[valid],
                v_lo[valid],
                s_hi[valid],
                v_hi[valid],
            )
        )

    if pair_chunks:
        pairs = _AAPairs(
            *(np.concatenate([getattr(c, f) for c in pair_chunks]) for f in
              ("pix_in", "pix_out", "q_in", "step", "s_lose", "v_lose", "s_gain", "v_gain"))
        )
        # each boundary pixel takes the single strongest band correction
        # (max, not sum): covered pixels stay in [0.5, 1], background
        # pixels in [0, 0.5], and both sides meet continuously at 0.5
        # whenever a pixel flips coverage
        gain = np.maximum(pairs.s_gain - 0.5, 0.0)
        lose = np.maximum(0.5 - pairs.s_lose, 0.0)
        gain_max = np.zeros_like(alpha_raw)
        lose_max = np.zeros_like(alpha_raw)
        np.maximum.at(gain_max, pairs.pix_out, gain)
        np.maximum.at(lose_max, pairs.pix_in, lose)
        alpha_raw += gain_max - lose_max
        pairs.gain_winner = _first_max_winner(gain, gain_max, pairs.pix_out)
        pairs.lose_winner = _first_max_winner(lose, lose_max, pairs.pix_in)
    else:
        pairs = _AAPairs.empty()

    data.pairs = pairs
    data.alpha_raw = alpha_raw.reshape(h, w)
    data.alpha = np.clip(data.alpha_raw, 0.0, 1.0)


def _first_max_winner(vals, max_per_pixel, pix):
    """Mark, per pixel, the first pair whose value achieves the pixel max."""
    cand = np.flatnonzero(vals == max_per_pixel[pix])
    _, first = np.unique(pix[cand], return_index=True)
    winner = np.zeros(len(vals), dtype=bool)
    winner[cand[first]] = True
    return winner


def render_buffers(positions, faces, camera: OrthoCamera) -> RasterData:
    """Rasterize a raw (positions, faces) pair for one camera."""
    res = camera.resolution
    xy, z = project(camera, positions) if len(positions) else (
        np.zeros((0, 2)), np.zeros(0)
    )
    faces32 = np.ascontiguousarray(faces, dtype=np.int32)
    face_id, bary, zbuf = raster_forward(xy, z, faces32, res, res)
    data = RasterData(camera, xy, z, faces32, face_id, bary, zbuf, None)
    _antialias(data)
    return data


def interpolate_vertex_attribute(data: RasterData, attr, background):
    """Barycentric interpolation of a per-vertex attribute over covered pixels."""
    h, w = data.face_id.shape
    attr = np.atleast_2d(np.asarray(attr, dtype=np.float64).T).T
    c = attr.shape[1]
    out = np.full((h * w, c), background, dtype=np.float64)
    idx = np.flatnonzero(data.face_id.ravel() >= 0)
    if len(idx):
        fid = data.face_id.ravel()[idx]
        tri = data.faces[fid].astype(np.int64)
        wgt = data.bary.reshape(-1, 3)[idx]
        vals = np.einsum("pk,pkc->pc", wgt, attr[tri])
        out[idx] = vals
    return out.reshape(h, w, c)


def rasterize(mesh: TriangleMesh, camera: OrthoCamera, shading: str = "vertex") -> ViewRecord:
    """Render one view: color, encoded world normals, alpha, depth.

    shading selects flat per-face normals ("face") or interpolated,
    renormalized vertex normals ("vertex").  Background pixels are white
    in the color and normal rasters, zero in alpha, camera.far in depth.
    """
    if shading not in ("vertex", "face"):
        raise ValueError("shading must be 'vertex' or 'face'")
    mesh.check_indices()
    res = camera.resolution
    data = render_buffers(mesh.positions, mesh.faces, camera)
    covered_idx = np.flatnonzero(data.face_id.ravel() >= 0)

    normal = np.ones((res * res, 3))
    if len(covered_idx):
        if shading == "vertex":
            _, _, _, unit = vertex_normal_sums(mesh.positions, mesh.faces)
            fid = data.face_id.ravel()[covered_idx]
            tri = data.faces[fid].astype(np.int64)
            wgt = data.bary.reshape(-1, 3)[covered_idx]
            raw = np.einsum("pk,pkc->pc", wgt, unit[tri])
            lens = np.linalg.norm(raw, axis=1)
            n_pix = raw / np.maximum(lens, _NORM_EPS)[:, None]
        else:
            from .mesh import face_normals

            fn = face_normals(mesh.positions, mesh.faces)
            n_pix = fn[data.face_id.ravel()[covered_idx]]
        normal[covered_idx] = encode_normal(n_pix)
    normal = normal.reshape(res, res, 3)

    colors = mesh.vertex_colors if mesh.vertex_colors is not None else np.ones((mesh.n_vertices, 3))
    color = interpolate_vertex_attribute(data, colors, 1.0)

    depth = np.where(np.isfinite(data.zbuf), data.zbuf, camera.far)
    return ViewRecord(camera=camera, color=color, normal=normal, alpha=data.alpha, depth=depth)


def render_conditions(mesh: TriangleMesh, rig: CameraRig, shading: str = "vertex") -> MultiviewSet:
    """Render one view per rig camera, in rig order."""
    return MultiviewSet([rasterize(mesh, cam, shading) for cam in rig])


# ---------------------------------------------------------------------------
# Loss and analytic gradient


def _laplacian_csr(faces, nv):
    """One-ring CSR (offsets, indices, degrees) straight from a face array."""
    if len(faces) == 0:
        return np.zeros(nv + 1, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(nv)
    f = faces.astype(np.int64)
    edges = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    edges = np.unique(np.sort(edges, axis=1), axis=0)
    both = np.concatenate([edges, edges[:, ::-1]])
    order = np.lexsort((both[:, 1], both[:, 0]))
    both = both[order]
    counts = np.bincount(both[:, 0], minlength=nv)
    offsets = np.zeros(nv + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return offsets, both[:, 1], counts.astype(np.float64)


def _segment_sum(vals, offsets):
    nv = len(offsets) - 1
    out = np.zeros((nv,) + vals.shape[1:])
    if len(vals) == 0:
        return out
    starts = offsets[:-1].clip(max=len(vals) - 1)
    sums = np.add.reduceat(vals, starts, axis=0)
    nonempty = np.diff(offsets) > 0
    out[nonempty] = sums[nonempty]
    return out


def smoothness_loss_and_grad(positions, faces):
    """lambda-free Laplacian energy sum |mean(ring) - v|^2 and its gradient."""
    nv = len(positions)
    offsets, indices, deg = _laplacian_csr(faces, nv)
    degc = np.maximum(deg, 1.0)
    ring_mean = _segment_sum(positions[indices], offsets) / degc[:, None]
    lap = np.where(deg[:, None] > 0, ring_mean - positions, 0.0)
    energy = float(np.sum(lap * lap))
    # grad = 2 A^T lap with A = D^-1 W - I and symmetric rings
    contrib = lap / degc[:, None]
    gathered = _segment_sum(contrib[indices], offsets)
    grad = 2.0 * (gathered - lap)
    return energy, grad


def soft_foreground(alpha):
    """Continuous foreground weight: 0 below alpha 0.5, 1 at full coverage.

    The antialiased alpha crosses 0.5 exactly when a pixel flips
    coverage, so terms weighted by this stay continuous in vertex
    positions.
    """
    return np.clip(2.0 * np.asarray(alpha) - 1.0, 0.0, 1.0)


def _view_pass(positions, faces, unit_normals, target: ViewRecord, weights: LossWeights,
               norm_scale: float, alpha_scale: float, nv: int):
    """Forward + backward for one view.

    Returns (normal term, alpha term, dL/d vertex normals, dL/d positions
    via screen-space paths).
    """
    cam = target.camera
    data = render_buffers(positions, faces, cam)
    res = cam.resolution

    g_xy = np.zeros((nv, 2))
    g_normals = np.zeros((nv, 3))
    term_n = 0.0
    term_a = 0.0
    g_alpha_field = np.zeros(res * res)

    covered_idx = np.flatnonzero(data.face_id.ravel() >= 0)
    if weights.w_normal > 0 and len(covered_idx):
        # background pixels carry soft-foreground weight 0, so the whole
        # term lives on covered pixels
        fid = data.face_id.ravel()[covered_idx]
        tri = data.faces[fid].astype(np.int64)
        wgt = data.bary.reshape(-1, 3)[covered_idx]
        corner_normals = unit_normals[tri]
        raw = np.einsum("pk,pkc->pc", wgt, corner_normals)
        lens = np.maximum(np.linalg.norm(raw, axis=1), _NORM_EPS)
        n_hat = raw / lens[:, None]
        alpha_cov = data.alpha.ravel()[covered_idx]
        sfg_r = soft_foreground(alpha_cov)
        sfg_t = soft_foreground(target.alpha.ravel()[covered_idx])
        wpix = sfg_r * sfg_t
        diff = encode_normal(n_hat) - target.normal.reshape(-1, 3)[covered_idx]
        sq = np.sum(diff * diff, axis=1)
        term_n = float(wpix @ sq) * norm_scale

        # weight path: d term / d alpha through the soft foreground ramp
        ramp_open = (alpha_cov > 0.5) & (alpha_cov < 1.0)
        g_alpha_field[covered_idx] += (weights.w_normal * norm_scale * 2.0) * np.where(
            ramp_open, sfg_t * sq, 0.0
        )

        # d term / d encoded normal, chained down to raw interpolated normal
        g_enc = (norm_scale * weights.w_normal) * (wpix[:, None] * diff)
        g_hat = g_enc  # encode chain (x+1)/2 and the MSE factor 2 cancel
        g_raw = (g_hat - n_hat * np.sum(n_hat * g_hat, axis=1, keepdims=True)) / lens[:, None]
        # path A: into vertex normals (pixel-major, corners in face order)
        vals = (wgt[:, :, None] * g_raw[:, None, :]).reshape(-1, 3)
        add_at_vec(g_normals, tri.reshape(-1), np.ascontiguousarray(vals))
        # path B: into barycentric weights, then screen positions
        dldw = np.einsum("pc,pkc->pk", g_raw, corner_normals)
        _scatter_bary_grad(g_xy, data, covered_idx, fid, tri, wgt, dldw)

    if weights.w_alpha > 0:
        adiff = data.alpha - target.alpha
        term_a = float(np.sum(adiff * adiff)) * alpha_scale
        g_alpha_field += (2.0 * alpha_scale * weights.w_alpha) * adiff.ravel()

    _alpha_backward(g_xy, data, g_alpha_field)

    # screen-space gradient to world space (orthographic projection is linear)
    s = cam.pixels_per_unit
    r = cam.right
    u = cam.up
    g_pos = g_xy[:, 0:1] * (s * r)[None, :] + g_xy[:, 1:2] * (-s * u)[None, :]
    return term_n, term_a, g_normals, g_pos


def _scatter_bary_grad(g_xy, data: RasterData, covered_idx, fid, tri, wgt, dldw):
    """Chain dL/d barycentric -> dL/d screen xy of the face corners.

    Uses the inverse of M = [[x0, x1, x2], [y0, y1, y2], [1, 1, 1]]:
    with g = M^-T dL/dw, the corner gradients are -g[:2] * w_k.
    """
    xy = data.xy
    ax, ay = xy[tri[:, 0], 0], xy[tri[:, 0], 1]
    bx, by = xy[tri[:, 1], 0], xy[tri[:, 1], 1]
    cx, cy = xy[tri[:, 2], 0], xy[tri[:, 2], 1]
    det = ax * (by - cy) - bx * (ay - cy) + cx * (ay - by)
    det = np.where(np.abs(det) < 1e-300, 1e-300, det)
    # rows of M^-1 (cofactor form), then g = M^-T v computes as columns
    m00, m01 = (by - cy) / det, (cx - bx) / det
    m10, m11 = (cy - ay) / det, (ax - cx) / det
    m20, m21 = (ay - by) / det, (bx - ax) / det
    g0 = m00 * dldw[:, 0] + m10 * dldw[:, 1] + m20 * dldw[:, 2]
    g1 = m01 * dldw[:, 0] + m11 * dldw[:, 1] + m21 * dldw[:, 2]
    vals = np.empty((len(fid), 3, 2))
    vals[:, :, 0] = -g0[:, None] * wgt
    vals[:, :, 1] = -g1[:, None] * wgt
    add_at_vec(g_xy, tri.reshape(-1), np.ascontiguousarray(vals.reshape(-1, 2)))


def _alpha_backward(g_xy, data: RasterData, g_alpha):
    """Silhouette-band gradient dL/d(alpha field) into screen positions."""
    pairs = data.pairs
    if pairs is None or len(pairs) == 0:
        return
    raw = data.alpha_raw.ravel()
    gate = (raw > 0.0) & (raw < 1.0)
    g_alpha = np.where(gate, g_alpha, 0.0)

    g_s_gain = g_alpha[pairs.pix_out] * ((pairs.s_gain > 0.5) & pairs.gain_winner)
    g_s_lose = g_alpha[pairs.pix_in] * ((pairs.s_lose < 0.5) & pairs.lose_winner)
    _crossing_backward(g_xy, data, pairs.v_gain, pairs.q_in, pairs.step, pairs.s_gain, g_s_gain)
    _crossing_backward(g_xy, data, pairs.v_lose, pairs.q_in, pairs.step, pairs.s_lose, g_s_lose)


def _crossing_backward(g_xy, data: RasterData, edge_verts, q_in, step, s, g_s):
    """Scatter dL/ds through the crossing parameter to the edge endpoints."""
    active = g_s != 0.0
    if not active.any():
        return
    g_s = g_s[active]
    v0 = edge_verts[active, 0]
    v1 = edge_verts[active, 1]
    q = q_in[active]
    d = step[active]
    sa = s[active]

    e1 = data.xy[v0]
    e2 = data.xy[v1]
    ex = e2[:, 0] - e1[:, 0]
    ey = e2[:, 1] - e1[:, 1]
    denom = d[:, 0] * ey - d[:, 1] * ex
    rx = e1[:, 0] - q[:, 0]
    ry = e1[:, 1] - q[:, 1]
    # s = N / D with N = rx*ey - ry*ex, D = dx*ey - dy*ex
    dn_x1 = ey + ry
    dn_y1 = -rx - ex
    dn_x2 = -ry
    dn_y2 = rx
    dd_x1 = d[:, 1]
    dd_y1 = -d[:, 0]
    dd_x2 = -d[:, 1]
    dd_y2 = d[:, 0]
    inv = g_s / denom
    g1 = np.stack([(dn_x1 - sa * dd_x1) * inv, (dn_y1 - sa * dd_y1) * inv], axis=1)
    g2 = np.stack([(dn_x2 - sa * dd_x2) * inv, (dn_y2 - sa * dd_y2) * inv], axis=1)
    add_at_vec(g_xy, np.concatenate([v0, v1]), np.ascontiguousarray(np.concatenate([g1, g2])))


def loss_and_gradients(mesh: TriangleMesh, targets: MultiviewSet, weights: LossWeights,
                       threads: int = 1):
    """Total loss and dL/d(vertex positions) for a mesh against target views.

    Frozen vertices receive a zero gradient.  Per-view work may run in a
    thread pool; results are reduced in view order, so the output is
    independent of the thread count.
    """
    mesh.check_indices()
    return _loss_and_gradients_arrays(
        mesh.positions, mesh.faces, mesh.frozen_mask(), targets, weights, threads
    )


def _loss_and_gradients_arrays(positions, faces, frozen, targets, weights, threads=1):
    nv = len(positions)
    n_views = len(targets)
    res = targets.resolution
    for t in targets:
        if t.alpha.shape != (res, res) or t.normal.shape[:2] != (res, res):
            raise ContractError("target raster resolution mismatch")

    norm_scale = 1.0 / (n_views * res * res * 3)
    alpha_scale = 1.0 / (n_views * res * res)

    grad = np.zeros((nv, 3))
    loss = 0.0

    if weights.w_normal > 0 or weights.w_alpha > 0:
        _, sums, lens, unit = vertex_normal_sums(positions, faces)

        def run(t):
            return _view_pass(positions, faces, unit, t, weights, norm_scale, alpha_scale, nv)

        if threads > 1 and n_views > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(run, targets.views))
        else:
            results = [run(t) for t in targets.views]

        g_normals = np.zeros((nv, 3))
        for term_n, term_a, g_n, g_p in results:  # fixed view order
            loss += weights.w_normal * term_n + weights.w_alpha * term_a
            g_normals += g_n
            grad += g_p

        if weights.w_normal > 0 and len(faces):
            grad += _vertex_normal_backward(positions, faces, sums, lens, unit, g_normals)

    if weights.lambda_smooth > 0:
        energy, g_smooth = smoothness_loss_and_grad(positions, faces)
        loss += weights.lambda_smooth * energy
        grad += weights.lambda_smooth * g_smooth

    if frozen is not None and frozen.any():
        grad[frozen] = 0.0
    return float(loss), grad


def _vertex_normal_backward(positions, faces, sums, lens, unit, g_normals):
    """Chain dL/d(unit vertex normals) through the area-weighted sums."""
    safe = np.maximum(lens, _NORM_EPS)[:, None]
    g_sum = (g_normals - unit * np.sum(unit * g_normals, axis=1, keepdims=True)) / safe
    tri = faces.astype(np.int64)
    g_m = g_sum[tri[:, 0]] + g_sum[tri[:, 1]] + g_sum[tri[:, 2]]
    p = positions[faces]
    u = p[:, 1] - p[:, 0]
    v = p[:, 2] - p[:, 0]
    g_u = np.cross(v, g_m)
    g_v = np.cross(g_m, u)
    grad = np.zeros_like(positions)
    vals = np.stack([-g_u - g_v, g_u, g_v], axis=1).reshape(-1, 3)
    add_at_vec(grad, tri.reshape(-1), np.ascontiguousarray(vals))
    return grad
