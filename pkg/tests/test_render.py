import numpy as np
import pytest

from meshlift.cameras import OrthoCamera, standard_rig_six
from meshlift.errors import ContractError
from meshlift.mesh import TriangleMesh, icosphere
from meshlift.render import (
    LossWeights,
    MultiviewSet,
    ViewRecord,
    decode_normal,
    encode_normal,
    loss_and_gradients,
    rasterize,
    render_conditions,
)

from conftest import box_mesh


def facing_triangle(y=0.0):
    """Triangle in the xz-plane whose normal faces the azimuth-0 camera (+Y)."""
    positions = np.array(
        [(-0.5, y, -0.5), (0.0, y, 0.5), (0.5, y, -0.5)], dtype=np.float64
    )
    return TriangleMesh(positions, np.array([[0, 1, 2]], dtype=np.int32))


class TestRasterize:
    def test_empty_mesh(self):
        cam = OrthoCamera(0, 0, 1.0, 64)
        view = rasterize(TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), np.int32)), cam)
        assert np.array_equal(view.alpha, np.zeros((64, 64)))
        assert np.array_equal(view.color, np.ones((64, 64, 3)))
        assert np.array_equal(view.normal, np.ones((64, 64, 3)))

    def test_camera_facing_normal_encoding(self):
        cam = OrthoCamera(0, 0, 1.0, 64)
        view = rasterize(facing_triangle(), cam, shading="face")
        center = view.normal[32, 32]
        assert np.allclose(center, [0.5, 1.0, 0.5], atol=1e-12)

    def test_quarter_frame_square_alpha(self):
        # square x in [0,1], z in [0,1] at y=0 covers the top-right quarter
        positions = np.array(
            [(0, 0, 0), (1, 0, 0), (1, 0, 1), (0, 0, 1)], dtype=np.float64
        )
        faces = np.array([(0, 2, 1), (0, 3, 2)], dtype=np.int32)
        cam = OrthoCamera(0, 0, 1.0, 128)
        view = rasterize(TriangleMesh(positions, faces), cam)
        # analytic projected-area oracle: 0.25 of the frame
        tol = 2.0 * 128 / (128 * 128)
        assert abs(view.alpha.mean() - 0.25) < tol

    def test_alpha_in_unit_range_with_aa_band(self):
        view = rasterize(icosphere((0, 0, 0), 0.7, 2), OrthoCamera(45, 0, 1.0, 96))
        assert view.alpha.min() >= 0.0 and view.alpha.max() <= 1.0
        band = (view.alpha > 0.0) & (view.alpha < 1.0)
        assert band.any()

    def test_sphere_normals_match_direction_oracle(self):
        # analytic sphere normals: at each covered pixel the decoded normal
        # must align with the surface point direction
        mesh = icosphere((0, 0, 0), 1.0, 5)
        cam = OrthoCamera(0, 0, 1.0, 512)
        view = rasterize(mesh, cam)
        interior = view.alpha >= 1.0
        n = decode_normal(view.normal[interior])
        n /= np.linalg.norm(n, axis=1, keepdims=True)
        # reconstruct surface direction from pixel coordinates
        ii, jj = np.nonzero(interior)
        x_cam = (jj + 0.5) / 256.0 - 1.0
        y_cam = 1.0 - (ii + 0.5) / 256.0
        r2 = x_cam**2 + y_cam**2
        keep = r2 < 0.999
        depth_coord = -np.sqrt(1.0 - r2[keep])  # front surface toward camera
        direction = (
            x_cam[keep, None] * cam.right[None, :]
            + y_cam[keep, None] * cam.up[None, :]
            + depth_coord[:, None] * cam.view_direction[None, :]
        )
        cosang = np.clip(np.sum(n[keep] * direction, axis=1), -1, 1)
        max_err_deg = np.degrees(np.arccos(cosang)).max()
        assert max_err_deg < 5.0

    def test_decoded_normal_length_where_foreground(self):
        view = rasterize(icosphere((0, 0, 0), 0.8, 3), OrthoCamera(90, 0, 1.0, 128))
        fg = view.alpha > 0.5
        lens = np.linalg.norm(decode_normal(view.normal[fg]), axis=1)
        assert lens.min() > 0.9 and lens.max() < 1.1

    def test_vertex_colors_rendered(self):
        mesh = facing_triangle()
        mesh.vertex_colors = np.array([(1, 0, 0), (1, 0, 0), (1, 0, 0)], dtype=np.float64)
        view = rasterize(mesh, OrthoCamera(0, 0, 1.0, 64))
        assert np.allclose(view.color[32, 32], [1, 0, 0], atol=1e-12)

    def test_depth_test_prefers_nearer_face(self):
        near = facing_triangle(y=0.5)  # closer to the +Y camera
        far = facing_triangle(y=-0.5)
        far.vertex_colors = np.zeros((3, 3))
        near.vertex_colors = np.ones((3, 3))
        from meshlift.mesh import concatenate

        both = concatenate(far, near)
        view = rasterize(both, OrthoCamera(0, 0, 1.0, 64))
        assert np.allclose(view.color[32, 32], [1, 1, 1])
        # depth raster reports the near surface (depth = -0.5 for y=+0.5)
        assert view.depth[32, 32] == pytest.approx(-0.5)

    def test_rendering_deterministic(self):
        mesh = icosphere((0, 0, 0), 0.9, 3)
        cam = OrthoCamera(45, 0, 1.2, 128)
        a = rasterize(mesh, cam)
        b = rasterize(mesh, cam)
        assert np.array_equal(a.alpha, b.alpha)
        assert np.array_equal(a.normal, b.normal)
        assert np.array_equal(a.color, b.color)


class TestRenderConditions:
    def test_six_views_in_rig_order(self):
        rig = standard_rig_six(64, 1.0)
        views = render_conditions(icosphere((0, 0, 0), 0.5, 1), rig)
        assert len(views) == 6
        assert [v.camera.azimuth for v in views] == [0, 45, 90, 180, 270, 315]

    def test_empty_mesh_gives_white_images(self):
        rig = standard_rig_six(32, 1.0)
        views = render_conditions(TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), np.int32)), rig)
        for v in views:
            assert np.array_equal(v.color, np.ones((32, 32, 3)))
            assert np.array_equal(v.alpha, np.zeros((32, 32)))


class TestNormalCodec:
    def test_roundtrip_through_8bit(self, rng):
        n = rng.normal(size=(100, 3))
        n /= np.linalg.norm(n, axis=1, keepdims=True)
        enc = encode_normal(n)
        quantized = np.round(enc * 255.0) / 255.0
        back = decode_normal(quantized)
        assert np.abs(back - n).max() <= (1.0 / 255.0) * 2.0 + 1e-12


class TestLoss:
    def test_perfect_fit_zero_loss(self):
        mesh = icosphere((0, 0, 0), 0.8, 2)
        rig = standard_rig_six(64, 1.0)
        targets = render_conditions(mesh, rig)
        weights = LossWeights(1.0, 1.0, 0.0)
        loss, grad = loss_and_gradients(mesh, targets, weights)
        assert loss == 0.0
        assert np.abs(grad).max() < 1e-8

    def test_loss_nonnegative_and_positive_on_mismatch(self):
        mesh = icosphere((0, 0, 0), 0.8, 2)
        other = icosphere((0.1, 0, 0), 0.7, 2)
        rig = standard_rig_six(64, 1.0)
        targets = render_conditions(other, rig)
        loss, _ = loss_and_gradients(mesh, targets, LossWeights(1, 1, 0))
        assert loss > 0

    def test_resolution_mismatch_raises(self):
        mesh = icosphere((0, 0, 0), 0.8, 1)
        targets = render_conditions(mesh, standard_rig_six(64, 1.0))
        bad = MultiviewSet(
            [
                ViewRecord(
                    camera=OrthoCamera(v.camera.azimuth, 0, 1.0, 32),
                    color=v.color[::2, ::2],
                    normal=v.normal[::2, ::2],
                    alpha=v.alpha[::2, ::2],
                )
                for v in targets
            ]
        )
        # mesh renders at each target camera's resolution; mixing rasters from
        # another resolution must be rejected
        bad.views[0].alpha = targets.views[0].alpha
        with pytest.raises(ContractError):
            loss_and_gradients(mesh, bad, LossWeights(1, 1, 0))

    def test_frozen_vertices_zero_gradient(self):
        mesh = icosphere((0, 0, 0), 0.8, 2)
        target_mesh = icosphere((0, 0, 0), 0.6, 2)
        rig = standard_rig_six(64, 1.0)
        targets = render_conditions(target_mesh, rig)
        flags = np.zeros(mesh.n_vertices, dtype=bool)
        flags[::2] = True
        mesh.vertex_flags = flags
        _, grad = loss_and_gradients(mesh, targets, LossWeights(1, 1, 0.01))
        assert np.array_equal(grad[flags], np.zeros((flags.sum(), 3)))
        assert np.abs(grad[~flags]).max() > 0

    def test_thread_count_does_not_change_result(self):
        mesh = icosphere((0, 0, 0), 0.8, 2)
        targets = render_conditions(icosphere((0, 0, 0), 0.7, 2), standard_rig_six(64, 1.0))
        w = LossWeights(1.0, 1.0, 0.02)
        l1, g1 = loss_and_gradients(mesh, targets, w, threads=1)
        l8, g8 = loss_and_gradients(mesh, targets, w, threads=8)
        assert l1 == l8
        assert np.array_equal(g1, g8)

    def test_box_targets_pull_sphere_outward(self):
        # gradient should point roughly from the small sphere toward the
        # larger box silhouette: moving against the gradient grows the mesh
        mesh = icosphere((0, 0, 0), 0.4, 2)
        targets = render_conditions(box_mesh(size=(1.2, 1.2, 1.2)), standard_rig_six(64, 1.0))
        _, grad = loss_and_gradients(mesh, targets, LossWeights(0.0, 1.0, 0.0))
        outward = mesh.positions / np.linalg.norm(mesh.positions, axis=1, keepdims=True)
        moved = np.sum(-grad * outward, axis=1)
        assert moved.sum() > 0
