"""Finite-difference verification of the analytic loss gradient."""

import numpy as np
import pytest

from meshlift.cameras import OrthoCamera, standard_rig_six
from meshlift.mesh import TriangleMesh, icosphere
from meshlift.render import (
    LossWeights,
    MultiviewSet,
    loss_and_gradients,
    render_conditions,
)

from conftest import perturbed_sphere


def finite_difference_gradient(mesh, targets, weights, h):
    """Central differences of the loss over every vertex coordinate."""
    base = mesh.copy()
    grad = np.zeros_like(base.positions)
    for v in range(base.n_vertices):
        for c in range(3):
            for sign, slot in ((+1, 0), (-1, 1)):
                probe = base.copy()
                probe.positions[v, c] += sign * h
                loss, _ = loss_and_gradients(probe, targets, weights)
                if slot == 0:
                    lp = loss
                else:
                    lm = loss
            grad[v, c] = (lp - lm) / (2 * h)
    return grad


def fd_agreement(analytic, numeric):
    """(median per-component relative error, cosine similarity)."""
    denom = np.maximum(np.abs(analytic), np.abs(numeric))
    rel = np.abs(analytic - numeric) / np.where(denom > 1e-12, denom, 1.0)
    rel = rel[denom.ravel().reshape(denom.shape) > 1e-12]
    a = analytic.ravel()
    n = numeric.ravel()
    cos = float(a @ n / max(np.linalg.norm(a) * np.linalg.norm(n), 1e-300))
    return float(np.median(rel)) if len(rel) else 0.0, cos


class TestSmoothnessGradient:
    def test_matches_fd_within_1e4(self):
        mesh = icosphere((0, 0, 0), 1.0, 1)
        rig = standard_rig_six(32, 1.2)
        targets = render_conditions(mesh, rig)
        weights = LossWeights(0.0, 0.0, 0.5)
        _, analytic = loss_and_gradients(mesh, targets, weights)
        h = 1e-5 * mesh.bbox_diagonal()
        numeric = finite_difference_gradient(mesh, targets, weights, h)
        scale = np.abs(numeric).max()
        assert np.allclose(analytic, numeric, rtol=1e-4, atol=1e-7 * scale)


class TestFullLossGradient:
    def test_single_triangle_translated_target(self):
        # target rendered from the same triangle shifted in-plane by 3 pixels
        positions = np.array(
            [(-0.4, 0.0, -0.3), (0.0, 0.0, 0.45), (0.4, 0.0, -0.3)], dtype=np.float64
        )
        faces = np.array([[0, 1, 2]], dtype=np.int32)
        mesh = TriangleMesh(positions, faces)
        cam = OrthoCamera(0, 0, 1.0, 64)
        shift = 3.0 * (2.0 / 64.0)  # 3 pixels in world units
        moved = TriangleMesh(positions + np.array([shift, 0.0, 0.0]), faces)
        targets = MultiviewSet([__import__("meshlift.render", fromlist=["rasterize"]).rasterize(moved, cam)])
        weights = LossWeights(1.0, 1.0, 0.0)
        _, grad = loss_and_gradients(mesh, targets, weights)
        # moving against the gradient must move every vertex toward the target
        displacement = np.array([shift, 0.0, 0.0])
        for v in range(3):
            assert float(-grad[v] @ displacement) > 0.0
        h = 1e-4 * mesh.bbox_diagonal()
        numeric = finite_difference_gradient(mesh, targets, weights, h)
        med, cos = fd_agreement(grad, numeric)
        assert med < 1e-2
        assert cos > 0.99

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_mesh_fd_agreement(self, seed):
        rng = np.random.default_rng(seed)
        mesh = perturbed_sphere(rng, level=1, radius=0.7, noise=0.04)
        target_mesh = perturbed_sphere(rng, level=1, radius=0.75, noise=0.04)
        cams = [OrthoCamera(0, 0, 1.0, 64), OrthoCamera(90, 0, 1.0, 64)]
        targets = MultiviewSet(
            [__import__("meshlift.render", fromlist=["rasterize"]).rasterize(target_mesh, c) for c in cams]
        )
        weights = LossWeights(1.0, 1.0, 0.01)
        _, analytic = loss_and_gradients(mesh, targets, weights)
        h = 1e-4 * mesh.bbox_diagonal()
        numeric = finite_difference_gradient(mesh, targets, weights, h)
        med, cos = fd_agreement(analytic, numeric)
        assert med < 1e-2, f"median relative error {med}"
        assert cos > 0.99, f"cosine similarity {cos}"
