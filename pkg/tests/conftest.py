import numpy as np
import pytest

from meshlift.mesh import TriangleMesh, icosphere


def tetrahedron(scale=1.0):
    positions = np.array(
        [
            (1, 1, 1),
            (1, -1, -1),
            (-1, 1, -1),
            (-1, -1, 1),
        ],
        dtype=np.float64,
    ) * scale
    faces = np.array(
        [
            (0, 1, 2),
            (0, 3, 1),
            (0, 2, 3),
            (1, 3, 2),
        ],
        dtype=np.int32,
    )
    return TriangleMesh(positions, faces)


def box_mesh(center=(0.0, 0.0, 0.0), size=(1.0, 1.0, 1.0)):
    """Axis-aligned box with outward-facing triangles."""
    c = np.asarray(center, dtype=np.float64)
    h = np.asarray(size, dtype=np.float64) / 2.0
    corners = np.array(
        [
            (-1, -1, -1), (1, -1, -1), (1, 1, -1), (-1, 1, -1),
            (-1, -1, 1), (1, -1, 1), (1, 1, 1), (-1, 1, 1),
        ],
        dtype=np.float64,
    )
    positions = c + corners * h
    quads = [
        (0, 3, 2, 1),  # -z
        (4, 5, 6, 7),  # +z
        (0, 1, 5, 4),  # -y
        (2, 3, 7, 6),  # +y
        (1, 2, 6, 5),  # +x
        (3, 0, 4, 7),  # -x
    ]
    faces = []
    for a, b, c_, d in quads:
        faces.append((a, b, c_))
        faces.append((a, c_, d))
    return TriangleMesh(positions, np.array(faces, dtype=np.int32))


def two_triangle_quad():
    """Planar unit quad in the xy-plane split along the (0, 2) diagonal."""
    positions = np.array(
        [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)], dtype=np.float64
    )
    faces = np.array([(0, 1, 2), (0, 2, 3)], dtype=np.int32)
    return TriangleMesh(positions, faces)


def perturbed_sphere(rng, level=1, radius=1.0, noise=0.05):
    mesh = icosphere((0, 0, 0), radius, level)
    mesh.positions = mesh.positions + rng.normal(scale=noise * radius, size=mesh.positions.shape)
    return mesh


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
