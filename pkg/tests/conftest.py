"""Shared corpus generators for the test suite."""

import numpy as np
import pytest

from flipkit.errors import GeometryError
from flipkit.polyhedra import hull


def _spread_directions(rng, n, jitter=0.22):
    """Quasi-uniform unit 3-vectors: jittered Fibonacci sphere, random frame."""
    k = np.arange(n)
    z = 1.0 - (2.0 * k + 1.0) / n
    phi = np.pi * (1 + np.sqrt(5)) * k
    rho = np.sqrt(1.0 - z * z)
    dirs = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    dirs += jitter * rng.normal(size=dirs.shape)
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    return dirs @ q.T


def random_polyhedron(rng, n, radial=(0.45, 0.95)):
    """Random convex polyhedron with n vertices, hemisphere center interior.

    Directions are kept quasi-uniform and the radii stay in a narrow band
    around a common value, so that all points are extreme; the draw is
    rejected until every face pole stays well inside the open hemisphere
    (so that the dual is again a valid polyhedron).
    """
    for _ in range(300):
        t = _spread_directions(rng, n)
        r0 = rng.uniform(*radial)
        r = r0 * (1.0 + rng.uniform(-0.08, 0.08, size=n))
        pts = np.hstack([np.cos(r)[:, None], np.sin(r)[:, None] * t])
        try:
            P = hull(pts)
        except GeometryError:
            continue
        if P.n_vertices == n and np.min(P.face_poles[:, 0]) > 1e-3:
            return P
    raise RuntimeError("could not sample a valid polyhedron")


def polyhedron_corpus(seed, count, sizes=(6, 14)):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(sizes[0], sizes[1] + 1))
        out.append(random_polyhedron(rng, n))
    return out


def regular_tetrahedron(radius=0.5):
    t = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / np.sqrt(3)
    return hull(
        np.hstack([np.cos(radius) * np.ones((4, 1)), np.sin(radius) * t])
    )


@pytest.fixture(scope="session")
def tetrahedron():
    return regular_tetrahedron()


@pytest.fixture(scope="session")
def small_corpus():
    return polyhedron_corpus(seed=11, count=20)
