"""Shared fixtures: small meshes with known invariants, FD helpers."""

import numpy as np
import pytest

from memddg.geometry import measure
from memddg.halfedge import HalfedgeMesh
from memddg.meshgen import _subdivide, hex_patch, icosphere, tube
from memddg.parameters import MembraneParameters

# Unit cube centred at the origin (side 2), each square face split into
# two triangles with outward orientation.
_CUBE_POSITIONS = np.array(
    [
        [-1.0, -1.0, -1.0],
        [1.0, -1.0, -1.0],
        [1.0, 1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
        [1.0, -1.0, 1.0],
        [1.0, 1.0, 1.0],
        [-1.0, 1.0, 1.0],
    ]
)
_CUBE_FACES = np.array(
    [
        [0, 2, 1], [0, 3, 2],  # bottom (z = -1)
        [4, 5, 6], [4, 6, 7],  # top
        [0, 1, 5], [0, 5, 4],  # front (y = -1)
        [1, 2, 6], [1, 6, 5],  # right
        [2, 3, 7], [2, 7, 6],  # back
        [3, 0, 4], [3, 4, 7],  # left
    ]
)

# Regular tetrahedron on alternating cube corners, outward orientation.
_TETRA_POSITIONS = np.array(
    [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
)
_TETRA_FACES = np.array([[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])


def cube_mesh(refinements: int = 0):
    pos, faces = _CUBE_POSITIONS.copy(), _CUBE_FACES.copy()
    for _ in range(refinements):
        pos, faces = _subdivide(pos, faces)
    return HalfedgeMesh.from_faces(len(pos), faces), pos


def tetra_mesh(refinements: int = 0):
    pos, faces = _TETRA_POSITIONS.copy(), _TETRA_FACES.copy()
    for _ in range(refinements):
        pos, faces = _subdivide(pos, faces)
    return HalfedgeMesh.from_faces(len(pos), faces), pos


def noisy_sphere(subdivisions: int = 2, noise: float = 0.02, seed: int = 0):
    """Icosphere with per-vertex jitter: generic positions, still manifold."""
    mesh, pos = icosphere(subdivisions)
    rng = np.random.default_rng(seed)
    return mesh, pos + noise * rng.standard_normal(pos.shape)


def noisy_patch(rings: int = 3, noise: float = 0.05, seed: int = 1):
    mesh, pos = hex_patch(1.0, rings=rings)
    rng = np.random.default_rng(seed)
    pos = pos.copy()
    pos[:, 2] += noise * rng.standard_normal(len(pos))
    return mesh, pos


def fd_gradient(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Dense central-difference gradient of a scalar function of positions."""
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        ep = f(x)
        flat[i] = old - h
        em = f(x)
        flat[i] = old
        gf[i] = (ep - em) / (2.0 * h)
    return g


def observed_order(f, h: float = 1e-4) -> float:
    """log2 error ratio of a remainder callable between steps h and h/2."""
    e1, e2 = f(h), f(h / 2.0)
    if e1 < 1e-14 and e2 < 1e-14:
        return np.inf
    return float(np.log2(e1 / e2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def ico2():
    return icosphere(2)


@pytest.fixture(scope="session")
def sphere_measures(ico2):
    mesh, pos = ico2
    return mesh, pos, measure(mesh, pos)


@pytest.fixture
def bumpy():
    return noisy_sphere()


@pytest.fixture
def patch():
    return noisy_patch()


@pytest.fixture
def open_tube():
    return tube(1.0, 4.0, n_theta=16, n_z=9)


@pytest.fixture
def full_params():
    """Every term active, magnitudes in the regime the solvers run at."""
    return MembraneParameters(
        kappa_b=8.22e-5,
        kappa_c=2e-4,
        hbar_0=0.3,
        hbar_c=6.0,
        K_A=1.0,
        A_bar=4.0 * np.pi,
        K_V=0.1,
        c_bar_over_n=0.35,
        epsilon=-1e-3,
        eta=5e-4,
    )
