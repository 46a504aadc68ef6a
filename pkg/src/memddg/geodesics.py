"""Approximate geodesic distance on the mesh.

The default solver is the heat method: one backward-Euler heat step with
time parameter t = (mean edge length)², normalization of the resulting
gradient field, and a Poisson solve for the distance.  A Dijkstra edge-graph
fallback covers ill-conditioned linear systems (and is exposed directly as
``method="graph"``).
"""
from __future__ import annotations

import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.sparse.linalg import spsolve

from .curvature import cotan_laplacian, face_surface_gradient, mass_matrix
from .geometry import Measures, measure
from .halfedge import HalfedgeMesh, MeshError

log = logging.getLogger(__name__)


class DisconnectedComponent(MeshError):
    """The mesh is not edge-connected, so distances are undefined globally."""


def _edge_graph(mesh: HalfedgeMesh, m: Measures) -> sp.csr_array:
    u, v = mesh.edges[:, 0], mesh.edges[:, 1]
    w = m.edge_length
    n = mesh.n_vertices
    return sp.coo_array(
        (np.concatenate([w, w]), (np.concatenate([u, v]), np.concatenate([v, u]))),
        shape=(n, n),
    ).tocsr()


def _check_connected(graph: sp.csr_array) -> None:
    n_comp, _ = connected_components(graph, directed=False)
    if n_comp != 1:
        raise DisconnectedComponent(f"mesh has {n_comp} connected components")


def _graph_distance(graph: sp.csr_array, sources: np.ndarray) -> np.ndarray:
    d = dijkstra(graph, directed=False, indices=sources)
    if d.ndim == 2:
        d = d.min(axis=0)
    return d


def _integrated_divergence(
    mesh: HalfedgeMesh, m: Measures, face_field: np.ndarray
) -> np.ndarray:
    """(V,) divergence of a per-face tangent field, integrated over dual cells."""
    r = m.positions
    f = mesh.faces
    div = np.zeros(mesh.n_vertices)
    for c in range(3):
        e1 = r[f[:, (c + 1) % 3]] - r[f[:, c]]
        e2 = r[f[:, (c + 2) % 3]] - r[f[:, c]]
        cot1 = m.corner_cot[:, (c + 2) % 3]  # opposite e1
        cot2 = m.corner_cot[:, (c + 1) % 3]  # opposite e2
        contrib = 0.5 * (
            cot1 * np.einsum("ij,ij->i", e1, face_field)
            + cot2 * np.einsum("ij,ij->i", e2, face_field)
        )
        np.add.at(div, f[:, c], contrib)
    return div


def geodesic_distance(
    mesh: HalfedgeMesh,
    positions: np.ndarray,
    source_set,
    method: str = "heat",
    m: Measures | None = None,
) -> np.ndarray:
    """(V,) distance from the nearest source vertex; zero on sources.

    ``source_set`` is a vertex id or an iterable of ids.  ``method`` is
    ``"heat"`` or ``"graph"``; the heat solver silently falls back to the
    graph when its linear algebra degenerates.
    """
    sources = np.atleast_1d(np.asarray(source_set, dtype=np.int64))
    if sources.size == 0:
        raise ValueError("source_set must contain at least one vertex")
    if sources.min() < 0 or sources.max() >= mesh.n_vertices:
        raise ValueError("source vertex id out of range")
    if m is None:
        m = measure(mesh, positions)
    graph = _edge_graph(mesh, m)
    _check_connected(graph)
    if method == "graph":
        return _graph_distance(graph, sources)
    if method != "heat":
        raise ValueError(f"unknown method {method!r}")

    try:
        d = _heat_distance(mesh, m, sources)
    except Exception as exc:  # singular factorization, overflow, ...
        log.warning("heat-method solve failed (%s); using graph distances", exc)
        return _graph_distance(graph, sources)
    if not np.all(np.isfinite(d)):
        log.warning("heat-method produced non-finite distances; using graph")
        return _graph_distance(graph, sources)
    return d


def _heat_distance(
    mesh: HalfedgeMesh, m: Measures, sources: np.ndarray
) -> np.ndarray:
    t = float(np.mean(m.edge_length)) ** 2
    L = cotan_laplacian(mesh, m).tocsc()
    M = mass_matrix(mesh, m).tocsc()
    delta = np.zeros(mesh.n_vertices)
    delta[sources] = 1.0
    u = spsolve((M + t * L).tocsc(), delta)

    grad_u = face_surface_gradient(mesh, m, u)
    norms = np.linalg.norm(grad_u, axis=1)
    safe = np.where(norms > 0.0, norms, 1.0)
    X = -grad_u / safe[:, None]
    X[norms == 0.0] = 0.0

    rhs = -_integrated_divergence(mesh, m, X)
    # pin the potential by a tiny diagonal shift (L alone annihilates constants)
    shift = 1e-10 * (abs(L.diagonal()).mean() + 1.0)
    d = spsolve((L + shift * sp.identity(mesh.n_vertices, format="csc")).tocsc(), rhs)
    d = d - d[sources].max()
    np.maximum(d, 0.0, out=d)
    return d
