"""Conforming triangulations of a square interior region with a surrounding
constraint frame.

The interior region (``OMEGA``) carries the unknowns; the frame (``GAMMA``)
consists of whole elements, is at least one interaction radius thick, and
carries Dirichlet volume-constraint data.  Nodes on the shared boundary
belong to the frame.  Global node numbering always lists the interior
unknown nodes first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np


class Region(IntEnum):
    OMEGA = 0
    GAMMA = 1


class NodeClass(IntEnum):
    OMEGA_UNKNOWN = 0
    GAMMA_DIRICHLET = 1


@dataclass(frozen=True)
class Mesh:
    """Immutable triangle mesh with region tags and node classification.

    vertices : (n_nodes, 2) float coordinates
    elements : (n_elems, 3) vertex indices
    element_region : (n_elems,) Region values
    node_class : (n_nodes,) NodeClass values
    h : nominal grid size
    barycenters, areas : per-element derived geometry
    incidence_ptr/incidence_elems : CSR layout of node -> incident elements
    """

    vertices: np.ndarray
    elements: np.ndarray
    element_region: np.ndarray
    node_class: np.ndarray
    h: float
    barycenters: np.ndarray
    areas: np.ndarray
    incidence_ptr: np.ndarray = field(repr=False)
    incidence_elems: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.vertices)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_unknowns(self) -> int:
        """Number of interior (OMEGA_UNKNOWN) nodes; they occupy indices 0..n-1."""
        return int(np.count_nonzero(self.node_class == NodeClass.OMEGA_UNKNOWN))

    @property
    def omega_elements(self) -> np.ndarray:
        return np.where(self.element_region == Region.OMEGA)[0]

    @property
    def gamma_elements(self) -> np.ndarray:
        return np.where(self.element_region == Region.GAMMA)[0]


def _triangle_geometry(vertices, elements):
    v = vertices[elements]
    bary = v.mean(axis=1)
    e1 = v[:, 1] - v[:, 0]
    e2 = v[:, 2] - v[:, 0]
    areas = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    return bary, areas


def _incidence(n_nodes, elements):
    counts = np.bincount(elements.ravel(), minlength=n_nodes)
    ptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    elems = np.empty(ptr[-1], dtype=np.int64)
    cursor = ptr[:-1].copy()
    for e in range(len(elements)):
        for v in elements[e]:
            elems[cursor[v]] = e
            cursor[v] += 1
    return ptr, elems


def _node_classes(n_nodes, elements, element_region):
    gamma_touch = np.zeros(n_nodes, dtype=bool)
    gamma_elems = elements[element_region == Region.GAMMA]
    gamma_touch[gamma_elems.ravel()] = True
    classes = np.where(gamma_touch, NodeClass.GAMMA_DIRICHLET, NodeClass.OMEGA_UNKNOWN)
    return classes.astype(np.int8)


def build_mesh(vertices, elements, element_region, h):
    """Assemble a Mesh from raw arrays, renumbering nodes unknowns-first.

    Node classes are derived from element incidence: any node touching a
    GAMMA element (including the shared interior/frame boundary) is a
    Dirichlet node.  Within each class the original vertex order is kept.
    """
    vertices = np.asarray(vertices, dtype=float)
    elements = np.asarray(elements, dtype=np.int64)
    element_region = np.asarray(element_region, dtype=np.int8)
    if elements.size and (elements.min() < 0 or elements.max() >= len(vertices)):
        raise ValueError("element vertex index out of range")

    classes = _node_classes(len(vertices), elements, element_region)
    order = np.concatenate(
        [np.where(classes == NodeClass.OMEGA_UNKNOWN)[0],
         np.where(classes == NodeClass.GAMMA_DIRICHLET)[0]]
    )
    rank = np.empty(len(vertices), dtype=np.int64)
    rank[order] = np.arange(len(vertices))

    vertices = vertices[order]
    classes = classes[order]
    elements = rank[elements]

    bary, areas = _triangle_geometry(vertices, elements)
    if np.any(areas <= 0.0):
        raise ValueError("mesh contains a degenerate element (area <= 0)")
    ptr, inc = _incidence(len(vertices), elements)
    return Mesh(vertices, elements, element_region, classes, float(h), bary, areas, ptr, inc)


def frame_layers(delta, h):
    """Number of whole element layers needed for a frame of width >= delta."""
    return int(math.ceil(delta / h - 1e-12))


def build_frame_mesh(side_length, h, delta):
    """Structured triangulation of (0, L)^2 surrounded by a whole-element frame.

    Each h-by-h cell is split along its lower-left to upper-right diagonal.
    The frame width is delta rounded up to whole layers, so it is at least
    delta wide and consists of whole elements only.
    """
    if h <= 0 or delta <= 0 or side_length <= 0:
        raise ValueError("side_length, h and delta must be positive")
    if h >= side_length:
        raise ValueError(f"grid size h={h} must be smaller than side_length={side_length}")
    cells = side_length / h
    if abs(cells - round(cells)) > 1e-9 * max(1.0, cells):
        raise ValueError(f"side_length={side_length} is not a multiple of h={h}")
    m = int(round(cells))
    layers = frame_layers(delta, h)

    n_side = m + 2 * layers
    coords = (np.arange(n_side + 1) - layers) * h
    xg, yg = np.meshgrid(coords, coords, indexing="xy")
    vertices = np.column_stack([xg.ravel(), yg.ravel()])

    def nid(i, j):
        return j * (n_side + 1) + i

    elements = np.empty((2 * n_side * n_side, 3), dtype=np.int64)
    region = np.empty(2 * n_side * n_side, dtype=np.int8)
    k = 0
    for j in range(n_side):
        for i in range(n_side):
            interior = layers <= i < layers + m and layers <= j < layers + m
            tag = Region.OMEGA if interior else Region.GAMMA
            ll, lr = nid(i, j), nid(i + 1, j)
            ul, ur = nid(i, j + 1), nid(i + 1, j + 1)
            elements[k] = (ll, lr, ur)
            elements[k + 1] = (ll, ur, ul)
            region[k] = region[k + 1] = tag
            k += 2

    return build_mesh(vertices, elements, region, h)


def classify_nodes(mesh):
    """Partition node indices into (interior unknowns, frame Dirichlet nodes).

    A node is a frame node iff at least one incident element is GAMMA, which
    in particular assigns every interface node to the frame.  The returned
    numbering is the one assembly uses (unknowns first).
    """
    classes = _node_classes(mesh.n_nodes, mesh.elements, mesh.element_region)
    omega = np.where(classes == NodeClass.OMEGA_UNKNOWN)[0]
    gamma = np.where(classes == NodeClass.GAMMA_DIRICHLET)[0]
    return omega, gamma


def node_elements(mesh, node):
    """All elements having `node` as a vertex (the support of its basis function)."""
    if not 0 <= node < mesh.n_nodes:
        raise IndexError(f"node index {node} out of range for {mesh.n_nodes} nodes")
    return mesh.incidence_elems[mesh.incidence_ptr[node]:mesh.incidence_ptr[node + 1]]


def validate_mesh(mesh, delta=None):
    """Check the structural mesh invariants; raise ValueError on violation.

    With `delta` given, additionally require the frame to keep every
    interior element barycenter at least delta away from the outer hull of
    the mesh (frame thickness check).
    """
    if np.any(mesh.areas <= 0.0):
        raise ValueError("degenerate element (area <= 0)")

    omega, gamma = classify_nodes(mesh)
    if not np.array_equal(np.sort(np.concatenate([omega, gamma])), np.arange(mesh.n_nodes)):
        raise ValueError("node classification is not a partition")
    stored_omega = np.where(mesh.node_class == NodeClass.OMEGA_UNKNOWN)[0]
    if not np.array_equal(omega, stored_omega):
        raise ValueError("stored node classes disagree with element incidence")
    if len(omega) and len(gamma) and omega.max() > gamma.min():
        raise ValueError("node numbering must list unknown nodes before Dirichlet nodes")

    if delta is not None:
        lo = mesh.vertices.min(axis=0)
        hi = mesh.vertices.max(axis=0)
        ob = mesh.barycenters[mesh.element_region == Region.OMEGA]
        margin = np.minimum(ob - lo[None, :], hi[None, :] - ob).min()
        if margin <= delta:
            raise ValueError(
                f"frame too thin: interior barycenter within {margin:.6g} of the outer hull, "
                f"need more than delta={delta:.6g}"
            )
