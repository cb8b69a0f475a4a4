"""Element-aligned subdomain decomposition of the interior region.

Starting from a non-overlapping element ownership, each subdomain n gets

* ``omega_elems``: owned elements away from other subdomains,
* ``hat_elems``: the interface strip, i.e. interior elements whose
  barycenter is within ``delta/2 + h`` of a vertex shared with another
  subdomain (so all cross-subdomain interactions happen inside it),
* ``gamma_elems``: the Dirichlet collar, i.e. frame elements whose
  barycenter is within ``delta + h`` of a vertex shared with the frame.

A subdomain without a collar is floating (its operator annihilates
constants).  Overlap multiplicities are tracked per element via membership
signatures: ``zeta_F`` counts how many omega/hat sets contain an element and
``zeta_A`` of a pair is the number of subdomains containing both elements.
Weighting every pair contribution by ``1/zeta_A`` makes the subdomain
systems sum exactly to the single-domain one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import DecompositionError
from .kernel import interacting_pairs
from .mesh import NodeClass, Region


@dataclass(frozen=True)
class Partition:
    """Non-overlapping element ownership: owner[e] in 0..n_subdomains-1 for
    interior elements, -1 for frame elements."""

    n_subdomains: int
    owner: np.ndarray


@dataclass(frozen=True)
class SubdomainGeometry:
    n: int
    omega_elems: np.ndarray
    hat_elems: np.ndarray
    gamma_elems: np.ndarray
    floating: bool
    type1_vertices: np.ndarray
    type2_vertices: np.ndarray


@dataclass
class DecompIndex:
    """Per-subdomain node lists and the global/local correspondence.

    nodes[n] lists the global ids of subdomain n's nodes, unknowns first and
    Dirichlet collar nodes after; local_index[n] is the inverse (-1 where a
    node does not belong).  theta[i] lists the subdomains whose interface
    strip touches node i; m[i] is its length, and nodes with m >= 2 are
    exactly the ones duplicated across unknown vectors.
    """

    nodes: list
    n_unknowns: list
    local_index: list
    theta: list
    m: np.ndarray
    n_subdomains: int

    def owners_of(self, node):
        """Subdomains whose unknown vector contains the global node."""
        return [n for n in range(self.n_subdomains)
                if 0 <= self.local_index[n][node] < self.n_unknowns[n]]


@dataclass
class ZetaTables:
    """Overlap multiplicity data derived from element membership signatures."""

    signatures: list
    zeta_F: np.ndarray
    n_subdomains: int
    _masks: np.ndarray = field(repr=False, default=None)

    def zeta_A(self, t, tp):
        return int(self.zeta_values(np.array([t]), np.array([tp]))[0])

    def zeta_values(self, ti, tj):
        """Pairwise overlap multiplicity |D(ti) & D(tj)| for index arrays."""
        if self._masks is not None:
            return np.bitwise_count(self._masks[ti] & self._masks[tj]).astype(np.int64)
        sigs = [frozenset(s) for s in self.signatures]
        return np.array([len(sigs[a] & sigs[b]) for a, b in zip(np.atleast_1d(ti), np.atleast_1d(tj))],
                        dtype=np.int64)


@dataclass(frozen=True)
class OverlapAtoms:
    """Partition of the elements into maximal sets with identical membership
    signature; used as an independent route to the pair multiplicities."""

    signatures: list
    elements: list
    atom_of: np.ndarray
    n_subdomains: int

    def index_set(self, n):
        return frozenset(i for i, s in enumerate(self.signatures) if n in s)

    def zeta_from_atoms(self, t, tp):
        i, j = self.atom_of[t], self.atom_of[tp]
        count = 0
        for n in range(self.n_subdomains):
            idx = self.index_set(n)
            if i in idx and j in idx:
                count += 1
        return count


@dataclass(frozen=True)
class CoverageReport:
    ok: bool
    pairs_checked: int
    min_zeta: int
    offending: np.ndarray


def partition_blocks(mesh, bx, by):
    """Own each interior element by the bx-by-by grid block holding its
    barycenter (boundary ties go to the lower block index)."""
    if bx < 1 or by < 1:
        raise ValueError("block counts must be >= 1")
    omega = mesh.omega_elements
    overts = mesh.vertices[mesh.elements[omega]].reshape(-1, 2)
    lo, hi = overts.min(axis=0), overts.max(axis=0)
    b = mesh.barycenters[omega]
    tx = (b[:, 0] - lo[0]) / (hi[0] - lo[0])
    ty = (b[:, 1] - lo[1]) / (hi[1] - lo[1])
    ix = np.clip(np.ceil(tx * bx).astype(np.int64) - 1, 0, bx - 1)
    iy = np.clip(np.ceil(ty * by).astype(np.int64) - 1, 0, by - 1)
    owner_omega = iy * bx + ix
    counts = np.bincount(owner_omega, minlength=bx * by)
    if np.any(counts == 0):
        empty = np.where(counts == 0)[0]
        raise DecompositionError(
            f"blocks {empty.tolist()} own no elements; mesh too coarse for a {bx}x{by} partition"
        )
    owner = np.full(mesh.n_elements, -1, dtype=np.int64)
    owner[omega] = owner_omega
    return Partition(n_subdomains=bx * by, owner=owner)


def _within(tree, points, margin):
    if tree is None or len(points) == 0:
        return np.zeros(len(points), dtype=bool)
    dist, _ = tree.query(points)
    return dist <= margin


def build_subdomain_regions(mesh, partition, delta, hat_margin=None, collar_margin=None):
    """Construct the per-subdomain element sets from the ownership partition.

    The default margins (``delta/2 + h`` for the interface strip, ``delta + h``
    for the Dirichlet collar) guarantee that every cross-subdomain
    interaction is captured by whole elements; narrower margins are accepted
    for experiments but typically fail the coverage check.
    """
    h = mesh.h
    if hat_margin is None:
        hat_margin = delta / 2 + h
    if collar_margin is None:
        collar_margin = delta + h
    ns = partition.n_subdomains
    owner = partition.owner
    omega = mesh.omega_elements
    gamma = mesh.gamma_elements

    owner_verts = np.zeros((mesh.n_nodes, ns), dtype=bool)
    for n in range(ns):
        owned = np.where(owner == n)[0]
        owner_verts[np.unique(mesh.elements[owned]), n] = True
    gamma_touch = np.zeros(mesh.n_nodes, dtype=bool)
    gamma_touch[np.unique(mesh.elements[gamma])] = True

    shared_count = owner_verts.sum(axis=1)
    is_gamma_node = mesh.node_class == NodeClass.GAMMA_DIRICHLET
    geoms = []
    for n in range(ns):
        type1 = np.where(owner_verts[:, n] & (shared_count >= 2))[0]
        type2 = np.where(owner_verts[:, n] & gamma_touch)[0]

        t1_tree = cKDTree(mesh.vertices[type1]) if len(type1) else None
        t2_tree = cKDTree(mesh.vertices[type2]) if len(type2) else None
        hat = np.sort(omega[_within(t1_tree, mesh.barycenters[omega], hat_margin)])
        collar = gamma[_within(t2_tree, mesh.barycenters[gamma], collar_margin)]
        owned = np.where(owner == n)[0]
        omega_n = np.setdiff1d(owned, hat, assume_unique=True)

        # Data completion: when the interface strip runs close to the frame it
        # can touch Dirichlet nodes beyond the distance-based collar (frame
        # gap == hat margin); back each such node with its frame elements so
        # no Dirichlet value is missing from the subdomain data.
        touched = np.unique(mesh.elements[np.concatenate([omega_n, hat])]) if len(owned) else []
        touched_dirichlet = touched[is_gamma_node[touched]] if len(touched) else []
        if len(touched_dirichlet):
            covered = np.unique(mesh.elements[collar]) if len(collar) else np.array([], dtype=np.int64)
            missing = np.setdiff1d(touched_dirichlet, covered, assume_unique=False)
            if len(missing):
                backing = np.unique(np.concatenate([
                    mesh.incidence_elems[mesh.incidence_ptr[v]:mesh.incidence_ptr[v + 1]]
                    for v in missing
                ]))
                backing = backing[mesh.element_region[backing] == Region.GAMMA]
                collar = np.union1d(collar, backing)

        geoms.append(SubdomainGeometry(
            n=n,
            omega_elems=omega_n,
            hat_elems=hat,
            gamma_elems=np.sort(collar),
            floating=len(collar) == 0,
            type1_vertices=type1,
            type2_vertices=type2,
        ))
    return geoms


def build_index_maps(mesh, geoms):
    """Build per-subdomain node lists, local numbering, and multiplicities.

    Raises DecompositionError when a Dirichlet node touches a subdomain's
    unknown region without belonging to its collar (the subdomain would be
    missing constraint data), or when duplicated unknowns are not fully
    chained by the interface-strip multiplicities.
    """
    ns = len(geoms)
    n_nodes = mesh.n_nodes
    is_gamma_node = mesh.node_class == NodeClass.GAMMA_DIRICHLET

    nodes, n_unknowns, local_index = [], [], []
    unknown_member = np.zeros((n_nodes, ns), dtype=bool)
    hat_member = np.zeros((n_nodes, ns), dtype=bool)
    for g in geoms:
        d_elems = np.concatenate([g.omega_elems, g.hat_elems, g.gamma_elems])
        d_nodes = np.unique(mesh.elements[d_elems])
        collar_nodes = np.unique(mesh.elements[g.gamma_elems]) if len(g.gamma_elems) else np.array([], dtype=np.int64)

        gamma_in_d = d_nodes[is_gamma_node[d_nodes]]
        missing = np.setdiff1d(gamma_in_d, collar_nodes, assume_unique=False)
        if len(missing):
            raise DecompositionError(
                f"subdomain {g.n}: Dirichlet nodes {missing.tolist()[:10]} touch its elements "
                "but are not covered by its collar (collar margin too small)"
            )
        unknowns = d_nodes[~is_gamma_node[d_nodes]]
        local = np.full(n_nodes, -1, dtype=np.int64)
        ordered = np.concatenate([unknowns, collar_nodes])
        local[ordered] = np.arange(len(ordered))
        nodes.append(ordered)
        n_unknowns.append(len(unknowns))
        local_index.append(local)
        unknown_member[unknowns, g.n] = True
        if len(g.hat_elems):
            hat_member[np.unique(mesh.elements[g.hat_elems]), g.n] = True

    hat_member[is_gamma_node] = False  # Dirichlet copies are fixed by data, never constrained
    theta = [tuple(np.where(hat_member[v])[0]) for v in range(n_nodes)]
    m = hat_member.sum(axis=1).astype(np.int64)

    owner_count = unknown_member.sum(axis=1)
    for v in range(n_nodes):
        if is_gamma_node[v]:
            continue
        owners = tuple(np.where(unknown_member[v])[0])
        if m[v] >= 2 and owners != theta[v]:
            raise DecompositionError(
                f"node {v}: duplicated across subdomains {owners} but interface strips give {theta[v]}"
            )
        if m[v] <= 1 and owner_count[v] != 1:
            raise DecompositionError(
                f"node {v}: appears in {owner_count[v]} unknown vectors with multiplicity {m[v]}"
            )
    return DecompIndex(nodes=nodes, n_unknowns=n_unknowns, local_index=local_index,
                       theta=theta, m=m, n_subdomains=ns)


def _membership(mesh, geoms):
    ns = len(geoms)
    member = np.zeros((mesh.n_elements, ns), dtype=bool)
    fmember = np.zeros((mesh.n_elements, ns), dtype=bool)
    for g in geoms:
        member[g.omega_elems, g.n] = True
        member[g.hat_elems, g.n] = True
        member[g.gamma_elems, g.n] = True
        fmember[g.omega_elems, g.n] = True
        fmember[g.hat_elems, g.n] = True
    return member, fmember


def compute_zeta(geoms, mesh):
    """Membership signatures and multiplicity tables for the decomposition."""
    member, fmember = _membership(mesh, geoms)
    zeta_f = fmember.sum(axis=1).astype(np.int64)
    omega = mesh.element_region == Region.OMEGA
    if np.any(zeta_f[omega] < 1):
        bad = np.where(omega & (zeta_f < 1))[0]
        raise DecompositionError(f"interior elements {bad.tolist()[:10]} belong to no subdomain")
    signatures = [tuple(np.where(member[t])[0]) for t in range(mesh.n_elements)]
    masks = None
    if len(geoms) <= 64:
        masks = np.zeros(mesh.n_elements, dtype=np.uint64)
        for n in range(len(geoms)):
            masks[member[:, n]] |= np.uint64(1 << n)
    return ZetaTables(signatures=signatures, zeta_F=zeta_f,
                      n_subdomains=len(geoms), _masks=masks)


def verify_coverage(mesh, spec, tables):
    """Check that every interacting element pair lies in at least one
    subdomain; an uncovered pair would be silently dropped by the
    multi-subdomain assembly."""
    pairs = interacting_pairs(spec, mesh)
    z = tables.zeta_values(pairs[:, 0], pairs[:, 1])
    bad = pairs[z == 0]
    return CoverageReport(
        ok=len(bad) == 0,
        pairs_checked=len(pairs),
        min_zeta=int(z.min()) if len(z) else 0,
        offending=bad,
    )


def overlap_atoms(geoms, mesh):
    """Group elements by membership signature.

    The atoms partition the mesh; recomputing pair multiplicities from the
    atom index sets must agree with `compute_zeta` on every pair.
    """
    member, _ = _membership(mesh, geoms)
    by_sig = {}
    for t in range(mesh.n_elements):
        by_sig.setdefault(tuple(np.where(member[t])[0]), []).append(t)
    signatures = sorted(by_sig)
    atom_of = np.empty(mesh.n_elements, dtype=np.int64)
    elements = []
    for i, sig in enumerate(signatures):
        els = np.array(by_sig[sig], dtype=np.int64)
        elements.append(els)
        atom_of[els] = i
    return OverlapAtoms(signatures=signatures, elements=elements,
                        atom_of=atom_of, n_subdomains=len(geoms))
