"""Single-domain assembly of the nonlocal stiffness system.

The bilinear form pairs every two interacting elements through a double
integral, so assembly walks unordered element pairs and accumulates a small
dense block per pair.  Contributions are generated in a fixed pair order
and merged by a deterministic sorted reduction, which makes repeated
assemblies bitwise identical; the multi-subdomain assembly reuses the same
machinery with per-pair weights.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import cg, splu

from .errors import SolverError
from .kernel import interacting_pairs, kernel_values, pair_interacts
from .quadrature import triangle_rule

_CHUNK = 4096


@dataclass
class SingleDomainSystem:
    """Assembled single-domain matrices.

    A_full : full Galerkin matrix over all nodes (unknowns + Dirichlet)
    A      : unknown-by-unknown block (the solved operator)
    G      : unknown-by-Dirichlet coupling block
    """

    A_full: sparse.csr_matrix
    A: sparse.csr_matrix
    G: sparse.csr_matrix
    n_unknowns: int
    n_nodes: int


@dataclass
class LoadData:
    """Problem data: source f on the interior, Dirichlet values g on the frame.

    Both handles must accept an (n, 2) array of points.  g_vec holds the
    nodal interpolant of g at the Dirichlet nodes.
    """

    f: object
    g: object
    g_vec: np.ndarray
    b_single: np.ndarray | None = field(default=None, repr=False)


def _evaluate(fn, pts):
    vals = np.asarray(fn(pts), dtype=float)
    return np.broadcast_to(vals, (len(pts),))


def make_load(mesh, f, g):
    """Bundle source and Dirichlet handles, interpolating g at frame nodes."""
    gamma_coords = mesh.vertices[mesh.n_unknowns:]
    return LoadData(f=f, g=g, g_vec=_evaluate(g, gamma_coords).copy())


def _element_quadrature(mesh, quad_order):
    """Physical quadrature points (nt, Q, 2) and area-scaled weights (nt, Q)."""
    bary, w = triangle_rule(quad_order)
    pts = np.einsum("qk,tkd->tqd", bary, mesh.vertices[mesh.elements])
    wts = mesh.areas[:, None] * w[None, :]
    return pts, wts


def _chunk_blocks(spec, basis, xi, wi, xj, wj):
    """Interaction blocks for a batch of element pairs.

    Returns (n_pairs, 6, 6) blocks over the stacked vertex lists of the two
    elements (x-side vertices first); duplicate vertices merge later during
    the global reduction.  Blocks are exactly symmetric.
    """
    G = kernel_values(spec, xi[:, :, None, :], xj[:, None, :, :], clamp_singularity=True)
    G *= wi[:, :, None] * wj[:, None, :]
    sx = G.sum(axis=2)
    sy = G.sum(axis=1)
    n = len(G)
    block = np.empty((n, 6, 6))
    block[:, :3, :3] = np.einsum("bq,qa,qc->bac", sx, basis, basis)
    block[:, 3:, 3:] = np.einsum("bp,pa,pc->bac", sy, basis, basis)
    cross = np.einsum("bqp,qa,pc->bac", G, basis, basis)
    block[:, :3, 3:] = -cross
    block[:, 3:, :3] = -cross.transpose(0, 2, 1)
    return 0.5 * (block + block.transpose(0, 2, 1))


def _pair_contributions(mesh, spec, pairs, pair_weights, quad_order, node_map=None, workers=1):
    """COO streams (rows, cols, vals) for weighted pair blocks, in pair order.

    Each unordered pair of distinct elements stands for both integration
    orientations, which by kernel symmetry contribute identically, hence the
    factor 2; self-pairs are counted once.
    """
    basis, _ = triangle_rule(quad_order)
    pts, wts = _element_quadrature(mesh, quad_order)
    elements = mesh.elements if node_map is None else node_map[mesh.elements]

    def run_chunk(lo):
        sl = slice(lo, min(lo + _CHUNK, len(pairs)))
        ti, tj = pairs[sl, 0], pairs[sl, 1]
        block = _chunk_blocks(spec, basis, pts[ti], wts[ti], pts[tj], wts[tj])
        fw = np.where(ti == tj, 1.0, 2.0) * pair_weights[sl]
        block *= fw[:, None, None]
        nodes6 = np.concatenate([elements[ti], elements[tj]], axis=1)
        rows = np.broadcast_to(nodes6[:, :, None], block.shape).ravel()
        cols = np.broadcast_to(nodes6[:, None, :], block.shape).ravel()
        return rows, cols, block.ravel()

    offsets = range(0, len(pairs), _CHUNK)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_chunk, offsets))
    else:
        parts = [run_chunk(lo) for lo in offsets]
    rows = np.concatenate([p[0] for p in parts])
    cols = np.concatenate([p[1] for p in parts])
    vals = np.concatenate([p[2] for p in parts])
    return rows, cols, vals


def _mass_contributions(mesh, coeff, element_ids, element_weights, quad_order, node_map=None):
    """COO streams of the reaction (mass-like) term over the given elements."""
    basis, _ = triangle_rule(quad_order)
    pts, wts = _element_quadrature(mesh, quad_order)
    pe = pts[element_ids]
    cw = wts[element_ids] * _evaluate(coeff, pe.reshape(-1, 2)).reshape(pe.shape[:2])
    block = np.einsum("eq,qa,qc->eac", cw, basis, basis)
    block = 0.5 * (block + block.transpose(0, 2, 1))
    block *= element_weights[:, None, None]
    elements = mesh.elements if node_map is None else node_map[mesh.elements]
    nodes3 = elements[element_ids]
    rows = np.broadcast_to(nodes3[:, :, None], block.shape).ravel()
    cols = np.broadcast_to(nodes3[:, None, :], block.shape).ravel()
    return rows, cols, block.ravel()


def _reduce_coo(rows, cols, vals, shape):
    """Deterministic duplicate merge: stable (row, col) sort, then group sums."""
    if len(vals) == 0:
        return sparse.csr_matrix(shape)
    seq = np.arange(len(vals), dtype=np.int64)
    order = np.lexsort((seq, cols, rows))
    r, c, v = rows[order], cols[order], vals[order]
    starts = np.empty(len(v), dtype=bool)
    starts[0] = True
    np.logical_or(r[1:] != r[:-1], c[1:] != c[:-1], out=starts[1:])
    idx = np.flatnonzero(starts)
    out = sparse.csr_matrix((np.add.reduceat(v, idx), (r[idx], c[idx])), shape=shape)
    out.eliminate_zeros()
    return out


def _reduce_vector(rows, vals, n):
    if len(vals) == 0:
        return np.zeros(n)
    seq = np.arange(len(vals), dtype=np.int64)
    order = np.lexsort((seq, rows))
    r, v = rows[order], vals[order]
    starts = np.empty(len(v), dtype=bool)
    starts[0] = True
    np.not_equal(r[1:], r[:-1], out=starts[1:])
    idx = np.flatnonzero(starts)
    out = np.zeros(n)
    out[r[idx]] = np.add.reduceat(v, idx)
    return out


def pair_block(mesh, spec, t, tp, quad_order=4):
    """Interaction block of one element pair over the union of its vertices.

    Returns (node_ids, block) where node_ids are the sorted distinct global
    vertices of the two elements.  For t == tp only the single self-pair
    integration is included; for distinct elements the block covers one
    integration orientation (assembly adds both).
    """
    if quad_order < 1:
        raise ValueError("quad_order must be >= 1")
    if not pair_interacts(spec, mesh, t, tp):
        raise ValueError(f"elements {t} and {tp} do not interact under the given kernel")
    if mesh.areas[t] <= 0 or mesh.areas[tp] <= 0:
        raise ValueError("degenerate element")
    basis, _ = triangle_rule(quad_order)
    pts, wts = _element_quadrature(mesh, quad_order)
    ti = np.array([t])
    tj = np.array([tp])
    block6 = _chunk_blocks(spec, basis, pts[ti], wts[ti], pts[tj], wts[tj])[0]
    nodes6 = np.concatenate([mesh.elements[t], mesh.elements[tp]])
    uniq = np.unique(nodes6)
    pos = np.searchsorted(uniq, nodes6)
    out = np.zeros((len(uniq), len(uniq)))
    np.add.at(out, (pos[:, None], pos[None, :]), block6)
    return uniq, 0.5 * (out + out.T)


def assemble_full(mesh, spec, quad_order=4, reaction=None, workers=1):
    """Assemble the full Galerkin matrix and split off the solved blocks.

    Walks every interacting element pair once; the optional `reaction`
    coefficient adds a mass-like term over interior elements.
    """
    pairs = interacting_pairs(spec, mesh)
    if len(pairs) == 0:
        raise ValueError("no interacting element pairs; horizon too small for this mesh")
    weights = np.ones(len(pairs))
    rows, cols, vals = _pair_contributions(mesh, spec, pairs, weights, quad_order, workers=workers)
    if reaction is not None:
        omega = mesh.omega_elements
        mr, mc, mv = _mass_contributions(mesh, reaction, omega, np.ones(len(omega)), quad_order)
        rows = np.concatenate([rows, mr])
        cols = np.concatenate([cols, mc])
        vals = np.concatenate([vals, mv])
    n = mesh.n_nodes
    a_full = _reduce_coo(rows, cols, vals, (n, n))
    nu = mesh.n_unknowns
    return SingleDomainSystem(
        A_full=a_full,
        A=a_full[:nu, :nu].tocsr(),
        G=a_full[:nu, nu:].tocsr(),
        n_unknowns=nu,
        n_nodes=n,
    )


def load_moments(mesh, f, quad_order=4, element_ids=None, element_weights=None):
    """Moments of f against every nodal basis function, integrated element-wise.

    By default integrates over all interior elements (source data lives on
    the interior region); a subdomain assembly passes its own element set
    and per-element weights.
    """
    if element_ids is None:
        element_ids = mesh.omega_elements
    basis, _ = triangle_rule(quad_order)
    pts, wts = _element_quadrature(mesh, quad_order)
    pe = pts[element_ids]
    fv = wts[element_ids] * _evaluate(f, pe.reshape(-1, 2)).reshape(pe.shape[:2])
    mom = np.einsum("eq,qa->ea", fv, basis)
    if element_weights is not None:
        mom = mom * element_weights[:, None]
    rows = mesh.elements[element_ids].ravel()
    return _reduce_vector(rows, mom.ravel(), mesh.n_nodes)


def build_rhs(mesh, system, load, quad_order=4):
    """Right-hand side for the unknown block: source moments minus lifted
    Dirichlet coupling."""
    fmom = load_moments(mesh, load.f, quad_order)
    return fmom[: system.n_unknowns] - system.G @ load.g_vec


def solve_single(A, b, tol=1e-10, method="direct"):
    """Solve the symmetric positive definite unknown-block system.

    Uses a sparse direct factorization by default with a conjugate-gradient
    fallback; either way the relative residual is certified against `tol`.
    """
    b = np.asarray(b, dtype=float)
    if method == "direct":
        try:
            u = splu(sparse.csc_matrix(A)).solve(b)
        except RuntimeError as exc:
            raise SolverError(f"direct factorization failed (matrix not positive definite?): {exc}")
    elif method == "cg":
        u, info = cg(A, b, rtol=tol * 1e-2, atol=0.0, maxiter=10 * len(b) + 100)
        if info != 0:
            raise SolverError(f"conjugate gradient did not converge (info={info})")
    else:
        raise ValueError(f"unknown solve method {method!r}")
    denom = np.linalg.norm(b)
    residual = np.linalg.norm(A @ u - b) / (denom if denom > 0 else 1.0)
    if residual > tol:
        raise SolverError(f"solution residual {residual:.3e} exceeds tolerance {tol:.3e}")
    return u


def energy_single(mesh, system, load, u, quad_order=4):
    """Discrete energy (half the quadratic term minus the source work) of the
    finite element function with unknown values u and frame values g."""
    z = np.concatenate([u, load.g_vec])
    fmom = load_moments(mesh, load.f, quad_order)
    return 0.5 * float(z @ (system.A_full @ z)) - float(fmom @ z)


def symmetry_error(A):
    """Largest absolute entry of A - A^T."""
    d = A - A.T
    return float(np.abs(d.data).max()) if d.nnz else 0.0
