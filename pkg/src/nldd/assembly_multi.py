"""Assembly of the weighted subdomain systems.

Each subdomain assembles exactly the same pair blocks as the single-domain
path, restricted to pairs with both elements in the subdomain and scaled by
the inverse overlap multiplicity.  Summing the scattered subdomain systems
therefore reproduces the single-domain system up to rounding, which is the
property `scatter_sum_check` certifies.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .assembly_single import (
    _mass_contributions,
    _pair_contributions,
    _reduce_coo,
    _reduce_vector,
    _evaluate,
    triangle_rule,
    _element_quadrature,
)
from .errors import CoverageError
from .kernel import interacting_pairs


@dataclass
class SubdomainSystem:
    """One subdomain's assembled system in its local numbering.

    A       : unknown-by-unknown operator block
    C       : unknown-by-collar coupling block (Dirichlet lift)
    A_local : full local matrix over unknowns + collar nodes
    b       : load vector (source moments minus C @ g)
    g       : Dirichlet values at the collar nodes
    fmom    : weighted source moments over all local nodes
    """

    n: int
    nodes: np.ndarray
    n_unknowns: int
    floating: bool
    A: sparse.csr_matrix
    C: sparse.csr_matrix
    A_local: sparse.csr_matrix = field(repr=False)
    b: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)
    fmom: np.ndarray = field(repr=False)


def _require_coverage(coverage):
    if coverage is None or not coverage.ok:
        raise CoverageError(
            "decomposition has not passed the coverage check; refusing to assemble "
            "(uncovered interacting pairs would be dropped silently)"
        )


def _local_moments(mesh, f, quad_order, element_ids, element_weights, node_map, n_rows):
    basis, _ = triangle_rule(quad_order)
    pts, wts = _element_quadrature(mesh, quad_order)
    pe = pts[element_ids]
    fv = wts[element_ids] * _evaluate(f, pe.reshape(-1, 2)).reshape(pe.shape[:2])
    mom = np.einsum("eq,qa->ea", fv, basis) * element_weights[:, None]
    rows = node_map[mesh.elements[element_ids]].ravel()
    return _reduce_vector(rows, mom.ravel(), n_rows)


def assemble_subdomain(n, mesh, spec, geoms, index, tables, load, coverage,
                       quad_order=4, reaction=None, workers=1, pairs=None):
    """Assemble subdomain n; requires a passing coverage report.

    The pair stream, quadrature and reduction are shared with the
    single-domain assembly, so with a single subdomain the result is bitwise
    identical to it.
    """
    _require_coverage(coverage)
    geom = geoms[n]
    local = index.local_index[n]
    nodes = index.nodes[n]
    n_un = index.n_unknowns[n]
    n_loc = len(nodes)

    if pairs is None:
        pairs = interacting_pairs(spec, mesh)
    in_d = np.zeros(mesh.n_elements, dtype=bool)
    in_d[geom.omega_elems] = True
    in_d[geom.hat_elems] = True
    in_d[geom.gamma_elems] = True
    keep = in_d[pairs[:, 0]] & in_d[pairs[:, 1]]
    sub_pairs = pairs[keep]
    weights = 1.0 / tables.zeta_values(sub_pairs[:, 0], sub_pairs[:, 1])

    rows, cols, vals = _pair_contributions(
        mesh, spec, sub_pairs, weights, quad_order, node_map=local, workers=workers
    )
    f_elems = np.sort(np.concatenate([geom.omega_elems, geom.hat_elems]))
    f_weights = 1.0 / tables.zeta_F[f_elems]
    if reaction is not None:
        mr, mc, mv = _mass_contributions(mesh, reaction, f_elems, f_weights, quad_order, node_map=local)
        rows = np.concatenate([rows, mr])
        cols = np.concatenate([cols, mc])
        vals = np.concatenate([vals, mv])
    a_local = _reduce_coo(rows, cols, vals, (n_loc, n_loc))

    fmom = _local_moments(mesh, load.f, quad_order, f_elems, f_weights, local, n_loc)
    g_n = load.g_vec[nodes[n_un:] - mesh.n_unknowns]
    a_uu = a_local[:n_un, :n_un].tocsr()
    c_uc = a_local[:n_un, n_un:].tocsr()
    b = fmom[:n_un] - c_uc @ g_n
    return SubdomainSystem(
        n=n, nodes=nodes, n_unknowns=n_un, floating=geom.floating,
        A=a_uu, C=c_uc, A_local=a_local, b=b, g=g_n, fmom=fmom,
    )


def assemble_all_subdomains(mesh, spec, geoms, index, tables, load, coverage,
                            quad_order=4, reaction=None, workers=1):
    """Assemble every subdomain, sharing one interacting-pair enumeration."""
    _require_coverage(coverage)
    pairs = interacting_pairs(spec, mesh)
    return [
        assemble_subdomain(n, mesh, spec, geoms, index, tables, load, coverage,
                           quad_order=quad_order, reaction=reaction, workers=workers, pairs=pairs)
        for n in range(len(geoms))
    ]


@dataclass(frozen=True)
class ScatterReport:
    matrix_residual: float
    load_residual: float


def scatter_sum_check(systems, index, single, b_single):
    """Scatter the subdomain systems to global numbering, sum them, and
    compare against the single-domain matrix and load (relative Frobenius
    and Euclidean residuals).  Pure diagnostic."""
    rows, cols, vals = [], [], []
    for sys in systems:
        loc = sys.A_local.tocoo()
        rows.append(sys.nodes[loc.row])
        cols.append(sys.nodes[loc.col])
        vals.append(loc.data)
    total = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=single.A_full.shape,
    )
    diff = (total - single.A_full).tocoo()
    denom = np.sqrt(np.sum(single.A_full.data**2))
    matrix_residual = np.sqrt(np.sum(diff.data**2)) / (denom if denom > 0 else 1.0)

    b_sum = np.zeros(single.n_unknowns)
    for sys in systems:
        np.add.at(b_sum, sys.nodes[: sys.n_unknowns], sys.b)
    bnorm = np.linalg.norm(b_single)
    load_residual = np.linalg.norm(b_sum - b_single) / (bnorm if bnorm > 0 else 1.0)
    return ScatterReport(matrix_residual=float(matrix_residual), load_residual=float(load_residual))


def energy_sum(systems, u_list):
    """Total energy of a family of subdomain vectors (collar values are the
    stored Dirichlet data).  For restrictions of one global vector this
    equals the single-domain energy."""
    if len(u_list) != len(systems):
        raise ValueError("one vector per subdomain required")
    total = 0.0
    for sys, u in zip(systems, u_list):
        if len(u) != sys.n_unknowns:
            raise ValueError(
                f"subdomain {sys.n}: vector length {len(u)} != {sys.n_unknowns} unknowns"
            )
        z = np.concatenate([u, sys.g])
        total += 0.5 * float(z @ (sys.A_local @ z)) - float(sys.fmom @ z)
    return total
