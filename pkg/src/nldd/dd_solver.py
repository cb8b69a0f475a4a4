"""Coupled solve of the subdomain systems and equivalence certification.

The subdomain operators and the interface constraints are combined into one
symmetric indefinite saddle-point system

    [ diag(A_n)  M^T ] [u]   [b]
    [ M          0   ] [l] = [0]

whose stationarity rows read A_n u_n + M_n^T l = b_n.  A direct sparse
factorization solves it; floating subdomains need no special handling
because the constraints couple them to anchored neighbours.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .constraints import ConstraintMode, constraint_violation
from .errors import DecompositionError, SolverError


@dataclass
class KKTSystem:
    matrix: sparse.csr_matrix
    rhs: np.ndarray = field(repr=False)
    block_sizes: list = field(default_factory=list)
    m_rows: int = 0


@dataclass(frozen=True)
class EquivalenceReport:
    rel_inf_error: float
    rel_l2_error: float
    max_constraint_violation: float
    max_disagreement: float
    solver_residual: float


def assemble_kkt(systems, C):
    """Stack the subdomain operators and constraint blocks into the
    saddle-point matrix; only NONREDUNDANT constraints keep it nonsingular."""
    if C.mode is not ConstraintMode.NONREDUNDANT:
        raise ValueError(
            "direct saddle-point solve requires NONREDUNDANT constraints "
            "(redundant rows make the system singular)"
        )
    sizes = [sys.n_unknowns for sys in systems]
    a_blk = sparse.block_diag([sys.A for sys in systems], format="csr")
    rhs = np.concatenate([sys.b for sys in systems] + [np.zeros(C.m_rows)])
    if C.m_rows:
        m_full = sparse.hstack(C.blocks, format="csr")
        matrix = sparse.bmat([[a_blk, m_full.T], [m_full, None]], format="csr")
    else:
        matrix = a_blk
    return KKTSystem(matrix=matrix, rhs=rhs, block_sizes=sizes, m_rows=C.m_rows)


@dataclass
class DDSolution:
    u_list: list
    lam: np.ndarray = field(repr=False)
    residual: float = 0.0


def solve_dd(kkt, tol=1e-10):
    """Direct factorization of the saddle-point system with residual check."""
    try:
        x = splu(sparse.csc_matrix(kkt.matrix)).solve(kkt.rhs)
    except RuntimeError as exc:
        raise SolverError(f"saddle-point factorization failed (singular system?): {exc}")
    denom = np.linalg.norm(kkt.rhs)
    residual = np.linalg.norm(kkt.matrix @ x - kkt.rhs) / (denom if denom > 0 else 1.0)
    if residual > tol:
        raise SolverError(f"saddle-point residual {residual:.3e} exceeds tolerance {tol:.3e}")
    u_list = []
    offset = 0
    for size in kkt.block_sizes:
        u_list.append(x[offset:offset + size])
        offset += size
    return DDSolution(u_list=u_list, lam=x[offset:], residual=float(residual))


def reconstruct_global(u_list, index, n_unknowns=None):
    """Merge the subdomain vectors into one global vector.

    Each duplicated node takes the value from its lowest-indexed subdomain;
    the returned disagreement is the largest spread across copies (zero up
    to solver accuracy when the constraints hold).  `n_unknowns` fixes the
    expected global unknown count; by default it is inferred from the
    highest owned node.
    """
    counts = np.zeros(len(index.m), dtype=np.int64)
    for n in range(index.n_subdomains):
        ids = index.nodes[n][: index.n_unknowns[n]]
        counts[ids] += 1
    owned = np.where(counts > 0)[0]
    if len(owned) == 0:
        return np.zeros(0), 0.0
    n_global = int(owned.max()) + 1 if n_unknowns is None else n_unknowns
    if np.any(counts[:n_global] == 0):
        missing = np.where(counts[:n_global] == 0)[0]
        raise DecompositionError(f"global unknowns {missing.tolist()[:10]} owned by no subdomain")

    u_dd = np.zeros(n_global)
    filled = np.zeros(n_global, dtype=bool)
    spread_lo = np.full(n_global, np.inf)
    spread_hi = np.full(n_global, -np.inf)
    for n in range(index.n_subdomains):
        ids = index.nodes[n][: index.n_unknowns[n]]
        vals = u_list[n]
        first = ~filled[ids]
        u_dd[ids[first]] = vals[first]
        filled[ids[first]] = True
        np.minimum.at(spread_lo, ids, vals)
        np.maximum.at(spread_hi, ids, vals)
    dup = counts[:n_global] >= 2
    max_disagreement = float((spread_hi[dup] - spread_lo[dup]).max()) if dup.any() else 0.0
    return u_dd, max_disagreement


def equivalence_report(u_dd, u_single, C, u_list, max_disagreement=0.0, solver_residual=0.0):
    """Compare the merged decomposition solution against the single-domain one."""
    diff = u_dd - u_single
    inf_ref = max(1.0, float(np.abs(u_single).max())) if len(u_single) else 1.0
    l2_ref = max(1.0, float(np.linalg.norm(u_single)))
    return EquivalenceReport(
        rel_inf_error=float(np.abs(diff).max()) / inf_ref if len(diff) else 0.0,
        rel_l2_error=float(np.linalg.norm(diff)) / l2_ref,
        max_constraint_violation=constraint_violation(C, u_list),
        max_disagreement=float(max_disagreement),
        solver_residual=float(solver_residual),
    )
