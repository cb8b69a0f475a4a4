"""Signed incidence constraints tying duplicated interface unknowns.

Every node shared by several subdomains' unknown vectors gets equality
constraints between its copies.  NONREDUNDANT mode chains consecutive
subdomains (full row rank); REDUNDANT mode emits one row per subdomain pair
(rank-deficient for triple points but convenient for iterative methods).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import sparse

from .errors import DecompositionError


class ConstraintMode(Enum):
    NONREDUNDANT = "nonredundant"
    REDUNDANT = "redundant"


@dataclass(frozen=True)
class ConstraintMatrix:
    """Row-block form M = (M_1 ... M_Ns): each row has +1 at one subdomain's
    copy of a node and -1 at another's.

    node_ids[k] and pairs[k] record which global node and which subdomain
    pair row k ties.
    """

    mode: ConstraintMode
    m_rows: int
    blocks: list
    node_ids: np.ndarray
    pairs: np.ndarray


def build_constraints(index, mode=ConstraintMode.NONREDUNDANT):
    """Emit constraint rows in ascending node order, pair order within a node."""
    ns = index.n_subdomains
    entries = [([], [], []) for _ in range(ns)]  # (row, col, val) per block
    node_ids, row_pairs = [], []
    k = 0
    for v in range(len(index.m)):
        theta = index.theta[v]
        if len(theta) < 2:
            continue
        if mode is ConstraintMode.NONREDUNDANT:
            duos = list(zip(theta[:-1], theta[1:]))
        else:
            duos = [(theta[i], theta[j]) for i in range(len(theta)) for j in range(i + 1, len(theta))]
        for a, b in duos:
            ja = index.local_index[a][v]
            jb = index.local_index[b][v]
            if not 0 <= ja < index.n_unknowns[a] or not 0 <= jb < index.n_unknowns[b]:
                raise DecompositionError(
                    f"node {v} has multiplicity {len(theta)} but no unknown slot in "
                    f"subdomain pair ({a}, {b})"
                )
            for n, j, val in ((a, ja, 1.0), (b, jb, -1.0)):
                entries[n][0].append(k)
                entries[n][1].append(j)
                entries[n][2].append(val)
            node_ids.append(v)
            row_pairs.append((a, b))
            k += 1
    blocks = [
        sparse.csr_matrix((vals, (rows, cols)), shape=(k, index.n_unknowns[n]))
        for n, (rows, cols, vals) in enumerate(entries)
    ]
    return ConstraintMatrix(
        mode=mode,
        m_rows=k,
        blocks=blocks,
        node_ids=np.array(node_ids, dtype=np.int64),
        pairs=np.array(row_pairs, dtype=np.int64).reshape(k, 2),
    )


@dataclass(frozen=True)
class ConstraintCheck:
    ok: bool
    expected_rows: int
    rank: int | None
    issues: list


def expected_row_count(index, mode):
    m = index.m[index.m >= 2]
    if mode is ConstraintMode.NONREDUNDANT:
        return int((m - 1).sum())
    return int((m * (m - 1) // 2).sum())


def verify_constraint_matrix(C, index, rank_limit=2000):
    """Validate row counts and the +1/-1 row structure; for small
    NONREDUNDANT matrices also confirm full row rank densely."""
    issues = []
    expected = expected_row_count(index, C.mode)
    if C.m_rows != expected:
        issues.append(f"row count {C.m_rows} != closed-form count {expected}")

    if C.m_rows:
        full = sparse.hstack(C.blocks, format="csr")
        full.sum_duplicates()
        nnz = np.diff(full.indptr)
        bad = np.where(nnz != 2)[0]
        if len(bad):
            issues.append(f"rows {bad.tolist()[:10]} do not have exactly two entries")
        else:
            d = full.data.reshape(-1, 2)
            bad = np.where((np.abs(d) != 1.0).any(axis=1) | (d.sum(axis=1) != 0.0))[0]
            if len(bad):
                issues.append(f"rows {bad.tolist()[:10]} are not one +1 and one -1")

    rank = None
    if C.mode is ConstraintMode.NONREDUNDANT and 0 < C.m_rows <= rank_limit:
        dense = sparse.hstack(C.blocks).toarray()
        rank = int(np.linalg.matrix_rank(dense))
        if rank != C.m_rows:
            issues.append(f"rank {rank} < row count {C.m_rows}; constraints not independent")
    return ConstraintCheck(ok=not issues, expected_rows=expected, rank=rank, issues=issues)


def constraint_violation(C, u_list):
    """Largest absolute residual of the coupling rows for a family of
    subdomain vectors."""
    if len(u_list) != len(C.blocks):
        raise ValueError("one vector per subdomain required")
    if C.m_rows == 0:
        return 0.0
    total = np.zeros(C.m_rows)
    for block, u in zip(C.blocks, u_list):
        if block.shape[1] != len(u):
            raise ValueError(f"vector length {len(u)} != {block.shape[1]} unknown columns")
        total += block @ u
    return float(np.abs(total).max())
