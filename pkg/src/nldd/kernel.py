"""Finite-horizon interaction kernels and the element-pair interaction test.

The same kernel and the same pair predicate are used by the single-domain
and the multi-subdomain assemblies, which is what makes the two exactly
consistent.  Truncation at the horizon comes in two flavours:

* ``BARYCENTER_PAIR``: an element pair is included iff the barycenters are
  within ``delta + h``; the kernel itself carries no indicator, so every
  included pair has a smooth integrand.
* ``POINTWISE``: pairs are included iff the closest vertices are within
  ``delta``; the kernel is multiplied by the indicator of ``|y-x| <= delta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial import cKDTree


class KernelFamily(Enum):
    CONSTANT = "constant"
    GAUSSIAN = "gaussian"
    FRACTIONAL_TRUNCATED = "fractional_truncated"


class TruncationMode(Enum):
    BARYCENTER_PAIR = "barycenter_pair"
    POINTWISE = "pointwise"


# distances below this floor are clamped in vectorized evaluation of the
# singular family; only self-pair quadrature ever reaches it
_DIST_FLOOR = 1e-12


def constant_scale(delta):
    """Scale for the constant family matching classical local diffusion."""
    return 4.0 / (math.pi * delta**4)


@dataclass(frozen=True)
class KernelSpec:
    family: KernelFamily
    delta: float
    s: float | None = None
    scale: float = 1.0
    truncation_mode: TruncationMode = TruncationMode.BARYCENTER_PAIR

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("horizon delta must be positive")
        if self.scale <= 0:
            raise ValueError("kernel scale must be positive")
        if self.family is KernelFamily.FRACTIONAL_TRUNCATED:
            if self.s is None or not 0.0 < self.s < 1.0:
                raise ValueError("fractional family requires exponent 0 < s < 1")
            if self.truncation_mode is not TruncationMode.POINTWISE:
                raise ValueError("fractional family is only supported with POINTWISE truncation")


def kernel_values(spec, x, y, clamp_singularity=False):
    """Vectorized kernel evaluation; x and y broadcast as (..., 2) points."""
    d2 = np.sum((np.asarray(y) - np.asarray(x)) ** 2, axis=-1)
    if spec.family is KernelFamily.CONSTANT:
        vals = np.full_like(d2, spec.scale)
    elif spec.family is KernelFamily.GAUSSIAN:
        vals = spec.scale * np.exp(-d2 / spec.delta**2)
    else:
        if clamp_singularity:
            d2 = np.maximum(d2, _DIST_FLOOR**2)
        elif np.any(d2 == 0.0):
            raise ValueError("singular kernel evaluated at coincident points")
        vals = spec.scale * d2 ** (-1.0 - spec.s)
    if spec.truncation_mode is TruncationMode.POINTWISE:
        vals = np.where(d2 <= spec.delta**2, vals, 0.0)
    return vals


def eval_kernel(spec, x, y):
    """Kernel value at a single pair of points (raises at a singularity)."""
    return float(kernel_values(spec, np.asarray(x, dtype=float), np.asarray(y, dtype=float)))


def _min_vertex_dist2(mesh, ti, tj):
    vi = mesh.vertices[mesh.elements[ti]]  # (..., 3, 2)
    vj = mesh.vertices[mesh.elements[tj]]
    d = vi[..., :, None, :] - vj[..., None, :, :]
    return np.sum(d * d, axis=-1).min(axis=(-1, -2))


def pair_interacts(spec, mesh, t, tp):
    """Whether elements t and tp exchange a contribution under `spec`.

    Self-pairs always interact.  The predicate is symmetric and independent
    of any decomposition.
    """
    if t == tp:
        return True
    if spec.truncation_mode is TruncationMode.BARYCENTER_PAIR:
        r = spec.delta + mesh.h
        d = mesh.barycenters[t] - mesh.barycenters[tp]
        return bool(d @ d <= r * r)
    return bool(_min_vertex_dist2(mesh, t, tp) <= spec.delta**2)


def interacting_pairs(spec, mesh):
    """All unordered interacting element pairs, self-pairs included.

    Returns an (n_pairs, 2) int array with i <= j, sorted lexicographically;
    this fixed ordering is what makes assembly deterministic.
    """
    bary = mesh.barycenters
    if spec.truncation_mode is TruncationMode.BARYCENTER_PAIR:
        r = spec.delta + mesh.h
        prefilter = r * (1.0 + 1e-9) + 1e-12
    else:
        spread = np.sqrt(((mesh.vertices[mesh.elements] - bary[:, None, :]) ** 2).sum(-1)).max()
        prefilter = (spec.delta + 2.0 * spread) * (1.0 + 1e-9) + 1e-12

    tree = cKDTree(bary)
    cand = tree.query_pairs(prefilter, output_type="ndarray")
    if len(cand):
        i, j = cand[:, 0], cand[:, 1]
        if spec.truncation_mode is TruncationMode.BARYCENTER_PAIR:
            r = spec.delta + mesh.h
            d = bary[i] - bary[j]
            keep = np.sum(d * d, axis=1) <= r * r
        else:
            keep = _min_vertex_dist2(mesh, i, j) <= spec.delta**2
        cand = cand[keep]

    n = mesh.n_elements
    selfpairs = np.repeat(np.arange(n, dtype=np.int64)[:, None], 2, axis=1)
    pairs = np.vstack([selfpairs, cand.astype(np.int64)]) if len(cand) else selfpairs
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order]
