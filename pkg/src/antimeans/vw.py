"""The Veronese-Whitney embedding, chord distance, empirical Fréchet
function, and the farthest projection that defines extrinsic antimeans.

RP^m embeds into the unit-trace rank-one symmetric matrices by
``[x] -> x x^T`` (``||x|| = 1``); a q-tuple embeds blockwise.  The squared
chord distance between embedded points is the squared Frobenius distance
summed over blocks, and the empirical Fréchet function of a sample is the
average squared chord distance to the sample.  Its maximizer over the
manifold is the farthest projection of the averaged embedded sample: per
block, the eigenvector line of the smallest eigenvalue, defined only when
that eigenvalue is simple.
"""

from __future__ import annotations

from typing import Union

import numpy as np

from .errors import FocalPointError, InvalidInput
from .manifold import ProjectivePoint, ProjectiveShape, canonicalize
from .numerics import eigh_sym

DEFAULT_GAP_TOL = 1e-9

PointOrShape = Union[ProjectivePoint, ProjectiveShape]


def as_shape(x: PointOrShape) -> ProjectiveShape:
    """View a single point as a one-component shape."""
    if isinstance(x, ProjectiveShape):
        return x
    if isinstance(x, ProjectivePoint):
        return ProjectiveShape((x,))
    raise InvalidInput(f"expected a ProjectivePoint or ProjectiveShape, got {type(x)!r}")


def vw_embed(p: ProjectivePoint) -> np.ndarray:
    """Embed one RP^m point: the rank-one matrix x x^T, shape (1, d, d)."""
    x = p.coords
    return np.outer(x, x)[None, :, :]


def vw_embed_shape(s: PointOrShape) -> np.ndarray:
    """Blockwise embedding of a shape: array of shape (q, d, d)."""
    mat = as_shape(s).as_matrix()
    return np.einsum("si,sj->sij", mat, mat)


def as_blocks(x) -> np.ndarray:
    """Coerce an embedded point, one matrix, or a stack of matrices to a
    (q, d, d) block array."""
    if isinstance(x, (ProjectivePoint, ProjectiveShape)):
        return vw_embed_shape(x)
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2:
        arr = arr[None, :, :]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise InvalidInput(f"expected square blocks, got shape {arr.shape}")
    return arr


def chord_dist_sq(a, b) -> float:
    """Squared chord distance: sum over blocks of tr((A_s - B_s)^2)."""
    blocks_a = as_blocks(a)
    blocks_b = as_blocks(b)
    if blocks_a.shape != blocks_b.shape:
        raise InvalidInput(
            f"block shapes differ: {blocks_a.shape} vs {blocks_b.shape}"
        )
    diff = blocks_a - blocks_b
    return float(np.sum(diff * diff))


def frechet_value(p: PointOrShape, sample) -> float:
    """Empirical Fréchet function: mean squared chord distance from
    ``p`` to the sample points."""
    sample = list(sample)
    if not sample:
        raise InvalidInput("Fréchet function needs a nonempty sample")
    embedded = vw_embed_shape(p)
    total = 0.0
    for x in sample:
        total += chord_dist_sq(embedded, vw_embed_shape(x))
    return total / len(sample)


def farthest_project(mu, gap_tol: float = DEFAULT_GAP_TOL) -> ProjectiveShape:
    """Farthest projection of ambient symmetric blocks onto the embedded
    manifold.

    Block s maps to the canonical unit eigenvector of its smallest
    eigenvalue.  ``gap_tol`` is relative: the two smallest eigenvalues of
    block s must be separated by more than ``gap_tol * tr(block)`` or the
    block is declared focal.
    """
    blocks = as_blocks(mu)
    points = []
    for s, block in enumerate(blocks):
        decomp = eigh_sym(block)
        scale = abs(float(np.trace(block)))
        if scale == 0.0:
            scale = max(float(np.sqrt(np.sum(block * block))), 1.0)
        gap = float(decomp.values[1] - decomp.values[0])
        tol = gap_tol * scale
        if gap <= tol:
            raise FocalPointError(block=s, gap=gap, tol=tol)
        points.append(canonicalize(decomp.vectors[:, 0]))
    return ProjectiveShape(tuple(points))
