"""Sample and pooled antimeans, the anticovariance matrix, and tangent
coordinates: the ingredients of every test statistic.

For a sample of shapes with components ``X_i^s`` (unit representatives),
the per-block second-moment matrices are ``J_s = n^{-1} sum_i X_i^s
(X_i^s)^T`` with eigenvalues ``d_s(1) <= ... <= d_s(d)`` and unit
eigenvectors ``g_s(a)``.  The sample antimean is ``([g_1(1)], ...,
[g_q(1)])``; the columns ``g_s(2..d)`` form the tangent basis ``D_s`` at
its s-th component.  The anticovariance matrix, indexed by pairs (s, a)
with a >= 2 in lexicographic order, has entries

    aS[(s,a),(t,b)] = n^{-1} (d_s(1)-d_s(a))^{-1} (d_t(1)-d_t(b))^{-1}
        * sum_i (g_s(a).X_i^s)(g_t(b).X_i^t)(g_s(1).X_i^s)(g_t(1).X_i^t)

which is the Gram matrix (1/n) U^T U of the per-observation first-order
eigenvector perturbations, hence positive semidefinite by construction.

Pooling: the pooled sample antimean is computed from the sample-size
weighted average of the per-group second-moment matrices
``J^(p)_s = sum_a (n_a/n) J^a_s`` (the merged sample's moment matrix when
the weights are the group proportions).  Its eigensystem supplies the
pooled tangent basis and the pooled-frame per-group anticovariance
matrices used by the multi-group test.  Pooling the embedded group
antimeans themselves, and then taking a farthest projection, is NOT
equivalent: near a common antimean that weighted average is within
O(spread^2) of a rank-one matrix, so its smallest eigenvalue is nearly
multiple and its farthest projection is an unstable point orthogonal to
the common antimean.  The moment-matrix pooling is the construction under
which the pooled antimean is consistent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FocalPointError, InvalidInput, ShapeMismatch
from .manifold import ProjectiveShape, canonicalize
from .numerics import eigh_sym
from .vw import DEFAULT_GAP_TOL, as_shape, farthest_project


@dataclass(frozen=True)
class AxialEigensystem:
    """Per-block second-moment matrices with full eigendecompositions.

    ``moments[s]`` is J_s (d x d, PSD, unit trace); ``values[s]`` its
    ascending eigenvalues; ``vectors[s][:, a]`` the unit eigenvector of
    ``values[s][a]`` in canonical sign.
    """

    moments: np.ndarray
    values: np.ndarray
    vectors: np.ndarray
    n: int

    @property
    def q(self) -> int:
        return self.moments.shape[0]

    @property
    def d(self) -> int:
        return self.moments.shape[1]

    def gaps(self) -> np.ndarray:
        """Per-block separation of the two smallest eigenvalues."""
        return self.values[:, 1] - self.values[:, 0]


@dataclass(frozen=True)
class AntimeanEstimate:
    """Sample antimean of one group plus everything tests need from it."""

    antimean: ProjectiveShape
    axial: AxialEigensystem
    tangent: np.ndarray  # (q, d, d-1): columns g_s(2..d)
    anticov: np.ndarray  # (q(d-1), q(d-1))
    n: int

    @property
    def q(self) -> int:
        return self.antimean.q

    @property
    def anchor(self) -> np.ndarray:
        """(q, d) array of antimean component representatives g_s(1)."""
        return self.axial.vectors[:, :, 0]


@dataclass(frozen=True)
class PooledAntimean:
    """Antimean of the weighted pooled second moments, with its frame."""

    antimean: ProjectiveShape
    moments: np.ndarray
    values: np.ndarray
    vectors: np.ndarray
    tangent: np.ndarray
    weights: np.ndarray
    n_total: int

    @property
    def q(self) -> int:
        return self.antimean.q

    @property
    def anchor(self) -> np.ndarray:
        return self.vectors[:, :, 0]


def stack_sample(sample) -> np.ndarray:
    """Canonical representatives of a list of shapes as an (n, q, d) array."""
    shapes = [as_shape(x) for x in sample]
    if not shapes:
        raise InvalidInput("empty sample")
    q = shapes[0].q
    d = shapes[0].m + 1
    for i, s in enumerate(shapes):
        if s.q != q or s.m + 1 != d:
            raise ShapeMismatch(
                f"sample item {i} has (q, m) = ({s.q}, {s.m}), expected ({q}, {d - 1})"
            )
    return np.stack([s.as_matrix() for s in shapes])


def moments_from_array(x: np.ndarray) -> AxialEigensystem:
    """Array-level core of ``axial_moments``: x has shape (n, q, d)."""
    n = x.shape[0]
    moments = np.einsum("nsi,nsj->sij", x, x) / n
    values = np.empty(moments.shape[:2])
    vectors = np.empty_like(moments)
    for s in range(moments.shape[0]):
        decomp = eigh_sym(moments[s])
        values[s] = decomp.values
        vectors[s] = decomp.vectors
    return AxialEigensystem(moments=moments, values=values, vectors=vectors, n=n)


def axial_moments(sample) -> AxialEigensystem:
    """Second-moment matrices J_s of a sample with eigendecompositions."""
    return moments_from_array(stack_sample(sample))


def _check_gaps(values: np.ndarray, gap_tol: float):
    # relative criterion: moment matrices here have unit trace
    traces = np.sum(values, axis=1)
    for s in range(values.shape[0]):
        scale = max(abs(float(traces[s])), 1e-300)
        gap = float(values[s, 1] - values[s, 0])
        if gap <= gap_tol * scale:
            raise FocalPointError(block=s, gap=gap, tol=gap_tol * scale)


def tangent_basis(system) -> np.ndarray:
    """Tangent bases D_s = (g_s(2) ... g_s(d)) from an eigensystem
    (axial or pooled): array of shape (q, d, d-1)."""
    return np.ascontiguousarray(system.vectors[:, :, 1:])


def anticov_from_array(x: np.ndarray, system, gap_tol: float = DEFAULT_GAP_TOL) -> np.ndarray:
    """Array-level core of ``anticovariance_vw``: x has shape (n, q, d)."""
    n = x.shape[0]
    q, d = system.values.shape
    if x.shape[1] != q or x.shape[2] != d:
        raise ShapeMismatch("sample does not match the eigensystem's block layout")

    traces = np.sum(system.values, axis=1)
    denom = system.values[:, :1] - system.values[:, 1:]  # (q, d-1), negative
    for s in range(q):
        scale = max(abs(float(traces[s])), 1e-300)
        bad = np.abs(denom[s]) <= gap_tol * scale
        if np.any(bad):
            a = int(np.argmax(bad))
            raise FocalPointError(
                block=s, gap=float(np.abs(denom[s, a])), tol=gap_tol * scale
            )

    # proj[i, s, a] = g_s(a+1) . X_i^s
    proj = np.einsum("sda,nsd->nsa", system.vectors, x)
    scores = proj[:, :, 1:] * proj[:, :, :1] / denom[None, :, :]
    u = scores.reshape(x.shape[0], q * (d - 1))
    cov = u.T @ u / n
    return (cov + cov.T) / 2.0


def anticovariance_vw(sample, system, gap_tol: float = DEFAULT_GAP_TOL) -> np.ndarray:
    """Anticovariance matrix of a sample in the frame of ``system``.

    ``system`` is normally the sample's own ``AxialEigensystem``; the
    multi-group statistic passes the pooled system instead, keeping the
    sample's observations.  Raises ``FocalPointError`` when a denominator
    ``d_s(1) - d_s(a)`` is not bounded away from zero.
    """
    return anticov_from_array(stack_sample(sample), system, gap_tol)


def estimate_from_array(x: np.ndarray, gap_tol: float = DEFAULT_GAP_TOL) -> AntimeanEstimate:
    """Array-level core of ``sample_antimean``: x has shape (n, q, d)."""
    axial = moments_from_array(x)
    _check_gaps(axial.values, gap_tol)
    antimean = ProjectiveShape(
        tuple(canonicalize(axial.vectors[s, :, 0]) for s in range(axial.q))
    )
    anticov = anticov_from_array(x, axial, gap_tol)
    return AntimeanEstimate(
        antimean=antimean,
        axial=axial,
        tangent=tangent_basis(axial),
        anticov=anticov,
        n=axial.n,
    )


def sample_antimean(sample, gap_tol: float = DEFAULT_GAP_TOL) -> AntimeanEstimate:
    """Sample antimean with its frame and anticovariance matrix."""
    return estimate_from_array(stack_sample(sample), gap_tol)


def aligned_representative(rep: np.ndarray, anchor: np.ndarray) -> np.ndarray:
    """Sign of ``rep`` chosen to maximize the inner product with
    ``anchor``; the canonical sign is kept on an exact tie."""
    if float(rep @ anchor) < 0.0:
        return -rep
    return rep


def tangent_coords(base, target) -> np.ndarray:
    """Tangential coordinates of ``target`` in the frame of ``base``.

    Block s of the result is ``D_s^T r_s`` where ``r_s`` is the
    representative of the target's s-th component, sign-aligned with the
    base antimean's representative.  ``base`` is an ``AntimeanEstimate``
    or ``PooledAntimean``.
    """
    shape = as_shape(target)
    anchors = base.anchor
    if shape.q != anchors.shape[0] or shape.m + 1 != anchors.shape[1]:
        raise ShapeMismatch("target does not match the base antimean's layout")
    blocks = []
    for s in range(shape.q):
        rep = aligned_representative(shape.points[s].coords, anchors[s])
        blocks.append(base.tangent[s].T @ rep)
    return np.concatenate(blocks)


def pooled_antimean(estimates, sizes, gap_tol: float = DEFAULT_GAP_TOL) -> PooledAntimean:
    """Antimean of the sample-size weighted pooled second moments.

    Equals the antimean of the merged sample when the weights are the
    group proportions; reduces to the single estimate when g = 1.
    """
    estimates = list(estimates)
    sizes = [int(n) for n in sizes]
    if not estimates or len(estimates) != len(sizes):
        raise InvalidInput("need matching nonempty estimate and size lists")
    if any(n <= 0 for n in sizes):
        raise InvalidInput("group sizes must be positive")
    q, d = estimates[0].axial.q, estimates[0].axial.d
    for est in estimates[1:]:
        if est.axial.q != q or est.axial.d != d:
            raise ShapeMismatch("estimates have inconsistent block layouts")

    n_total = sum(sizes)
    weights = np.array(sizes, dtype=float) / n_total
    moments = np.zeros((q, d, d))
    for w, est in zip(weights, estimates):
        moments += w * est.axial.moments

    shape = farthest_project(moments, gap_tol)  # raises FocalPointError per block
    values = np.empty((q, d))
    vectors = np.empty((q, d, d))
    for s in range(q):
        decomp = eigh_sym(moments[s])
        values[s] = decomp.values
        vectors[s] = decomp.vectors
    pooled = PooledAntimean(
        antimean=shape,
        moments=moments,
        values=values,
        vectors=vectors,
        tangent=vectors[:, :, 1:].copy(),
        weights=weights,
        n_total=n_total,
    )
    return pooled


def pooled_group_anticov(
    pooled: PooledAntimean, group_sample, gap_tol: float = DEFAULT_GAP_TOL
) -> np.ndarray:
    """Group anticovariance in the pooled frame: pooled eigenvalues and
    eigenvectors with the group's own observations."""
    return anticovariance_vw(group_sample, pooled, gap_tol)


def aligned_eigenvectors(vectors: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Flip eigenvector columns so each aligns with its reference column.

    The per-column canonical sign is discontinuous where a vector's two
    largest component magnitudes tie; coordinate differences across refits
    (bootstrap resamples against their sample) need the continuous choice
    instead: the sign maximizing agreement with the reference frame.
    """
    out = vectors.copy()
    dots = np.einsum("sda,sda->sa", vectors, reference)
    out *= np.where(dots < 0.0, -1.0, 1.0)[:, None, :]
    return out


def align_pooled_frame(pooled: PooledAntimean, reference: PooledAntimean) -> PooledAntimean:
    """Pooled system with its eigenframe sign-aligned to a reference."""
    vectors = aligned_eigenvectors(pooled.vectors, reference.vectors)
    return PooledAntimean(
        antimean=pooled.antimean,
        moments=pooled.moments,
        values=pooled.values,
        vectors=vectors,
        tangent=vectors[:, :, 1:].copy(),
        weights=pooled.weights,
        n_total=pooled.n_total,
    )


def align_axial_frame(system: AxialEigensystem, reference: AxialEigensystem) -> AxialEigensystem:
    """Axial eigensystem with its eigenframe sign-aligned to a reference."""
    return AxialEigensystem(
        moments=system.moments,
        values=system.values,
        vectors=aligned_eigenvectors(system.vectors, reference.vectors),
        n=system.n,
    )
