"""Nonparametric bootstrap calibration for the antimean tests.

All resampling is driven by the package's counter-based generator:
resample ``b`` of a plan with seed ``s`` consumes ``RngStream(s, b)``
(split per group for multi-group data), so every result is bit-exactly
reproducible from ``(seed, B, data)`` and independent of execution order.

Statistic conventions, chosen so each bootstrap law approximates the
corresponding *null* law even when the data violate the null:

* one-sample: ``n * v*^T (aS*)^{-1} v*`` with ``v*`` the tangent
  coordinates of the resample's antimean in the original sample's frame
  and ``aS*`` the resample's anticovariance (the bootstrap world
  recenters at the observed antimean);
* two-sample: the quadratic form of ``aV* - aV_obs`` under the
  resampled plug-in covariance;
* anti-MANOVA: ``sum_a n_a (v*_a - v_a)^T (aS_a)^{-1} (v*_a - v_a)``
  where ``v_a`` / ``v*_a`` are the group-antimean tangent coordinates in
  the original / resampled pooled frames: each group's bootstrap
  deviation from its pooled antimean is measured against the observed
  deviation (the statistic recenters at the original pooled sample
  antimean) and is standardized by the *observed* anticovariance
  ``aS_a``, which stays invertible however many duplicates a resample
  draws.

Resampled eigenframes are sign-aligned to the observed frames before
coordinates are differenced: the per-vector canonical sign is
discontinuous when a vector's two largest component magnitudes tie, and
an unaligned flip would turn a tiny deviation into a jump of twice the
coordinate size.

Resamples whose antimean machinery fails (eigenvalue ties in tiny
resamples, singular covariances, chart-domain hits) are handled by the
plan's failure policy: dropped and counted, or escalated.  Dropped slots
are never silently redrawn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    BootstrapDegenerateError,
    ChartDomainError,
    FocalPointError,
    InvalidInput,
    SingularCovarianceError,
)
from .estimation import (
    align_axial_frame,
    align_pooled_frame,
    anticov_from_array,
    estimate_from_array,
    pooled_antimean,
    stack_sample,
    tangent_coords,
)
from .inference import (
    _quad_form,
    manova_pieces,
    manova_statistic_from_pieces,
    one_sample_statistic,
    two_sample_statistic,
)
from .numerics import RngStream, rng_draw_uniform_indices
from .vw import DEFAULT_GAP_TOL

_RESAMPLE_FAILURES = (FocalPointError, SingularCovarianceError, ChartDomainError)


@dataclass(frozen=True)
class BootstrapPlan:
    """How to run one bootstrap: resample count, seed, optional per-group
    resample sizes, and what to do with failed resamples."""

    B: int
    seed: int
    group_sizes: Optional[tuple] = None
    failure_policy: str = "skip_and_count"

    def __post_init__(self):
        if self.B < 1:
            raise InvalidInput(f"resample count must be >= 1, got {self.B}")
        if self.failure_policy not in ("skip_and_count", "abort"):
            raise InvalidInput(f"unknown failure policy {self.failure_policy!r}")
        if self.group_sizes is not None:
            sizes = tuple(int(n) for n in self.group_sizes)
            if any(n < 1 for n in sizes):
                raise InvalidInput("resample sizes must be positive")
            object.__setattr__(self, "group_sizes", sizes)


@dataclass(frozen=True)
class BootstrapResult:
    """Bootstrap distribution summary.

    ``cutoff`` is the ascending order statistic at rank
    ``ceil(confidence * len(values))`` (1-indexed); ``empirical_p`` uses
    the add-one correction ``(1 + #{values >= observed}) / (len + 1)``.
    """

    values: np.ndarray
    cutoff: float
    n_failed: int
    confidence: float
    observed: Optional[float] = None
    empirical_p: Optional[float] = None


def bootstrap_cutoff(values: np.ndarray, confidence: float) -> float:
    if not (0.0 < confidence < 1.0):
        raise InvalidInput(f"confidence must lie in (0, 1), got {confidence!r}")
    if values.size == 0:
        raise BootstrapDegenerateError("no successful bootstrap resamples")
    rank = min(max(math.ceil(confidence * values.size), 1), values.size)
    return float(np.sort(values)[rank - 1])


def empirical_p_value(values: np.ndarray, observed: float) -> float:
    return (1.0 + float(np.sum(values >= observed))) / (values.size + 1.0)


def _run_resamples(plan: BootstrapPlan, one_value):
    """Drive the resample loop; ``one_value(b)`` returns one statistic or
    raises a resample failure."""
    values = []
    n_failed = 0
    for b in range(plan.B):
        try:
            values.append(float(one_value(b)))
        except _RESAMPLE_FAILURES as exc:
            if plan.failure_policy == "abort":
                raise
            n_failed += 1
    if not values:
        raise BootstrapDegenerateError(
            f"all {plan.B} bootstrap resamples failed (last failure counted: {n_failed})"
        )
    return np.array(values), n_failed


def _resample(x: np.ndarray, stream: RngStream, size: int) -> np.ndarray:
    idx = rng_draw_uniform_indices(stream, x.shape[0], size)
    return x[idx]


def _finish(
    values: np.ndarray,
    n_failed: int,
    confidence: float,
    observed: Optional[float],
) -> BootstrapResult:
    cutoff = bootstrap_cutoff(values, confidence)
    empirical_p = None if observed is None else empirical_p_value(values, float(observed))
    return BootstrapResult(
        values=values,
        cutoff=cutoff,
        n_failed=n_failed,
        confidence=confidence,
        observed=None if observed is None else float(observed),
        empirical_p=empirical_p,
    )


# ---------------------------------------------------------------------------
# one-sample
# ---------------------------------------------------------------------------


def bootstrap_one_sample(
    sample,
    plan: BootstrapPlan,
    confidence: float = 0.95,
    nu=None,
    gap_tol: float = DEFAULT_GAP_TOL,
) -> BootstrapResult:
    """Bootstrap law of the one-sample statistic; when a hypothesized
    antimean ``nu`` is given, also its empirical p-value.

    The confidence region at level ``confidence`` is
    ``{nu : one_sample_statistic(est, nu) <= cutoff}``.
    """
    x = stack_sample(list(sample))
    est = estimate_from_array(x, gap_tol)
    size = plan.group_sizes[0] if plan.group_sizes else x.shape[0]

    def one_value(b: int) -> float:
        x_b = _resample(x, RngStream(plan.seed, b), size)
        est_b = estimate_from_array(x_b, gap_tol)
        v = tangent_coords(est, est_b.antimean)
        # re-estimated anticovariance, in sign-agreement with the original frame
        cov_b = anticov_from_array(x_b, align_axial_frame(est_b.axial, est.axial), gap_tol)
        return size * _quad_form(cov_b, v)

    values, n_failed = _run_resamples(plan, one_value)
    observed = None if nu is None else one_sample_statistic(est, nu)
    return _finish(values, n_failed, confidence, observed)


# ---------------------------------------------------------------------------
# two-sample
# ---------------------------------------------------------------------------


def bootstrap_two_sample(
    sample1,
    sample2,
    plan: BootstrapPlan,
    confidence: float = 0.95,
    gap_tol: float = DEFAULT_GAP_TOL,
) -> BootstrapResult:
    """Bootstrap test of equal antimeans for two groups."""
    x1 = stack_sample(list(sample1))
    x2 = stack_sample(list(sample2))
    est1 = estimate_from_array(x1, gap_tol)
    est2 = estimate_from_array(x2, gap_tol)
    observed_stat = two_sample_statistic(est1, est2)
    sizes = plan.group_sizes or (x1.shape[0], x2.shape[0])
    if len(sizes) != 2:
        raise InvalidInput("two-sample plan needs exactly two group sizes")

    def one_value(b: int) -> float:
        base = RngStream(plan.seed, b)
        boot = two_sample_statistic(
            estimate_from_array(_resample(x1, base.split(0), sizes[0]), gap_tol),
            estimate_from_array(_resample(x2, base.split(1), sizes[1]), gap_tol),
        )
        centered = boot.vector - observed_stat.vector
        return _quad_form(boot.covariance, centered)

    values, n_failed = _run_resamples(plan, one_value)
    return _finish(values, n_failed, confidence, observed_stat.scalar)


def bootstrap_two_sample_test(
    sample1,
    sample2,
    plan: BootstrapPlan,
    alpha: float = 0.05,
    gap_tol: float = DEFAULT_GAP_TOL,
):
    """Convenience wrapper returning the result at confidence 1 - alpha."""
    return bootstrap_two_sample(sample1, sample2, plan, 1.0 - alpha, gap_tol)


# ---------------------------------------------------------------------------
# anti-MANOVA
# ---------------------------------------------------------------------------


def bootstrap_manova(
    samples,
    plan: BootstrapPlan,
    confidence: float = 0.95,
    gap_tol: float = DEFAULT_GAP_TOL,
) -> BootstrapResult:
    """Bootstrap calibration of the multi-group equality statistic."""
    groups = [list(g) for g in samples]
    pieces = manova_pieces(groups, gap_tol)
    observed = manova_statistic_from_pieces(pieces, "pooled_sample")
    observed_coords = [
        tangent_coords(pieces.pooled, est.antimean) for est in pieces.estimates
    ]
    arrays = [stack_sample(g) for g in groups]
    sizes = plan.group_sizes or tuple(x.shape[0] for x in arrays)
    if len(sizes) != len(arrays):
        raise InvalidInput("plan group sizes do not match the group count")

    def one_value(b: int) -> float:
        base = RngStream(plan.seed, b)
        resamples = [
            _resample(x, base.split(a), sizes[a]) for a, x in enumerate(arrays)
        ]
        ests = [estimate_from_array(x, gap_tol) for x in resamples]
        # the bootstrap pooled frame, oriented like the observed one so
        # coordinate differences stay continuous across resamples
        pooled = align_pooled_frame(
            pooled_antimean(ests, sizes, gap_tol), pieces.pooled
        )
        total = 0.0
        for a, est in enumerate(ests):
            delta = tangent_coords(pooled, est.antimean) - observed_coords[a]
            # the observed anticovariance standardizes every resample: a
            # re-estimated one is singular whenever a resample repeats an
            # observation and n_a <= 3q (always, for smallest-sample data)
            total += sizes[a] * _quad_form(pieces.group_anticovs[a], delta)
        return total

    values, n_failed = _run_resamples(plan, one_value)
    return _finish(values, n_failed, confidence, observed)
