"""Monte Carlo calibration harness: empirical size, coverage, and power
of the antimean tests on synthetic data with known truth.

Every run is driven by the package RNG through per-replication seeds
derived from one master seed, so reports are exactly reproducible.
Binomial standard errors accompany every empirical rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bootstrap import BootstrapPlan, bootstrap_manova, bootstrap_one_sample, bootstrap_two_sample
from .data import SynthSpec, synth_sample, synth_true_antimean
from .errors import AntimeanError
from .estimation import sample_antimean
from .inference import (
    DF_MODES,
    manova_df,
    manova_pieces,
    manova_statistic_from_pieces,
    one_sample_statistic,
)
from .manifold import ProjectiveShape, canonicalize, quat_mul
from .numerics import RngStream, chisq_quantile


def default_center(q: int = 1, m: int = 3) -> ProjectiveShape:
    """Fixed, documented center used by the calibration harness."""
    points = []
    for s in range(q):
        raw = np.full(m + 1, -0.3)
        raw[0] = 1.0
        raw[1 % (m + 1)] = 0.2 + 0.1 * s
        raw[-1] = 0.5
        points.append(canonicalize(raw))
    return ProjectiveShape(tuple(points))


def _rep_seed(seed: int, rep: int, lane: int = 0) -> int:
    return RngStream(seed, 1_000_003 * rep + lane).base


def binomial_se(rate: float, reps: int) -> float:
    return math.sqrt(max(rate * (1.0 - rate), 0.0) / reps)


def translate_shape(shape: ProjectiveShape, rotor) -> ProjectiveShape:
    """Left quaternion translation applied to every component: an isometry
    that moves the law's antimean by exactly the same rotation."""
    return ProjectiveShape(tuple(quat_mul(rotor, p) for p in shape.points))


def separation_rotor(angle: float):
    return canonicalize([math.cos(angle / 2.0), 0.0, math.sin(angle / 2.0), 0.0])


@dataclass(frozen=True)
class CalibrationReport:
    """One harness run: the empirical rates plus run metadata."""

    kind: str
    reps: int
    n_failed: int
    metrics: dict
    params: dict


def one_sample_size(
    n: int = 200,
    reps: int = 500,
    alpha: float = 0.05,
    q: int = 1,
    kappa: float = 20.0,
    seed: int = 2024,
) -> CalibrationReport:
    """Empirical size of the asymptotic one-sample test under the null,
    with the 95th-percentile ratio against the reference chi-square."""
    center = default_center(q)
    rejected = 0
    stats = []
    failed = 0
    df = 3 * q
    cutoff = chisq_quantile(1.0 - alpha, df)
    for rep in range(reps):
        spec = SynthSpec(center=center, concentration=kappa, n=n, seed=_rep_seed(seed, rep))
        try:
            est = sample_antimean(synth_sample(spec))
            stat = one_sample_statistic(est, synth_true_antimean(spec))
        except AntimeanError:
            failed += 1
            continue
        stats.append(stat)
        rejected += stat > cutoff
    stats = np.array(stats)
    rate = rejected / max(len(stats), 1)
    ref95 = chisq_quantile(0.95, df)
    return CalibrationReport(
        kind="one-sample-size",
        reps=reps,
        n_failed=failed,
        metrics={
            "rejection_rate": rate,
            "rejection_se": binomial_se(rate, max(len(stats), 1)),
            "stat_p95": float(np.percentile(stats, 95)),
            "chisq_p95": ref95,
            "p95_ratio": float(np.percentile(stats, 95)) / ref95,
        },
        params={"n": n, "alpha": alpha, "q": q, "kappa": kappa, "seed": seed},
    )


def one_sample_coverage(
    n: int = 60,
    B: int = 400,
    reps: int = 200,
    confidence: float = 0.95,
    q: int = 1,
    kappa: float = 20.0,
    seed: int = 2024,
) -> CalibrationReport:
    """Coverage of the bootstrap one-sample confidence region at the true
    antimean."""
    center = default_center(q)
    covered = 0
    failed = 0
    done = 0
    for rep in range(reps):
        spec = SynthSpec(center=center, concentration=kappa, n=n, seed=_rep_seed(seed, rep))
        try:
            res = bootstrap_one_sample(
                synth_sample(spec),
                BootstrapPlan(B=B, seed=_rep_seed(seed, rep, 1)),
                confidence,
                nu=synth_true_antimean(spec),
            )
        except AntimeanError:
            failed += 1
            continue
        done += 1
        covered += res.observed <= res.cutoff
    rate = covered / max(done, 1)
    return CalibrationReport(
        kind="one-sample-coverage",
        reps=reps,
        n_failed=failed,
        metrics={"coverage": rate, "coverage_se": binomial_se(rate, max(done, 1))},
        params={"n": n, "B": B, "confidence": confidence, "q": q, "kappa": kappa, "seed": seed},
    )


def manova_null(
    g: int = 3,
    n_per: int = 150,
    reps: int = 500,
    q: int = 1,
    kappa: float = 20.0,
    seed: int = 2024,
) -> CalibrationReport:
    """Null distribution summary of the multi-group statistics.

    Reports the 95th percentile of the known-base (confidence-region)
    statistic at the true common antimean (the quantity with the 3q-df
    chi-square limit) alongside the equality statistic's percentile and
    the reference quantiles of every exposed df mode.
    """
    center = default_center(q)
    eq_stats, cr_stats = [], []
    failed = 0
    for rep in range(reps):
        try:
            groups = []
            spec = None
            for a in range(g):
                spec = SynthSpec(
                    center=center, concentration=kappa, n=n_per, seed=_rep_seed(seed, rep, a)
                )
                groups.append(synth_sample(spec))
            pieces = manova_pieces(groups)
            eq_stats.append(manova_statistic_from_pieces(pieces, "pooled_sample"))
            cr_stats.append(manova_statistic_from_pieces(pieces, synth_true_antimean(spec)))
        except AntimeanError:
            failed += 1
    eq_stats = np.array(eq_stats)
    cr_stats = np.array(cr_stats)
    metrics = {
        "known_base_p95": float(np.percentile(cr_stats, 95)),
        "equality_p95": float(np.percentile(eq_stats, 95)),
        "equality_mean": float(eq_stats.mean()),
    }
    for mode in DF_MODES:
        df = manova_df(mode, q, 3, g)
        metrics[f"chisq_p95_{mode}"] = chisq_quantile(0.95, df)
    metrics["known_base_ratio_3q"] = metrics["known_base_p95"] / metrics["chisq_p95_3q"]
    return CalibrationReport(
        kind="manova-null",
        reps=reps,
        n_failed=failed,
        metrics=metrics,
        params={"g": g, "n_per": n_per, "q": q, "kappa": kappa, "seed": seed},
    )


def manova_bootstrap_size(
    g: int = 3,
    n_per: int = 40,
    B: int = 400,
    reps: int = 200,
    confidence: float = 0.95,
    q: int = 1,
    kappa: float = 20.0,
    seed: int = 2024,
) -> CalibrationReport:
    """Empirical rejection rate of the bootstrap anti-MANOVA under the
    null (nominal rate: 1 - confidence)."""
    center = default_center(q)
    rejected = 0
    failed = 0
    done = 0
    for rep in range(reps):
        try:
            groups = [
                synth_sample(
                    SynthSpec(center=center, concentration=kappa, n=n_per, seed=_rep_seed(seed, rep, a))
                )
                for a in range(g)
            ]
            res = bootstrap_manova(
                groups, BootstrapPlan(B=B, seed=_rep_seed(seed, rep, 99)), confidence
            )
        except AntimeanError:
            failed += 1
            continue
        done += 1
        rejected += res.observed > res.cutoff
    rate = rejected / max(done, 1)
    return CalibrationReport(
        kind="manova-bootstrap-size",
        reps=reps,
        n_failed=failed,
        metrics={"rejection_rate": rate, "rejection_se": binomial_se(rate, max(done, 1))},
        params={"g": g, "n_per": n_per, "B": B, "confidence": confidence, "q": q, "kappa": kappa, "seed": seed},
    )


def two_sample_null(
    n1: int = 150,
    n2: int = 150,
    reps: int = 500,
    alpha: float = 0.05,
    q: int = 1,
    kappa: float = 20.0,
    seed: int = 2024,
) -> CalibrationReport:
    """Size and percentile calibration of the asymptotic two-sample test."""
    from .inference import two_sample_statistic

    center = default_center(q)
    stats = []
    failed = 0
    df = 3 * q
    cutoff = chisq_quantile(1.0 - alpha, df)
    for rep in range(reps):
        try:
            e1 = sample_antimean(
                synth_sample(SynthSpec(center=center, concentration=kappa, n=n1, seed=_rep_seed(seed, rep, 0)))
            )
            e2 = sample_antimean(
                synth_sample(SynthSpec(center=center, concentration=kappa, n=n2, seed=_rep_seed(seed, rep, 1)))
            )
            stats.append(two_sample_statistic(e1, e2).scalar)
        except AntimeanError:
            failed += 1
    stats = np.array(stats)
    rate = float(np.mean(stats > cutoff))
    ref95 = chisq_quantile(0.95, df)
    return CalibrationReport(
        kind="two-sample-null",
        reps=reps,
        n_failed=failed,
        metrics={
            "rejection_rate": rate,
            "rejection_se": binomial_se(rate, max(len(stats), 1)),
            "stat_p95": float(np.percentile(stats, 95)),
            "chisq_p95": ref95,
            "p95_ratio": float(np.percentile(stats, 95)) / ref95,
        },
        params={"n1": n1, "n2": n2, "alpha": alpha, "q": q, "kappa": kappa, "seed": seed},
    )


def two_sample_power(
    n: int = 30,
    B: int = 300,
    reps: int = 100,
    alpha: float = 0.05,
    separation_angle: float = 2.2,
    q: int = 1,
    kappa: float = 20.0,
    seed: int = 2024,
) -> CalibrationReport:
    """Rejection rate of the bootstrap two-sample test for two groups a
    fixed quaternion translation apart.

    Left translation by a rotor with real part cos(angle/2) moves both
    the centers and the antimeans to squared chord distance
    2*sin(angle/2)^2 from the originals; the default angle 2.2 gives
    about 1.59."""
    center = default_center(q)
    rotor = separation_rotor(separation_angle)
    rejected = 0
    failed = 0
    done = 0
    for rep in range(reps):
        try:
            s1 = synth_sample(
                SynthSpec(center=center, concentration=kappa, n=n, seed=_rep_seed(seed, rep, 0))
            )
            s2 = [
                translate_shape(x, rotor)
                for x in synth_sample(
                    SynthSpec(center=center, concentration=kappa, n=n, seed=_rep_seed(seed, rep, 1))
                )
            ]
            res = bootstrap_two_sample(
                s1, s2, BootstrapPlan(B=B, seed=_rep_seed(seed, rep, 2)), 1.0 - alpha
            )
        except AntimeanError:
            failed += 1
            continue
        done += 1
        rejected += res.observed > res.cutoff
    rate = rejected / max(done, 1)
    return CalibrationReport(
        kind="two-sample-power",
        reps=reps,
        n_failed=failed,
        metrics={"rejection_rate": rate, "rejection_se": binomial_se(rate, max(done, 1))},
        params={
            "n": n, "B": B, "alpha": alpha, "separation_angle": separation_angle,
            "q": q, "kappa": kappa, "seed": seed,
        },
    )


CALIBRATIONS = {
    "one-sample-size": one_sample_size,
    "one-sample-coverage": one_sample_coverage,
    "manova-null": manova_null,
    "manova-bootstrap-size": manova_bootstrap_size,
    "two-sample-null": two_sample_null,
    "two-sample-power": two_sample_power,
}
