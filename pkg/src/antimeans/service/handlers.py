"""Request handlers shared by the HTTP endpoints and the in-process CLI
dispatch: every command is a pure function from a request model to a
response model."""

from __future__ import annotations

import numpy as np

from ..bootstrap import (
    BootstrapPlan,
    bootstrap_manova,
    bootstrap_one_sample,
    bootstrap_two_sample,
)
from ..data import FrameSpec, LandmarkConfig, SynthSpec, projective_coordinates, synth_sample, synth_true_antimean
from ..errors import InvalidInput
from ..estimation import AntimeanEstimate, sample_antimean
from ..inference import (
    DF_MODES,
    manova_df,
    manova_pieces,
    manova_statistic_from_pieces,
    one_sample_test,
    pairwise_manova,
    two_sample_test,
)
from ..manifold import ProjectiveShape, shape_from_matrix
from ..numerics import chisq_cdf, chisq_quantile
from ..simulate import CALIBRATIONS
from . import schemas as S


def _shape_from_payload(payload) -> ProjectiveShape:
    return shape_from_matrix(np.asarray(payload, dtype=float))


def _shape_to_payload(shape: ProjectiveShape):
    return [[float(v) for v in p.coords] for p in shape.points]


def resolve_group(data: S.GroupData) -> list:
    """Materialize a group as a list of shapes, registering landmark
    configurations when that is how the group was supplied."""
    if data.shapes is not None:
        return [_shape_from_payload(p) for p in data.shapes]
    frame = FrameSpec(indices=tuple(data.frame_indices))
    shapes = []
    for cfg in data.configs:
        config = LandmarkConfig(
            config_id=cfg.config_id, landmarks=np.asarray(cfg.landmarks, dtype=float)
        )
        if config.landmarks.shape[1] == 3:
            config = LandmarkConfig(
                config_id=cfg.config_id,
                landmarks=np.hstack([config.landmarks, np.ones((config.k, 1))]),
            )
        shapes.append(projective_coordinates(config, frame))
    return shapes


def _gap_diagnostics(values: np.ndarray) -> list:
    out = []
    for s in range(values.shape[0]):
        two = [float(values[s, 0]), float(values[s, 1])]
        out.append(S.GapDiagnostic(block=s, smallest=two, gap=two[1] - two[0]))
    return out


def _estimate_diag(est: AntimeanEstimate) -> list:
    return _gap_diagnostics(est.axial.values)


def run_antimean(req: S.AntimeanRequest) -> S.AntimeanReport:
    sample = resolve_group(req.data)
    est = sample_antimean(sample, req.gap_tol)
    return S.AntimeanReport(
        n=est.n,
        q=est.q,
        m=est.antimean.m,
        antimean=_shape_to_payload(est.antimean),
        eigenvalues=[[float(v) for v in row] for row in est.axial.values],
        anticovariance=[[float(v) for v in row] for row in est.anticov],
        gap_diagnostics=_estimate_diag(est),
    )


def _bootstrap_block(res, boot: int, alpha: float) -> S.BootstrapBlock:
    return S.BootstrapBlock(
        B=boot,
        n_used=int(res.values.size),
        n_failed=res.n_failed,
        confidence=res.confidence,
        cutoff=res.cutoff,
        empirical_p=res.empirical_p,
        reject=None if res.observed is None else bool(res.observed > res.cutoff),
    )


def run_test1(req: S.OneSampleRequest) -> S.TestReport:
    sample = resolve_group(req.data)
    nu = _shape_from_payload(req.nu)
    est = sample_antimean(sample, req.gap_tol)
    asym = one_sample_test(est, nu, req.alpha)
    report = S.TestReport(
        command="test1",
        statistic=asym.statistic,
        df=asym.df,
        p_value=asym.p_value,
        method="asymptotic",
        cutoff=asym.cutoff,
        alpha=req.alpha,
        reject=asym.reject,
        gap_diagnostics={"sample": _estimate_diag(est)},
    )
    if req.boot > 0:
        res = bootstrap_one_sample(
            sample,
            BootstrapPlan(B=req.boot, seed=req.seed),
            1.0 - req.alpha,
            nu=nu,
            gap_tol=req.gap_tol,
        )
        report = report.model_copy(
            update={
                "method": "bootstrap",
                "cutoff": res.cutoff,
                "p_value": res.empirical_p,
                "reject": bool(res.observed > res.cutoff),
                "bootstrap": _bootstrap_block(res, req.boot, req.alpha),
            }
        )
    return report


def run_test2(req: S.TwoSampleRequest) -> S.TestReport:
    g1 = resolve_group(req.group1)
    g2 = resolve_group(req.group2)
    est1 = sample_antimean(g1, req.gap_tol)
    est2 = sample_antimean(g2, req.gap_tol)
    asym = two_sample_test(est1, est2, req.alpha)
    report = S.TestReport(
        command="test2",
        statistic=asym.statistic,
        df=asym.df,
        p_value=asym.p_value,
        method="asymptotic",
        cutoff=asym.cutoff,
        alpha=req.alpha,
        reject=asym.reject,
        gap_diagnostics={
            "group1": _estimate_diag(est1),
            "group2": _estimate_diag(est2),
        },
    )
    if req.boot > 0:
        res = bootstrap_two_sample(
            g1, g2, BootstrapPlan(B=req.boot, seed=req.seed), 1.0 - req.alpha, req.gap_tol
        )
        report = report.model_copy(
            update={
                "method": "bootstrap",
                "cutoff": res.cutoff,
                "p_value": res.empirical_p,
                "reject": bool(res.observed > res.cutoff),
                "bootstrap": _bootstrap_block(res, req.boot, req.alpha),
            }
        )
    return report


def run_manova(req: S.ManovaRequest) -> S.TestReport:
    groups = [resolve_group(g) for g in req.groups]
    pieces = manova_pieces(groups, req.gap_tol)
    stat = manova_statistic_from_pieces(pieces, "pooled_sample")
    g = len(groups)
    q = pieces.pooled.q
    m = pieces.pooled.antimean.m

    df = manova_df(req.df_mode, q, m, g)
    cutoff = chisq_quantile(1.0 - req.alpha, df)
    p_value = 1.0 - chisq_cdf(stat, df)
    alternatives = {}
    for mode in DF_MODES:
        df_m = manova_df(mode, q, m, g)
        alternatives[mode] = {
            "df": float(df_m),
            "p_value": 1.0 - chisq_cdf(stat, df_m),
            "cutoff": chisq_quantile(1.0 - req.alpha, df_m),
        }

    diagnostics = {
        f"group{a + 1}": _estimate_diag(est) for a, est in enumerate(pieces.estimates)
    }
    diagnostics["pooled"] = _gap_diagnostics(pieces.pooled.values)

    report = S.TestReport(
        command="manova",
        statistic=stat,
        df=df,
        p_value=p_value,
        method="asymptotic",
        cutoff=cutoff,
        alpha=req.alpha,
        reject=bool(stat > cutoff),
        df_mode=req.df_mode,
        df_alternatives=alternatives,
        gap_diagnostics=diagnostics,
    )
    if req.boot > 0:
        res = bootstrap_manova(
            groups, BootstrapPlan(B=req.boot, seed=req.seed), 1.0 - req.alpha, req.gap_tol
        )
        report = report.model_copy(
            update={
                "method": "bootstrap",
                "cutoff": res.cutoff,
                "p_value": res.empirical_p,
                "reject": bool(res.observed > res.cutoff),
                "bootstrap": _bootstrap_block(res, req.boot, req.alpha),
            }
        )
    if req.pairwise:
        entries = []
        for pr in pairwise_manova(groups, req.alpha, req.gap_tol):
            if pr.result is None:
                entries.append(
                    S.PairEntry(pair=pr.pair, verdict="Error", error=pr.error)
                )
            else:
                entries.append(
                    S.PairEntry(
                        pair=pr.pair,
                        verdict=pr.verdict,
                        statistic=pr.result.statistic,
                        p_value=pr.result.p_value,
                    )
                )
        report = report.model_copy(update={"pairwise": entries})
    return report


def run_coords(req: S.CoordsRequest) -> S.CoordsReport:
    frame = FrameSpec(indices=tuple(req.frame_indices))
    registered = []
    q = None
    for cfg in req.configs:
        marks = np.asarray(cfg.landmarks, dtype=float)
        if marks.shape[1] == 3:
            marks = np.hstack([marks, np.ones((marks.shape[0], 1))])
        shape = projective_coordinates(
            LandmarkConfig(config_id=cfg.config_id, landmarks=marks), frame
        )
        q = shape.q
        registered.append(
            S.RegisteredShape(config_id=cfg.config_id, components=_shape_to_payload(shape))
        )
    return S.CoordsReport(q=q, shapes=registered)


def run_synth(req: S.SynthRequest) -> S.SynthReport:
    center = _shape_from_payload(req.center)
    spec = SynthSpec(
        center=center,
        concentration=tuple(req.concentration)
        if isinstance(req.concentration, list)
        else req.concentration,
        n=req.n,
        seed=req.seed,
        axis_scales=tuple(req.axis_scales) if req.axis_scales else (),
    )
    shapes = synth_sample(spec)
    return S.SynthReport(
        n=spec.n,
        q=center.q,
        m=center.m,
        shapes=[_shape_to_payload(s) for s in shapes],
        true_antimean=_shape_to_payload(synth_true_antimean(spec)),
    )


_INT_PARAMS = {"n", "n1", "n2", "n_per", "B", "reps", "g", "q", "seed"}


def run_calibrate(req: S.CalibrateRequest) -> S.CalibrateReport:
    fn = CALIBRATIONS[req.kind]
    kwargs = {}
    for key, value in req.params.items():
        kwargs[key] = int(value) if key in _INT_PARAMS else float(value)
    try:
        report = fn(**kwargs)
    except TypeError as exc:
        raise InvalidInput(f"bad calibration parameters: {exc}") from exc
    return S.CalibrateReport(
        kind=report.kind,
        reps=report.reps,
        n_failed=report.n_failed,
        metrics={k: float(v) for k, v in report.metrics.items()},
        params={k: float(v) for k, v in report.params.items()},
    )
