"""FastAPI application exposing the estimation and testing commands.

Numerical or statistical failures (focal blocks, singular covariances,
chart-domain hits, degenerate frames) come back as HTTP 422 with an
``ErrorReport`` body naming the error type; malformed payloads are
FastAPI's usual 422 validation responses.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import AntimeanError
from . import handlers
from . import schemas as S


def create_app() -> FastAPI:
    app = FastAPI(
        title="antimeans",
        version=__version__,
        description=(
            "Extrinsic antimean estimation and anti-MANOVA testing on "
            "projective shape spaces"
        ),
    )

    @app.exception_handler(AntimeanError)
    async def _antimean_error(_: Request, exc: AntimeanError):
        body = S.ErrorReport(error_type=type(exc).__name__, detail=str(exc))
        return JSONResponse(status_code=422, content=body.model_dump())

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "version": __version__, "schema_version": S.SCHEMA_VERSION}

    @app.post("/v1/antimean", response_model=S.AntimeanReport)
    def antimean(req: S.AntimeanRequest):
        return handlers.run_antimean(req)

    @app.post("/v1/test1", response_model=S.TestReport)
    def test1(req: S.OneSampleRequest):
        return handlers.run_test1(req)

    @app.post("/v1/test2", response_model=S.TestReport)
    def test2(req: S.TwoSampleRequest):
        return handlers.run_test2(req)

    @app.post("/v1/manova", response_model=S.TestReport)
    def manova(req: S.ManovaRequest):
        return handlers.run_manova(req)

    @app.post("/v1/coords", response_model=S.CoordsReport)
    def coords(req: S.CoordsRequest):
        return handlers.run_coords(req)

    @app.post("/v1/synth", response_model=S.SynthReport)
    def synth(req: S.SynthRequest):
        return handlers.run_synth(req)

    @app.post("/v1/calibrate", response_model=S.CalibrateReport)
    def calibrate(req: S.CalibrateRequest):
        return handlers.run_calibrate(req)

    @app.get("/v1/schema")
    def schema():
        return {
            "schema_version": S.SCHEMA_VERSION,
            "responses": {
                name: model.model_json_schema()
                for name, model in (
                    ("antimean", S.AntimeanReport),
                    ("test", S.TestReport),
                    ("coords", S.CoordsReport),
                    ("synth", S.SynthReport),
                    ("calibrate", S.CalibrateReport),
                    ("error", S.ErrorReport),
                )
            },
        }

    return app
