"""Pydantic request/response models: the wire format of the service and
the versioned schema of every CLI JSON report.

A shape travels as a (q, m+1) nested list of canonical representatives.
Groups can be supplied either as ready-made shapes or as landmark
configurations plus five frame indices; registration then happens inside
the service.
"""

from __future__ import annotations

from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field, model_validator

SCHEMA_VERSION = "1"

Vector = List[float]
ShapePayload = List[Vector]  # q rows of m+1 coordinates


class ConfigPayload(BaseModel):
    """One landmark configuration (k rows of 3 or 4 coordinates)."""

    config_id: str
    landmarks: List[Vector]


class GroupData(BaseModel):
    """One group of observations: inline shapes, or configurations to be
    registered against ``frame_indices``."""

    name: str = ""
    shapes: Optional[List[ShapePayload]] = None
    configs: Optional[List[ConfigPayload]] = None
    frame_indices: Optional[Tuple[int, int, int, int, int]] = None

    @model_validator(mode="after")
    def _exactly_one_source(self):
        if (self.shapes is None) == (self.configs is None):
            raise ValueError("provide exactly one of shapes or configs")
        if self.configs is not None and self.frame_indices is None:
            raise ValueError("configs need frame_indices")
        return self


class AntimeanRequest(BaseModel):
    data: GroupData
    gap_tol: float = Field(default=1e-9, gt=0)


class OneSampleRequest(BaseModel):
    data: GroupData
    nu: ShapePayload
    alpha: float = Field(default=0.05, gt=0, lt=1)
    boot: int = Field(default=0, ge=0)
    seed: int = 0
    gap_tol: float = Field(default=1e-9, gt=0)


class TwoSampleRequest(BaseModel):
    group1: GroupData
    group2: GroupData
    alpha: float = Field(default=0.05, gt=0, lt=1)
    boot: int = Field(default=0, ge=0)
    seed: int = 0
    gap_tol: float = Field(default=1e-9, gt=0)


class ManovaRequest(BaseModel):
    groups: List[GroupData] = Field(min_length=2)
    alpha: float = Field(default=0.05, gt=0, lt=1)
    df_mode: Literal["3q", "g3q", "gminus1"] = "3q"
    boot: int = Field(default=0, ge=0)
    seed: int = 0
    gap_tol: float = Field(default=1e-9, gt=0)
    pairwise: bool = False


class CoordsRequest(BaseModel):
    configs: List[ConfigPayload] = Field(min_length=1)
    frame_indices: Tuple[int, int, int, int, int]


class SynthRequest(BaseModel):
    center: ShapePayload
    concentration: Union[float, List[float]] = 20.0
    n: int = Field(gt=0)
    seed: int = 0
    axis_scales: Optional[List[float]] = None


class CalibrateRequest(BaseModel):
    kind: Literal[
        "one-sample-size",
        "one-sample-coverage",
        "manova-null",
        "manova-bootstrap-size",
        "two-sample-null",
        "two-sample-power",
    ]
    params: Dict[str, float] = Field(default_factory=dict)


# ---------------------------------------------------------------------------
# responses
# ---------------------------------------------------------------------------


class GapDiagnostic(BaseModel):
    """Near-focality indicator: the two smallest eigenvalues per block."""

    block: int
    smallest: Vector
    gap: float


class AntimeanReport(BaseModel):
    schema_version: str = SCHEMA_VERSION
    command: Literal["antimean"] = "antimean"
    n: int
    q: int
    m: int
    antimean: ShapePayload
    eigenvalues: List[Vector]
    anticovariance: List[Vector]
    gap_diagnostics: List[GapDiagnostic]


class BootstrapBlock(BaseModel):
    B: int
    n_used: int
    n_failed: int
    confidence: float
    cutoff: float
    empirical_p: Optional[float] = None
    reject: Optional[bool] = None


class PairEntry(BaseModel):
    pair: Tuple[int, int]
    verdict: Literal["Reject", "No", "Error"]
    statistic: Optional[float] = None
    p_value: Optional[float] = None
    error: Optional[str] = None


class TestReport(BaseModel):
    schema_version: str = SCHEMA_VERSION
    command: Literal["test1", "test2", "manova"]
    statistic: float
    df: int
    p_value: float
    method: Literal["asymptotic", "bootstrap"]
    cutoff: float
    alpha: float
    reject: bool
    df_mode: Optional[str] = None
    df_alternatives: Optional[Dict[str, Dict[str, float]]] = None
    bootstrap: Optional[BootstrapBlock] = None
    pairwise: Optional[List[PairEntry]] = None
    gap_diagnostics: Dict[str, List[GapDiagnostic]] = Field(default_factory=dict)


class RegisteredShape(BaseModel):
    config_id: str
    components: ShapePayload


class CoordsReport(BaseModel):
    schema_version: str = SCHEMA_VERSION
    command: Literal["coords"] = "coords"
    q: int
    shapes: List[RegisteredShape]


class SynthReport(BaseModel):
    schema_version: str = SCHEMA_VERSION
    command: Literal["synth"] = "synth"
    n: int
    q: int
    m: int
    shapes: List[ShapePayload]
    true_antimean: ShapePayload


class CalibrateReport(BaseModel):
    schema_version: str = SCHEMA_VERSION
    command: Literal["calibrate"] = "calibrate"
    kind: str
    reps: int
    n_failed: int
    metrics: Dict[str, float]
    params: Dict[str, float]


class ErrorReport(BaseModel):
    schema_version: str = SCHEMA_VERSION
    error_type: str
    detail: str
