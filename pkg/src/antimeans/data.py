"""Landmark ingestion, projective-frame registration, synthetic data
generation, and the CSV/JSON file formats.

Registration: a configuration of k >= 6 landmarks in RP^3 (homogeneous
4-vectors) together with five frame indices maps to a point of
(RP^3)^{k-5}.  Writing u_1..u_5 for the frame landmarks, solve
``sum_i lambda_i u_i = u_5`` and set ``B = (lambda_1 u_1 ... lambda_4
u_4)``; every non-frame landmark x registers as ``[B^{-1} x]``.  This is
the unique projective transformation sending the frame to the standard
frame ([e_1], ..., [e_4], [e_1+e_2+e_3+e_4]), so the output is invariant
under projective transformations of the whole configuration.

File formats:

* CSV with header ``config_id,landmark_id,x,y,z[,w]``; a missing ``w``
  column means 1 (affine 3D points).
* JSON: an array of ``{"config_id": ..., "landmarks": [[x, y, z(, w)],
  ...]}`` objects.

Synthetic sampler: per axial component, a draw is
``canonicalize(c + kappa^{-1/2} * (z_0 c + sum_j scale_j z_j u_j))`` with
independent standard gaussians z and (u_1, ..., u_m) a deterministic
orthonormal basis of the center's orthocomplement.  The per-axis scales
must be distinct for the law to have an antimean at all: with equal
scales the moment matrix has a multiple smallest eigenvalue (a focal
population).  With distinct scales the population moment matrix is
exactly diagonal in the frame (c, u_1, ..., u_m) and the antimean is
exactly the smallest-scale axis, which ``synth_true_antimean`` returns.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FrameDegenerateError, InvalidInput, SchemaError
from .manifold import ProjectiveShape, canonicalize
from .numerics import gaussian_matrix

_FRAME_DET_RTOL = 1e-10


@dataclass(frozen=True)
class LandmarkConfig:
    """An ordered k-ad of homogeneous 4-vectors."""

    config_id: str
    landmarks: np.ndarray  # (k, 4)

    @property
    def k(self) -> int:
        return self.landmarks.shape[0]


@dataclass(frozen=True)
class FrameSpec:
    """Five distinct landmark indices designating the projective frame."""

    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(idx) != 5 or len(set(idx)) != 5:
            raise InvalidInput(f"frame needs 5 distinct indices, got {self.indices!r}")
        if any(i < 0 for i in idx):
            raise InvalidInput("frame indices must be nonnegative")
        object.__setattr__(self, "indices", idx)


def default_axis_scales(m: int) -> tuple:
    """Well-separated per-axis scales (1, 4, 8, 16, ...): consecutive
    squared scales differ enough that sample moment matrices keep a clear
    smallest-eigenvalue gap even for small n."""
    scales = [1.0]
    while len(scales) < m:
        scales.append(4.0 * scales[-1] if len(scales) == 1 else 2.0 * scales[-1])
    return tuple(scales[:m])


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of one synthetic (RP^m)^q sample."""

    center: ProjectiveShape
    concentration: tuple
    n: int
    seed: int
    axis_scales: tuple = ()

    def __post_init__(self):
        conc = self.concentration
        if isinstance(conc, (int, float)):
            conc = (float(conc),) * self.center.q
        conc = tuple(float(c) for c in conc)
        if len(conc) != self.center.q:
            raise InvalidInput("need one concentration per axial component")
        if any(not math.isfinite(c) or c <= 0 for c in conc):
            raise InvalidInput("concentrations must be finite and positive")
        if self.n < 1:
            raise InvalidInput("sample size must be >= 1")
        m = self.center.m
        scales = tuple(float(s) for s in self.axis_scales) or default_axis_scales(m)
        if len(scales) != m or any(s <= 0 for s in scales):
            raise InvalidInput(f"need {m} positive axis scales")
        if len(set(scales)) != m:
            raise InvalidInput(
                "axis scales must be distinct: equal scales make the "
                "population focal (no antimean)"
            )
        object.__setattr__(self, "concentration", conc)
        object.__setattr__(self, "axis_scales", scales)


# ---------------------------------------------------------------------------
# frame registration
# ---------------------------------------------------------------------------


def _check_general_position(frame_cols: np.ndarray):
    # every 4-subset of the 5 frame landmarks must be linearly independent
    for drop in range(5):
        sub = np.delete(frame_cols, drop, axis=1)
        scale = np.prod(np.linalg.norm(sub, axis=0))
        if scale == 0.0 or abs(np.linalg.det(sub)) <= _FRAME_DET_RTOL * scale:
            raise FrameDegenerateError(
                f"frame landmarks are not in general position "
                f"(4-subset omitting frame slot {drop} is degenerate)"
            )


def projective_coordinates(config: LandmarkConfig, frame: FrameSpec) -> ProjectiveShape:
    """Register a k-ad against a projective frame: a point of (RP^3)^{k-5}.

    Non-frame landmarks appear in the output in their original index
    order.
    """
    marks = np.asarray(config.landmarks, dtype=float)
    k = marks.shape[0]
    if k < 6:
        raise InvalidInput(f"need at least 6 landmarks, got {k}")
    if any(i >= k for i in frame.indices):
        raise InvalidInput(f"frame index out of range for a {k}-ad")
    if np.any(np.linalg.norm(marks, axis=1) == 0.0):
        raise InvalidInput("a landmark is the zero vector")

    cols = marks[list(frame.indices)].T  # (4, 5)
    _check_general_position(cols)
    basis = cols[:, :4]
    lam = np.linalg.solve(basis, cols[:, 4])
    if np.any(np.abs(lam) <= 1e-12 * np.max(np.abs(lam))):
        raise FrameDegenerateError("fifth frame landmark lies on a coordinate face")
    scaled = basis * lam[None, :]

    points = []
    frame_set = set(frame.indices)
    for i in range(k):
        if i in frame_set:
            continue
        y = np.linalg.solve(scaled, marks[i])
        norm = float(np.linalg.norm(y))
        if norm == 0.0 or not math.isfinite(norm):
            raise InvalidInput(f"landmark {i} registers to the zero vector")
        points.append(canonicalize(y))
    return ProjectiveShape(tuple(points))


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------


def _homogenize(row, where: str) -> np.ndarray:
    vals = [float(v) for v in row]
    if len(vals) == 3:
        vals.append(1.0)
    if len(vals) != 4:
        raise SchemaError(f"{where}: expected 3 or 4 coordinates, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise SchemaError(f"{where}: non-finite coordinate")
    return np.array(vals)


def _finish_configs(groups: dict, order: list, source: str) -> list:
    configs = [
        LandmarkConfig(config_id=cid, landmarks=np.array(groups[cid])) for cid in order
    ]
    sizes = {c.k for c in configs}
    if len(sizes) > 1:
        raise SchemaError(
            f"{source}: inconsistent landmark counts across configs: {sorted(sizes)}"
        )
    return configs


def load_landmarks(path, format: str | None = None) -> list:
    """Read landmark configurations from a CSV or JSON file.

    The format is inferred from the suffix unless given.  Configurations
    keep file order; landmarks keep file order within each configuration.
    """
    path = Path(path)
    fmt = format or ("json" if path.suffix.lower() == ".json" else "csv")
    if fmt not in ("csv", "json"):
        raise InvalidInput(f"unknown landmark format {fmt!r}")

    groups: dict = {}
    order: list = []
    if fmt == "csv":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                return []
            header = [h.strip() for h in header]
            if header[:2] != ["config_id", "landmark_id"] or len(header) not in (5, 6):
                raise SchemaError(
                    f"{path}:1: expected header config_id,landmark_id,x,y,z[,w]"
                )
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != len(header):
                    raise SchemaError(f"{path}:{lineno}: expected {len(header)} fields")
                cid = row[0].strip()
                try:
                    vec = _homogenize(row[2:], f"{path}:{lineno}")
                except ValueError as exc:
                    raise SchemaError(f"{path}:{lineno}: {exc}") from exc
                if cid not in groups:
                    groups[cid] = []
                    order.append(cid)
                groups[cid].append(vec)
    else:
        with open(path) as fh:
            try:
                payload = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}: invalid JSON at line {exc.lineno}") from exc
        if not isinstance(payload, list):
            raise SchemaError(f"{path}: expected a top-level JSON array")
        for pos, entry in enumerate(payload):
            if not isinstance(entry, dict) or "config_id" not in entry or "landmarks" not in entry:
                raise SchemaError(
                    f"{path}: entry {pos} must have config_id and landmarks"
                )
            cid = str(entry["config_id"])
            if cid not in groups:
                groups[cid] = []
                order.append(cid)
            for j, row in enumerate(entry["landmarks"]):
                try:
                    groups[cid].append(_homogenize(row, f"{path}: entry {pos} row {j}"))
                except (TypeError, ValueError) as exc:
                    raise SchemaError(f"{path}: entry {pos} row {j}: {exc}") from exc
    if not order:
        return []
    return _finish_configs(groups, order, str(path))


def write_landmarks(path, configs, format: str | None = None):
    """Write configurations in one of the documented formats."""
    path = Path(path)
    fmt = format or ("json" if path.suffix.lower() == ".json" else "csv")
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["config_id", "landmark_id", "x", "y", "z", "w"])
            for cfg in configs:
                for j, row in enumerate(cfg.landmarks):
                    writer.writerow([cfg.config_id, j] + [repr(float(v)) for v in row])
    elif fmt == "json":
        payload = [
            {"config_id": c.config_id, "landmarks": [list(map(float, r)) for r in c.landmarks]}
            for c in configs
        ]
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
    else:
        raise InvalidInput(f"unknown landmark format {fmt!r}")


# ---------------------------------------------------------------------------
# synthetic sampling
# ---------------------------------------------------------------------------


def perp_basis(center: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the orthocomplement of a unit
    vector: the trailing columns of the Householder reflection mapping
    e_1 onto -sign(c_1) * c."""
    d = center.shape[0]
    sign = 1.0 if center[0] >= 0 else -1.0
    u = center + sign * np.eye(d)[0]
    h = np.eye(d) - 2.0 * np.outer(u, u) / float(u @ u)
    return h[:, 1:]


def synth_sample(spec: SynthSpec) -> list:
    """Draw a deterministic synthetic sample of shapes.

    Observation i consumes the gaussians of stream ``(spec.seed, i)``, so
    samples are reproducible and observations are independent streams.
    """
    center = spec.center.as_matrix()  # (q, d)
    q, d = center.shape
    m = d - 1
    frames = np.empty((q, d, d))
    for s in range(q):
        frames[s, :, 0] = center[s]
        frames[s, :, 1:] = perp_basis(center[s]) * np.asarray(spec.axis_scales)[None, :]
    root_kappa = np.sqrt(np.asarray(spec.concentration))  # (q,)

    z = gaussian_matrix(spec.seed, np.arange(spec.n), q * d).reshape(spec.n, q, d)
    offsets = np.einsum("sij,nsj->nsi", frames, z) / root_kappa[None, :, None]
    raw = center[None, :, :] + offsets
    return [
        ProjectiveShape(tuple(canonicalize(raw[i, s]) for s in range(q)))
        for i in range(spec.n)
    ]


def synth_true_antimean(spec: SynthSpec) -> ProjectiveShape:
    """Population antimean of the synthetic law: per component, the
    orthocomplement direction with the smallest axis scale."""
    center = spec.center.as_matrix()
    j = int(np.argmin(spec.axis_scales))
    points = []
    for s in range(center.shape[0]):
        points.append(canonicalize(perp_basis(center[s])[:, j]))
    return ProjectiveShape(tuple(points))


def random_shape(rng: np.random.Generator, q: int = 1, m: int = 3) -> ProjectiveShape:
    """Uniform random shape (testing / candidate generation)."""
    return ProjectiveShape(
        tuple(canonicalize(rng.normal(size=m + 1)) for _ in range(q))
    )
