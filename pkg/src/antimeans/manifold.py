"""Points of RP^m, q-tuples of them, and the group structure on RP^3.

A point of RP^m is stored as a canonical-sign unit vector in R^{m+1}
(largest-magnitude component positive, lowest index breaking ties), so two
representatives of the same projective point always compare equal.  For
m = 3 the unit-quaternion-modulo-sign structure turns RP^3 into a group;
``quat_mul`` / ``quat_inv`` and the rotation-angle log/exp charts at the
identity implement it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ChartDomainError, InvalidInput, ShapeMismatch

_CHART_CUT_TOL = 1e-12


@dataclass(frozen=True)
class ProjectivePoint:
    """One point of RP^m as a canonical-sign unit vector in R^{m+1}."""

    coords: np.ndarray

    @property
    def m(self) -> int:
        return self.coords.shape[0] - 1

    def __post_init__(self):
        self.coords.setflags(write=False)


@dataclass(frozen=True)
class ProjectiveShape:
    """A q-tuple of RP^m points (q >= 1, shared m)."""

    points: tuple

    def __post_init__(self):
        if len(self.points) < 1:
            raise InvalidInput("a shape needs at least one axial component")
        dims = {p.m for p in self.points}
        if len(dims) != 1:
            raise InvalidInput(f"mixed ambient dimensions in shape: {sorted(dims)}")

    @property
    def q(self) -> int:
        return len(self.points)

    @property
    def m(self) -> int:
        return self.points[0].m

    def as_matrix(self) -> np.ndarray:
        """(q, m+1) array of canonical representatives."""
        return np.stack([p.coords for p in self.points])


def canonicalize(v) -> ProjectivePoint:
    """Normalize a nonzero vector and fix the representative sign."""
    vec = np.asarray(v, dtype=float)
    if vec.ndim != 1 or vec.shape[0] < 2:
        raise InvalidInput(f"expected a vector in R^(m+1), m >= 1, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise InvalidInput("vector has non-finite entries")
    norm = math.sqrt(float(vec @ vec))
    if norm == 0.0:
        raise InvalidInput("cannot canonicalize the zero vector")
    unit = vec / norm
    idx = int(np.argmax(np.abs(unit)))
    if unit[idx] < 0:
        unit = -unit
    return ProjectivePoint(unit)


def shape_from_matrix(rows) -> ProjectiveShape:
    """Build a shape from a (q, m+1) array of representatives."""
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2:
        raise InvalidInput(f"expected a (q, m+1) array, got shape {arr.shape}")
    return ProjectiveShape(tuple(canonicalize(row) for row in arr))


def _require_quaternion(p: ProjectivePoint, name: str):
    if p.m != 3:
        raise InvalidInput(f"{name} must be a point of RP^3, got RP^{p.m}")


def hamilton(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Raw Hamilton product of two quaternions given as (w, x, y, z)."""
    w = a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
    x = a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2]
    y = a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1]
    z = a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]
    return np.array([w, x, y, z])


def quat_conj(a: np.ndarray) -> np.ndarray:
    return np.array([a[0], -a[1], -a[2], -a[3]])


def quat_mul(p: ProjectivePoint, r: ProjectivePoint) -> ProjectivePoint:
    """Product of two RP^3 points as unit quaternions modulo sign."""
    _require_quaternion(p, "left factor")
    _require_quaternion(r, "right factor")
    return canonicalize(hamilton(p.coords, r.coords))


def quat_inv(p: ProjectivePoint) -> ProjectivePoint:
    """Inverse (= conjugate) of an RP^3 point."""
    _require_quaternion(p, "argument")
    return canonicalize(quat_conj(p.coords))


def identity_point() -> ProjectivePoint:
    return ProjectivePoint(np.array([1.0, 0.0, 0.0, 0.0]))


def identity_shape(q: int) -> ProjectiveShape:
    return ProjectiveShape(tuple(identity_point() for _ in range(q)))


def log_chart(p: ProjectivePoint) -> np.ndarray:
    """Rotation-angle log chart of RP^3 at the identity.

    With the representative (q0, w) chosen so q0 > 0, returns
    ``2*arccos(q0) * w / ||w||`` (the axis-angle vector of the rotation the
    quaternion represents), and 0 at the identity.  The cut set q0 = 0 is a
    hard error: the argument is a half-turn away from the identity, which
    under any of the tests here signals bad data rather than noise.
    """
    _require_quaternion(p, "argument")
    coords = p.coords
    q0 = float(coords[0])
    if abs(q0) <= _CHART_CUT_TOL:
        raise ChartDomainError(
            "point lies on the cut set of the identity log chart (q0 = 0)"
        )
    if q0 < 0:
        coords = -coords
        q0 = -q0
    w = coords[1:]
    wn = math.sqrt(float(w @ w))
    if wn == 0.0:
        return np.zeros(3)
    theta = 2.0 * math.atan2(wn, q0)
    return (theta / wn) * w


def exp_chart(u) -> ProjectivePoint:
    """Inverse of ``log_chart``: axis-angle vector -> RP^3 point."""
    vec = np.asarray(u, dtype=float)
    if vec.shape != (3,):
        raise InvalidInput(f"expected a vector in R^3, got shape {vec.shape}")
    angle = math.sqrt(float(vec @ vec))
    if angle >= math.pi:
        raise ChartDomainError(f"axis-angle norm {angle:.6f} >= pi is outside the chart")
    if angle == 0.0:
        return identity_point()
    half = angle / 2.0
    return canonicalize(np.concatenate([[math.cos(half)], (math.sin(half) / angle) * vec]))


def shape_group_op(a: ProjectiveShape, b: ProjectiveShape, invert_first: bool = False) -> ProjectiveShape:
    """Componentwise group product on (RP^3)^q: ``a^{-1} * b`` when
    ``invert_first`` is set, else ``a * b``."""
    if a.q != b.q:
        raise ShapeMismatch(f"component counts differ: {a.q} vs {b.q}")
    parts = []
    for pa, pb in zip(a.points, b.points):
        left = quat_inv(pa) if invert_first else pa
        parts.append(quat_mul(left, pb))
    return ProjectiveShape(tuple(parts))


def shape_log(shape: ProjectiveShape) -> np.ndarray:
    """Concatenated per-component log-chart coordinates, in R^{3q}."""
    return np.concatenate([log_chart(p) for p in shape.points])
