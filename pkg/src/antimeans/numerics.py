"""Self-contained numeric kernels.

Three independent pieces live here, deliberately implemented without LAPACK
or SciPy so that results are deterministic and bit-stable across platforms:

* a cyclic-Jacobi eigensolver for small dense symmetric matrices, with a
  fixed eigenvector sign convention,
* chi-square distribution functions built on the regularized lower
  incomplete gamma function (series / continued fraction),
* a counter-based splittable pseudo-random generator.

RNG construction (fully specified so sequences are reproducible anywhere):
with 64-bit wrap-around arithmetic, ``GAMMA = 0x9E3779B97F4A7C15`` and the
SplitMix64 finalizer

    mix64(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
              z ^= z >> 27; z *= 0x94D049BB133111EB; return z ^ (z >> 31)

a stream ``(seed, stream_id)`` has base ``b = mix64(mix64(seed) +
GAMMA * stream_id)`` and its i-th raw output (i = 0, 1, ...) is
``mix64(b + GAMMA * (i + 1))``.  Uniform doubles take the top 53 bits;
uniform indices in [0, n) use rejection below the largest multiple of n;
Gaussians come from the Box-Muller transform applied to consecutive
uniform pairs.  ``RngStream.split(tag)`` derives the independent stream
``(mix64(b + 0xD6E8FEB86659FD93), tag)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_SPLIT_SALT = 0xD6E8FEB86659FD93

# ---------------------------------------------------------------------------
# symmetric eigendecomposition
# ---------------------------------------------------------------------------

SYMMETRY_RTOL = 1e-12
_JACOBI_TOL = 1e-12
_JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigenDecomp:
    """Ascending eigenvalues with matching orthonormal eigenvector columns.

    ``vectors[:, k]`` pairs with ``values[k]``.  Each column is flipped so
    its largest-magnitude component is positive (first such component on
    ties), which makes outputs comparable across runs.
    """

    values: np.ndarray
    vectors: np.ndarray


def _validate_symmetric(a) -> np.ndarray:
    mat = np.asarray(a, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
        raise InvalidInput(f"expected a square matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise InvalidInput("matrix has non-finite entries")
    scale = np.maximum(1.0, np.abs(mat))
    if np.any(np.abs(mat - mat.T) > SYMMETRY_RTOL * scale):
        raise InvalidInput("matrix is not symmetric within tolerance")
    return mat


def canonical_sign(vec: np.ndarray) -> np.ndarray:
    """Flip ``vec`` so its largest-magnitude component (lowest index on
    ties) is positive."""
    idx = int(np.argmax(np.abs(vec)))
    if vec[idx] < 0:
        return -vec
    return vec.copy()


def _jacobi_scalar(mat: np.ndarray):
    # plain-float inner loop: much faster than numpy slicing for tiny n
    n = mat.shape[0]
    a = [[float(mat[i, j]) for j in range(n)] for i in range(n)]
    v = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    norm_a = math.sqrt(sum(a[i][j] * a[i][j] for i in range(n) for j in range(n)))
    if norm_a == 0.0:
        return np.zeros(n), np.eye(n)
    threshold = _JACOBI_TOL * norm_a
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = math.sqrt(
            sum(a[i][j] * a[i][j] for i in range(n) for j in range(n) if i != j)
        )
        if off < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                theta = (a[q][q] - a[p][p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(1.0 + theta * theta))
                else:
                    t = 1.0 / (theta - math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for i in range(n):
                    aip = a[i][p]
                    aiq = a[i][q]
                    a[i][p] = c * aip - s * aiq
                    a[i][q] = s * aip + c * aiq
                for i in range(n):
                    api = a[p][i]
                    aqi = a[q][i]
                    a[p][i] = c * api - s * aqi
                    a[q][i] = s * api + c * aqi
                a[p][q] = 0.0
                a[q][p] = 0.0
                for i in range(n):
                    vip = v[i][p]
                    viq = v[i][q]
                    v[i][p] = c * vip - s * viq
                    v[i][q] = s * vip + c * viq
    return np.array([a[i][i] for i in range(n)]), np.array(v)


def _jacobi_numpy(mat: np.ndarray):
    n = mat.shape[0]
    work = mat.copy()
    vecs = np.eye(n)
    norm_a = math.sqrt(float(np.sum(work * work)))
    if norm_a == 0.0:
        return np.zeros(n), vecs
    threshold = _JACOBI_TOL * norm_a
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = work - np.diag(np.diag(work))
        if math.sqrt(float(np.sum(off * off))) < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                if apq == 0.0:
                    continue
                theta = (work[q, q] - work[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(1.0 + theta * theta))
                else:
                    t = 1.0 / (theta - math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                col_p = work[:, p].copy()
                col_q = work[:, q].copy()
                work[:, p] = c * col_p - s * col_q
                work[:, q] = s * col_p + c * col_q
                row_p = work[p, :].copy()
                row_q = work[q, :].copy()
                work[p, :] = c * row_p - s * row_q
                work[q, :] = s * row_p + c * row_q
                work[p, q] = 0.0
                work[q, p] = 0.0
                vec_p = vecs[:, p].copy()
                vec_q = vecs[:, q].copy()
                vecs[:, p] = c * vec_p - s * vec_q
                vecs[:, q] = s * vec_p + c * vec_q
    return np.diag(work).astype(float), vecs


def eigh_sym(a) -> EigenDecomp:
    """Eigendecomposition of a small dense symmetric matrix.

    Cyclic Jacobi rotations until the off-diagonal Frobenius mass drops
    below ``1e-12 * ||A||_F`` (at most 100 sweeps).  Deterministic: a given
    input always produces bit-identical output.
    """
    mat = _validate_symmetric(a)
    n = mat.shape[0]
    work = (mat + mat.T) / 2.0
    if n == 1:
        return EigenDecomp(np.diag(work).astype(float).copy(), np.eye(n))
    if n <= 8:
        diag, vecs = _jacobi_scalar(work)
    else:
        diag, vecs = _jacobi_numpy(work)
    order = np.argsort(diag, kind="stable")
    values = diag[order].copy()
    sorted_vecs = vecs[:, order]
    for k in range(n):
        sorted_vecs[:, k] = canonical_sign(sorted_vecs[:, k])
    return EigenDecomp(values, np.ascontiguousarray(sorted_vecs))


def spd_solve(mat: np.ndarray, rhs: np.ndarray, rcond: float = 1e-10):
    """Solve ``mat @ x = rhs`` for symmetric positive-definite ``mat`` via
    the Jacobi eigendecomposition.

    Returns ``(x, smallest_eigenvalue, largest_eigenvalue)``.  Raises
    ``InvalidInput`` when the matrix is singular at the relative threshold
    ``rcond`` (callers usually re-raise as ``SingularCovarianceError``).
    """
    ed = eigh_sym(mat)
    lo, hi = float(ed.values[0]), float(ed.values[-1])
    if hi <= 0.0 or lo <= rcond * hi:
        raise InvalidInput(
            f"matrix numerically singular: eigenvalue range [{lo:.3e}, {hi:.3e}]"
        )
    coeffs = ed.vectors.T @ rhs
    return ed.vectors @ (coeffs / ed.values), lo, hi


# ---------------------------------------------------------------------------
# chi-square distribution
# ---------------------------------------------------------------------------

_GAMMA_EPS = 1e-16
_GAMMA_ITMAX = 500


def _gamma_p_series(a: float, x: float) -> float:
    # lower regularized gamma by power series, valid for x < a + 1
    ap = a
    total = 1.0 / a
    delta = total
    for _ in range(_GAMMA_ITMAX):
        ap += 1.0
        delta *= x / ap
        total += delta
        if abs(delta) < abs(total) * _GAMMA_EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))

def _gamma_q_contfrac(a: float, x: float) -> float:
    # upper regularized gamma by Lentz continued fraction, for x >= a + 1
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_ITMAX + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        factor = d * c
        h *= factor
        if abs(factor - 1.0) < _GAMMA_EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _regularized_gamma_p(a: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x < a + 1.0:
        return min(1.0, max(0.0, _gamma_p_series(a, x)))
    return min(1.0, max(0.0, 1.0 - _gamma_q_contfrac(a, x)))


def _validate_df(df) -> int:
    if not isinstance(df, (int, np.integer)) or isinstance(df, bool) or df <= 0:
        raise InvalidInput(f"degrees of freedom must be a positive integer, got {df!r}")
    return int(df)


def chisq_cdf(x: float, df: int) -> float:
    """P(X <= x) for X chi-square with ``df`` degrees of freedom."""
    df = _validate_df(df)
    x = float(x)
    if not math.isfinite(x) or x < 0.0:
        raise InvalidInput(f"chisq_cdf requires finite x >= 0, got {x!r}")
    return _regularized_gamma_p(df / 2.0, x / 2.0)


def chisq_pdf(x: float, df: int) -> float:
    df = _validate_df(df)
    x = float(x)
    if x < 0.0:
        raise InvalidInput("chisq_pdf requires x >= 0")
    a = df / 2.0
    if x == 0.0:
        if df == 1:
            return math.inf
        return 0.5 if df == 2 else 0.0
    log_pdf = (a - 1.0) * math.log(x) - x / 2.0 - a * math.log(2.0) - math.lgamma(a)
    return math.exp(log_pdf)


def chisq_quantile(p: float, df: int) -> float:
    """Inverse of ``chisq_cdf`` in its first argument.

    Bracketing bisection to localize the root, then Newton steps kept
    inside the bracket (bisection fallback when a step escapes).
    """
    df = _validate_df(df)
    p = float(p)
    if not (0.0 < p < 1.0):
        raise InvalidInput(f"quantile probability must lie in (0, 1), got {p!r}")

    lo, hi = 0.0, float(df) + 10.0 * math.sqrt(2.0 * df) + 10.0
    while chisq_cdf(hi, df) < p:
        hi *= 2.0
        if hi > 1e12:
            raise InvalidInput("quantile bracket expansion failed")
    for _ in range(20):
        mid = (lo + hi) / 2.0
        if chisq_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid

    x = (lo + hi) / 2.0
    for _ in range(60):
        err = chisq_cdf(x, df) - p
        if err > 0.0:
            hi = min(hi, x)
        elif err < 0.0:
            lo = max(lo, x)
        if abs(err) < 1e-14:
            break
        dens = chisq_pdf(x, df) if x > 0.0 else 0.0
        if dens > 0.0 and math.isfinite(dens):
            step = err / dens
            x_new = x - step
        else:
            x_new = (lo + hi) / 2.0
        if not (lo < x_new < hi):
            x_new = (lo + hi) / 2.0
        if abs(x_new - x) < 1e-15 * max(1.0, x):
            x = x_new
            break
        x = x_new
    return x


# ---------------------------------------------------------------------------
# counter-based splittable RNG
# ---------------------------------------------------------------------------


def _mix64(z: int) -> int:
    z &= _MASK
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(0xBF58476D1CE4E5B9)
    z ^= z >> np.uint64(27)
    z *= np.uint64(0x94D049BB133111EB)
    z ^= z >> np.uint64(31)
    return z


@dataclass(frozen=True)
class RngStream:
    """Immutable descriptor of one deterministic random stream.

    Identical ``(seed, stream_id)`` pairs reproduce identical draw
    sequences on every platform.  Distinct ``stream_id`` values give
    independent streams off the same seed.
    """

    seed: int
    stream_id: int = 0

    @property
    def base(self) -> int:
        return _mix64((_mix64(self.seed) + _GAMMA * (self.stream_id & _MASK)) & _MASK)

    def split(self, tag: int) -> "RngStream":
        """Derive an independent child stream labelled ``tag``."""
        return RngStream(_mix64((self.base + _SPLIT_SALT) & _MASK), tag)


def raw_u64(stream: RngStream, count: int, start: int = 0) -> np.ndarray:
    """Raw 64-bit outputs at counters ``start .. start+count-1``."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z = np.uint64(stream.base) + np.uint64(_GAMMA) * idx
    return _mix64_array(z)


def uniforms(stream: RngStream, count: int, start: int = 0) -> np.ndarray:
    """Doubles in [0, 1) from the top 53 bits of the raw outputs."""
    return (raw_u64(stream, count, start) >> np.uint64(11)).astype(float) * 2.0**-53


def gaussians(stream: RngStream, count: int, start_pair: int = 0) -> np.ndarray:
    """Standard normals via Box-Muller; gaussian t consumes raw counters
    2t and 2t+1."""
    u = uniforms(stream, 2 * count, 2 * start_pair)
    u1 = u[0::2]
    u2 = u[1::2]
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    return radius * np.cos(2.0 * math.pi * u2)


def gaussian_matrix(seed: int, stream_ids: np.ndarray, count_per: int) -> np.ndarray:
    """Standard normals for many streams at once: row i holds the first
    ``count_per`` gaussians of ``RngStream(seed, stream_ids[i])``."""
    ids = np.asarray(stream_ids, dtype=np.uint64)
    bases = _mix64_array(
        np.uint64(_mix64(seed)) + np.uint64(_GAMMA) * ids
    )
    counters = np.arange(1, 2 * count_per + 1, dtype=np.uint64)
    z = bases[:, None] + np.uint64(_GAMMA) * counters[None, :]
    u = (_mix64_array(z) >> np.uint64(11)).astype(float) * 2.0**-53
    u1 = u[:, 0::2]
    u2 = u[:, 1::2]
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * math.pi * u2)


def rng_draw_uniform_indices(stream: RngStream, n: int, k: int) -> np.ndarray:
    """``k`` independent uniform indices in [0, n).

    Rejection sampling below the largest multiple of ``n`` keeps every
    index exactly equally likely; the accepted subsequence is a
    deterministic filter of the raw counter stream, so results do not
    depend on internal batch sizes.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidInput(f"population size must be >= 1, got {n!r}")
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise InvalidInput(f"draw count must be >= 1, got {k!r}")
    n = int(n)
    k = int(k)
    threshold = ((1 << 64) // n) * n
    reject = threshold < (1 << 64)
    out = np.empty(k, dtype=np.int64)
    filled = 0
    cursor = 0
    while filled < k:
        chunk = max(64, int(1.05 * (k - filled)) + 8)
        raw = raw_u64(stream, chunk, cursor)
        cursor += chunk
        if reject:
            raw = raw[raw < np.uint64(threshold)]
        accepted = raw % np.uint64(n)
        take = min(k - filled, accepted.shape[0])
        out[filled : filled + take] = accepted[:take].astype(np.int64)
        filled += take
    return out
