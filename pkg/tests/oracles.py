"""Independent oracles used by the test suite.

Each oracle checks a library code path through an unrelated route:
characteristic-polynomial bisection for eigenvalues, adaptive Simpson
quadrature for the chi-square CDF, and dense candidate search for
Fréchet-function maximizers.  None of them call the code they verify.
"""

from __future__ import annotations

import math

import numpy as np


# ---------------------------------------------------------------------------
# eigenvalues by characteristic-polynomial bisection
# ---------------------------------------------------------------------------


def _det(mat: np.ndarray) -> float:
    """Determinant by plain Gaussian elimination with partial pivoting."""
    a = [row[:] for row in mat.tolist()]
    n = len(a)
    det = 1.0
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[pivot][col] == 0.0:
            return 0.0
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            factor = a[r][col] / a[col][col]
            for c in range(col, n):
                a[r][c] -= factor * a[col][c]
    return det


def charpoly_eigenvalues(mat: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """All eigenvalues of a symmetric matrix as sign-change roots of
    det(A - t I), isolated by sampling and refined by bisection."""
    mat = np.asarray(mat, dtype=float)
    n = mat.shape[0]
    radius = float(np.max(np.sum(np.abs(mat), axis=1))) + 1.0

    def p(t: float) -> float:
        return _det(mat - t * np.eye(n))

    grid = np.linspace(-radius, radius, 20001)
    vals = np.array([p(t) for t in grid])
    roots = []
    for i in range(len(grid) - 1):
        a, b = grid[i], grid[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb < 0.0:
            lo, hi, flo = a, b, fa
            while hi - lo > tol:
                mid = (lo + hi) / 2.0
                fm = p(mid)
                if fm == 0.0:
                    lo = hi = mid
                    break
                if flo * fm < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            roots.append((lo + hi) / 2.0)
    return np.array(sorted(roots))


# ---------------------------------------------------------------------------
# chi-square CDF by adaptive Simpson quadrature
# ---------------------------------------------------------------------------


def _chisq_density(t: float, df: int) -> float:
    if t <= 0.0:
        return 0.0
    a = df / 2.0
    return math.exp((a - 1.0) * math.log(t) - t / 2.0 - a * math.log(2.0) - math.lgamma(a))


def _simpson(f, a: float, b: float, fa: float, fb: float, fm: float, eps: float, depth: int) -> float:
    m = (a + b) / 2.0
    lm = (a + m) / 2.0
    rm = (m + b) / 2.0
    flm = f(lm)
    frm = f(rm)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) < 15.0 * eps:
        return left + right + (left + right - whole) / 15.0
    return _simpson(f, a, m, fa, fm, flm, eps / 2.0, depth - 1) + _simpson(
        f, m, b, fm, fb, frm, eps / 2.0, depth - 1
    )


def chisq_cdf_quadrature(x: float, df: int, eps: float = 1e-10) -> float:
    """Integral of the chi-square density on [0, x].

    df = 1 has an integrable singularity at 0; substituting t = s^2
    smooths it (the integrand becomes 2 s f(s^2)).
    """
    if x <= 0.0:
        return 0.0
    if df == 1:
        def g(s: float) -> float:
            return 2.0 * s * _chisq_density(s * s, 1)

        hi = math.sqrt(x)
        return _simpson(g, 0.0, hi, g(0.0), g(hi), g(hi / 2.0), eps, 40)

    def f(t: float) -> float:
        return _chisq_density(t, df)

    return _simpson(f, 0.0, x, f(0.0), f(x), f(x / 2.0), eps, 40)


# ---------------------------------------------------------------------------
# Fréchet maximizer search
# ---------------------------------------------------------------------------


def sphere_grid_rp2(step_deg: float = 0.5) -> np.ndarray:
    """Dense grid on the upper hemisphere of S^2 (covers RP^2)."""
    step = math.radians(step_deg)
    thetas = np.arange(0.0, math.pi / 2.0 + step, step)  # polar from +z
    points = [np.array([0.0, 0.0, 1.0])]
    for theta in thetas[1:]:
        ring = max(8, int(round(2.0 * math.pi * math.sin(theta) / step)))
        phis = np.arange(ring) * (2.0 * math.pi / ring)
        points.extend(
            np.stack(
                [
                    math.sin(theta) * np.cos(phis),
                    math.sin(theta) * np.sin(phis),
                    np.full(ring, math.cos(theta)),
                ],
                axis=1,
            )
        )
    return np.asarray(np.vstack([np.atleast_2d(p) for p in points]))


def frechet_values_for_candidates(candidates: np.ndarray, sample_rows: np.ndarray) -> np.ndarray:
    """Empirical Fréchet function of RP^m points at many unit candidates.

    With the rank-one embedding, F(p) = 2 - 2 p^T J p for J the sample
    second-moment matrix: evaluated directly from its definition,
    mean_i ||pp^T - x_i x_i^T||_F^2 = 2 - 2 mean_i (p . x_i)^2.
    """
    dots = candidates @ sample_rows.T
    return 2.0 - 2.0 * np.mean(dots * dots, axis=1)


def best_candidate(candidates: np.ndarray, sample_rows: np.ndarray):
    values = frechet_values_for_candidates(candidates, sample_rows)
    idx = int(np.argmax(values))
    return candidates[idx], float(values[idx])
