import math

import numpy as np
import pytest

from antimeans.errors import InvalidInput
from antimeans.numerics import (
    RngStream,
    chisq_cdf,
    chisq_quantile,
    eigh_sym,
    gaussians,
    raw_u64,
    rng_draw_uniform_indices,
    uniforms,
)

from oracles import charpoly_eigenvalues, chisq_cdf_quadrature


def random_symmetric(rng, n):
    a = rng.normal(size=(n, n))
    return (a + a.T) / 2.0


class TestEighSym:
    def test_diagonal_case(self):
        ed = eigh_sym(np.diag([3.0, 1.0, 2.0]))
        assert np.allclose(ed.values, [1.0, 2.0, 3.0])
        expected = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        assert np.allclose(ed.vectors, expected)

    def test_identity(self):
        ed = eigh_sym(np.eye(4))
        assert np.allclose(ed.values, np.ones(4))
        assert np.allclose(ed.vectors.T @ ed.vectors, np.eye(4), atol=1e-9)
        recon = ed.vectors @ np.diag(ed.values) @ ed.vectors.T
        assert np.allclose(recon, np.eye(4), atol=1e-8)

    def test_matches_characteristic_polynomial_oracle(self):
        rng = np.random.default_rng(7)
        a = random_symmetric(rng, 4)
        expected = charpoly_eigenvalues(a)
        got = eigh_sym(a).values
        assert len(expected) == 4
        assert np.all(np.abs(got - expected) <= 1e-8)

    @pytest.mark.parametrize("n", [2, 3, 4, 6, 10])
    def test_invariants(self, n):
        rng = np.random.default_rng(n)
        for _ in range(10):
            a = random_symmetric(rng, n)
            ed = eigh_sym(a)
            norm_a = np.linalg.norm(a)
            assert np.all(np.diff(ed.values) >= -1e-12)
            assert np.linalg.norm(ed.vectors.T @ ed.vectors - np.eye(n)) <= 1e-9
            recon = ed.vectors @ np.diag(ed.values) @ ed.vectors.T
            assert np.linalg.norm(recon - a) <= 1e-8 * max(norm_a, 1e-300)
            for k in range(n):
                resid = a @ ed.vectors[:, k] - ed.values[k] * ed.vectors[:, k]
                assert np.linalg.norm(resid) <= 1e-8 * max(norm_a, 1e-300)
                col = ed.vectors[:, k]
                assert col[int(np.argmax(np.abs(col)))] > 0

    def test_spectrum_orthogonally_covariant(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            a = random_symmetric(rng, 5)
            q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
            rotated = q @ a @ q.T
            rotated = (rotated + rotated.T) / 2.0
            assert np.all(np.abs(eigh_sym(rotated).values - eigh_sym(a).values) <= 1e-8)

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        a = random_symmetric(rng, 4)
        e1 = eigh_sym(a)
        e2 = eigh_sym(a)
        assert np.array_equal(e1.values, e2.values)
        assert np.array_equal(e1.vectors, e2.vectors)

    def test_rejects_asymmetric(self):
        with pytest.raises(InvalidInput):
            eigh_sym(np.array([[1.0, 2.0], [0.5, 1.0]]))

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidInput):
            eigh_sym(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class TestChisq:
    def test_cdf_at_zero(self):
        for df in (1, 2, 5, 12):
            assert chisq_cdf(0.0, df) == 0.0

    def test_cdf_df2_closed_form(self):
        # chi^2_2 CDF is 1 - exp(-x/2)
        assert abs(chisq_cdf(2.0 * math.log(2.0), 2) - 0.5) <= 1e-12
        for x in (0.3, 1.7, 6.4):
            assert abs(chisq_cdf(x, 2) - (1.0 - math.exp(-x / 2.0))) <= 1e-12

    def test_cdf_against_quadrature(self):
        assert abs(chisq_cdf(12.5916, 6) - 0.95) <= 1e-4
        for df in (1, 3, 6, 12):
            for x in (0.8, 4.0, 11.0):
                assert abs(chisq_cdf(x, df) - chisq_cdf_quadrature(x, df)) <= 1e-8

    def test_quantile_closed_form(self):
        assert abs(chisq_quantile(0.5, 2) - 2.0 * math.log(2.0)) <= 1e-10

    def test_quantile_cdf_round_trip(self):
        for k in (1, 3, 6):
            for x in (0.5, 3.0, 10.0):
                assert abs(chisq_quantile(chisq_cdf(x, k), k) - x) <= 1e-6

    def test_quantile_against_quadrature(self):
        got = chisq_quantile(0.95, 1)
        assert abs(got - 3.84146) <= 1e-4
        assert abs(chisq_cdf_quadrature(got, 1) - 0.95) <= 1e-8

    def test_cdf_monotone_on_grid(self):
        grid = np.linspace(0.0, 40.0, 1000)
        for df in range(1, 13):
            vals = np.array([chisq_cdf(x, df) for x in grid])
            assert np.all(np.diff(vals) >= 0.0)
            assert np.all((vals >= 0.0) & (vals <= 1.0))

    def test_errors(self):
        with pytest.raises(InvalidInput):
            chisq_cdf(-0.1, 3)
        with pytest.raises(InvalidInput):
            chisq_cdf(1.0, 0)
        with pytest.raises(InvalidInput):
            chisq_quantile(0.0, 3)
        with pytest.raises(InvalidInput):
            chisq_quantile(1.0, 3)
        with pytest.raises(InvalidInput):
            chisq_quantile(0.5, -1)


class TestRng:
    def test_population_of_one(self):
        assert np.array_equal(
            rng_draw_uniform_indices(RngStream(42, 7), 1, 5), np.zeros(5, dtype=np.int64)
        )

    def test_deterministic(self):
        a = rng_draw_uniform_indices(RngStream(1234, 5), 17, 400)
        b = rng_draw_uniform_indices(RngStream(1234, 5), 17, 400)
        assert np.array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = raw_u64(RngStream(9, 0), 64)
        b = raw_u64(RngStream(9, 1), 64)
        c = raw_u64(RngStream(9, 0).split(0), 64)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_frequencies_within_binomial_bound(self):
        idx = rng_draw_uniform_indices(RngStream(2024, 0), 10, 10**6)
        counts = np.bincount(idx, minlength=10)
        sigma = math.sqrt(10**6 * 0.1 * 0.9)
        assert np.all(np.abs(counts - 10**5) <= 4.0 * sigma)

    def test_empty_population_rejected(self):
        with pytest.raises(InvalidInput):
            rng_draw_uniform_indices(RngStream(0, 0), 0, 3)

    def test_uniform_doubles_in_unit_interval(self):
        u = uniforms(RngStream(5, 5), 4096)
        assert np.all((u >= 0.0) & (u < 1.0))
        assert abs(u.mean() - 0.5) < 0.02

    def test_gaussian_moments(self):
        g = gaussians(RngStream(6, 6), 50_000)
        assert abs(g.mean()) < 0.02
        assert abs(g.std() - 1.0) < 0.02

    def test_scalar_and_vector_kernels_agree(self):
        from antimeans.numerics import _mix64, _mix64_array

        values = np.array([0, 1, 2**63, 2**64 - 1, 0x9E3779B97F4A7C15], dtype=np.uint64)
        vector = _mix64_array(values)
        for raw, mixed in zip(values.tolist(), vector.tolist()):
            assert _mix64(int(raw)) == int(mixed)
