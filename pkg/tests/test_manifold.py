import math

import numpy as np
import pytest

from antimeans.errors import ChartDomainError, InvalidInput, ShapeMismatch
from antimeans.manifold import (
    ProjectiveShape,
    canonicalize,
    exp_chart,
    identity_point,
    identity_shape,
    log_chart,
    quat_inv,
    quat_mul,
    shape_from_matrix,
    shape_group_op,
)


def rodrigues(u):
    """Rotation matrix for axis-angle vector u (independent oracle)."""
    theta = np.linalg.norm(u)
    if theta == 0.0:
        return np.eye(3)
    k = u / theta
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(theta) * kx + (1 - math.cos(theta)) * kx @ kx


def quat_to_rotation(q):
    """Rotation matrix of a unit quaternion (w, x, y, z)."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def random_point(rng, m=3):
    return canonicalize(rng.normal(size=m + 1))


class TestCanonicalize:
    def test_normalizes_and_flips(self):
        p = canonicalize([0.0, -2.0])
        assert np.allclose(p.coords, [0.0, 1.0])

    def test_three_four_five(self):
        p = canonicalize([3.0, 4.0])
        assert np.allclose(p.coords, [0.6, 0.8])

    def test_sign_class_property(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            v = rng.normal(size=4)
            assert np.array_equal(canonicalize(v).coords, canonicalize(-v).coords)

    def test_zero_vector_rejected(self):
        with pytest.raises(InvalidInput):
            canonicalize([0.0, 0.0, 0.0])

    def test_tie_break_lowest_index(self):
        p = canonicalize([-1.0, 1.0])
        # equal magnitudes: index 0 decides the sign
        assert p.coords[0] > 0


class TestQuaternionOps:
    def test_identity_law(self):
        rng = np.random.default_rng(1)
        one = identity_point()
        for _ in range(20):
            x = random_point(rng)
            assert np.allclose(quat_mul(one, x).coords, x.coords, atol=1e-12)

    def test_inverse_law(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            x = random_point(rng)
            prod = quat_mul(x, quat_inv(x))
            assert np.allclose(prod.coords, [1.0, 0.0, 0.0, 0.0], atol=1e-12)
            prod = quat_mul(quat_inv(x), x)
            assert np.allclose(prod.coords, [1.0, 0.0, 0.0, 0.0], atol=1e-12)

    def test_quaternion_table_i_j_k(self):
        i = canonicalize([0.0, 1.0, 0.0, 0.0])
        j = canonicalize([0.0, 0.0, 1.0, 0.0])
        k = quat_mul(i, j)
        assert np.allclose(k.coords, [0.0, 0.0, 0.0, 1.0], atol=1e-15)

    def test_inverse_is_involution(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            x = random_point(rng)
            assert np.allclose(quat_inv(quat_inv(x)).coords, x.coords, atol=1e-15)

    def test_inverse_of_identity(self):
        assert np.allclose(quat_inv(identity_point()).coords, [1, 0, 0, 0])

    def test_associativity_as_sign_classes(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            a, b, c = (random_point(rng) for _ in range(3))
            left = quat_mul(quat_mul(a, b), c)
            right = quat_mul(a, quat_mul(b, c))
            assert np.allclose(left.coords, right.coords, atol=1e-12)

    def test_sign_class_soundness(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            v = rng.normal(size=4)
            w = rng.normal(size=4)
            ref = quat_mul(canonicalize(v), canonicalize(w)).coords
            assert np.array_equal(quat_mul(canonicalize(-v), canonicalize(w)).coords, ref)
            assert np.array_equal(quat_mul(canonicalize(v), canonicalize(-w)).coords, ref)

    def test_requires_rp3(self):
        with pytest.raises(InvalidInput):
            quat_mul(canonicalize([1.0, 0.0]), canonicalize([0.0, 1.0]))


class TestCharts:
    def test_log_of_identity_is_zero(self):
        assert np.allclose(log_chart(identity_point()), np.zeros(3))

    def test_round_trip(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            u = rng.normal(size=3)
            u *= rng.uniform(0.0, math.pi - 0.1) / max(np.linalg.norm(u), 1e-12)
            assert np.allclose(log_chart(exp_chart(u)), u, atol=1e-10)

    def test_axis_angle_example(self):
        point = exp_chart(np.array([0.5, 0.0, 0.0]))
        expected = [math.cos(0.25), math.sin(0.25), 0.0, 0.0]
        assert np.allclose(point.coords, expected, atol=1e-15)

    def test_exp_matches_rotation_matrix_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            u = rng.normal(size=3)
            u *= rng.uniform(0.1, 2.8) / np.linalg.norm(u)
            q = exp_chart(u).coords
            q = q if q[0] >= 0 else -q
            assert np.allclose(quat_to_rotation(q), rodrigues(u), atol=1e-10)

    def test_chart_cut_set_rejected(self):
        with pytest.raises(ChartDomainError):
            log_chart(canonicalize([0.0, 1.0, 0.0, 0.0]))
        with pytest.raises(ChartDomainError):
            exp_chart(np.array([math.pi, 0.0, 0.0]))

    def test_log_of_inverse_negates(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            u = rng.normal(size=3)
            u *= rng.uniform(0.1, 2.9) / np.linalg.norm(u)
            p = exp_chart(u)
            assert np.allclose(log_chart(quat_inv(p)), -log_chart(p), atol=1e-10)


class TestShapeOps:
    def test_self_difference_is_identity_shape(self):
        rng = np.random.default_rng(9)
        shape = ProjectiveShape(tuple(random_point(rng) for _ in range(3)))
        out = shape_group_op(shape, shape, invert_first=True)
        for p in out.points:
            assert np.allclose(p.coords, [1, 0, 0, 0], atol=1e-12)

    def test_q1_reduces_to_quat_ops(self):
        rng = np.random.default_rng(10)
        a, b = random_point(rng), random_point(rng)
        out = shape_group_op(ProjectiveShape((a,)), ProjectiveShape((b,)))
        assert np.allclose(out.points[0].coords, quat_mul(a, b).coords)

    def test_componentwise_associativity(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            shapes = [
                ProjectiveShape(tuple(random_point(rng) for _ in range(2)))
                for _ in range(3)
            ]
            left = shape_group_op(shape_group_op(shapes[0], shapes[1]), shapes[2])
            right = shape_group_op(shapes[0], shape_group_op(shapes[1], shapes[2]))
            for lp, rp in zip(left.points, right.points):
                assert np.allclose(lp.coords, rp.coords, atol=1e-12)

    def test_mismatched_q_rejected(self):
        with pytest.raises(ShapeMismatch):
            shape_group_op(identity_shape(2), identity_shape(3))

    def test_shape_from_matrix_and_back(self):
        rows = np.array([[2.0, 0.0, 0.0, 0.0], [0.0, 0.0, -3.0, 0.0]])
        shape = shape_from_matrix(rows)
        assert shape.q == 2 and shape.m == 3
        assert np.allclose(shape.as_matrix()[0], [1, 0, 0, 0])
        assert np.allclose(shape.as_matrix()[1], [0, 0, 1, 0])
