import numpy as np
import pytest

from quatkge import quat
from quatkge.errors import DimensionMismatchError, ZeroQuaternionError
from quatkge.quat import Quaternion, QuatVec


class TestScalarOps:
    def test_add(self):
        assert (Quaternion(1, 2, 3, 4) + Quaternion(5, 6, 7, 8)) == Quaternion(6, 8, 10, 12)

    def test_sub_self_cancels(self):
        q = Quaternion(1, 2, 3, 4)
        assert q - q == Quaternion(0, 0, 0, 0)

    def test_additive_identity(self):
        assert Quaternion.ZERO + Quaternion(5, 6, 7, 8) == Quaternion(5, 6, 7, 8)

    def test_conjugate(self):
        assert Quaternion(1, 2, 3, 4).conjugate() == Quaternion(1, -2, -3, -4)
        assert Quaternion(5, 0, 0, 0).conjugate() == Quaternion(5, 0, 0, 0)

    def test_conjugate_involution(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            q = Quaternion(*rng.standard_normal(4))
            assert q.conjugate().conjugate() == q

    def test_norm_sq(self):
        assert Quaternion(1, 2, 3, 4).norm_sq() == 30.0
        assert Quaternion.ZERO.norm_sq() == 0.0
        assert Quaternion.ONE.norm_sq() == 1.0

    def test_magnitude(self):
        assert Quaternion(3, 4, 0, 0).magnitude() == 5.0
        assert Quaternion.ONE.magnitude() == 1.0
        assert Quaternion.ZERO.magnitude() == 0.0

    def test_dot(self):
        assert Quaternion(1, 2, 3, 4).dot(Quaternion(5, 6, 7, 8)) == 70.0
        assert Quaternion.ONE.dot(Quaternion.I) == 0.0

    def test_self_dot_is_norm_sq(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            q = Quaternion(*rng.standard_normal(4))
            assert q.dot(q) == pytest.approx(q.norm_sq(), rel=1e-15)

    def test_hamilton(self):
        assert (Quaternion(1, 2, 3, 4) * Quaternion(5, 6, 7, 8)
                == Quaternion(-60, 12, 30, 24))

    def test_hamilton_identity(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            q = Quaternion(*rng.standard_normal(4))
            assert Quaternion.ONE * q == q

    def test_normalize(self):
        n = Quaternion(3, 4, 0, 0).normalize()
        assert n == Quaternion(0.6, 0.8, 0, 0)
        assert Quaternion.ONE.normalize() == Quaternion.ONE

    def test_normalize_zero_raises(self):
        with pytest.raises(ZeroQuaternionError):
            Quaternion.ZERO.normalize()
        with pytest.raises(ZeroQuaternionError):
            Quaternion(1e-13, 0, 0, 0).normalize()


class TestBasisTable:
    """The i, j, k multiplication table must hold exactly."""

    def test_squares(self):
        minus_one = Quaternion(-1, 0, 0, 0)
        for unit in (Quaternion.I, Quaternion.J, Quaternion.K):
            assert unit * unit == minus_one

    def test_ijk(self):
        assert Quaternion.I * Quaternion.J * Quaternion.K == Quaternion(-1, 0, 0, 0)

    @pytest.mark.parametrize("left,right,expected", [
        (Quaternion.I, Quaternion.J, Quaternion.K),
        (Quaternion.J, Quaternion.K, Quaternion.I),
        (Quaternion.K, Quaternion.I, Quaternion.J),
    ])
    def test_cyclic_products(self, left, right, expected):
        assert left * right == expected
        assert right * left == -expected

    def test_noncommutativity_witness(self):
        ij = Quaternion.I * Quaternion.J
        ji = Quaternion.J * Quaternion.I
        assert ij != ji
        assert ij.d == -ji.d == 1.0


class TestQuatVec:
    def test_component_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            QuatVec(np.zeros(3), np.zeros(3), np.zeros(2), np.zeros(3))

    def test_k1_reduces_to_scalar(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(4)
        y = rng.standard_normal(4)
        vx = QuatVec(*(np.array([c]) for c in x))
        vy = QuatVec(*(np.array([c]) for c in y))
        sx, sy = Quaternion(*x), Quaternion(*y)
        np.testing.assert_allclose((vx * vy).as_array()[:, 0],
                                   (sx * sy).as_tuple(), rtol=1e-15)
        np.testing.assert_allclose(vx.dot(vy)[0], sx.dot(sy), rtol=1e-15)
        np.testing.assert_allclose(vx.magnitude()[0], sx.magnitude(), rtol=1e-15)

    def test_hamilton_identity_vec(self):
        rng = np.random.default_rng(4)
        v = QuatVec.from_array(rng.standard_normal((4, 5)))
        one = QuatVec(np.ones(5), np.zeros(5), np.zeros(5), np.zeros(5))
        np.testing.assert_array_equal((one * v).as_array(), v.as_array())

    def test_hamilton_matches_scalar_per_coordinate(self):
        rng = np.random.default_rng(5)
        vx = QuatVec.from_array(rng.standard_normal((4, 3)))
        vy = QuatVec.from_array(rng.standard_normal((4, 3)))
        product = vx * vy
        for i in range(3):
            expected = vx.coordinate(i) * vy.coordinate(i)
            np.testing.assert_allclose(product.coordinate(i).as_tuple(),
                                       expected.as_tuple(), rtol=1e-15)

    def test_dimension_mismatch(self):
        vx = QuatVec.from_array(np.ones((4, 3)))
        vy = QuatVec.from_array(np.ones((4, 4)))
        with pytest.raises(DimensionMismatchError):
            vx * vy
        with pytest.raises(DimensionMismatchError):
            vx + vy

    def test_normalize_per_coordinate(self):
        rng = np.random.default_rng(6)
        v = QuatVec.from_array(rng.standard_normal((4, 32)))
        np.testing.assert_allclose(v.normalize().magnitude(), 1.0, atol=1e-12)

    def test_normalize_zero_coordinate_raises(self):
        parts = np.ones((4, 3))
        parts[:, 1] = 0.0
        with pytest.raises(ZeroQuaternionError):
            QuatVec.from_array(parts).normalize()

    def test_conjugate_and_norm(self):
        rng = np.random.default_rng(7)
        v = QuatVec.from_array(rng.standard_normal((4, 6)))
        np.testing.assert_allclose(v.dot(v), v.norm_sq(), rtol=1e-15)
        np.testing.assert_array_equal(v.conjugate().a, v.a)
        np.testing.assert_array_equal(v.conjugate().b, -v.b)


@pytest.mark.parametrize("k", [1, 4, 32])
class TestAlgebraProperties:
    """Randomized identities on component-stacked arrays."""

    TRIALS = 10_000

    def _draw(self, k, seed, count=2):
        rng = np.random.default_rng(seed)
        return [rng.standard_normal((self.TRIALS, 4, k)) for _ in range(count)]

    def test_norm_multiplicativity(self, k):
        x, y = self._draw(k, seed=10)
        lhs = quat.magnitude(quat.hamilton(x, y))
        rhs = quat.magnitude(x) * quat.magnitude(y)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-9)

    def test_product_with_conjugate(self, k):
        (x,) = self._draw(k, seed=11, count=1)
        prod = quat.hamilton(x, quat.conjugate(x))
        np.testing.assert_allclose(prod[:, 0, :], quat.norm_sq(x), rtol=1e-9)
        np.testing.assert_allclose(prod[:, 1:, :], 0.0, atol=1e-9)

    def test_associativity(self, k):
        x, y, z = self._draw(k, seed=12, count=3)
        lhs = quat.hamilton(quat.hamilton(x, y), z)
        rhs = quat.hamilton(x, quat.hamilton(y, z))
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)

    def test_conjugate_involution(self, k):
        (x,) = self._draw(k, seed=13, count=1)
        np.testing.assert_array_equal(quat.conjugate(quat.conjugate(x)), x)

    def test_conjugate_reverses_products(self, k):
        x, y = self._draw(k, seed=14)
        lhs = quat.conjugate(quat.hamilton(x, y))
        rhs = quat.hamilton(quat.conjugate(y), quat.conjugate(x))
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)
