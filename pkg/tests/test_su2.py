import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwplates import su2


def rng_unitaries(n, seed=0):
    rng = np.random.default_rng(seed)
    return np.stack([su2.random_su2(rng) for _ in range(n)])


angles = st.floats(-10.0, 10.0, allow_nan=False)


class TestWaveplate:
    @given(angles, angles)
    def test_unit_determinant(self, delta, theta):
        u = su2.waveplate(delta, theta)
        det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
        assert abs(det - 1) < 1e-12

    @given(angles, angles)
    def test_unitary(self, delta, theta):
        assert su2.unitarity_defect(su2.waveplate(delta, theta)) < 1e-12

    def test_pi_periodic_in_theta(self):
        a = su2.waveplate(1.3, 0.4)
        b = su2.waveplate(1.3, 0.4 + np.pi)
        assert np.allclose(a, b, atol=1e-12)

    def test_full_wave_is_identity_up_to_sign(self):
        u = su2.waveplate(2 * np.pi, 0.7)
        assert np.allclose(u, -np.eye(2), atol=1e-12)

    def test_broadcasts(self):
        thetas = np.linspace(0, 3, 7)
        u = su2.waveplate(np.pi / 2, thetas)
        assert u.shape == (7, 2, 2)
        assert np.allclose(u[3], su2.waveplate(np.pi / 2, thetas[3]))


class TestPauli:
    def test_round_trip(self):
        for u in rng_unitaries(50):
            c = su2.pauli_decompose(u)
            assert np.allclose(su2.pauli_compose(c), u, atol=1e-13)

    def test_su2_components_structure(self):
        # with det = 1: c0 is real and c1..c3 are purely imaginary
        for u in rng_unitaries(20, seed=1):
            c = su2.pauli_decompose(su2.to_su2(u))
            assert abs(np.imag(c.c0)) < 1e-12
            for ck in (c.c1, c.c2, c.c3):
                assert abs(np.real(ck)) < 1e-12

    def test_identity(self):
        c = su2.pauli_decompose(np.eye(2, dtype=complex))
        assert np.allclose(c, [1, 0, 0, 0])


class TestMatrixPower:
    @given(st.integers(0, 200))
    @settings(max_examples=30, deadline=None)
    def test_matches_repeated_product(self, n):
        u = rng_unitaries(1, seed=42)[0]
        expected = np.linalg.matrix_power(u, n)
        assert np.allclose(su2.matrix_power(u, n), expected, atol=1e-10)

    def test_large_power_stays_unitary(self):
        u = rng_unitaries(1, seed=3)[0]
        p = su2.matrix_power(u, 100000)
        assert su2.unitarity_defect(p) < 1e-10

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            su2.matrix_power(np.eye(2, dtype=complex), -1)


class TestEigenphases:
    def test_identity(self):
        assert su2.eigenphases(np.eye(2, dtype=complex)) == pytest.approx((0.0, 0.0))

    def test_minus_identity(self):
        # the principal interval is (-pi, pi]: both phases sit at +pi
        ph = su2.eigenphases(-np.eye(2, dtype=complex))
        assert ph == pytest.approx((np.pi, np.pi))

    def test_diag(self):
        u = np.diag(np.exp(1j * np.array([0.3, -1.2])))
        ph = su2.eigenphases(u)
        assert ph == pytest.approx((0.3, -1.2))


class TestPhaseDistance:
    def test_global_phase_invariant(self):
        u = rng_unitaries(1, seed=9)[0]
        assert su2.phase_distance(u, np.exp(1.23j) * u) < 1e-12

    def test_positive_for_distinct(self):
        u = np.eye(2, dtype=complex)
        v = su2.waveplate(np.pi / 2, 0.0)
        assert su2.phase_distance(u, v) > 0.1


def test_non_unitary_rejected():
    with pytest.raises(su2.NonUnitaryError):
        su2._require_unitary(np.array([[1.0, 0.5], [0.0, 1.0]], dtype=complex))
