import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elgi.protocols import (
    MeasurementMode,
    Polarity,
    ProtocolConfig,
    analytic_joint2,
    analytic_joint3,
    ancilla_joint2,
    cnot,
    encode_check,
    joint2_circuit,
    joint3_circuit,
    marginalize,
    sep_probabilities,
)
from elgi.qcore import DensityMatrix, maximally_mixed, pure_state, rotation_unitary
from elgi.tables import ProbTable

from oracles import collapse_chain, qubit_pair_table, qubit_rotation, series_expm, spin_x

CIRCUIT_MODES = [MeasurementMode.CNOT, MeasurementMode.ANTI_CNOT, MeasurementMode.INRM]
COS2_PI8_HALF = 0.4267766952966369  # cos^2(pi/8) / 2
SIN2_PI8_HALF = 0.0732233047033631
P000_EQUAL_PI4 = 0.36427669529663687  # 0.5 cos^4(pi/8), from collapse_chain


def random_qubit(rng):
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def basis(bits):
    v = np.zeros(2 ** len(bits))
    v[int("".join(map(str, bits)), 2)] = 1
    return v


class TestSep:
    def test_mixed_state_is_unbiased(self):
        for theta in (0.0, 0.4, 2.0):
            np.testing.assert_allclose(sep_probabilities(maximally_mixed(2), theta).values, [0.5, 0.5])

    def test_ground_state(self):
        np.testing.assert_allclose(sep_probabilities(pure_state([1, 0]), 0.0).values, [1, 0])

    @pytest.mark.parametrize("theta", [0.3, math.pi / 3, 2.9])
    def test_rotated_ground_state(self, theta):
        u = qubit_rotation(theta).conj().T
        expected = np.abs(u @ [1, 0]) ** 2
        np.testing.assert_allclose(sep_probabilities(pure_state([1, 0]), theta).values, expected, atol=1e-14)
        np.testing.assert_allclose(expected, [math.cos(theta / 2) ** 2, math.sin(theta / 2) ** 2], atol=1e-14)

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            sep_probabilities(maximally_mixed(2), 0.1, s=1)


class TestCnot:
    def test_cnot_flips_on_one(self):
        np.testing.assert_array_equal(cnot() @ basis([1, 0]), basis([1, 1]))
        np.testing.assert_array_equal(cnot() @ basis([0, 0]), basis([0, 0]))

    def test_anti_cnot_flips_on_zero(self):
        anti = cnot(Polarity.ON_ZERO)
        np.testing.assert_array_equal(anti @ basis([0, 0]), basis([0, 1]))
        np.testing.assert_array_equal(anti @ basis([1, 0]), basis([1, 0]))

    @pytest.mark.parametrize("pol", list(Polarity))
    def test_involution(self, pol):
        np.testing.assert_array_equal(cnot(pol) @ cnot(pol), np.eye(4))


class TestEncode:
    def test_diagonal_state(self):
        np.testing.assert_allclose(encode_check(DensityMatrix(np.diag([0.3, 0.7]))).values, [0.3, 0.7])

    def test_mixed(self):
        np.testing.assert_allclose(encode_check(maximally_mixed(2)).values, [0.5, 0.5])

    def test_coherences_do_not_leak(self):
        rho = DensityMatrix(np.array([[0.5, -0.5j], [0.5j, 0.5]]))
        np.testing.assert_allclose(encode_check(rho).values, [0.5, 0.5], atol=1e-15)

    def test_random_states(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            rho = random_qubit(rng)
            assert np.abs(encode_check(rho).values - np.diag(rho.matrix).real).max() < 1e-10

    def test_rejects_qutrit(self):
        with pytest.raises(ValueError):
            encode_check(maximally_mixed(3))


class TestJoint2:
    @pytest.mark.parametrize("mode", CIRCUIT_MODES)
    def test_quarter_turn_uniform(self, mode):
        t = joint2_circuit(ProtocolConfig(0.5, (0.0, math.pi / 2), mode))
        np.testing.assert_allclose(t.values, np.full((2, 2), 0.25), atol=1e-14)

    @pytest.mark.parametrize("mode", CIRCUIT_MODES)
    def test_no_evolution_perfect_correlation(self, mode):
        t = joint2_circuit(ProtocolConfig(0.5, (0.3, 0.3), mode))
        np.testing.assert_allclose(t.values, [[0.5, 0], [0, 0.5]], atol=1e-14)

    @pytest.mark.parametrize("mode", CIRCUIT_MODES)
    def test_eighth_turn(self, mode):
        t = joint2_circuit(ProtocolConfig(0.5, (0.0, math.pi / 4), mode))
        expected = [[COS2_PI8_HALF, SIN2_PI8_HALF], [SIN2_PI8_HALF, COS2_PI8_HALF]]
        np.testing.assert_allclose(t.values, expected, atol=1e-12)
        np.testing.assert_allclose(qubit_pair_table(math.pi / 4), expected, atol=1e-15)

    def test_depends_only_on_angle_difference(self):
        a = joint2_circuit(ProtocolConfig(0.5, (0.2, 1.0, 1.4), MeasurementMode.INRM), 0, 2)
        b = joint2_circuit(ProtocolConfig(0.5, (0.0, 1.2), MeasurementMode.INRM))
        assert a.allclose(b, 1e-12)

    def test_circuit_vs_analytic_random(self):
        rng = np.random.default_rng(12)
        for theta in rng.uniform(-2 * math.pi, 2 * math.pi, 50):
            ref = analytic_joint2(0.5, theta)
            np.testing.assert_allclose(ref.values, qubit_pair_table(theta), atol=1e-12)
            for mode in CIRCUIT_MODES:
                t = joint2_circuit(ProtocolConfig(0.5, (0.0, theta), mode))
                assert np.abs(t.values - ref.values).max() < 1e-9
                assert abs(t.mass - 1) < 1e-9

    def test_modes_agree_for_general_input_state(self):
        # any system state: ancilla copies are complete projective measurements in every mode
        rng = np.random.default_rng(13)
        for _ in range(10):
            rho = random_qubit(rng)
            config = ProtocolConfig(0.5, (0.4, 1.3), MeasurementMode.CNOT)
            tables = [joint2_circuit(ProtocolConfig(0.5, config.angles, m), rho_s=rho) for m in CIRCUIT_MODES]
            u1 = qubit_rotation(0.4).conj().T
            u12 = qubit_rotation(0.9).conj().T
            expected = np.zeros((2, 2))
            for a in range(2):
                proj = np.zeros((2, 2))
                proj[a, a] = 1
                branch = proj @ u1 @ rho.matrix @ u1.conj().T @ proj
                expected[a] = np.diag(u12 @ branch @ u12.conj().T).real
            for t in tables:
                np.testing.assert_allclose(t.values, expected, atol=1e-12)

    def test_rejects_higher_spin(self):
        with pytest.raises(ValueError):
            joint2_circuit(ProtocolConfig(1, (0.0, 0.5), MeasurementMode.CNOT))

    def test_rejects_bad_indices(self):
        with pytest.raises(ValueError):
            joint2_circuit(ProtocolConfig(0.5, (0.0, 0.5), MeasurementMode.CNOT), 1, 0)

    def test_rejects_bad_mode(self):
        with pytest.raises(ValueError):
            ProtocolConfig(0.5, (0.0, 0.5), "weak")

    def test_rejects_non_monotone_angles(self):
        with pytest.raises(ValueError):
            ProtocolConfig(0.5, (0.0, 0.5, 0.2))

    def test_ancilla_readout_matches_direct(self):
        for theta in (0.0, 0.3, math.pi / 4, 2.0):
            config = ProtocolConfig(0.5, (0.0, theta, 2 * theta), MeasurementMode.CNOT)
            assert ancilla_joint2(config).allclose(analytic_joint2(0.5, theta), 1e-12)


class TestAnalytic:
    def test_eq_table(self):
        t = analytic_joint2(0.5, math.pi / 4)
        np.testing.assert_allclose(t.flat(), [0.426777, 0.073223, 0.073223, 0.426777], atol=5e-7)

    @pytest.mark.parametrize("s", [0.5, 1, 1.5, 2])
    def test_zero_rotation_diagonal(self, s):
        d = int(2 * s) + 1
        np.testing.assert_allclose(analytic_joint2(s, 0.0).values, np.eye(d) / d, atol=1e-15)

    def test_spin_one_half_turn_reverses(self):
        t = analytic_joint2(1, math.pi).values
        expected = np.fliplr(np.eye(3)) / 3
        np.testing.assert_allclose(t, expected, atol=1e-12)
        u = series_expm(1j * math.pi * spin_x(1))
        np.testing.assert_allclose(np.abs(u.T) ** 2 / 3, expected, atol=1e-12)

    @pytest.mark.parametrize("s", [0.5, 1, 1.5])
    def test_matches_collapse_chain(self, s):
        d = int(2 * s) + 1
        rng = np.random.default_rng(14)
        for t1, t2, t3 in np.sort(rng.uniform(0, 4, size=(10, 3)), axis=1):
            steps = [series_expm(-1j * (t2 - t1) * spin_x(s)), series_expm(-1j * (t3 - t2) * spin_x(s))]
            np.testing.assert_allclose(analytic_joint3(s, t1, t2, t3).values, collapse_chain(steps, d), atol=1e-12)

    def test_three_time_eighth_turns(self):
        t = analytic_joint3(0.5, 0.0, math.pi / 4, math.pi / 2)
        assert t.values[0, 0, 0] == pytest.approx(P000_EQUAL_PI4, abs=1e-12)
        assert t.values[0, 0, 0] == pytest.approx(0.364277, abs=5e-7)

    def test_three_time_no_first_step(self):
        t = analytic_joint3(0.5, 0.0, 0.0, 1.1).values
        for q1, q2, q3 in np.ndindex(2, 2, 2):
            if q1 != q2:
                assert t[q1, q2, q3] == 0

    def test_three_time_sums_to_one(self):
        rng = np.random.default_rng(15)
        for angles in np.sort(rng.uniform(-3, 3, size=(20, 3)), axis=1):
            assert abs(analytic_joint3(1.5, *angles).values.sum() - 1) < 1e-12


class TestJoint3Circuit:
    def test_equal_angles(self):
        t = joint3_circuit(ProtocolConfig(0.5, (0.7, 0.7, 0.7), MeasurementMode.CNOT)).values
        expected = np.zeros((2, 2, 2))
        expected[0, 0, 0] = expected[1, 1, 1] = 0.5
        np.testing.assert_allclose(t, expected, atol=1e-14)

    def test_quarter_turn_steps_uniform(self):
        t = joint3_circuit(ProtocolConfig(0.5, (0.0, math.pi / 2, math.pi), MeasurementMode.CNOT))
        np.testing.assert_allclose(t.values, np.full((2, 2, 2), 1 / 8), atol=1e-14)

    def test_eighth_turn_steps(self):
        t = joint3_circuit(ProtocolConfig(0.5, (0.0, math.pi / 4, math.pi / 2), MeasurementMode.CNOT))
        assert t.values[0, 0, 0] == pytest.approx(P000_EQUAL_PI4, abs=1e-12)

    @pytest.mark.parametrize("mode", CIRCUIT_MODES)
    def test_matches_analytic_random(self, mode):
        rng = np.random.default_rng(16)
        for angles in np.sort(rng.uniform(-3, 3, size=(15, 3)), axis=1):
            circ = joint3_circuit(ProtocolConfig(0.5, tuple(angles), mode))
            assert np.abs(circ.values - analytic_joint3(0.5, *angles).values).max() < 1e-9

    def test_wrong_angle_count(self):
        with pytest.raises(ValueError):
            joint3_circuit(ProtocolConfig(0.5, (0.0, 1.0), MeasurementMode.CNOT))


class TestMarginalize:
    def test_adjacent_pairs_reproduce_direct(self):
        t = analytic_joint3(0.5, 0.0, math.pi / 4, math.pi / 2)
        ref = analytic_joint2(0.5, math.pi / 4)
        assert np.abs(marginalize(t, (0, 1)).values - ref.values).max() < 1e-10
        assert np.abs(marginalize(t, (1, 2)).values - ref.values).max() < 1e-10

    def test_outer_pair_mismatch(self):
        t = analytic_joint3(0.5, 0.0, math.pi / 4, math.pi / 2)
        derived = marginalize(t, (0, 2)).values[0, 0]
        direct = analytic_joint2(0.5, math.pi / 2).values[0, 0]
        oracle = collapse_chain([qubit_rotation(math.pi / 4)] * 2, 2).sum(axis=1)[0, 0]
        assert derived == pytest.approx(0.375, abs=1e-12)
        assert oracle == pytest.approx(0.375, abs=1e-12)
        assert direct == pytest.approx(0.25, abs=1e-12)

    def test_uniform(self):
        u = ProbTable(np.full((2, 2, 2), 1 / 8))
        for pair in ((0, 1), (1, 2), (0, 2)):
            np.testing.assert_allclose(marginalize(u, pair).values, np.full((2, 2), 0.25))

    def test_preserves_mass(self):
        t = ProbTable(np.full((2, 2, 2), 0.05), 0.4)
        assert marginalize(t, (0, 2)).mass == pytest.approx(0.4)

    def test_invalid(self):
        t = ProbTable(np.full((2, 2, 2), 1 / 8))
        with pytest.raises(ValueError):
            marginalize(t, (2, 0))
        with pytest.raises(ValueError):
            marginalize(analytic_joint2(0.5, 0.1), (0, 1))

    @settings(max_examples=60, deadline=None)
    @given(st.floats(-math.pi, math.pi))
    def test_outer_mismatch_closed_form(self, theta):
        t = analytic_joint3(0.5, 0.0, theta, 2 * theta)
        gap = marginalize(t, (0, 2)).values[0, 0] - analytic_joint2(0.5, 2 * theta).values[0, 0]
        assert abs(gap - math.sin(theta) ** 2 / 4) < 1e-9
        for pair in ((0, 1), (1, 2)):
            assert marginalize(t, pair).allclose(analytic_joint2(0.5, theta), 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(-20, 20))
def test_sign_of_rotation_irrelevant(theta):
    for s in (0.5, 1, 1.5):
        assert analytic_joint2(s, theta).allclose(analytic_joint2(s, -theta), 1e-10)
    u_plus = rotation_unitary(0.5, theta)
    u_minus = rotation_unitary(0.5, -theta)
    np.testing.assert_allclose(np.abs(u_plus) ** 2, np.abs(u_minus) ** 2, atol=1e-12)
