"""Quantum model tests: parameter counting, evaluation against 2x2
matrix-product oracles, parameter-shift exactness, band-limited Fourier
structure, and serialization."""

import numpy as np
import pytest

from fourierqml.errors import CapacityError
from fourierqml.qfflm import (
    AnsatzSpec,
    Parallel,
    Ring,
    Serial,
    ansatz_from_json,
    ansatz_to_json,
    coefficient_vector,
    evaluate,
    evaluate_batch,
    evaluate_sampled,
    fourier_coefficients,
    gradient_parameter_shift,
    init_parameters,
    param_count,
    values_and_jacobian,
)
from fourierqml.rng import make_rng
from fourierqml.spectra import EncodingSpec, exponential_weights


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def rz_matrix(a):
    return np.diag([np.exp(-0.5j * a), np.exp(+0.5j * a)])


def ry_matrix(a):
    c, s = np.cos(a / 2), np.sin(a / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def one_qubit_oracle(theta, x):
    """Matrix-product value of the 1-qubit parallel model.

    Flat layout: theta = (W1 RY, W1 RZ, W2 RY, W2 RZ); per-qubit layers
    apply RY first, then RZ.
    """
    w1 = rz_matrix(theta[1]) @ ry_matrix(theta[0])
    w2 = rz_matrix(theta[3]) @ ry_matrix(theta[2])
    psi = w2 @ rz_matrix(x) @ w1 @ np.array([1.0, 0.0])
    return float(abs(psi[0]) ** 2 - abs(psi[1]) ** 2)


def finite_difference(f, theta, h=1e-5):
    grad = np.zeros(len(theta))
    for k in range(len(theta)):
        up, down = theta.copy(), theta.copy()
        up[k] += h
        down[k] -= h
        grad[k] = (f(up) - f(down)) / (2 * h)
    return grad


ONE_QUBIT = AnsatzSpec(
    n_variables=1, n_qubits=1, n_layers=1,
    topology=Parallel(), encoding=exponential_weights(1),
)
# theta giving f(x) = -cos x: W1 = RY(pi/2), W2 = RY(pi/2)
MINUS_COS_THETA = np.array([np.pi / 2, 0.0, np.pi / 2, 0.0])


def sample_specs():
    """One spec per topology plus a multivariate parallel case."""
    return [
        AnsatzSpec(n_variables=1, n_qubits=2, n_layers=1,
                   topology=Parallel(), encoding=exponential_weights(2)),
        AnsatzSpec(n_variables=2, n_qubits=1, n_layers=2,
                   topology=Parallel(), encoding=exponential_weights(1),
                   rotation_params=3),
        AnsatzSpec(n_variables=3, n_qubits=1, n_layers=1,
                   topology=Serial(reuploads=2, encoders_per_block=1),
                   encoding=EncodingSpec(weights=(1, 3)), rotation_params=3),
        AnsatzSpec(n_variables=2, n_qubits=2, n_layers=1,
                   topology=Ring(reuploads=2),
                   encoding=EncodingSpec(weights=(1, 2)), rotation_params=3),
    ]


# ---------------------------------------------------------------------------
# parameter counting and validation
# ---------------------------------------------------------------------------

class TestParamCount:
    def test_four_qubit_parallel(self):
        spec = AnsatzSpec(n_variables=1, n_qubits=4, n_layers=1,
                          topology=Parallel(), encoding=exponential_weights(4))
        assert param_count(spec) == 16

    @pytest.mark.parametrize("layers", [1, 2, 9])
    def test_serial_molecular_count(self, layers):
        """Six qubits, three reupload blocks of two encoders each, Rot
        rotations: (1 + 3*2) trainable blocks of layers*6*3 angles."""
        spec = AnsatzSpec(n_variables=36, n_qubits=6, n_layers=layers,
                          topology=Serial(reuploads=3, encoders_per_block=2),
                          encoding=exponential_weights(3), rotation_params=3)
        assert param_count(spec) == 126 * layers

    @pytest.mark.parametrize("layers", [1, 2])
    def test_ring_count(self, layers):
        spec = AnsatzSpec(n_variables=8, n_qubits=8, n_layers=layers,
                          topology=Ring(reuploads=3),
                          encoding=exponential_weights(3), rotation_params=3)
        assert param_count(spec) == 96 * layers

    def test_parallel_capacity(self):
        with pytest.raises(CapacityError):
            AnsatzSpec(n_variables=5, n_qubits=5, n_layers=1,
                       topology=Parallel(), encoding=exponential_weights(5))

    def test_serial_feature_count_enforced(self):
        with pytest.raises(ValueError, match="3 features per qubit"):
            AnsatzSpec(n_variables=10, n_qubits=2, n_layers=1,
                       topology=Serial(reuploads=2, encoders_per_block=1),
                       encoding=EncodingSpec(weights=(1, 3)))

    def test_ring_feature_count_enforced(self):
        with pytest.raises(ValueError, match="one feature per qubit"):
            AnsatzSpec(n_variables=3, n_qubits=2, n_layers=1,
                       topology=Ring(reuploads=1),
                       encoding=EncodingSpec(weights=(1,)))

    def test_parallel_weights_per_qubit_enforced(self):
        with pytest.raises(ValueError, match="weight per qubit"):
            AnsatzSpec(n_variables=1, n_qubits=3, n_layers=1,
                       topology=Parallel(), encoding=exponential_weights(2))


class TestInitParameters:
    def test_deterministic_and_in_range(self):
        spec = sample_specs()[0]
        a = init_parameters(spec, make_rng(5))
        b = init_parameters(spec, make_rng(5))
        np.testing.assert_array_equal(a, b)
        assert a.shape == (param_count(spec),)
        assert np.all(a >= -np.pi) and np.all(a < np.pi)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

class TestEvaluate:
    @pytest.mark.parametrize("spec_idx", [0, 1, 3])
    def test_zero_parameters_give_one(self, spec_idx):
        """With all angles zero the trainable blocks reduce to CNOT
        arrays (which fix |0...0>) and Z-encodings only add phases, so
        <Z> = 1 exactly.  Holds for parallel and ring topologies; the
        serial topology encodes through Rot gates whose middle RY leaves
        the Z axis, so it is excluded by construction."""
        spec = sample_specs()[spec_idx]
        theta = np.zeros(param_count(spec))
        x = make_rng(1).uniform(-np.pi, np.pi, size=spec.n_variables)
        assert evaluate(spec, theta, x) == pytest.approx(1.0, abs=1e-12)

    def test_minus_cosine_construction(self):
        xs = np.linspace(-np.pi, np.pi, 41)
        for x in xs:
            assert evaluate(ONE_QUBIT, MINUS_COS_THETA, [x]) == pytest.approx(-np.cos(x), abs=1e-12)

    def test_matches_matrix_oracle(self):
        rng = make_rng(2)
        for _ in range(10):
            theta = rng.uniform(-np.pi, np.pi, size=4)
            x = float(rng.uniform(-np.pi, np.pi))
            assert evaluate(ONE_QUBIT, theta, [x]) == pytest.approx(
                one_qubit_oracle(theta, x), abs=1e-12
            )

    def test_periodicity(self):
        spec = AnsatzSpec(n_variables=1, n_qubits=4, n_layers=1,
                          topology=Parallel(), encoding=exponential_weights(4))
        theta = init_parameters(spec, make_rng(7))
        for x in (0.0, 1.3, -2.2):
            assert evaluate(spec, theta, [x]) == pytest.approx(
                evaluate(spec, theta, [x + 2 * np.pi]), abs=1e-12
            )

    def test_periodicity_per_variable(self):
        spec = sample_specs()[3]
        theta = init_parameters(spec, make_rng(8))
        x = np.array([0.4, -1.1])
        base = evaluate(spec, theta, x)
        for m in range(2):
            shifted = x.copy()
            shifted[m] += 2 * np.pi
            assert evaluate(spec, theta, shifted) == pytest.approx(base, abs=1e-12)

    def test_boundedness(self):
        rng = make_rng(3)
        for spec in sample_specs():
            theta = init_parameters(spec, rng)
            xs = rng.uniform(-np.pi, np.pi, size=(20, spec.n_variables))
            vals = evaluate_batch(spec, theta, xs)
            assert np.all(np.abs(vals) <= 1 + 1e-12)

    def test_argument_errors(self):
        with pytest.raises(ValueError):
            evaluate(ONE_QUBIT, np.zeros(3), [0.0])
        with pytest.raises(ValueError):
            evaluate(ONE_QUBIT, np.zeros(4), [0.0, 1.0])
        with pytest.raises(ValueError):
            evaluate(ONE_QUBIT, np.zeros(4), [np.nan])

    def test_batch_matches_single(self):
        spec = sample_specs()[0]
        theta = init_parameters(spec, make_rng(4))
        xs = make_rng(5).uniform(-np.pi, np.pi, size=(7, 1))
        batch = evaluate_batch(spec, theta, xs)
        for i in range(7):
            assert batch[i] == pytest.approx(evaluate(spec, theta, xs[i]), abs=1e-12)


class TestEvaluateSampled:
    def test_deterministic_state_is_exact(self):
        spec = sample_specs()[0]
        theta = np.zeros(param_count(spec))
        assert evaluate_sampled(spec, theta, [0.3], shots=17, rng=make_rng(0)) == 1.0

    def test_minus_one_estimate(self):
        est = evaluate_sampled(ONE_QUBIT, MINUS_COS_THETA, [0.0], shots=1_000_000, rng=make_rng(9))
        assert abs(est - (-1.0)) < 5e-3

    def test_seeded_repeatability(self):
        theta = init_parameters(ONE_QUBIT, make_rng(10))
        a = evaluate_sampled(ONE_QUBIT, theta, [0.7], shots=500, rng=make_rng(11))
        b = evaluate_sampled(ONE_QUBIT, theta, [0.7], shots=500, rng=make_rng(11))
        assert a == b


# ---------------------------------------------------------------------------
# gradients
# ---------------------------------------------------------------------------

class TestGradient:
    def test_zero_theta_matches_finite_difference(self):
        spec = sample_specs()[0]
        theta = np.zeros(param_count(spec))
        x = [0.9]
        shift = gradient_parameter_shift(spec, theta, x)
        fd = finite_difference(lambda t: evaluate(spec, t, x), theta)
        np.testing.assert_allclose(shift, fd, atol=1e-6)

    def test_single_trainable_angle(self):
        """In the -cos construction with W2's RY angle freed (flat index
        2), the matrix oracle gives f(theta; x=0) = -sin(theta): the
        gradient is 0 at theta = pi/2 and -1 at theta = 0."""
        at_half_pi = gradient_parameter_shift(ONE_QUBIT, MINUS_COS_THETA, [0.0])
        assert at_half_pi[2] == pytest.approx(0.0, abs=1e-12)
        theta = np.array([np.pi / 2, 0.0, 0.0, 0.0])
        at_zero = gradient_parameter_shift(ONE_QUBIT, theta, [0.0])
        assert at_zero[2] == pytest.approx(-1.0, abs=1e-12)
        # cross-check the whole gradient against the matrix oracle
        for th in (MINUS_COS_THETA, theta):
            fd = finite_difference(lambda t: one_qubit_oracle(t, 0.0), th.copy())
            np.testing.assert_allclose(
                gradient_parameter_shift(ONE_QUBIT, th, [0.0]), fd, atol=1e-6
            )

    @pytest.mark.parametrize("spec_idx", [0, 1, 2, 3])
    def test_shift_rule_equals_finite_difference(self, spec_idx):
        spec = sample_specs()[spec_idx]
        rng = make_rng(20 + spec_idx)
        for _ in range(3):
            theta = init_parameters(spec, rng)
            x = rng.uniform(-np.pi, np.pi, size=spec.n_variables)
            shift = gradient_parameter_shift(spec, theta, x)
            fd = finite_difference(lambda t: evaluate(spec, t, x), theta)
            np.testing.assert_allclose(shift, fd, atol=1e-6)

    def test_jacobian_rows_match_pointwise_gradients(self):
        spec = sample_specs()[3]
        theta = init_parameters(spec, make_rng(30))
        xs = make_rng(31).uniform(-np.pi, np.pi, size=(5, 2))
        values, jac = values_and_jacobian(spec, theta, xs)
        for i in range(5):
            assert values[i] == pytest.approx(evaluate(spec, theta, xs[i]), abs=1e-12)
            np.testing.assert_allclose(
                jac[i], gradient_parameter_shift(spec, theta, xs[i]), atol=1e-12
            )

    def test_sampled_jacobian_deterministic(self):
        spec = sample_specs()[0]
        theta = init_parameters(spec, make_rng(32))
        xs = np.array([[0.2], [1.4]])
        v1, j1 = values_and_jacobian(spec, theta, xs, shots=200, rng=make_rng(33))
        v2, j2 = values_and_jacobian(spec, theta, xs, shots=200, rng=make_rng(33))
        np.testing.assert_array_equal(v1, v2)
        np.testing.assert_array_equal(j1, j2)


# ---------------------------------------------------------------------------
# Fourier structure
# ---------------------------------------------------------------------------

class TestFourierCoefficients:
    def test_constant_model(self):
        spec = sample_specs()[0]
        theta = np.zeros(param_count(spec))
        fc = fourier_coefficients(spec, theta)
        mid = len(fc.supports[0]) // 2
        assert fc.values[mid] == pytest.approx(1.0, abs=1e-12)
        others = np.delete(fc.values, mid)
        assert np.abs(others).max() < 1e-12

    def test_minus_cosine_coefficients(self):
        fc = fourier_coefficients(ONE_QUBIT, MINUS_COS_THETA)
        np.testing.assert_array_equal(fc.supports[0], [-1, 0, 1])
        np.testing.assert_allclose(fc.values, [-0.5, 0.0, -0.5], atol=1e-12)

    @pytest.mark.parametrize("spec_idx", [0, 1, 2, 3])
    def test_band_limit_on_oversized_grid(self, spec_idx):
        """Out-of-band DFT mass must vanish: sampling well beyond the
        Nyquist grid exposes any frequency outside the predicted
        spectrum.  This also covers encoding-position independence,
        since serial/ring reuploads must land in the same lattice as a
        parallel encoding with the same weight multiset."""
        spec = sample_specs()[spec_idx]
        theta = init_parameters(spec, make_rng(40 + spec_idx))
        degrees = [s.d_f for s in spec.per_variable_spectra()]
        sizes = [4 * d + 3 for d in degrees]
        fc = fourier_coefficients(spec, theta, grid_sizes=sizes)
        assert fc.residual < 1e-10

    def test_reality(self):
        spec = sample_specs()[0]
        theta = init_parameters(spec, make_rng(41))
        fc = fourier_coefficients(spec, theta)
        assert fc.reality_deviation() < 1e-12

    def test_synthesis_matches_evaluate(self):
        for spec in sample_specs()[:2]:
            theta = init_parameters(spec, make_rng(42))
            fc = fourier_coefficients(spec, theta)
            xs = make_rng(43).uniform(-np.pi, np.pi, size=(50, spec.n_variables))
            np.testing.assert_allclose(
                fc.synthesize(xs), evaluate_batch(spec, theta, xs), atol=1e-9
            )

    def test_grid_capacity(self):
        spec = sample_specs()[3]
        theta = np.zeros(param_count(spec))
        with pytest.raises(CapacityError):
            fourier_coefficients(spec, theta, grid_sizes=[4001, 4001])

    def test_sub_nyquist_grid_rejected(self):
        with pytest.raises(ValueError, match="Nyquist"):
            fourier_coefficients(ONE_QUBIT, MINUS_COS_THETA, grid_sizes=2)


class TestCoefficientVector:
    def test_constant_model(self):
        spec = sample_specs()[0]
        vec = coefficient_vector(fourier_coefficients(spec, np.zeros(param_count(spec))))
        assert vec.shape == (9,)
        assert vec[0] == pytest.approx(1.0, abs=1e-12)
        assert np.abs(vec[1:]).max() < 1e-12

    def test_minus_cosine_vector(self):
        """-cos x = (-1/sqrt 2) * (sqrt 2 cos x): only the cos-1 feature
        (index 1) survives."""
        vec = coefficient_vector(fourier_coefficients(ONE_QUBIT, MINUS_COS_THETA))
        np.testing.assert_allclose(vec, [0.0, -1 / np.sqrt(2), 0.0], atol=1e-12)

    def test_univariate_round_trip(self):
        spec = sample_specs()[0]
        theta = init_parameters(spec, make_rng(50))
        vec = coefficient_vector(fourier_coefficients(spec, theta))
        xs = make_rng(51).uniform(-np.pi, np.pi, size=100)

        def features(x):
            phi = [1.0]
            for j in range(1, 5):
                phi.extend([np.sqrt(2) * np.cos(j * x), np.sqrt(2) * np.sin(j * x)])
            return np.array(phi)

        for x in xs:
            assert vec @ features(x) == pytest.approx(evaluate(spec, theta, [x]), abs=1e-9)

    def test_multivariate_round_trip(self):
        spec = sample_specs()[1]
        theta = init_parameters(spec, make_rng(52))
        vec = coefficient_vector(fourier_coefficients(spec, theta))
        assert vec.shape == (9,)

        def features_1d(x):
            return np.array([1.0, np.sqrt(2) * np.cos(x), np.sqrt(2) * np.sin(x)])

        xs = make_rng(53).uniform(-np.pi, np.pi, size=(100, 2))
        for x in xs:
            phi = np.kron(features_1d(x[0]), features_1d(x[1]))
            assert vec @ phi == pytest.approx(evaluate(spec, theta, x), abs=1e-9)

    def test_sparse_spectrum_rejected(self):
        spec = AnsatzSpec(n_variables=1, n_qubits=2, n_layers=1,
                          topology=Parallel(), encoding=EncodingSpec(weights=(1, 7)))
        theta = init_parameters(spec, make_rng(54))
        with pytest.raises(ValueError, match="dense"):
            coefficient_vector(fourier_coefficients(spec, theta))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

class TestSerialization:
    @pytest.mark.parametrize("spec_idx", [0, 1, 2, 3])
    def test_round_trip(self, spec_idx):
        spec = sample_specs()[spec_idx]
        assert ansatz_from_json(ansatz_to_json(spec)) == spec

    def test_version_checked(self):
        import json

        doc = json.loads(ansatz_to_json(ONE_QUBIT))
        doc["version"] = "ansatz-v9"
        with pytest.raises(ValueError, match="version"):
            ansatz_from_json(json.dumps(doc))

    def test_unknown_field_rejected(self):
        import json

        doc = json.loads(ansatz_to_json(ONE_QUBIT))
        doc["surprise"] = 1
        with pytest.raises(ValueError, match="unknown"):
            ansatz_from_json(json.dumps(doc))

    def test_missing_field_rejected(self):
        import json

        doc = json.loads(ansatz_to_json(ONE_QUBIT))
        del doc["n_layers"]
        with pytest.raises(ValueError, match="missing"):
            ansatz_from_json(json.dumps(doc))
