import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakvalues.core import HermitianOperator, Observable, PureState, path_amplitudes, strong_mean, weak_value
from weakvalues.errors import ForbiddenTransition, ValidationError
from weakvalues.solver import (
    TargetProblem,
    near_orthogonal_amplification,
    postselection_from_eta,
    solve_postselection,
    verify_target,
)

S = 1 / np.sqrt(2)
ZERO2 = HermitianOperator.zero(2)
SPIN = Observable([0.5, -0.5])


def eta_of(a, phi):
    return np.conj(phi.coeffs) * np.asarray(a)


class TestProblem:
    @pytest.mark.parametrize(
        "a, b",
        [([1, 0], [0, 1]), ([1, 1], [1, 1]), ([1, 1, 1], [0, 1, 2]), ([1, np.nan], [0, 1])],
    )
    def test_rejects(self, a, b):
        with pytest.raises(ValidationError):
            TargetProblem(a, b, 1.0)


class TestSolve:
    def test_eta_example(self):
        a = np.array([S, S])
        phi = solve_postselection(TargetProblem(a, SPIN.eigenvalues, 100.0))
        eta = eta_of(a, phi)
        assert eta[0] / eta[1] == pytest.approx(100.5 / -99.5, rel=1e-14)
        assert verify_target(PureState(a), phi, SPIN, 100.0) < 1e-10

    def test_endpoint_closes_path(self):
        a = np.array([0.6, 0.8j])
        phi = solve_postselection(TargetProblem(a, [2.0, -1.0], 2.0))
        assert phi.coeffs[1] == 0
        assert abs(weak_value(PureState(a), phi, ZERO2, 0.0, Observable([2.0, -1.0])) - 2.0) < 1e-15

    def test_complex_target(self):
        a = np.array([0.3 + 0.1j, -0.7])
        z = 3.0 - 4.0j
        phi = solve_postselection(TargetProblem(a, [1.0, 0.0], z))
        assert verify_target(PureState(a), phi, Observable([1.0, 0.0]), z) < 1e-13

    def test_phase_convention(self):
        phi = solve_postselection(TargetProblem([0.6, 0.8j], [1.0, 0.0], 0.3 + 0.2j))
        assert phi.coeffs[0].imag == 0 and phi.coeffs[0].real > 0
        assert np.linalg.norm(phi.coeffs) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("c", [2.0, -0.5, 1j, 3 - 4j])
    def test_gauge_freedom(self, c):
        a = np.array([0.6, 0.8j])
        eta = np.array([1.7 - 0.2j, 0.4j])
        p1 = postselection_from_eta(a, eta)
        p2 = postselection_from_eta(a, c * eta)
        assert np.allclose(p1.coeffs, p2.coeffs, atol=1e-15)

    def test_anomaly_certificate(self):
        a = np.array([S, S])
        phi = solve_postselection(TargetProblem(a, SPIN.eigenvalues, 100.0))
        paths = path_amplitudes(PureState(a), phi, ZERO2, 0.0)
        assert -0.5 <= strong_mean(paths, SPIN) <= 0.5
        assert weak_value(PureState(a), phi, ZERO2, 0.0, SPIN).real > 0.5

    def test_zero_eta(self):
        with pytest.raises(ValidationError):
            postselection_from_eta([1, 1], [0, 0])


class TestVerify:
    def test_exact(self):
        psi = PureState([0.6, 0.8])
        # phi = psi, Pi_1: weak value |a_1|^2
        assert verify_target(psi, psi, Observable([1, 0]), 0.36) < 1e-15

    def test_perturbed(self):
        psi = PureState([0.6, 0.8])
        th = 1e-6
        rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        r = verify_target(psi, PureState(rot @ psi.coeffs), Observable([1, 0]), 0.36)
        assert 0 < r < 1e-5

    def test_forbidden_reports_overlap(self):
        with pytest.raises(ForbiddenTransition, match="achieved"):
            verify_target(PureState([1, 1]), PureState([1, -1]), Observable([1, 0]), 5.0)


class TestAmplification:
    def test_epsilon_001(self):
        psi = PureState([S, S])
        phi, predicted = near_orthogonal_amplification(psi, SPIN, 0.01)
        assert predicted == pytest.approx(99.5, abs=1e-12)
        assert abs(weak_value(psi, phi, ZERO2, 0.0, SPIN) - predicted) < 1e-10

    def test_epsilon_one_gives_b1(self):
        psi = PureState([S, S])
        phi, predicted = near_orthogonal_amplification(psi, SPIN, 1.0)
        assert predicted == 0.5
        assert abs(weak_value(psi, phi, ZERO2, 0.0, SPIN) - 0.5) < 1e-15

    def test_overlap_linear_in_epsilon(self):
        psi = PureState([0.6, 0.8j])
        ratios = []
        for eps in (1e-2, 1e-3, 1e-4, 1e-5):
            phi, predicted = near_orthogonal_amplification(psi, SPIN, eps)
            ratios.append(abs(np.vdot(phi.coeffs, psi.coeffs)) / eps)
            assert predicted == pytest.approx(1.0 / eps - 0.5, rel=1e-14)
        assert np.ptp(ratios) < 1e-2 * ratios[0]

    @pytest.mark.parametrize("eps", [0.0, -0.1, 1.5])
    def test_rejects_epsilon(self, eps):
        with pytest.raises(ValidationError):
            near_orthogonal_amplification(PureState([S, S]), SPIN, eps)


def plugback_bound(a, b, z):
    # residual floor from representing phi in double precision; scales with the
    # conditioning |Z - B1| |Z - B2| / |B1 - B2| of the inverse problem
    eps = np.finfo(float).eps
    cond = abs(z - b[0]) * abs(z - b[1]) / abs(b[0] - b[1])
    skew = max(abs(a[0]) / abs(a[1]), abs(a[1]) / abs(a[0]))
    return 16 * eps * (1 + abs(z) + cond * skew)


finite = dict(allow_nan=False, allow_infinity=False)


@settings(max_examples=300, deadline=None)
@given(
    st.tuples(st.floats(0.05, 1), st.floats(0, 2 * np.pi), st.floats(0.05, 1), st.floats(0, 2 * np.pi)),
    st.tuples(st.floats(-1e3, 1e3, **finite), st.floats(-1e3, 1e3, **finite)).filter(
        lambda b: abs(b[0] - b[1]) >= 1e-3
    ),
    st.tuples(st.floats(-1e6, 1e6, **finite), st.floats(-1e6, 1e6, **finite)),
)
def test_plugback_within_conditioning_bound(mags, b, zparts):
    a = np.array([mags[0] * np.exp(1j * mags[1]), mags[2] * np.exp(1j * mags[3])])
    z = complex(*zparts)
    psi = PureState(a)
    phi = solve_postselection(TargetProblem(psi.coeffs, b, z))
    assert verify_target(psi, phi, Observable(b), z) <= plugback_bound(psi.coeffs, b, z)
