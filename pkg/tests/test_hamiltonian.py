import math

import numpy as np
import pytest

from neklab.hamiltonian import (
    PhasePoint,
    SystemSpec,
    action_distance,
    actions,
    check_structural_hypotheses,
    hamiltonian_value,
    lambda_quadratic_matrix,
    matrix_l1_operator_norm,
    symplectic_matrix,
    total_polynomial,
    vector_field,
)
from neklab.polyalg import Polynomial, parse_polynomial
from tests.conftest import random_polynomial


def make_spec(n=2, N=1, alpha=(1.0, 2.0), kappa=0.0, f=None, Lambda=None,
              A=None, M=2.0):
    f = f if f is not None else Polynomial.zero(n, N)
    if Lambda is None:
        terms = {}
        for i in range(2 * n, 2 * n + 2 * N):
            key = tuple(2 if j == i else 0 for j in range(2 * n + 2 * N))
            terms[key] = 0.5
        Lambda = Polynomial(n, N, terms)
    A = np.eye(n) if A is None else np.asarray(A, dtype=float)
    return SystemSpec(n=n, N=N, alpha=np.asarray(alpha, dtype=float), A=A,
                      I0=np.zeros(n), f=f, Lambda=Lambda, kappa=kappa, M=M)


class TestActions:
    def test_componentwise(self):
        pt = PhasePoint(np.array([1.0, 0.0, 0.0, 2.0]), np.zeros(0))
        assert actions(pt) == pytest.approx([0.5, 2.0])

    def test_zero(self):
        pt = PhasePoint(np.zeros(4), np.zeros(2))
        assert np.all(actions(pt) == 0.0)

    def test_lipschitz_estimate(self, rng):
        # |I(z~) - I(z)|_1 <= |z~ - z| (|z~| + |z|) / 2 on random pairs
        n = 3
        for _ in range(10_000):
            z1 = rng.normal(size=2 * n) * 2.0
            z2 = rng.normal(size=2 * n) * 2.0
            p1 = PhasePoint(z1, np.zeros(0))
            p2 = PhasePoint(z2, np.zeros(0))
            lhs = action_distance(actions(p1), actions(p2))
            rhs = 0.5 * np.linalg.norm(z1 - z2) * (
                np.linalg.norm(z1) + np.linalg.norm(z2))
            assert lhs <= rhs * (1 + 1e-12)


class TestActionDistance:
    def test_zero(self):
        assert action_distance([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_l1(self):
        assert action_distance([1.0, 0.0], [0.0, 1.0]) == 2.0

    def test_matches_naive(self, rng):
        for _ in range(100):
            I = rng.normal(size=4)
            J = rng.normal(size=4)
            assert action_distance(I, J) == pytest.approx(
                sum(abs(a - b) for a, b in zip(I, J)))

    def test_triangle(self, rng):
        for _ in range(100):
            I, J, K = rng.normal(size=(3, 3))
            assert action_distance(I, K) <= \
                action_distance(I, J) + action_distance(J, K) + 1e-12

    def test_mismatch(self):
        with pytest.raises(ValueError):
            action_distance([1.0], [1.0, 2.0])


class TestHamiltonianValue:
    def test_zero_point(self):
        spec = make_spec()
        pt = PhasePoint(np.zeros(4), np.zeros(2))
        assert hamiltonian_value(spec, pt) == 0.0

    def test_quadratic_form_by_hand(self):
        # f = 0, kappa = 0, A = id, alpha = (1,1), I = (0.5, 0.5)
        spec = make_spec(alpha=(1.0, 1.0))
        pt = PhasePoint(np.array([1.0, 1.0, 0.0, 0.0]), np.zeros(2))
        assert hamiltonian_value(spec, pt) == pytest.approx(1.0 + 0.25)

    def test_matches_total_polynomial(self, rng):
        f = random_polynomial(rng, 2, 1, 5, 10, scale=0.1)
        spec = make_spec(f=f, kappa=0.3)
        for _ in range(20):
            pt = PhasePoint(rng.normal(size=4), rng.normal(size=2))
            direct = hamiltonian_value(spec, pt)
            poly = total_polynomial(spec).evaluate(pt)
            assert direct == pytest.approx(poly, rel=1e-12, abs=1e-12)


class TestVectorField:
    def test_rotation_at_unit_point(self):
        # H = I1: at (x1, y1) = (1, 0) the field is (0, -1)
        spec = make_spec(n=1, N=0, alpha=(1.0,), A=np.zeros((1, 1)),
                         Lambda=Polynomial.zero(1, 0))
        vf = vector_field(spec, PhasePoint(np.array([1.0, 0.0]), np.zeros(0)))
        assert vf == pytest.approx([0.0, -1.0])

    def test_constant_hamiltonian(self):
        spec = make_spec(n=1, N=0, alpha=(0.0,), A=np.zeros((1, 1)),
                         f=Polynomial.constant(1, 0, 5.0),
                         Lambda=Polynomial.zero(1, 0))
        vf = vector_field(spec, PhasePoint(np.array([0.3, -0.2]), np.zeros(0)))
        assert np.all(vf == 0.0)

    def test_matches_finite_differences(self, rng):
        f = random_polynomial(rng, 2, 1, 4, 8, scale=0.1)
        spec = make_spec(f=f, kappa=0.2)
        S = symplectic_matrix(2, 1)
        for _ in range(5):
            pt = PhasePoint(rng.normal(size=4) * 0.5, rng.normal(size=2) * 0.5)
            vf = vector_field(spec, pt)
            vec = pt.as_array()
            h = 1e-6
            grad = np.zeros(6)
            for i in range(6):
                e = np.zeros(6)
                e[i] = h
                hp = hamiltonian_value(spec, PhasePoint.from_array(vec + e, 2, 1))
                hm = hamiltonian_value(spec, PhasePoint.from_array(vec - e, 2, 1))
                grad[i] = (hp - hm) / (2 * h)
            assert np.max(np.abs(vf - S @ grad)) < 1e-6

    def test_bracket_consistency(self, rng):
        # evaluate({F, H}, pt) = <grad F(pt), field(pt)>
        f = random_polynomial(rng, 2, 1, 4, 8, scale=0.1)
        spec = make_spec(f=f, kappa=0.1)
        H = total_polynomial(spec)
        F = random_polynomial(rng, 2, 1, 3, 8)
        bracket = F.poisson(H)
        for _ in range(10):
            pt = PhasePoint(rng.normal(size=4) * 0.6, rng.normal(size=2) * 0.6)
            lhs = bracket.evaluate(pt)
            grad = np.array([g.evaluate(pt.as_array()) for g in F.gradient()])
            rhs = float(grad @ vector_field(spec, pt))
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)

    def test_actions_are_first_integrals(self):
        # f = 0, kappa = 0: {I_j, H} = 0 coefficient-exact
        from neklab.polyalg import action_polynomial

        spec = make_spec(alpha=(1.3, -0.7), kappa=0.0)
        H = total_polynomial(spec)
        for j in range(2):
            assert action_polynomial(2, 1, j).poisson(H).is_zero()


class TestSpecValidation:
    def test_asymmetric_A_rejected(self):
        with pytest.raises(ValueError):
            make_spec(A=[[1.0, 0.5], [0.0, 1.0]])

    def test_negative_kappa_rejected(self):
        with pytest.raises(ValueError):
            make_spec(kappa=-0.1)

    def test_lambda_must_be_transverse(self):
        bad = parse_polynomial("x1^2", 2, 1)
        with pytest.raises(ValueError):
            make_spec(Lambda=bad)

    def test_l1_operator_norm(self):
        A = np.array([[1.0, -2.0], [3.0, 0.5]])
        assert matrix_l1_operator_norm(A) == pytest.approx(4.0)


class TestStructuralHypotheses:
    def test_identity_A_certified(self):
        # A = id, n = 2, M = 2: lambda_min = 1 >= n/M = 1
        spec = make_spec(M=2.0)
        rep = check_structural_hypotheses(spec)
        assert rep.checks[0].passed

    def test_exact_quadratic_lambda_certified(self):
        spec = make_spec(kappa=1.0)
        rep = check_structural_hypotheses(spec)
        assert rep.all_passed

    def test_negative_lambda_violates_with_witness(self):
        n, N = 1, 1
        terms = {
            (0, 0, 2, 0): -1.0,
            (0, 0, 0, 2): -1.0,
        }
        Lam = Polynomial(n, N, terms)
        spec = make_spec(n=1, N=1, alpha=(1.0,), A=np.eye(1), Lambda=Lam, M=1.0)
        rep = check_structural_hypotheses(spec)
        lower = [c for c in rep.checks if "zeta|^2/2" in c.name and ">=" in c.name]
        assert lower and not lower[0].passed
        assert lower[0].witness is not None
        # the witness indeed violates the inequality
        w = lower[0].witness
        val = Lam.evaluate(w)
        zeta_sq = float(np.sum(w[2:] ** 2))
        assert val < 0.5 * zeta_sq

    def test_lambda_matrix_extraction(self):
        spec = make_spec()
        Q = lambda_quadratic_matrix(spec.Lambda, spec.N)
        assert Q is not None
        assert np.allclose(Q, np.eye(2))

    def test_nonquadratic_lambda_sampled(self):
        # Lambda = |zeta|^2/2 + zeta^4-type term stays above |zeta|^2/2
        n, N = 1, 1
        terms = {(0, 0, 2, 0): 0.5, (0, 0, 0, 2): 0.5, (0, 0, 4, 0): 0.1}
        spec = make_spec(n=1, N=1, alpha=(1.0,), A=np.eye(1),
                         Lambda=Polynomial(n, N, terms), M=1.0)
        spec.C_Lambda = 3.0
        rep = check_structural_hypotheses(spec, samples=2000)
        lower = [c for c in rep.checks if ">= |zeta|^2/2" in c.name]
        assert lower and lower[0].passed
