import math

import numpy as np
import pytest

from neklab.diophantine import (
    approximate_periodic_orbit,
    dirichlet_best,
    periodic_frequency,
)

TWO_PI = 2.0 * math.pi


def brute_force_dirichlet(omega, Q, window=2):
    """Independent double loop over q and all integer p near q*omega."""
    omega = np.asarray(omega, dtype=float)
    best = None
    for q in range(1, Q + 1):
        target = q * omega
        base = np.floor(target).astype(int)
        # enumerate all p with components in [base - window, base + window]
        ranges = [range(b - window, b + window + 1) for b in base]
        import itertools

        for p in itertools.product(*ranges):
            err = float(np.max(np.abs(target - np.array(p))))
            if best is None or err < best[2] - 1e-18:
                best = (q, np.array(p), err)
    return best


class TestDirichletBest:
    def test_rational_frequency(self):
        q, p, err = dirichlet_best(np.array([0.5]), 2)
        assert (q, p[0], err) == (2, 1, 0.0)

    def test_golden_ratio(self):
        q, p, err = dirichlet_best(np.array([1.6180339887]), 5)
        assert q == 5 and p[0] == 8
        assert err == pytest.approx(0.0902, abs=1e-4)

    def test_dirichlet_bound_random(self, rng):
        # err <= Q^(-1/n) on 100 seeded random draws
        for _ in range(100):
            n = int(rng.integers(2, 4))
            omega = rng.uniform(-5.0, 5.0, size=n)
            Q = int(rng.integers(2, 51))
            _, _, err = dirichlet_best(omega, Q)
            assert err <= Q ** (-1.0 / n) + 1e-12

    def test_matches_brute_force(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 4))
            omega = rng.uniform(-5.0, 5.0, size=n)
            Q = int(rng.integers(1, 30))
            got = dirichlet_best(omega, Q)
            want = brute_force_dirichlet(omega, Q)
            assert got[0] == want[0]
            assert np.array_equal(got[1], want[1])
            assert got[2] == pytest.approx(want[2], abs=1e-15)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            dirichlet_best(np.array([1.0]), 0)
        with pytest.raises(ValueError):
            dirichlet_best(np.zeros(0), 3)


class TestPeriodicFrequency:
    def test_integer_vector_is_kept(self):
        omega0, T = periodic_frequency(np.array([1.0, 2.0]), 7)
        assert omega0 == pytest.approx([1.0, 2.0])
        assert T == pytest.approx(TWO_PI)

    def test_sqrt2_example(self):
        omega = np.array([math.sqrt(2.0), 2.0])
        omega0, T = periodic_frequency(omega, 10)
        assert T == pytest.approx(10 * math.pi)
        assert omega0 == pytest.approx([1.4, 2.0])
        err = abs(omega[0] - omega0[0])
        assert err == pytest.approx(0.014213562, abs=1e-8)
        assert err <= TWO_PI / (T * 10.0)

    def test_exact_resonance_recovered(self, rng):
        # omega1/omega2 = p/q in lowest terms with p <= q (so omega2 is the
        # anchored largest component), Q >= q -> zero error
        for _ in range(20):
            q = int(rng.integers(1, 9))
            p = int(rng.integers(1, q + 1))
            g = math.gcd(p, q)
            p, q = p // g, q // g
            w2 = float(rng.uniform(1.5, 6.0))
            omega = np.array([w2 * p / q, w2])
            omega0, T = periodic_frequency(omega, max(q, 1))
            assert np.max(np.abs(omega - omega0)) < 1e-12

    def test_postconditions_random(self, rng):
        # T*omega0 in 2*pi*Z^n to 1e-9, T in range, error bound (9.2)
        for _ in range(100):
            n = int(rng.integers(2, 4))
            omega = rng.uniform(-10.0, 10.0, size=n)
            if np.max(np.abs(omega)) <= 1.0:
                omega[0] = 1.5
            Q = int(rng.integers(2, 40))
            omega0, T = periodic_frequency(omega, Q)
            turns = T * omega0 / TWO_PI
            assert np.max(np.abs(turns - np.rint(turns))) * TWO_PI < 1e-9
            winf = np.max(np.abs(omega))
            assert TWO_PI * (1 - 1 / winf) - 1e-12 <= T <= TWO_PI * Q + 1e-12
            err = np.max(np.abs(omega - omega0))
            assert err <= TWO_PI / (T * Q ** (1.0 / (n - 1))) + 1e-12

    def test_n1_direct_rational(self):
        omega0, T = periodic_frequency(np.array([2.5]), 2)
        assert T * omega0[0] / TWO_PI == pytest.approx(round(T * omega0[0] / TWO_PI))
        assert abs(omega0[0] - 2.5) <= 1.0 / 2.0

    def test_small_frequency_rejected(self):
        with pytest.raises(ValueError):
            periodic_frequency(np.array([0.5, 0.2]), 5)


class TestApproximatePeriodicOrbit:
    def test_symmetric_exact_resonance(self):
        # alpha = (1,1), A = id, equal actions: omega is exactly resonant
        alpha = np.array([1.0, 1.0])
        A = np.eye(2)
        I = np.array([0.005, 0.005])
        approx = approximate_periodic_orbit(alpha, A, I, 0.25)
        assert approx.omega0 == pytest.approx([1.005, 1.005])
        assert approx.I0 == pytest.approx(I)
        assert approx.tau == pytest.approx(200 * math.pi / 100.5)
        turns = approx.T * approx.omega0 / TWO_PI
        assert np.max(np.abs(turns - np.rint(turns))) < 1e-12

    def test_integer_alpha_symmetric_actions_identity(self, rng):
        for _ in range(10):
            alpha = rng.integers(1, 5, size=2).astype(float)
            alpha[1] = alpha[0]
            Ival = float(rng.uniform(0.001, 0.01))
            approx = approximate_periodic_orbit(
                alpha, np.eye(2), np.array([Ival, Ival]), 0.25)
            assert approx.I0 == pytest.approx([Ival, Ival], abs=1e-14)

    def test_postconditions_random(self, rng):
        # (i) |I - I0|_inf <= 2 pi |A^-1| theta^(2+a)/tau, (ii) tau range,
        # (iii) T omega0 in 2 pi Z^n
        a = 0.25
        count = 0
        for _ in range(100):
            n = 2
            alpha = rng.uniform(1.0, 4.0, size=n)
            B = rng.normal(size=(n, n)) * 0.3
            A = B @ B.T + np.eye(n)
            I = rng.uniform(0.001, 0.01, size=n)
            approx = approximate_periodic_orbit(alpha, A, I, a)
            theta = approx.theta
            C = TWO_PI * np.linalg.norm(np.linalg.inv(A), ord=np.inf)
            gap = np.max(np.abs(I - approx.I0))
            assert gap <= C * theta ** (2 + a) / approx.tau + 1e-12
            assert math.pi <= approx.tau <= 4 * math.pi * theta ** (-a * (n - 1)) + 1e-9
            turns = approx.T * approx.omega0 / TWO_PI
            assert np.max(np.abs(turns - np.rint(turns))) * TWO_PI < 1e-9
            count += 1
        assert count == 100

    def test_zero_actions_rejected(self):
        with pytest.raises(ValueError):
            approximate_periodic_orbit(np.ones(2), np.eye(2), np.zeros(2), 0.25)

    def test_singular_A_rejected(self):
        with pytest.raises(ValueError):
            approximate_periodic_orbit(np.ones(2), np.zeros((2, 2)),
                                       np.array([0.01, 0.01]), 0.25)

    def test_large_theta_warns(self):
        with pytest.warns(UserWarning):
            approximate_periodic_orbit(np.array([1.0, 1.0]), np.eye(2),
                                       np.array([0.5, 0.5]), 0.25)
