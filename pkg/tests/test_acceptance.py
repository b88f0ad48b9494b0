"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and timings.  The long-horizon scaling study (criterion 8) dominates
the runtime; everything else finishes in seconds.
"""

import dataclasses
import itertools
import math
import time
import warnings

import numpy as np
import pytest

from neklab.diophantine import (
    approximate_periodic_orbit,
    dirichlet_best,
    periodic_frequency,
)
from neklab.experiments import (
    constrained_limit_study,
    desk_normalform_system,
    desk_system,
    measure_drift,
    sampled_initial_point,
    smallkappa_scaling_study,
)
from neklab.hamiltonian import PhasePoint, SystemSpec, symplectic_matrix
from neklab.integrator import default_dt, integrate, step
from neklab.normalform import (
    AveragingContext,
    build_h,
    exact_flow_h,
    homological_generator,
    iterate_normal_form,
    one_step,
    parameter_recipe,
    quadrature_average,
    resonant_average,
    stability_constants,
)
from neklab.polyalg import Polynomial, constant, coordinate
from tests.conftest import random_polynomial

TWO_PI = 2.0 * math.pi


def report(num, name, passed, started, budget):
    elapsed = time.time() - started
    status = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {num} [{name}] {status} ({elapsed:.1f}s, budget {budget})")
    assert passed, f"criterion {num} ({name}) failed"
    assert elapsed < budget_seconds(budget), \
        f"criterion {num} exceeded its runtime budget {budget}"


def budget_seconds(text):
    value, unit = text.split()
    mult = {"s": 1.0, "min": 60.0}[unit]
    return float(value) * mult


def nf_pipeline(theta=0.2, a=0.125):
    """Desk normal-form system -> periodic orbit -> recipe -> context."""
    spec = desk_normalform_system(N=1)
    kappa = theta ** (2.0 + 2.0 * a * (2 * spec.n - 1))
    spec = dataclasses.replace(spec, kappa=kappa)
    I_init = np.full(spec.n, theta ** 2 / spec.n)
    approx = approximate_periodic_orbit(spec.alpha, spec.A, I_init, a)
    rec = parameter_recipe(theta, a, spec.n, spec.norm_A(), spec.C0,
                           spec.M, spec.C_Lambda, approx.tau)
    ctx = AveragingContext(
        omega0=approx.omega0, T=approx.T, I0=approx.I0, A=spec.A,
        kappa=spec.kappa, radii=(rec.r1, rec.r2, rec.r3), m=rec.m)
    return spec, approx, rec, ctx


def test_criterion_1_dirichlet_bound():
    started = time.time()
    rng = np.random.default_rng(101)
    ok = True
    for _ in range(100):
        n = int(rng.integers(2, 4))
        omega = rng.uniform(-5.0, 5.0, size=n)
        Q = int(rng.integers(2, 51))
        q, p, err = dirichlet_best(omega, Q)
        if err > Q ** (-1.0 / n) + 1e-12:
            ok = False
        # independent brute-force double loop over q and nearby p
        best = None
        for qq in range(1, Q + 1):
            target = qq * omega
            base = np.floor(target).astype(int)
            for cand in itertools.product(*[range(b - 1, b + 2) for b in base]):
                e = float(np.max(np.abs(target - np.array(cand))))
                if best is None or e < best[2] - 1e-18:
                    best = (qq, np.array(cand), e)
        if q != best[0] or not np.array_equal(p, best[1]) or err != best[2]:
            ok = False
    report(1, "Dirichlet bound", ok, started, "5 s")


def test_criterion_2_periodicity():
    started = time.time()
    rng = np.random.default_rng(202)
    ok = True
    # periodic_frequency: T*omega0 within 1e-9 per component of 2*pi*Z^n
    for _ in range(100):
        n = int(rng.integers(2, 4))
        omega = rng.uniform(-8.0, 8.0, size=n)
        if np.max(np.abs(omega)) <= 1.0:
            omega[0] = 2.0
        Q = int(rng.integers(2, 40))
        omega0, T = periodic_frequency(omega, Q)
        turns = T * omega0 / TWO_PI
        if np.max(np.abs(turns - np.rint(turns))) * TWO_PI > 1e-9:
            ok = False
    # approximate_periodic_orbit postconditions (i)-(ii) of the corollary
    a = 0.25
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for _ in range(100):
            n = 2
            alpha = rng.uniform(1.0, 4.0, size=n)
            B = rng.normal(size=(n, n)) * 0.3
            A = B @ B.T + np.eye(n)
            I = rng.uniform(0.001, 0.01, size=n)
            approx = approximate_periodic_orbit(alpha, A, I, a)
            theta = approx.theta
            C = TWO_PI * np.linalg.norm(np.linalg.inv(A), ord=np.inf)
            if np.max(np.abs(I - approx.I0)) > C * theta ** (2 + a) / approx.tau + 1e-12:
                ok = False
            if not (math.pi <= approx.tau
                    <= 4 * math.pi * theta ** (-a * (n - 1)) + 1e-9):
                ok = False
            turns = approx.T * approx.omega0 / TWO_PI
            if np.max(np.abs(turns - np.rint(turns))) * TWO_PI > 1e-9:
                ok = False
    report(2, "Periodicity", ok, started, "5 s")


def test_criterion_3_averaging_exactness():
    started = time.time()
    rng = np.random.default_rng(303)
    omega0 = np.array([1.0, 2.0])
    h = build_h(omega0, 2, 1)
    nodes = 2 * 6 * 3 + 1
    ok = True
    for _ in range(100):
        f = random_polynomial(rng, 2, 1, 6, 12)
        fbar = resonant_average(f, omega0, TWO_PI)
        phi = homological_generator(f, omega0, TWO_PI)
        if not fbar.poisson(h).is_zero():
            ok = False
        if not (phi.poisson(h) - (f - fbar)).is_zero():
            ok = False
        qa = quadrature_average(f, omega0, TWO_PI, nodes)
        if (qa - fbar).max_abs_coeff() > 1e-10 * max(1.0, f.max_abs_coeff()):
            ok = False
    report(3, "Averaging exactness", ok, started, "30 s")


def test_criterion_4_one_step_decomposition():
    started = time.time()
    # closed form: n=1, N=0, A=0, kappa=0, f=x1
    n, N = 1, 0
    ctx1 = AveragingContext(omega0=np.array([1.0]), T=TWO_PI, I0=np.zeros(1),
                            A=np.zeros((1, 1)), kappa=0.0,
                            radii=(1.0, 1.0, 1.0), m=1, degree_cap=6)
    res = one_step(ctx1, Polynomial.zero(n, N), coordinate(n, N, 0),
                   Polynomial.zero(n, N))
    ok = (res.phi == coordinate(n, N, 1).scale(-1.0)
          and res.g_plus.is_zero()
          and res.f_plus == constant(n, N, -0.5))
    # desk system: measured majorant norm of f_plus <= the lemma bound
    spec, approx, rec, ctx = nf_pipeline()
    des = one_step(ctx, Polynomial.zero(2, 1), spec.f, spec.Lambda,
                   radii=(3 * rec.r1, 3 * rec.r2, 3 * rec.r3),
                   rho=(rec.r1, rec.r2, rec.r3))
    ok = ok and (des.report["measured_f_plus_norm"]
                 <= des.report["bound_f_plus"])
    report(4, "One-step decomposition", ok, started, "10 s")


def test_criterion_5_iteration_halving():
    started = time.time()
    spec, approx, rec, ctx = nf_pipeline(theta=0.2, a=0.125)
    res = iterate_normal_form(ctx, spec.f, spec.Lambda)
    norms = res.norms
    ok = all(norms[j + 1] <= 0.5 * norms[j] for j in range(len(norms) - 1))
    ok = ok and norms[-1] <= 2.0 ** (-rec.m) * rec.eps
    ok = ok and all(norms[j] <= 2.0 ** (-j) * rec.eps for j in range(len(norms)))
    report(5, "Iteration halving", ok, started, "60 s")


def test_criterion_6_integrator_quality():
    started = time.time()
    theta, a = 0.1, 0.125
    spec = dataclasses.replace(desk_system(N=1),
                               kappa=theta ** (2 + 2 * a * 3))
    consts = stability_constants(spec.n, spec.norm_A(), spec.M, spec.C_Lambda)
    klam0 = 0.5 * consts["C_E"] * theta ** (4 + 2 * a * spec.n)
    init = sampled_initial_point(spec, theta, klam0,
                                 np.random.default_rng(606))
    # symplecticity via finite-difference Jacobian of one step
    S = symplectic_matrix(spec.n, spec.N)
    vec = init.as_array()
    D = vec.size
    J = np.zeros((D, D))
    fd = 1e-6
    dt = default_dt(spec)
    for i in range(D):
        e = np.zeros(D)
        e[i] = fd
        pp = step(spec, PhasePoint.from_array(vec + e, spec.n, spec.N), dt)
        pm = step(spec, PhasePoint.from_array(vec - e, spec.n, spec.N), dt)
        J[:, i] = (pp.as_array() - pm.as_array()) / (2 * fd)
    sympl_defect = float(np.max(np.abs(J.T @ S @ J - S)))
    ok = sympl_defect <= 1e-6

    # order: global error vs the exact rotation flow scales as dt^2
    rot = SystemSpec(n=1, N=0, alpha=np.array([1.0]), A=np.zeros((1, 1)),
                     I0=np.zeros(1), f=Polynomial.zero(1, 0),
                     Lambda=Polynomial.zero(1, 0), kappa=0.0)
    pt = PhasePoint(np.array([0.8, -0.3]), np.zeros(0))
    target = exact_flow_h(pt, np.array([1.0]), TWO_PI).as_array()
    dts = [TWO_PI * 2.0 ** (-k) for k in range(6, 13)]
    errs = [np.linalg.norm(
        integrate(rot, pt, TWO_PI, dt=d, observe_every=10 ** 9)
        .final_point().as_array() - target) for d in dts]
    slope = float(np.polyfit(np.log(dts), np.log(errs), 1)[0])
    ok = ok and abs(slope - 2.0) <= 0.1

    # energy: relative drift over 1e6 steps at the default step size
    t_end = 1_000_000 * dt
    traj = integrate(spec, init, t_end, dt=dt, observe_every=997,
                     store_points=False)
    H = traj.observables["H"]
    edrift = float(np.max(np.abs(H - H[0])) / abs(H[0]))
    ok = ok and edrift <= 1e-8
    print(f"  symplectic defect {sympl_defect:.2e}, order slope {slope:.3f}, "
          f"energy drift {edrift:.2e}")
    report(6, "Integrator quality", ok, started, "5 min")


def test_criterion_7_constrained_limit():
    started = time.time()
    spec = desk_system(N=1, c_couple=1e-3)
    rng = np.random.default_rng(707)
    theta0 = 0.4
    angles = rng.uniform(0, TWO_PI, size=2)
    r = math.sqrt(theta0 ** 2)
    z = np.concatenate([r * np.cos(angles), r * np.sin(angles)])
    u = rng.normal(size=2)
    zeta0 = 0.5 * u / np.linalg.norm(u)
    rep = constrained_limit_study(
        spec, PhasePoint(z, zeta0), [10.0, 100.0, 1000.0, 10000.0],
        horizon=10.0)
    mono = all(rep.sup_distance[i + 1] <= 1.05 * rep.sup_distance[i]
               for i in range(3))
    slope_ok = abs(rep.fitted_zeta_slope + 0.5) <= 0.1
    print(f"  sup distances {[format(v, '.3e') for v in rep.sup_distance]}, "
          f"zeta slope {rep.fitted_zeta_slope:.4f}")
    report(7, "Constrained limit", mono and slope_ok, started, "5 min")


def test_criterion_8_smallkappa_scaling():
    started = time.time()
    result = smallkappa_scaling_study(
        desk_system, [0.3, 0.2, 0.15, 0.1], a=0.125,
        horizon_rule="fixed", horizon=1e4, N_values=[1, 4, 16],
        n_phases=8, seed=42, workers=2)
    ok = result.all_bounds_passed
    ok = ok and result.fitted_drift_slope >= 2.0
    ok = ok and all(r < 2.0 for r in result.n_uniformity.values())
    worst_uniformity = max(result.n_uniformity.values())
    print(f"  slope {result.fitted_drift_slope:.2f}, "
          f"worst N-uniformity ratio {worst_uniformity:.3f}, "
          f"bounds passed {result.all_bounds_passed}")
    report(8, "Small-kappa stability scaling", ok, started, "30 min")


def test_criterion_9_recipe_determinism():
    started = time.time()
    rec = parameter_recipe(0.2, 0.125, n=2, normA=1.0, C0=1.0, M=1.0,
                           C_Lambda=1.0, tau=math.pi, C_A=1.0)
    ok = (abs(rec.L - 40.0) / 40.0 <= 1e-4
          and abs(rec.P - 6.3662) / 6.3662 <= 1e-4
          and abs(rec.K - 25.465) / 25.465 <= 1e-4
          and abs(rec.C_E - 0.05066) / 0.05066 <= 1e-4)
    report(9, "Recipe determinism", ok, started, "1 s")
