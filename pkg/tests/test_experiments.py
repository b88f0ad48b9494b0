import dataclasses
import math

import numpy as np
import pytest

from neklab.experiments import (
    DriftReport,
    constrained_limit_study,
    desk_system,
    desk_variant_system,
    fit_loglog_slope,
    measure_drift,
    sampled_initial_point,
    smallkappa_scaling_study,
    split_coupling,
    variant_scaling_study,
    write_convergence_csv,
    write_drift_csv,
    write_json_summary,
)
from neklab.hamiltonian import PhasePoint, SystemSpec, actions
from neklab.normalform import stability_constants
from neklab.polyalg import Polynomial, parse_polynomial


class TestSampledInitialPoint:
    def test_actions_and_lambda_targets(self, rng):
        spec = dataclasses.replace(desk_system(N=4), kappa=0.01)
        theta = 0.2
        target = 3e-4
        pt = sampled_initial_point(spec, theta, target, rng)
        assert float(np.sum(actions(pt))) == pytest.approx(theta ** 2, rel=1e-12)
        assert spec.kappa * spec.Lambda.evaluate(pt) == pytest.approx(
            target, rel=1e-12)

    def test_zero_target_zero_zeta(self, rng):
        spec = desk_system(N=2)
        pt = sampled_initial_point(spec, 0.1, 0.0, rng)
        assert np.all(pt.zeta == 0.0)

    def test_deterministic_per_seed(self):
        spec = dataclasses.replace(desk_system(N=1), kappa=0.01)
        a = sampled_initial_point(spec, 0.2, 1e-4, np.random.default_rng(5))
        b = sampled_initial_point(spec, 0.2, 1e-4, np.random.default_rng(5))
        assert np.array_equal(a.as_array(), b.as_array())


class TestMeasureDrift:
    def test_integrable_case_no_drift(self):
        n = 2
        spec = SystemSpec(n=n, N=0, alpha=np.array([1.0, 1.7]), A=np.eye(n),
                          I0=np.zeros(n), f=Polynomial.zero(n, 0),
                          Lambda=Polynomial.zero(n, 0), kappa=0.0, M=2.0)
        pt = PhasePoint(np.array([0.2, 0.1, -0.1, 0.15]), np.zeros(0))
        rep = measure_drift(spec, pt, 100.0, a=0.125)
        assert rep.max_action_drift <= 1e-10
        assert rep.bound_passed

    def test_theta_defaults_to_initial_actions(self, rng):
        spec = dataclasses.replace(desk_system(N=1), kappa=1e-3)
        pt = sampled_initial_point(spec, 0.25, 1e-5, rng)
        rep = measure_drift(spec, pt, 10.0, a=0.125)
        assert rep.theta == pytest.approx(0.25, rel=1e-12)

    def test_bounds_and_energy_recorded(self, rng):
        theta, a = 0.2, 0.125
        spec = dataclasses.replace(desk_system(N=1),
                                   kappa=theta ** (2 + 2 * a * 3))
        consts = stability_constants(spec.n, spec.norm_A(), spec.M,
                                     spec.C_Lambda)
        klam0 = 0.5 * consts["C_E"] * theta ** (4 + 2 * a * spec.n)
        pt = sampled_initial_point(spec, theta, klam0, rng)
        rep = measure_drift(spec, pt, 200.0, a=a, theta=theta)
        assert rep.bound_K_theta == pytest.approx(consts["K"] * theta ** (2 + a))
        assert rep.bound_K_theta_lambda == pytest.approx(
            consts["K"] * theta ** (4 + 2 * a))
        assert rep.bound_passed
        assert 0 < rep.max_energy_drift < 1e-8

    def test_classical_n0_case(self):
        # N = 0 quintic system at theta = 0.2, horizon 1e4: the drift obeys
        # K theta^(2+a) (the classical elliptic-equilibrium bound)
        theta, a = 0.2, 0.125
        spec = desk_system(N=0)
        consts = stability_constants(spec.n, spec.norm_A(), spec.M,
                                     spec.C_Lambda)
        rng = np.random.default_rng(55)
        init = sampled_initial_point(spec, theta, 0.0, rng)
        rep = measure_drift(spec, init, 1e4, a=a, theta=theta, K=consts["K"])
        assert rep.bound_passed
        assert rep.max_action_drift <= consts["K"] * theta ** (2 + a)
        assert rep.max_kappa_Lambda == 0.0

    def test_hypothesis_gate(self):
        # a Lambda that dips under |zeta|^2/2 fails the pre-check
        n, N = 1, 1
        Lam = Polynomial(n, N, {(0, 0, 2, 0): 0.1, (0, 0, 0, 2): 0.1})
        spec = SystemSpec(n=n, N=N, alpha=np.array([1.0]), A=np.eye(1),
                          I0=np.zeros(1), f=Polynomial.zero(n, N),
                          Lambda=Lam, kappa=0.1, M=1.0)
        pt = PhasePoint(np.array([0.1, 0.0]), np.array([0.1, 0.0]))
        with pytest.raises(ValueError):
            measure_drift(spec, pt, 1.0, check_hypotheses=True)


class TestConstrainedLimit:
    def test_n0_degenerate(self):
        n = 2
        spec = SystemSpec(n=n, N=0, alpha=np.array([1.0, 1.6]), A=np.eye(n),
                          I0=np.zeros(n), f=Polynomial.zero(n, 0),
                          Lambda=Polynomial.zero(n, 0), kappa=0.0, M=2.0)
        init = PhasePoint(np.array([0.3, 0.1, -0.2, 0.25]), np.zeros(0))
        rep = constrained_limit_study(spec, init, [10.0, 100.0], horizon=2.0)
        assert rep.sup_distance == pytest.approx([0.0, 0.0], abs=1e-30)

    def test_quadratic_lambda_scaling(self):
        spec = desk_system(N=1, c_couple=1e-3)
        init = PhasePoint(np.array([0.3, 0.1, -0.2, 0.25]),
                          np.array([0.4, -0.3]))
        rep = constrained_limit_study(spec, init, [10.0, 100.0, 1000.0],
                                      horizon=2.0)
        # distances decrease (5% tolerance), zeta amplitude slope near -1/2
        for i in range(len(rep.kappa_grid) - 1):
            assert rep.sup_distance[i + 1] <= 1.05 * rep.sup_distance[i]
            assert rep.sup_kappa_Lambda[i + 1] <= 1.05 * rep.sup_kappa_Lambda[i]
        assert rep.fitted_zeta_slope == pytest.approx(-0.5, abs=0.1)
        assert rep.hypothesis_notes["z0_fixed"]


class TestSmallKappaStudy:
    def test_short_run_structure(self):
        result = smallkappa_scaling_study(
            desk_system, [0.3, 0.2], 0.125, horizon=20.0,
            N_values=[1, 2], n_phases=2, seed=1)
        assert len(result.reports) == 4
        thetas = [r.theta for r in result.reports]
        assert thetas == [0.3, 0.3, 0.2, 0.2]  # grid order preserved
        kappas = {r.theta: r.kappa for r in result.reports}
        assert kappas[0.3] == pytest.approx(0.3 ** 2.75)
        assert result.all_bounds_passed
        assert result.fitted_drift_slope >= 2.0
        for ratio in result.n_uniformity.values():
            assert ratio < 2.0
        # energy conservation along every experiment trajectory
        assert all(r.max_energy_drift <= 1e-8 for r in result.reports)

    def test_kappa_formula(self):
        # theta = 0.1, n = 2, a = 0.125 -> kappa = 0.1^2.75
        kappa = 0.1 ** (2 + 2 * 0.125 * 3)
        assert kappa == pytest.approx(1.778e-3, rel=1e-3)

    def test_recipe_horizon_capped(self):
        result = smallkappa_scaling_study(
            desk_system, [0.2], 0.125, horizon_rule="recipe",
            N_values=[1], n_phases=1, seed=1, T_max=0.5)
        assert len(result.reports) == 1
        # exp(k/theta^a) ~ 1 here, so no cap; force cap via tiny T_max
        assert result.reports[0].horizon <= 0.5

    def test_spec_base_requires_matching_N(self):
        spec = desk_system(N=1)
        with pytest.raises(ValueError):
            smallkappa_scaling_study(spec, [0.2], 0.125, horizon=1.0,
                                     N_values=[1, 4], n_phases=1)

    def test_deterministic(self):
        kwargs = dict(theta_grid=[0.25], a=0.125, horizon=5.0,
                      N_values=[1], n_phases=2, seed=9)
        r1 = smallkappa_scaling_study(desk_system, **kwargs)
        r2 = smallkappa_scaling_study(desk_system, **kwargs)
        assert r1.reports == r2.reports


class TestVariantStudy:
    def test_coupling_structure_enforced(self):
        bad = desk_system(N=1)  # x1^4 zeta^2 coupling is not allowed here
        with pytest.raises(ValueError):
            variant_scaling_study(bad, 0.2, 0.125, [1e-4], horizon=1.0,
                                  n_phases=1)

    def test_split_coupling(self):
        spec = desk_variant_system(N=1)
        fz, fc = split_coupling(spec.f)
        assert fz.depends_only_on_z()
        assert all(fc.zeta_degree(k) > 0 for k in fc.terms)
        assert fz + fc == spec.f

    def test_kappa_grid_run(self):
        theta, a = 0.2, 0.125
        kmax = theta ** (2 + 2 * a * 3)
        reports = variant_scaling_study(
            desk_variant_system(N=1), theta, a, [kmax, kmax / 100],
            horizon=20.0, n_phases=2, seed=3)
        assert len(reports) == 2
        assert all(r.bound_passed for r in reports)
        assert reports[0].kappa == pytest.approx(kmax)

    def test_kappa_above_max_rejected(self):
        theta, a = 0.2, 0.125
        kmax = theta ** (2 + 2 * a * 3)
        with pytest.raises(ValueError):
            variant_scaling_study(desk_variant_system(N=1), theta, a,
                                  [2 * kmax], horizon=1.0, n_phases=1)

    def test_r3_formula(self):
        from neklab.experiments import variant_r3

        # theta=0.2, a=0.125, P = 40/(2 pi), kappa = 1e-4
        P = 40.0 / (2 * math.pi)
        r3 = variant_r3(0.2, 0.125, P, 1e-4)
        assert r3 == pytest.approx(P * 0.2 ** 2.125 / 0.01, rel=1e-12)
        assert r3 == pytest.approx(20.8, rel=0.01)

    def test_boundary_reproduces_smallkappa_r3(self):
        # at kappa = theta^(2+2a(2n-1)) the variant radius equals the
        # small-kappa radius P theta^(1+2a(1-n))
        from neklab.experiments import variant_r3

        theta, a, n, P = 0.2, 0.125, 2, 6.366
        kmax = theta ** (2 + 2 * a * (2 * n - 1))
        assert variant_r3(theta, a, P, kmax) == pytest.approx(
            P * theta ** (1 + 2 * a * (1 - n)), rel=1e-12)


class TestOutputs:
    def test_drift_csv_layout_and_determinism(self, tmp_path):
        rep = DriftReport(theta=0.2, a=0.125, kappa=1e-3, horizon=10.0,
                          dt=0.01, max_action_drift=1e-7,
                          max_kappa_Lambda=1e-6, bound_K_theta=1.0,
                          bound_K_theta_lambda=0.1, bound_passed=True, N=1)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_drift_csv([rep], p1)
        write_drift_csv([rep], p2)
        text = p1.read_text()
        assert text.splitlines()[0].startswith(
            "theta,a,kappa,horizon,dt,max_action_drift,max_kappa_Lambda,"
            "bound_K_theta,bound_K_theta_lambda,bound_passed")
        assert "true" in text
        assert p1.read_bytes() == p2.read_bytes()

    def test_convergence_csv(self, tmp_path):
        from neklab.experiments import ConvergenceReport

        rep = ConvergenceReport(kappa_grid=[10.0, 100.0],
                                sup_distance=[0.1, 0.01],
                                sup_kappa_Lambda=[0.2, 0.19],
                                fitted_zeta_slope=-0.5,
                                max_zeta=[0.1, 0.03])
        path = tmp_path / "c.csv"
        write_convergence_csv(rep, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "kappa,sup_distance,sup_kappa_Lambda,max_zeta"
        assert len(lines) == 3

    def test_json_summary(self, tmp_path):
        path = tmp_path / "s.json"
        write_json_summary({"slope": -0.5, "arr": np.array([1.0, 2.0])}, path)
        import json

        doc = json.loads(path.read_text())
        assert doc["slope"] == -0.5
        assert doc["arr"] == [1.0, 2.0]

    def test_fit_loglog_slope(self):
        x = [1.0, 10.0, 100.0]
        y = [2.0, 0.2, 0.02]
        assert fit_loglog_slope(x, y) == pytest.approx(-1.0, abs=1e-12)


class TestDeskSystems:
    def test_structural_hypotheses_hold(self):
        from neklab.hamiltonian import check_structural_hypotheses

        spec = dataclasses.replace(desk_system(N=2), kappa=0.01)
        rep = check_structural_hypotheses(spec, samples=2000)
        assert rep.all_passed, str(rep)

    def test_variant_hypotheses_hold_after_kappa_scaling(self):
        # the variant base stores the unit coupling; the study runs the
        # kappa-scaled form, which is what the growth bound applies to
        from neklab.hamiltonian import check_structural_hypotheses

        base = desk_variant_system(N=2)
        kappa = 0.01
        fz, fc = split_coupling(base.f)
        spec = dataclasses.replace(base, f=fz + fc.scale(kappa), kappa=kappa)
        rep = check_structural_hypotheses(spec, samples=2000)
        assert rep.all_passed, str(rep)

    def test_nonresonant_default_frequencies(self):
        spec = desk_system()
        ratio = spec.alpha[1] / spec.alpha[0]
        for p in range(1, 8):
            for q in range(1, 8):
                assert abs(ratio - p / q) > 1e-3
