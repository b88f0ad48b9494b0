"""Desk-scale verification harnesses for the stability claims.

Four studies:

* ``measure_drift`` integrates one orbit over [-horizon, horizon] and
  compares the worst action drift sup_t |I(t) - I(0)|_1 and the worst
  confinement energy sup_t kappa*Lambda against the explicit bounds
  K theta^(2+a) and K theta^(4+2a).
* ``constrained_limit_study`` sends kappa through a grid, scales the
  transverse data as zeta(0) = zeta0/sqrt(kappa), and tracks how fast the
  coupled orbit collapses onto the reference orbit of H(z, 0).
* ``smallkappa_scaling_study`` runs the drift experiment over a theta grid
  with kappa = theta^(2+2a(2n-1)), initial actions |I(0)|_1 = theta^2 and
  kappa*Lambda(0) = C_E theta^(4+2an)/2, repeated over transverse dimensions
  N and random torus phases; it fits the drift exponent and probes the
  N-uniformity of the bounds.
* ``variant_scaling_study`` keeps theta fixed and sweeps kappa below its
  maximum value, with the transverse coupling in f scaled linearly by kappa.

Exponential times exp(k/theta^a) are far beyond desk reach, so horizons are
capped (default 1e5 time units) and the cap is recorded in every report.
Initial torus phases are drawn from a seeded generator and drift is reported
as the max over the sampled phases; all grid jobs run in a thread pool and
are merged in grid order, so identical configurations give bit-identical
output.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .hamiltonian import PhasePoint, SystemSpec, actions, check_structural_hypotheses
from .integrator import Trajectory, default_dt, integrate
from .normalform import stability_constants
from .polyalg import Polynomial

__all__ = [
    "DriftReport",
    "ConvergenceReport",
    "SmallKappaStudyResult",
    "measure_drift",
    "constrained_limit_study",
    "smallkappa_scaling_study",
    "variant_scaling_study",
    "sampled_initial_point",
    "desk_system",
    "desk_variant_system",
    "desk_normalform_system",
    "write_drift_csv",
    "write_convergence_csv",
    "write_json_summary",
    "fit_loglog_slope",
]

DEFAULT_T_MAX = 1e5

log = logging.getLogger("neklab.experiments")


# ----------------------------------------------------------------------
# reports
# ----------------------------------------------------------------------

@dataclass
class DriftReport:
    """One grid point of a drift experiment."""

    theta: float
    a: float
    kappa: float
    horizon: float
    dt: float
    max_action_drift: float
    max_kappa_Lambda: float
    bound_K_theta: float
    bound_K_theta_lambda: float
    bound_passed: bool
    N: int = 0
    n_phases: int = 1
    max_energy_drift: float = 0.0
    horizon_capped: bool = False

    FIELDS = (
        "theta", "a", "kappa", "horizon", "dt", "max_action_drift",
        "max_kappa_Lambda", "bound_K_theta", "bound_K_theta_lambda",
        "bound_passed", "N", "n_phases", "max_energy_drift", "horizon_capped",
    )

    def row(self) -> list:
        return [getattr(self, f) for f in self.FIELDS]


@dataclass
class ConvergenceReport:
    """Constrained-limit study over a kappa grid."""

    kappa_grid: List[float]
    sup_distance: List[float]
    sup_kappa_Lambda: List[float]
    fitted_zeta_slope: float
    max_zeta: List[float] = field(default_factory=list)
    hypothesis_notes: Dict[str, object] = field(default_factory=dict)

    FIELDS = ("kappa_grid", "sup_distance", "sup_kappa_Lambda", "max_zeta")


@dataclass
class SmallKappaStudyResult:
    reports: List[DriftReport]
    fitted_drift_slope: float
    n_uniformity: Dict[float, float]
    all_bounds_passed: bool
    constants: Dict[str, float]


# ----------------------------------------------------------------------
# initial conditions
# ----------------------------------------------------------------------

def sampled_initial_point(
    spec: SystemSpec,
    theta: float,
    kappa_lambda_target: float,
    rng: np.random.Generator,
    zeta_rng: Optional[np.random.Generator] = None,
) -> PhasePoint:
    """Random-phase initial point with |I(0)|_1 = theta^2 split evenly over
    the actions, and zeta(0) scaled along a random direction so that
    kappa * Lambda(zeta(0)) hits the requested target (exact for quadratic
    Lambda by the s^2 scaling law).  ``zeta_rng`` lets callers keep the core
    phases identical while varying the transverse direction (the N sweep)."""
    n, N = spec.n, spec.N
    Ij = theta ** 2 / n
    phases = rng.uniform(0.0, 2.0 * math.pi, size=n)
    r = math.sqrt(2.0 * Ij)
    z = np.concatenate([r * np.cos(phases), r * np.sin(phases)])
    if N and kappa_lambda_target > 0.0:
        if spec.kappa <= 0:
            raise ValueError("kappa_lambda_target > 0 requires kappa > 0")
        target = kappa_lambda_target / spec.kappa
        u = (zeta_rng or rng).normal(size=2 * N)
        u /= np.linalg.norm(u)
        probe = np.concatenate([np.zeros(2 * n), u])
        lam_u = spec.Lambda.evaluate(probe)
        if lam_u <= 0:
            raise ValueError("Lambda is not positive along the sampled direction")
        zeta = math.sqrt(target / lam_u) * u
    else:
        zeta = np.zeros(2 * N)
    return PhasePoint(z, zeta)


def _relative_energy_drift(traj: Trajectory) -> float:
    H = traj.observables["H"]
    scale = max(abs(float(H[0])), 1e-30)
    return float(np.max(np.abs(H - H[0]))) / scale


# ----------------------------------------------------------------------
# drift measurement
# ----------------------------------------------------------------------

def measure_drift(
    spec: SystemSpec,
    init: PhasePoint,
    horizon: float,
    dt: Optional[float] = None,
    a: float = 0.125,
    theta: Optional[float] = None,
    K: Optional[float] = None,
    check_hypotheses: bool = False,
) -> DriftReport:
    """Integrate over [-horizon, horizon] and compare the drift against the
    explicit bounds.

    theta defaults to sqrt(|I(0)|_1); K defaults to the recipe constant for
    the system's (n, M, |A|, C_Lambda).  The maxima are tracked at every
    internal step of both time directions.
    """
    if check_hypotheses:
        report = check_structural_hypotheses(spec)
        if not report.all_passed:
            raise ValueError(
                "structural hypotheses violated:\n" + str(report)
            )
    if dt is None:
        dt = default_dt(spec)
    if theta is None:
        theta = math.sqrt(float(np.sum(np.abs(actions(init)))))
    if K is None:
        K = stability_constants(spec.n, spec.norm_A(), spec.M, spec.C_Lambda)["K"]

    nsteps = max(int(round(horizon / dt)), 1)
    obs_every = max(1, nsteps // 512)
    drift = 0.0
    klam = 0.0
    edrift = 0.0
    for direction in (+1.0, -1.0):
        traj = integrate(spec, init, direction * horizon, dt=dt,
                         observe_every=obs_every, store_points=False)
        drift = max(drift, traj.max_action_drift)
        klam = max(klam, traj.max_kappa_lambda)
        edrift = max(edrift, _relative_energy_drift(traj))

    bound_drift = K * theta ** (2.0 + a)
    bound_lambda = K * theta ** (4.0 + 2.0 * a)
    return DriftReport(
        theta=theta, a=a, kappa=spec.kappa, horizon=horizon, dt=dt,
        max_action_drift=drift, max_kappa_Lambda=klam,
        bound_K_theta=bound_drift, bound_K_theta_lambda=bound_lambda,
        bound_passed=(drift <= bound_drift and klam <= bound_lambda),
        N=spec.N, max_energy_drift=edrift,
    )


# ----------------------------------------------------------------------
# constrained limit (large kappa)
# ----------------------------------------------------------------------

def fit_loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.log(np.asarray(x, dtype=float))
    y = np.log(np.maximum(np.asarray(y, dtype=float), 1e-300))
    return float(np.polyfit(x, y, 1)[0])


def constrained_limit_study(
    spec_template: SystemSpec,
    init_template: PhasePoint,
    kappa_grid: Sequence[float],
    horizon: float,
    dt: Optional[float] = None,
    workers: Optional[int] = None,
) -> ConvergenceReport:
    """Strong-confinement limit: for each kappa integrate the coupled system
    from (z0, zeta0/sqrt(kappa)) and the reference system H(z, 0) from
    (z0, 0) with the same step size, and record

        sup_t (|z^k(t) - z(t)| + |zeta^k(t)|)      (on the observation grid)
        sup_t kappa*Lambda(t)                      (at every step)
        max_t |zeta^k(t)|                          (at every step).

    The zeta-amplitude slope is fitted on log max|zeta| vs log kappa
    (-1/2 for quadratic confinement).
    """
    kappa_grid = [float(k) for k in kappa_grid]
    z0 = init_template.z.copy()
    zeta0 = init_template.zeta.copy()
    N = spec_template.N

    def job(kappa: float):
        spec_k = dataclasses.replace(spec_template, kappa=kappa)
        dtk = dt if dt is not None else default_dt(spec_k)
        nsteps = max(int(round(horizon / dtk)), 1)
        obs_every = max(1, nsteps // 2048)
        zeta_k = zeta0 / math.sqrt(kappa) if N else zeta0
        init_k = PhasePoint(z0, zeta_k)
        init_ref = PhasePoint(z0, np.zeros_like(zeta_k))
        sup_dist = 0.0
        sup_klam = 0.0
        mx_zeta = 0.0
        energy0 = None
        for direction in (+1.0, -1.0):
            coupled = integrate(spec_k, init_k, direction * horizon, dt=dtk,
                                observe_every=obs_every, store_points=True)
            reference = integrate(spec_k, init_ref, direction * horizon, dt=dtk,
                                  observe_every=obs_every, store_points=True)
            m = min(coupled.points.shape[0], reference.points.shape[0])
            dz = coupled.points[:m, : 2 * spec_k.n] - reference.points[:m, : 2 * spec_k.n]
            dznorm = np.linalg.norm(dz, axis=1)
            znorm = coupled.observables["norm_zeta"][:m]
            sup_dist = max(sup_dist, float(np.max(dznorm + znorm)))
            sup_klam = max(sup_klam, coupled.max_kappa_lambda,
                           float(coupled.observables["kappaLambda"][0]))
            mx_zeta = max(mx_zeta, coupled.max_norm_zeta,
                          float(coupled.observables["norm_zeta"][0]))
            if energy0 is None:
                energy0 = float(coupled.observables["H"][0])
        return sup_dist, sup_klam, mx_zeta, energy0

    results = _run_pool([lambda k=k: job(k) for k in kappa_grid], workers)
    sup_distance = [r[0] for r in results]
    sup_klam = [r[1] for r in results]
    max_zeta = [r[2] for r in results]
    energies = [r[3] for r in results]
    if N and all(v > 0 for v in max_zeta):
        slope = fit_loglog_slope(kappa_grid, max_zeta)
    else:
        slope = 0.0
    notes = {
        "z0_fixed": True,
        "kappa_Lambda0": [
            float(kappa_grid[i] * spec_template.Lambda.evaluate(
                np.concatenate([np.zeros(2 * spec_template.n),
                                zeta0 / math.sqrt(kappa_grid[i]) if N else zeta0])))
            for i in range(len(kappa_grid))
        ],
        "sup_initial_energy": max(energies) if energies else 0.0,
    }
    return ConvergenceReport(
        kappa_grid=kappa_grid,
        sup_distance=sup_distance,
        sup_kappa_Lambda=sup_klam,
        fitted_zeta_slope=slope,
        max_zeta=max_zeta,
        hypothesis_notes=notes,
    )


# ----------------------------------------------------------------------
# small-kappa scaling
# ----------------------------------------------------------------------

SystemBuilder = Union[SystemSpec, Callable[[int], SystemSpec]]


def _resolve_builder(base: SystemBuilder) -> Callable[[int], SystemSpec]:
    if isinstance(base, SystemSpec):
        def fixed(N: int) -> SystemSpec:
            if N != base.N:
                raise ValueError(
                    f"base spec has N={base.N}; pass a builder to sweep N"
                )
            return base
        return fixed
    return base


def smallkappa_scaling_study(
    base: SystemBuilder,
    theta_grid: Sequence[float],
    a: float,
    horizon_rule: str = "fixed",
    horizon: float = 1e4,
    N_values: Optional[Sequence[int]] = None,
    n_phases: int = 8,
    seed: int = 42,
    workers: Optional[int] = None,
    T_max: float = DEFAULT_T_MAX,
    dt: Optional[float] = None,
) -> SmallKappaStudyResult:
    """Theta sweep of the drift experiment with kappa locked to
    theta^(2+2a(2n-1)) and the initial data scaled per the hypotheses.

    ``horizon_rule`` is "fixed" (use ``horizon``) or "recipe"
    (exp(k/theta^a), capped at T_max with the cap recorded).  ``base`` is a
    SystemSpec or a builder N -> SystemSpec for the N sweep.
    """
    builder = _resolve_builder(base)
    theta_grid = [float(t) for t in theta_grid]
    if N_values is None:
        N_values = [base.N] if isinstance(base, SystemSpec) else [1, 4, 16]
    N_values = [int(N) for N in N_values]

    probe = builder(N_values[0])
    n = probe.n
    consts = stability_constants(n, probe.norm_A(), probe.M, probe.C_Lambda)
    K, C_E, kk = consts["K"], consts["C_E"], consts["k"]

    grid = [(ti, Ni) for ti in range(len(theta_grid)) for Ni in range(len(N_values))]

    def job(ti: int, Ni: int) -> DriftReport:
        theta = theta_grid[ti]
        N = N_values[Ni]
        spec0 = builder(N)
        kappa = theta ** (2.0 + 2.0 * a * (2 * n - 1))
        spec = dataclasses.replace(spec0, kappa=kappa)
        if horizon_rule == "recipe":
            hz = math.exp(kk * theta ** (-a))
            capped = hz > T_max
            hz = min(hz, T_max)
        elif horizon_rule == "fixed":
            hz, capped = horizon, horizon > T_max
            hz = min(hz, T_max)
        else:
            raise ValueError(f"unknown horizon rule {horizon_rule!r}")
        klam0 = 0.5 * C_E * theta ** (4.0 + 2.0 * a * n)
        drift = klam = edrift = 0.0
        dtk = dt if dt is not None else default_dt(spec)
        for phase in range(n_phases):
            # core phases do not depend on N, so the N sweep compares the
            # same torus initial data under varying transverse dimension
            rng = np.random.default_rng(np.random.SeedSequence([seed, ti, phase]))
            zeta_rng = np.random.default_rng(
                np.random.SeedSequence([seed, ti, Ni, phase, 1]))
            init = sampled_initial_point(spec, theta, klam0 if N else 0.0, rng,
                                         zeta_rng=zeta_rng)
            rep = measure_drift(spec, init, hz, dt=dtk, a=a, theta=theta, K=K)
            drift = max(drift, rep.max_action_drift)
            klam = max(klam, rep.max_kappa_Lambda)
            edrift = max(edrift, rep.max_energy_drift)
        bound_drift = K * theta ** (2.0 + a)
        bound_lambda = K * theta ** (4.0 + 2.0 * a)
        return DriftReport(
            theta=theta, a=a, kappa=kappa, horizon=hz, dt=dtk,
            max_action_drift=drift, max_kappa_Lambda=klam,
            bound_K_theta=bound_drift, bound_K_theta_lambda=bound_lambda,
            bound_passed=(drift <= bound_drift and klam <= bound_lambda),
            N=N, n_phases=n_phases, max_energy_drift=edrift,
            horizon_capped=capped,
        )

    log.info("small-kappa study: %d theta x %d N grid, %d phases, seed %d",
             len(theta_grid), len(N_values), n_phases, seed)
    reports = _run_pool([lambda t=ti, v=Ni: job(t, v) for ti, Ni in grid], workers)

    per_theta_max = {}
    uniformity = {}
    for rep in reports:
        per_theta_max.setdefault(rep.theta, []).append(rep.max_action_drift)
    for theta, drifts in per_theta_max.items():
        top, bot = max(drifts), min(drifts)
        uniformity[theta] = top / bot if bot > 0 else math.inf
    thetas = sorted(per_theta_max)
    slope = fit_loglog_slope(thetas, [max(per_theta_max[t]) for t in thetas]) \
        if len(thetas) >= 2 else 0.0
    return SmallKappaStudyResult(
        reports=reports,
        fitted_drift_slope=slope,
        n_uniformity=uniformity,
        all_bounds_passed=all(r.bound_passed for r in reports),
        constants={"K": K, "C_E": C_E, "k": kk, "seed": seed},
    )


# ----------------------------------------------------------------------
# kappa-sweep variant
# ----------------------------------------------------------------------

def split_coupling(f: Polynomial) -> Tuple[Polynomial, Polynomial]:
    """Split f into its z-only part and its transverse coupling part."""
    zonly = {k: c for k, c in f.terms.items() if f.zeta_degree(k) == 0}
    coup = {k: c for k, c in f.terms.items() if f.zeta_degree(k) > 0}
    return Polynomial(f.n, f.N, zonly), Polynomial(f.n, f.N, coup)


def variant_scaling_study(
    base: SystemSpec,
    theta: float,
    a: float,
    kappa_grid: Sequence[float],
    horizon: float = 1e4,
    n_phases: int = 8,
    seed: int = 42,
    workers: Optional[int] = None,
    dt: Optional[float] = None,
) -> List[DriftReport]:
    """Drift experiment at fixed theta over a kappa grid at or below
    theta^(2+2a(2n-1)), for perturbations whose transverse coupling scales
    linearly with kappa: the coupling part of ``base.f`` is the kappa = 1
    unit and is multiplied by kappa at each grid point.

    The coupling must have the admissible shape: terms with any zeta
    dependence must be linear in z (no |zeta|^2 |z|^4 coupling).
    """
    n = base.n
    kappa_max = theta ** (2.0 + 2.0 * a * (2 * n - 1))
    for key in base.f.terms:
        if base.f.zeta_degree(key) > 0 and base.f.z_degree(key) >= 2:
            raise ValueError(
                "variant study requires coupling linear in z; found a term "
                f"with z-degree {base.f.z_degree(key)} and zeta-degree "
                f"{base.f.zeta_degree(key)}"
            )
    f_z, f_coupling = split_coupling(base.f)
    consts = stability_constants(n, base.norm_A(), base.M, base.C_Lambda)
    K, C_E, P = consts["K"], consts["C_E"], consts["P"]

    def job(gi: int) -> DriftReport:
        kappa = float(kappa_grid[gi])
        if not 0 < kappa <= kappa_max * (1 + 1e-12):
            raise ValueError(
                f"kappa = {kappa} outside (0, theta^(2+2a(2n-1)) = {kappa_max}]"
            )
        spec = dataclasses.replace(
            base, f=f_z + f_coupling.scale(kappa), kappa=kappa)
        klam0 = 0.5 * C_E * theta ** (4.0 + 2.0 * a * n)
        dtk = dt if dt is not None else default_dt(spec)
        drift = klam = edrift = 0.0
        for phase in range(n_phases):
            rng = np.random.default_rng(np.random.SeedSequence([seed, gi, phase]))
            init = sampled_initial_point(spec, theta, klam0 if spec.N else 0.0, rng)
            rep = measure_drift(spec, init, horizon, dt=dtk, a=a, theta=theta, K=K)
            drift = max(drift, rep.max_action_drift)
            klam = max(klam, rep.max_kappa_Lambda)
            edrift = max(edrift, rep.max_energy_drift)
        bound_drift = K * theta ** (2.0 + a)
        bound_lambda = K * theta ** (4.0 + 2.0 * a)
        return DriftReport(
            theta=theta, a=a, kappa=kappa, horizon=horizon, dt=dtk,
            max_action_drift=drift, max_kappa_Lambda=klam,
            bound_K_theta=bound_drift, bound_K_theta_lambda=bound_lambda,
            bound_passed=(drift <= bound_drift and klam <= bound_lambda),
            N=base.N, n_phases=n_phases, max_energy_drift=edrift,
        )

    return _run_pool([lambda g=gi: job(g) for gi in range(len(kappa_grid))], workers)


def variant_r3(theta: float, a: float, P: float, kappa: float) -> float:
    """Transverse radius of the kappa-sweep variant: P theta^(2+a)/sqrt(kappa)."""
    return P * theta ** (2.0 + a) / math.sqrt(kappa)


# ----------------------------------------------------------------------
# desk systems
# ----------------------------------------------------------------------

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


def _quadratic_lambda(n: int, N: int) -> Polynomial:
    terms = {}
    nvars = 2 * n + 2 * N
    for i in range(2 * n, nvars):
        key = tuple(2 if j == i else 0 for j in range(nvars))
        terms[key] = 0.5
    return Polynomial(n, N, terms)


def desk_system(
    N: int = 1,
    c5: float = 1e-4,
    c_couple: float = 1e-4,
    alpha: Tuple[float, float] = (5.0, 5.0 * GOLDEN_RATIO * GOLDEN_RATIO / 2.0),
    kappa: float = 0.0,
) -> SystemSpec:
    """Reference n = 2 system with a quintic core perturbation and a
    |zeta|^2 |z|^4 transverse coupling (kappa-independent, admissible for
    the main small-kappa scaling).  Frequencies default to a strongly
    non-resonant pair."""
    n = 2
    nvars = 2 * n + 2 * N
    terms = {}
    # c5 (x1^5 + x2^5 + x1^3 x2^2)
    terms[tuple([5] + [0] * (nvars - 1))] = c5
    e = [0] * nvars
    e[1] = 5
    terms[tuple(e)] = c5
    e = [0] * nvars
    e[0], e[1] = 3, 2
    terms[tuple(e)] = c5
    # c_couple * x1^4 * (xi_k^2 + eta_k^2)
    for k in range(2 * N):
        e = [0] * nvars
        e[0] = 4
        e[2 * n + k] = 2
        terms[tuple(e)] = c_couple
    f = Polynomial(n, N, terms)
    return SystemSpec(
        n=n, N=N,
        alpha=np.asarray(alpha, dtype=float),
        A=np.eye(n), I0=np.zeros(n),
        f=f, Lambda=_quadratic_lambda(n, N), kappa=kappa,
        M=float(n), C_Lambda=1.0, C0=3.0 * c5 + c_couple,
    )


def desk_variant_system(
    N: int = 1,
    c5: float = 1e-4,
    c_couple: float = 1e-4,
    alpha: Tuple[float, float] = (5.0, 5.0 * GOLDEN_RATIO * GOLDEN_RATIO / 2.0),
) -> SystemSpec:
    """Variant-form desk system: the transverse coupling is linear in z
    (unit-kappa normalisation x1 |zeta|^2), so the kappa sweep scales it."""
    n = 2
    nvars = 2 * n + 2 * N
    terms = {}
    terms[tuple([5] + [0] * (nvars - 1))] = c5
    e = [0] * nvars
    e[1] = 5
    terms[tuple(e)] = c5
    for k in range(2 * N):
        e = [0] * nvars
        e[0] = 1
        e[2 * n + k] = 2
        terms[tuple(e)] = c_couple
    f = Polynomial(n, N, terms)
    return SystemSpec(
        n=n, N=N, alpha=np.asarray(alpha, dtype=float), A=np.eye(n),
        I0=np.zeros(n), f=f, Lambda=_quadratic_lambda(n, N), kappa=1e-8,
        M=float(n), C_Lambda=1.0, C0=2.0 * c5 + c_couple,
    )


def desk_normalform_system(
    N: int = 1,
    c5: float = 1e-4,
    c_couple: float = 2.5e-5,
    alpha: Tuple[float, float] = (6.0, 6.0),
    kappa: float = 0.0,
) -> SystemSpec:
    """Desk system for the averaging iteration: equal frequencies so that
    equal initial actions give an exactly resonant approximating orbit with
    all flow frequencies bounded away from zero."""
    n = 2
    nvars = 2 * n + 2 * N
    terms = {}
    terms[tuple([5] + [0] * (nvars - 1))] = c5
    e = [0] * nvars
    e[1] = 5
    terms[tuple(e)] = c5
    for k in range(2 * N):
        e = [0] * nvars
        e[0] = 4
        e[2 * n + k] = 2
        terms[tuple(e)] = c_couple
    f = Polynomial(n, N, terms)
    return SystemSpec(
        n=n, N=N, alpha=np.asarray(alpha, dtype=float), A=np.eye(n),
        I0=np.zeros(n), f=f, Lambda=_quadratic_lambda(n, N), kappa=kappa,
        M=float(n), C_Lambda=1.0, C0=2.0 * c5 + c_couple,
    )


# ----------------------------------------------------------------------
# pool and output
# ----------------------------------------------------------------------

def _run_pool(jobs: List[Callable[[], object]], workers: Optional[int]) -> list:
    """Run jobs on a thread pool, returning results in submission order."""
    if workers is None:
        import os
        workers = os.cpu_count() or 1
    workers = max(1, int(workers))
    if workers == 1 or len(jobs) <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(job) for job in jobs]
        return [f.result() for f in futures]


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_drift_csv(reports: Sequence[DriftReport], path) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(DriftReport.FIELDS) + "\n")
        for rep in reports:
            fh.write(",".join(_fmt(v) for v in rep.row()) + "\n")


def write_convergence_csv(report: ConvergenceReport, path) -> None:
    cols = ["kappa", "sup_distance", "sup_kappa_Lambda", "max_zeta"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(len(report.kappa_grid)):
            row = [report.kappa_grid[i], report.sup_distance[i],
                   report.sup_kappa_Lambda[i], report.max_zeta[i]]
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_json_summary(summary: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    raise TypeError(f"cannot serialise {type(obj)}")
