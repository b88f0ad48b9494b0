"""Periodic-flow averaging, homological generators and the normal-form iteration.

All operations work on the exact polynomial level.  A monomial is resonant
for the rotation flow of h = <omega0, I> when its frequency

    mu = <omega0, a - b>

vanishes, where (a, b) are the exponents of w_j = x_j + i y_j and its
conjugate.  Under the flow a complex monomial picks up the factor
exp(-i mu t), so averaging over one period keeps exactly the mu = 0 part,
and the generator of the normalising transformation gets the closed-form
coefficient c / (-i mu) on every non-resonant monomial, which solves

    {phi, h} = f - fbar

exactly.  Since T*omega0 lies in 2*pi*Z^n every frequency satisfies
mu*T in 2*pi*Z, so resonance detection reduces to rounding mu*T/(2*pi).

The single improvement step composes the full Hamiltonian with the time-one
map of phi through a truncated Lie series; the m-fold iteration shrinks the
radii from 3r to 2r in steps of r/m and records the measured majorant norm
of every remainder.  ``parameter_recipe`` evaluates the explicit constants
(l0, l1, l2, L, P, delta, C1, K, k, C_E and the radii/step counts they
induce) and ``check_conditions`` evaluates the quantitative hypotheses of
the averaging lemmas and stability theorems, inequality by inequality.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .polyalg import Polynomial, action_polynomial
from .hamiltonian import matrix_l1_operator_norm

__all__ = [
    "AveragingContext",
    "NormalFormResult",
    "OneStepResult",
    "RecipeConstants",
    "ConditionCheck",
    "ConditionReport",
    "PreconditionError",
    "build_h",
    "build_g0",
    "exact_flow_h",
    "rotation_pullback",
    "resonant_average",
    "quadrature_average",
    "homological_generator",
    "lie_transform",
    "one_step",
    "iterate_normal_form",
    "parameter_recipe",
    "exponents_from_a",
    "check_conditions",
    "theta_threshold",
]


class PreconditionError(ValueError):
    """Raised when a hard precondition of a normal-form operation fails."""


# ----------------------------------------------------------------------
# context and result containers
# ----------------------------------------------------------------------

@dataclass
class AveragingContext:
    """Static data for the averaging iteration.

    ``radii`` are the base radii r = (r1, r2, r3); the iteration uses the
    shrinking sequence 3r - j*r/m.  ``degree_cap`` defaults to
    deg(f) + 2*m when left as None.
    """

    omega0: np.ndarray
    T: float
    I0: np.ndarray
    A: np.ndarray
    kappa: float
    radii: Tuple[float, float, float]
    m: int = 1
    degree_cap: Optional[int] = None

    def __post_init__(self):
        self.omega0 = np.asarray(self.omega0, dtype=float)
        self.I0 = np.asarray(self.I0, dtype=float)
        self.A = np.asarray(self.A, dtype=float)
        self.radii = tuple(float(r) for r in self.radii)
        if self.m < 1:
            raise ValueError("m must be a positive integer")
        if any(r <= 0 for r in self.radii[:2]) or self.radii[2] < 0:
            raise ValueError("radii r1, r2 must be positive and r3 non-negative")
        _require_periodic(self.omega0, self.T)


@dataclass
class OneStepResult:
    phi: Polynomial
    g_plus: Polynomial
    f_plus: Polynomial
    report: Dict[str, object]


@dataclass
class NormalFormResult:
    """Outcome of the m-step normal-form iteration."""

    generators: List[Polynomial]
    g_hat: Polynomial
    f_hat: Polynomial
    norms: List[float]
    conditions: "ConditionReport"
    psi_displacement_bound: float
    step_reports: List[Dict[str, object]] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        from .polyalg import format_polynomial

        return {
            "norms_per_step": self.norms,
            "psi_displacement_bound": self.psi_displacement_bound,
            "conditions": self.conditions.to_json_dict(),
            "g_hat": format_polynomial(self.g_hat),
            "f_hat": format_polynomial(self.f_hat),
            "generators": [format_polynomial(p) for p in self.generators],
            "step_bounds": [
                {k: v for k, v in rep.items() if isinstance(v, (int, float, bool))}
                for rep in self.step_reports
            ],
        }


# ----------------------------------------------------------------------
# complex monomial basis
# ----------------------------------------------------------------------

@lru_cache(maxsize=None)
def _xy_power_to_uv(p: int, q: int) -> Tuple[Tuple[int, int, complex], ...]:
    """Expansion of x^p y^q in w = x+iy, wbar = x-iy: list of (a, b, coeff)."""
    out: Dict[Tuple[int, int], complex] = {}
    for i in range(p + 1):
        cx = math.comb(p, i) * 0.5 ** p
        for j in range(q + 1):
            cy = math.comb(q, j) * 0.5 ** q * ((-1j) ** j) * ((1j) ** (q - j))
            a = i + j
            b = (p - i) + (q - j)
            key = (a, b)
            out[key] = out.get(key, 0j) + cx * cy
    return tuple((a, b, c) for (a, b), c in out.items() if c != 0)


@lru_cache(maxsize=None)
def _uv_power_to_xy(a: int, b: int) -> Tuple[Tuple[int, int, complex], ...]:
    """Expansion of w^a wbar^b back into x^p y^q monomials."""
    out: Dict[Tuple[int, int], complex] = {}
    for i in range(a + 1):
        cu = math.comb(a, i) * (1j) ** (a - i)
        for j in range(b + 1):
            cv = math.comb(b, j) * (-1j) ** (b - j)
            key = (i + j, (a - i) + (b - j))
            out[key] = out.get(key, 0j) + cu * cv
    return tuple(((p, q), c) for (p, q), c in out.items() if c != 0)


def _to_complex(poly: Polynomial) -> Dict[Tuple[int, ...], complex]:
    """Coefficients in the (w, wbar, zeta) monomial basis.

    Keys are tuples (a_1..a_n, b_1..b_n, zeta exponents) of length 2n+2N.
    """
    n, N = poly.n, poly.N
    out: Dict[Tuple[int, ...], complex] = {}
    for key, coef in poly.terms.items():
        expansion = [((), complex(coef))]
        for j in range(n):
            p, q = key[j], key[n + j]
            new = []
            for prefix, c in expansion:
                for a, b, cc in _xy_power_to_uv(p, q):
                    new.append((prefix + (a, b), c * cc))
            expansion = new
        zeta_part = key[2 * n:]
        for prefix, c in expansion:
            a_part = prefix[0::2]
            b_part = prefix[1::2]
            ckey = a_part + b_part + zeta_part
            prev = out.get(ckey, 0j)
            out[ckey] = prev + c
    return {k: c for k, c in out.items() if c != 0}


def _from_complex(coeffs: Dict[Tuple[int, ...], complex], n: int, N: int) -> Polynomial:
    """Back-transform; imaginary residue must vanish up to rounding."""
    acc: Dict[Tuple[int, ...], complex] = {}
    for ckey, coef in coeffs.items():
        a_part, b_part = ckey[:n], ckey[n: 2 * n]
        zeta_part = ckey[2 * n:]
        expansion = [((), coef)]
        for j in range(n):
            new = []
            for prefix, c in expansion:
                for (p, q), cc in _uv_power_to_xy(a_part[j], b_part[j]):
                    new.append((prefix + (p, q), c * cc))
            expansion = new
        for prefix, c in expansion:
            key = prefix[0::2] + prefix[1::2] + zeta_part
            acc[key] = acc.get(key, 0j) + c
    scale = max((abs(c) for c in acc.values()), default=0.0)
    resid = max((abs(c.imag) for c in acc.values()), default=0.0)
    if scale > 0 and resid > 1e-9 * scale:
        raise ArithmeticError(
            f"complex back-transform left imaginary residue {resid:.3e} "
            f"(scale {scale:.3e}); input was not a real polynomial"
        )
    cut = 1e-14 * scale
    terms = {k: c.real for k, c in acc.items() if abs(c.real) > cut}
    return Polynomial(n, N, terms)


def _require_periodic(omega0: np.ndarray, T: float, tol: float = 1e-9):
    resid = np.abs(T * omega0 / (2 * math.pi) - np.rint(T * omega0 / (2 * math.pi)))
    if resid.size and float(np.max(resid)) * 2 * math.pi > tol:
        raise PreconditionError(
            f"T*omega0 is not in 2*pi*Z^n (residue {float(np.max(resid)):.3e} turns)"
        )


def _monomial_frequency(ckey: Tuple[int, ...], omega0: np.ndarray) -> float:
    n = omega0.size
    mu = 0.0
    for j in range(n):
        d = ckey[j] - ckey[n + j]
        if d:
            mu += omega0[j] * d
    return mu


# ----------------------------------------------------------------------
# flows and averages
# ----------------------------------------------------------------------

def build_h(omega0, n: int, N: int) -> Polynomial:
    """h = <omega0, I> as a polynomial."""
    omega0 = np.asarray(omega0, dtype=float)
    h = Polynomial.zero(n, N)
    for j in range(n):
        if omega0[j] != 0.0:
            h = h + action_polynomial(n, N, j).scale(float(omega0[j]))
    return h


def build_g0(A, I0, n: int, N: int) -> Polynomial:
    """g0 = 1/2 <A (I - I0), I - I0> as a polynomial."""
    A = np.asarray(A, dtype=float)
    I0 = np.asarray(I0, dtype=float)
    shifted = [
        action_polynomial(n, N, j) - Polynomial.constant(n, N, float(I0[j]))
        for j in range(n)
    ]
    g0 = Polynomial.zero(n, N)
    for j in range(n):
        for k in range(n):
            a = float(A[j, k])
            if a != 0.0:
                g0 = g0 + (shifted[j] * shifted[k]).scale(0.5 * a)
    return g0


def exact_flow_h(pt, omega0, t: float):
    """Closed-form rotation flow of h = <omega0, I>: z_j -> R_j(t) z_j with
    R_j(t) = [[cos, sin], [-sin, cos]](omega0_j t); zeta is unchanged."""
    from .hamiltonian import PhasePoint

    omega0 = np.asarray(omega0, dtype=float)
    n = pt.n
    x, y = pt.z[:n], pt.z[n:]
    c = np.cos(omega0 * t)
    s = np.sin(omega0 * t)
    return PhasePoint(np.concatenate([c * x + s * y, -s * x + c * y]), pt.zeta.copy())


def rotation_pullback(f: Polynomial, omega0, t: float) -> Polynomial:
    """f composed with the rotation flow at time t, by exact substitution
    x_j -> cos x_j + sin y_j, y_j -> -sin x_j + cos y_j."""
    omega0 = np.asarray(omega0, dtype=float)
    n, N = f.n, f.N
    out: Dict[Tuple[int, ...], float] = {}
    cos = np.cos(omega0 * t)
    sin = np.sin(omega0 * t)
    for key, coef in f.terms.items():
        expansion = [((), coef)]
        for j in range(n):
            p, q = key[j], key[n + j]
            c, s = float(cos[j]), float(sin[j])
            new = []
            for prefix, cc in expansion:
                # (c x + s y)^p * (-s x + c y)^q
                for i in range(p + 1):
                    w1 = math.comb(p, i) * c ** i * s ** (p - i)
                    for l in range(q + 1):
                        w2 = math.comb(q, l) * (-s) ** (q - l) * c ** l
                        new.append((prefix + (i + (q - l), (p - i) + l), cc * w1 * w2))
            expansion = new
        zeta_part = key[2 * n:]
        for prefix, cc in expansion:
            nkey = prefix[0::2] + prefix[1::2] + zeta_part
            out[nkey] = out.get(nkey, 0.0) + cc
    cut = 1e-14 * f.max_abs_coeff()
    return Polynomial(n, N, {k: c for k, c in out.items() if abs(c) > cut})


def resonant_average(f: Polynomial, omega0, T: float) -> Polynomial:
    """Average of f over the T-periodic rotation flow: the projection onto
    monomials with frequency mu = <omega0, a-b> = 0."""
    omega0 = np.asarray(omega0, dtype=float)
    _require_periodic(omega0, T)
    cutoff = math.pi / T
    kept = {
        k: c
        for k, c in _to_complex(f).items()
        if abs(_monomial_frequency(k, omega0)) < cutoff
    }
    return _from_complex(kept, f.n, f.N)


def quadrature_average(f: Polynomial, omega0, T: float, nodes: int) -> Polynomial:
    """Trapezoidal discretisation of the flow average (1/T) int_0^T f o X_h^t dt.

    Exact (to rounding) once nodes exceeds twice the largest integer
    frequency of f under the flow; emits a warning otherwise.
    """
    omega0 = np.asarray(omega0, dtype=float)
    _require_periodic(omega0, T)
    if nodes < 2:
        raise ValueError("nodes must be >= 2")
    kmax = 0
    for ckey in _to_complex(f):
        mu = _monomial_frequency(ckey, omega0)
        kmax = max(kmax, abs(int(round(mu * T / (2 * math.pi)))))
    if nodes < 2 * kmax + 1:
        warnings.warn(
            f"quadrature_average: {nodes} nodes under-resolve max frequency "
            f"index {kmax}; need at least {2 * kmax + 1}"
        )
    acc = Polynomial.zero(f.n, f.N)
    for k in range(nodes + 1):
        t = T * k / nodes
        weight = 0.5 if k in (0, nodes) else 1.0
        acc = acc + rotation_pullback(f, omega0, t).scale(weight / nodes)
    return acc


def homological_generator(f: Polynomial, omega0, T: float) -> Polynomial:
    """Generator phi with {phi, h} = f - fbar, via the closed form of
    (1/T) int_0^T t ((f - fbar) o X_h^t) dt: every non-resonant complex
    monomial with frequency mu gets coefficient c / (-i mu)."""
    omega0 = np.asarray(omega0, dtype=float)
    _require_periodic(omega0, T)
    cutoff = math.pi / T
    out: Dict[Tuple[int, ...], complex] = {}
    for ckey, c in _to_complex(f).items():
        mu = _monomial_frequency(ckey, omega0)
        if abs(mu) >= cutoff:
            out[ckey] = c / (-1j * mu)
    return _from_complex(out, f.n, f.N)


# ----------------------------------------------------------------------
# Lie series
# ----------------------------------------------------------------------

def lie_transform(F: Polynomial, phi: Polynomial, degree_cap: int,
                  max_brackets: int = 200) -> Polynomial:
    """F composed with the time-one map of the flow of phi, as the Lie series

        F o X_phi^1 = sum_k (1/k!) ad_phi^k F,   ad_phi F = {F, phi},

    truncated at total degree ``degree_cap``.  For generators of minimal
    degree >= 3 each bracket raises the degree, so intermediate truncation
    is exact for the retained part and the series terminates; low-degree
    generators fall back to running until the terms vanish or become
    negligible.
    """
    if degree_cap < F.degree():
        raise ValueError("degree_cap must be at least deg(F)")
    safe_truncate = phi.is_zero() or phi.min_degree() >= 3
    result = F.truncate(degree_cap)
    term = F
    scale_ref = max(F.max_abs_coeff(), 1e-300)
    for k in range(1, max_brackets + 1):
        term = term.poisson(phi).scale(1.0 / k)
        if safe_truncate:
            term = term.truncate(degree_cap)
        if term.is_zero():
            break
        if not safe_truncate and term.max_abs_coeff() < 1e-17 * scale_ref:
            break
        result = result + term.truncate(degree_cap)
    else:
        warnings.warn(
            f"lie_transform: series not terminated after {max_brackets} brackets"
        )
    return result


# ----------------------------------------------------------------------
# iteration step and normal form
# ----------------------------------------------------------------------

def _min_rho_term(rho: Sequence[float], r2: float, with_r3: bool = True) -> float:
    vals = [rho[0] / r2, rho[1]]
    if with_r3:
        vals.append(rho[2])
    vals = [v for v in vals if v > 0]
    return min(vals)


def one_step(
    ctx: AveragingContext,
    g: Polynomial,
    f: Polynomial,
    Lambda: Polynomial,
    radii: Optional[Sequence[float]] = None,
    rho: Optional[Sequence[float]] = None,
) -> OneStepResult:
    """Single averaging improvement step.

    Computes fbar, the generator phi, g_plus = g + fbar and the new
    remainder through the Lie-series identity

        f_plus = (h + g0 + g + f + kappa*Lambda) o Phi
                 - (h + g0 + g_plus + kappa*Lambda),

    truncated at the context degree cap.  ``radii`` are the domain radii of
    the step (default: the context radii) and ``rho`` the shrink amounts
    (default: radii/3).  The report carries the smallness condition
    eps*T < (1/9) min(rho1/r2, rho2, rho3)^2 evaluated with the majorant
    norms, the remainder bound

        [6 |A| r1 r2 / rho2 + 36 (delta+eps)/min^2
         + 3 kappa C_Lambda r3/(2 rho3)] * eps * T

    and the measured majorant norm of f_plus on the shrunk radii.
    """
    n, N = f.n, f.N
    h = build_h(ctx.omega0, n, N)
    g0 = build_g0(ctx.A, ctx.I0, n, N)
    if not g.poisson(h).is_zero():
        raise PreconditionError("one_step requires {g, h} = 0")

    if radii is None:
        radii = ctx.radii
    r1, r2, r3 = (float(v) for v in radii)
    if rho is None:
        rho = (r1 / 3.0, r2 / 3.0, r3 / 3.0)
    rho1, rho2, rho3 = (float(v) for v in rho)

    eps = f.majorant(r2, r3)
    delta = g.majorant(r2, r3)
    min_term = _min_rho_term((rho1, rho2, rho3), r2, with_r3=N > 0 and r3 > 0)
    cond_lhs = eps * ctx.T
    cond_rhs = (min_term ** 2) / 9.0
    cond_ok = cond_lhs < cond_rhs

    fbar = resonant_average(f, ctx.omega0, ctx.T)
    phi = homological_generator(f, ctx.omega0, ctx.T)
    g_plus = g + fbar

    cap = ctx.degree_cap
    if cap is None:
        cap = max(f.degree(), 0) + 2 * ctx.m
    H_full = h + g0 + g + f + Lambda.scale(ctx.kappa)
    transformed = lie_transform(H_full, phi, cap)
    f_plus = transformed - (h + g0 + g_plus + Lambda.scale(ctx.kappa)).truncate(cap)

    norm_A = matrix_l1_operator_norm(ctx.A)
    c_lambda = _dlambda_constant(Lambda)
    bound_c = 0.0
    if rho2 > 0:
        bound_c += 6.0 * norm_A * r1 * r2 / rho2
    if min_term > 0:
        bound_c += 36.0 * (delta + eps) / min_term ** 2
    if ctx.kappa > 0 and rho3 > 0:
        bound_c += 3.0 * ctx.kappa * c_lambda * r3 / (2.0 * rho3)
    bound_c *= eps * ctx.T
    bound_a = 3.0 * eps * ctx.T / min_term if min_term > 0 else math.inf

    shrunk = (r1 - rho1, r2 - rho2, max(r3 - rho3, 0.0))
    report = {
        "eps": eps,
        "delta": delta,
        "condition_3_2_lhs": cond_lhs,
        "condition_3_2_rhs": cond_rhs,
        "condition_3_2_passed": cond_ok,
        "bound_f_plus": bound_c,
        "bound_displacement": bound_a,
        "measured_f_plus_norm": f_plus.majorant(shrunk[1], shrunk[2]),
        "measured_phi_norm": phi.majorant(r2, r3),
        "g_plus_commutes": g_plus.poisson(h).is_zero(),
        "radii": (r1, r2, r3),
        "rho": (rho1, rho2, rho3),
        "degree_cap": cap,
    }
    if not cond_ok:
        report["flag"] = "smallness condition failed; executed for diagnostics"
    return OneStepResult(phi=phi, g_plus=g_plus, f_plus=f_plus, report=report)


def _dlambda_constant(Lambda: Polynomial) -> float:
    """Smallest C with |DLambda| <= C |zeta| read off a quadratic Lambda;
    majorant-based fallback otherwise."""
    from .hamiltonian import lambda_quadratic_matrix

    if Lambda.is_zero():
        return 0.0
    Q = lambda_quadratic_matrix(Lambda, Lambda.N)
    if Q is not None:
        return float(np.max(np.abs(np.linalg.eigvalsh(Q))))
    grads = Lambda.gradient()[2 * Lambda.n:]
    return sum(g.majorant(1.0, 1.0) for g in grads)


def iterate_normal_form(
    ctx: AveragingContext, f: Polynomial, Lambda: Polynomial
) -> NormalFormResult:
    """m-fold iteration of the improvement step with g, delta starting at 0.

    At stage j the step radii are (3 - j/m) r and the shrink is r/m, so the
    final data live on 2r.  Condition failures are flagged in the report but
    the iteration still executes for diagnostics.  Norms are the measured
    majorant norms of the remainders f_j on the stage radii.
    """
    r1, r2, r3 = ctx.radii
    m = ctx.m
    n, N = f.n, f.N
    if ctx.degree_cap is None:
        ctx = AveragingContext(
            omega0=ctx.omega0, T=ctx.T, I0=ctx.I0, A=ctx.A, kappa=ctx.kappa,
            radii=ctx.radii, m=ctx.m,
            degree_cap=max(f.degree(), 0) + 2 * ctx.m,
        )

    eps = f.majorant(3 * r2, 3 * r3)
    c_lambda = _dlambda_constant(Lambda)
    norm_A = matrix_l1_operator_norm(ctx.A)
    conditions = check_conditions(
        "L4.1",
        {
            "r1": r1, "r2": r2, "r3": r3, "m": m, "T": ctx.T,
            "eps": eps, "delta": 0.0, "normA": norm_A,
            "kappa": ctx.kappa, "C_Lambda": c_lambda, "N": N,
        },
    )

    g = Polynomial.zero(n, N)
    fj = f
    norms = [eps]
    generators: List[Polynomial] = []
    step_reports: List[Dict[str, object]] = []
    h = build_h(ctx.omega0, n, N)
    for j in range(m):
        scale = 3.0 - j / m
        radii = (scale * r1, scale * r2, scale * r3)
        rho = (r1 / m, r2 / m, r3 / m)
        step = one_step(ctx, g, fj, Lambda, radii=radii, rho=rho)
        g, fj = step.g_plus, step.f_plus
        generators.append(step.phi)
        step_reports.append(step.report)
        s_next = 3.0 - (j + 1) / m
        norms.append(fj.majorant(s_next * r2, s_next * r3))

    psi_bound = 18.0 * m * r2 * eps * ctx.T / r1 if r1 > 0 else math.inf
    if not g.poisson(h).is_zero():
        raise ArithmeticError("g_hat failed to commute with h coefficient-exactly")
    return NormalFormResult(
        generators=generators,
        g_hat=g,
        f_hat=fj,
        norms=norms,
        conditions=conditions,
        psi_displacement_bound=psi_bound,
        step_reports=step_reports,
    )


# ----------------------------------------------------------------------
# explicit constants
# ----------------------------------------------------------------------

@dataclass
class RecipeConstants:
    """Explicit constants of the small-coupling stability construction."""

    theta: float
    a: float
    n: int
    l0: float
    l1: float
    l2: float
    L: float
    P: float
    delta: float
    C1: float
    r1: float
    r2: float
    r3: float
    m: int
    m_real: float
    T: float
    eps: float
    K: float
    k: float
    C_E: float
    tau: float

    def as_dict(self) -> dict:
        return {
            k: getattr(self, k)
            for k in (
                "theta", "a", "n", "l0", "l1", "l2", "L", "P", "delta", "C1",
                "r1", "r2", "r3", "m", "m_real", "T", "eps", "K", "k", "C_E", "tau",
            )
        }


def admissible_a_interval(n: int) -> float:
    """Upper end of the admissible exponent interval for a."""
    if n <= 1:
        return 1.0 / (1 + 3 * n)
    return min(1.0 / (4 * (n - 1)), 1.0 / (1 + 3 * n))


def stability_constants(
    n: int,
    normA: float,
    M: float,
    C_Lambda: float,
    C0: float = 1.0,
    C_A: Optional[float] = None,
) -> Dict[str, float]:
    """The theta-independent constants of the recipe (l0, l1, l2, L, P,
    delta, C1, K, k, C_E)."""
    if C_A is None:
        C_A = M
    l0 = 1.0 / 2200.0
    root = math.sqrt(M * normA)
    l1 = min(0.25, 1.0 / (20.0 * root)) if root > 0 else 0.25
    l2 = min(1.0 / 3888.0, 1.0 / (480.0 * root)) if root > 0 else 1.0 / 3888.0
    L = n * C_A / l1
    P = L / (2.0 * math.pi * math.sqrt(M))
    d1 = 1.0 / (324.0 * normA * L) if normA > 0 else math.inf
    d2 = L / (6912.0 * math.pi ** 2 * C_Lambda * P) if C_Lambda > 0 else math.inf
    delta = min(d1, d2)
    if not math.isfinite(delta):
        delta = 1.0
    return {
        "l0": l0, "l1": l1, "l2": l2, "L": L, "P": P, "delta": delta,
        "C1": (24.0 ** 5 + 24.0 ** 4 * P ** 2 + 24.0 * P ** 2) * C0,
        "K": max(2.0 * L / math.pi, L ** 2 / (16.0 * M * math.pi ** 2)),
        "k": 0.5 * math.log(2.0) * delta,
        "C_E": L ** 2 / ((4.0 * math.pi) ** 2 * 200.0 * M),
    }


def parameter_recipe(
    theta: float,
    a: float,
    n: int,
    normA: float,
    C0: float,
    M: float,
    C_Lambda: float,
    tau: float,
    C_A: Optional[float] = None,
) -> RecipeConstants:
    """Evaluate the explicit stability constants.

        l0 = 1/2200
        l1 = min(1/4, 1/(20 sqrt(M |A|)))
        l2 = min(1/3888, 1/(480 sqrt(M |A|)))
        L  = n C_A / l1          (C_A = bound on the inverse frequency map;
                                  the caller passes it through M*... see note)
        P  = L / (2 pi sqrt(M))
        delta = min(1/(324 |A| L), L/(6912 pi^2 C_Lambda P))
        C1 = (24^5 + 24^4 P^2 + 24 P^2) C0
        r2 = 8 theta, r1 = L theta^(2+a)/tau, r3 = P theta^(1+2a(1-n))
        m  = delta [theta^-a]  (reported as m_real; the step count is the
             positive integer max(1, floor(m_real)))
        T  = tau/theta^2, eps = C1 theta^5
        K  = max(2L/pi, L^2/(16 M pi^2)),  k = (ln 2 / 2) delta
        C_E = L^2 / ((4 pi)^2 200 M).

    The inverse-frequency-map bound C_A defaults to M (for A with
    <AI,I> >= |I|^2/M the map I -> alpha + AI has ||A^{-1}|| <= M); pass an
    exact ||A^{-1}|| to tighten L.
    """
    if not (0 < theta < 1):
        raise PreconditionError("theta must lie in (0, 1)")
    a_max = admissible_a_interval(n)
    if not (0 < a < a_max):
        raise PreconditionError(
            f"a = {a} outside the admissible interval (0, {a_max:.6g}) for n = {n}"
        )
    if tau < math.pi:
        raise PreconditionError(f"tau = {tau} must be >= pi")

    consts = stability_constants(n, normA, M, C_Lambda, C0=C0, C_A=C_A)
    L, P, delta, C1 = consts["L"], consts["P"], consts["delta"], consts["C1"]
    r2 = 8.0 * theta
    r1 = L * theta ** (2.0 + a) / tau
    r3 = P * theta ** (1.0 + 2.0 * a * (1 - n))
    m_real = delta * math.floor(theta ** (-a))
    m = max(1, math.floor(m_real))
    T = tau / theta ** 2
    eps = C1 * theta ** 5
    return RecipeConstants(
        theta=theta, a=a, n=n, l0=consts["l0"], l1=consts["l1"], l2=consts["l2"],
        L=L, P=P, delta=delta, C1=C1, r1=r1, r2=r2, r3=r3, m=m, m_real=m_real,
        T=T, eps=eps, K=consts["K"], k=consts["k"], C_E=consts["C_E"], tau=tau,
    )


def exponents_from_a(a: float, n: int) -> Tuple[float, float, float, float]:
    """Stability exponents (p1, q1, p2, q2) as functions of a:

        p1 = 2 / (2 + 2a(2n-1)),        q1 = (4 + 2an) / (2 + 2a(2n-1)),
        p2 = (2 + a) / (2 + 2a(2n-1)),  q2 = a / (2 + 2a(2n-1)) = p2 - p1.

    a = 0 is accepted to expose the limiting values (1, 2, 1, 0).
    """
    if not (0.0 <= a < admissible_a_interval(n)):
        raise PreconditionError(
            f"a = {a} outside the admissible interval [0, "
            f"{admissible_a_interval(n):.6g}) for n = {n}"
        )
    denom = 2.0 + 2.0 * a * (2 * n - 1)
    p1 = 2.0 / denom
    q1 = (4.0 + 2.0 * a * n) / denom
    p2 = (2.0 + a) / denom
    q2 = a / denom
    if not 2.0 * p2 > 1.0:
        raise ArithmeticError("exponent identity 2 p2 > 1 violated")
    return p1, q1, p2, q2


# ----------------------------------------------------------------------
# condition checking
# ----------------------------------------------------------------------

@dataclass
class ConditionCheck:
    name: str
    lhs: float
    op: str
    rhs: float
    passed: bool

    def __str__(self):
        status = "ok " if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.lhs:.6g} {self.op} {self.rhs:.6g}"


@dataclass
class ConditionReport:
    lemma: str
    checks: List[ConditionCheck]
    extras: Dict[str, float] = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "all_passed": self.all_passed,
            "checks": [
                {
                    "name": c.name, "lhs": c.lhs, "op": c.op,
                    "rhs": c.rhs, "passed": c.passed,
                }
                for c in self.checks
            ],
            "extras": self.extras,
        }

    def __str__(self):
        lines = [f"conditions for {self.lemma}:"]
        lines += [f"  {c}" for c in self.checks]
        for k, v in self.extras.items():
            lines.append(f"  {k} = {v:.6g}")
        return "\n".join(lines)


class ConditionSchemaError(ValueError):
    """Missing inputs for a condition check."""


_LEMMA_INPUTS = {
    "L3.1": ["eps", "T", "rho1", "rho2", "rho3", "r2"],
    "L4.1": ["r1", "r2", "r3", "m", "T", "eps", "delta", "normA", "kappa", "C_Lambda"],
    "L6.6": ["r1", "r2", "m", "T", "eps", "normA", "M", "I0_norm",
             "kappa_Lambda0", "action_gap"],
    "L7.5": ["r1", "r2", "r3", "m", "T", "eps", "normA", "M", "C_Lambda",
             "kappa", "I0_norm", "kappa_Lambda0", "action_gap"],
    "T6.9": ["theta", "a", "k", "kappa", "L", "M", "n", "sum_Jk", "kappa_Lambda0"],
    "T7.3": ["theta", "a", "n", "kappa", "C_E", "I0_abs", "kappa_Lambda0"],
    "T8.1": ["theta", "a", "n", "kappa", "C_E", "I0_abs", "kappa_Lambda0"],
}


def _lt(name, lhs, rhs):
    return ConditionCheck(name, float(lhs), "<", float(rhs), float(lhs) < float(rhs))


def _le(name, lhs, rhs):
    return ConditionCheck(name, float(lhs), "<=", float(rhs), float(lhs) <= float(rhs))


def check_conditions(lemma: str, inputs: Dict[str, object]) -> ConditionReport:
    """Evaluate the quantitative condition set of one lemma or theorem.

    ``lemma`` is one of L3.1, L4.1, L6.6, L7.5, T6.9, T7.3, T8.1.  Every
    referenced scalar must be present in ``inputs``; missing keys raise
    ``ConditionSchemaError`` listing all absent fields.  For T6.9 the inputs
    may carry polynomial invariants ``Jk`` (a list) together with ``Lambda``,
    whose Poisson commutation is verified coefficient-exactly.
    """
    if lemma not in _LEMMA_INPUTS:
        raise ValueError(f"unknown lemma tag {lemma!r}")
    missing = [k for k in _LEMMA_INPUTS[lemma] if k not in inputs]
    if missing:
        raise ConditionSchemaError(
            f"missing inputs for {lemma}: {', '.join(sorted(missing))}"
        )
    v = {k: inputs[k] for k in _LEMMA_INPUTS[lemma]}
    checks: List[ConditionCheck] = []
    extras: Dict[str, float] = {}

    if lemma == "L3.1":
        min_term = _min_rho_term((v["rho1"], v["rho2"], v["rho3"]), v["r2"],
                                 with_r3=v["rho3"] > 0)
        checks.append(_lt("eps*T < min(rho1/r2, rho2, rho3)^2 / 9",
                          v["eps"] * v["T"], min_term ** 2 / 9.0))

    elif lemma == "L4.1":
        r1, r2, r3, m, T = v["r1"], v["r2"], v["r3"], v["m"], v["T"]
        eps, delta = v["eps"], v["delta"]
        checks.append(_lt("(iv) r1 < 2 r2^2", r1, 2 * r2 ** 2))
        if r3 > 0:
            checks.append(_lt("(iv) r1 < 2 r2 r3", r1, 2 * r2 * r3))
        checks.append(_lt("(v) m^2 eps T < r1^2/(81 r2^2)",
                          m ** 2 * eps * T, r1 ** 2 / (81 * r2 ** 2)))
        lhs = (54 * m * v["normA"] * r1 * T
               + 324 * (delta + 2 * eps) * m ** 2 * r2 ** 2 * T / r1 ** 2
               + 4.5 * v["kappa"] * v["C_Lambda"] * m * T)
        checks.append(_le("(vi) contraction budget <= 1/2", lhs, 0.5))

    elif lemma == "L6.6":
        r1, r2, m, T, eps, M = v["r1"], v["r2"], v["m"], v["T"], v["eps"], v["M"]
        l1 = min(0.25, 1.0 / (5.0 * math.sqrt(M * v["normA"])))
        l2 = min(1.0 / 2592.0, 1.0 / (120.0 * math.sqrt(M * v["normA"])))
        extras["l1"], extras["l2"] = l1, l2
        checks.append(_lt("r1 < r2^2/4", r1, r2 ** 2 / 4))
        checks.append(_lt("eps*M < r1^2/2200", eps * M, r1 ** 2 / 2200.0))
        checks.append(_lt("|I0| < r2^2/16", v["I0_norm"], r2 ** 2 / 16))
        checks.append(_le("54 m |A| r1 T <= 1/4", 54 * m * v["normA"] * r1 * T, 0.25))
        checks.append(_lt("m^2 eps T < l2 r1^2/r2^2",
                          m ** 2 * eps * T, l2 * r1 ** 2 / r2 ** 2))
        checks.append(_le("kappa Lambda(0) <= r1^2/(360 M)",
                          v["kappa_Lambda0"], r1 ** 2 / (360.0 * M)))
        checks.append(_le("|I(0) - I0| <= l1 r1", v["action_gap"], l1 * r1))

    elif lemma == "L7.5":
        r1, r2, r3, m, T = v["r1"], v["r2"], v["r3"], v["m"], v["T"]
        eps, M = v["eps"], v["M"]
        l0 = 1.0 / 2200.0
        l1 = min(0.25, 1.0 / (20.0 * math.sqrt(M * v["normA"])))
        l2 = min(1.0 / 3888.0, 1.0 / (480.0 * math.sqrt(M * v["normA"])))
        extras["l0"], extras["l1"], extras["l2"] = l0, l1, l2
        checks.append(_lt("r1 < r2^2/4", r1, r2 ** 2 / 4))
        checks.append(_lt("r1 < 2 r2 r3", r1, 2 * r2 * r3))
        checks.append(_lt("eps*M < l0 r1^2", eps * M, l0 * r1 ** 2))
        checks.append(_lt("|I0| < r2^2/16", v["I0_norm"], r2 ** 2 / 16))
        checks.append(_le("r1^2 <= 4 kappa M r3^2",
                          r1 ** 2, 4 * v["kappa"] * M * r3 ** 2))
        checks.append(_le("54 m |A| r1 T <= 1/6",
                          54 * m * v["normA"] * r1 * T, 1.0 / 6.0))
        checks.append(_lt("m^2 eps T < l2 r1^2/r2^2",
                          m ** 2 * eps * T, l2 * r1 ** 2 / r2 ** 2))
        checks.append(_le("C_Lambda kappa m T <= r1/(54 r2 r3)",
                          v["C_Lambda"] * v["kappa"] * m * T,
                          r1 / (54 * r2 * r3)))
        checks.append(_le("|I(0) - I0| <= l1 r1", v["action_gap"], l1 * r1))
        checks.append(_le("kappa Lambda(0) <= r1^2/(200 M)",
                          v["kappa_Lambda0"], r1 ** 2 / (200.0 * M)))

    elif lemma == "T6.9":
        theta, a, kk = v["theta"], v["a"], v["k"]
        checks.append(_le(
            "sum |J_k(zeta(0))| <= theta^4 exp(-k/theta^a)/kappa",
            v["sum_Jk"],
            theta ** 4 * math.exp(-kk * theta ** (-a)) / v["kappa"],
        ))
        checks.append(_le(
            "kappa Lambda(0) <= L^2 theta^(4+2an)/((4 pi)^2 360 M)",
            v["kappa_Lambda0"],
            v["L"] ** 2 * theta ** (4 + 2 * a * v["n"])
            / ((4 * math.pi) ** 2 * 360.0 * v["M"]),
        ))
        Jks = inputs.get("Jk")
        Lam = inputs.get("Lambda")
        if Jks is not None and Lam is not None:
            for i, Jk in enumerate(Jks):
                ok = Jk.poisson(Lam).is_zero()
                checks.append(ConditionCheck(
                    f"{{J_{i + 1}, Lambda}} = 0 (coefficient-exact)",
                    0.0 if ok else 1.0, "==", 0.0, ok))

    elif lemma in ("T7.3", "T8.1"):
        theta, a, n = v["theta"], v["a"], v["n"]
        kappa_max = theta ** (2 + 2 * a * (2 * n - 1))
        checks.append(_le("|I(0)| <= theta^2", v["I0_abs"], theta ** 2))
        checks.append(_le(
            "kappa Lambda(0) <= C_E theta^(4+2an)",
            v["kappa_Lambda0"], v["C_E"] * theta ** (4 + 2 * a * n)))
        if lemma == "T7.3":
            match = abs(v["kappa"] - kappa_max) <= 1e-12 * max(kappa_max, 1e-300)
            checks.append(ConditionCheck(
                "kappa = theta^(2+2a(2n-1))", v["kappa"], "==", kappa_max, match))
        else:
            checks.append(ConditionCheck(
                "0 < kappa <= theta^(2+2a(2n-1))", v["kappa"], "<=", kappa_max,
                0 < v["kappa"] <= kappa_max))
        amax = admissible_a_interval(n)
        checks.append(_lt("a < min(1/(4(n-1)), 1/(1+3n))", a, amax))

    return ConditionReport(lemma=lemma, checks=checks, extras=extras)


def theta_threshold(
    a: float,
    n: int,
    normA: float,
    C0: float,
    M: float,
    C_Lambda: float,
    lemma: str = "L7.5",
    theta_hi: float = 0.5,
    theta_lo: float = 1e-60,
    grid: int = 2400,
) -> float:
    """Largest theta (on a log grid) at which the recipe output satisfies the
    full condition set of ``lemma``, using the worst-case period bound
    tau = 4*pi*theta^(-a(n-1)).  Returns 0.0 if no grid point passes."""
    best = 0.0
    for t in np.geomspace(theta_hi, theta_lo, grid):
        theta = float(t)
        tau = 4 * math.pi * theta ** (-a * (n - 1)) if n > 1 else 4 * math.pi
        rec = parameter_recipe(theta, a, n, normA, C0, M, C_Lambda, tau)
        rep = check_conditions(lemma, recipe_condition_inputs(rec, normA, M,
                                                              C_Lambda))
        if rep.all_passed:
            best = theta
            break
    return best


def recipe_condition_inputs(rec: "RecipeConstants", normA: float, M: float,
                            C_Lambda: float) -> Dict[str, float]:
    """Full condition-check input set derived from recipe output, using the
    real-valued step-count formula and the hypothesis-level initial-data
    bounds."""
    theta, a, n = rec.theta, rec.a, rec.n
    return {
        "theta": theta, "a": a, "n": n,
        "r1": rec.r1, "r2": rec.r2, "r3": rec.r3,
        "rho1": rec.r1 / 3.0, "rho2": rec.r2 / 3.0, "rho3": rec.r3 / 3.0,
        "m": max(rec.m_real, 1e-300), "T": rec.T, "eps": rec.eps,
        "delta": 0.0, "normA": normA, "M": M, "C_Lambda": C_Lambda,
        "kappa": theta ** (2 + 2 * a * (2 * n - 1)),
        "k": rec.k, "L": rec.L, "C_E": rec.C_E,
        "I0_abs": theta ** 2, "I0_norm": 2 * theta ** 2,
        "kappa_Lambda0": rec.C_E * theta ** (4 + 2 * a * n),
        "action_gap": n * M * theta ** (2 + a) / rec.tau,
        "sum_Jk": 0.0,
    }
