"""System definitions and geometric primitives.

A system is

    H(z, zeta) = <alpha, I(z)> + 1/2 <A I(z), I(z)> + f(z, zeta) + kappa * Lambda(zeta)

on R^{2n} x R^{2N}, with actions I_j = (x_j^2 + y_j^2)/2, the l1 action
distance |I - J| = sum_j |I_j - J_j|, and the matrix norm of A taken as the
operator norm with respect to that l1 norm.  The module provides phase
points, system specifications with their structural constants (M, C_Lambda,
C0), Hamiltonian values and vector fields, and a sampling/eigenvalue checker
for the structural hypotheses

    <A I, I> >= |I|^2 / M,
    Lambda(zeta) >= |zeta|^2 / 2,      Lambda(zeta) <= C_Lambda |zeta|^2 / 2,
    |D Lambda(zeta)| <= C_Lambda |zeta|,
    |f(z, zeta)| <= C0 (|z|^5 + |zeta|^2 |z|^4 + kappa |zeta|^2 |z|).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .polyalg import (
    AmbientMismatchError,
    Polynomial,
    action_polynomial,
)

__all__ = [
    "PhasePoint",
    "SystemSpec",
    "HypothesisCheck",
    "HypothesisReport",
    "actions",
    "action_distance",
    "hamiltonian_value",
    "vector_field",
    "total_polynomial",
    "check_structural_hypotheses",
    "symplectic_matrix",
    "matrix_l1_operator_norm",
    "lambda_quadratic_matrix",
]


@dataclass(frozen=True)
class PhasePoint:
    """A real phase-space point (z, zeta) with z ordered (x_1..x_n, y_1..y_n)
    and zeta ordered (xi_1..xi_N, eta_1..eta_N)."""

    z: np.ndarray
    zeta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=float))
        object.__setattr__(self, "zeta", np.asarray(self.zeta, dtype=float))
        if self.z.ndim != 1 or self.z.size % 2:
            raise ValueError("z must be a flat vector of even length")
        if self.zeta.ndim != 1 or self.zeta.size % 2:
            raise ValueError("zeta must be a flat vector of even length")

    @property
    def n(self) -> int:
        return self.z.size // 2

    @property
    def N(self) -> int:
        return self.zeta.size // 2

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.z, self.zeta])

    @staticmethod
    def from_array(vec, n: int, N: int) -> "PhasePoint":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (2 * n + 2 * N,):
            raise ValueError(f"expected vector of length {2 * n + 2 * N}")
        return PhasePoint(vec[: 2 * n].copy(), vec[2 * n:].copy())

    def norm_z(self) -> float:
        return float(np.linalg.norm(self.z))

    def norm_zeta(self) -> float:
        return float(np.linalg.norm(self.zeta))


def actions(pt: PhasePoint) -> np.ndarray:
    """Action vector I_j = (x_j^2 + y_j^2)/2."""
    n = pt.n
    return 0.5 * (pt.z[:n] ** 2 + pt.z[n:] ** 2)


def action_distance(I, J) -> float:
    """l1 distance sum_j |I_j - J_j| between two action vectors."""
    I = np.asarray(I, dtype=float)
    J = np.asarray(J, dtype=float)
    if I.shape != J.shape:
        raise ValueError(f"action vectors of shapes {I.shape} and {J.shape}")
    return float(np.sum(np.abs(I - J)))


def matrix_l1_operator_norm(A) -> float:
    """Operator norm of A with respect to the l1 vector norm (max column sum)."""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(A), axis=0)))


def symplectic_matrix(n: int, N: int) -> np.ndarray:
    """Standard symplectic form S in the fixed (x.., y.., xi.., eta..) order,
    so that the equations of motion read d/dt p = S grad H."""
    D = 2 * n + 2 * N
    S = np.zeros((D, D))
    for j in range(n):
        S[j, n + j] = 1.0
        S[n + j, j] = -1.0
    for k in range(N):
        S[2 * n + k, 2 * n + N + k] = 1.0
        S[2 * n + N + k, 2 * n + k] = -1.0
    return S


@dataclass
class SystemSpec:
    """Full description of a system H = <alpha,I> + <AI,I>/2 + f + kappa*Lambda.

    Parameters
    ----------
    n, N : int
        Core and transverse pair counts.
    alpha : array (n,)
        Linear frequencies at the elliptic fixed point.
    A : array (n, n)
        Symmetric frequency-map Hessian (in the actions).
    I0 : array (n,)
        Reference actions used by the normal-form rewrite; the raw
        Hamiltonian value does not depend on them.
    f : Polynomial
        Perturbation, vanishing to high order at the origin.
    Lambda : Polynomial
        Confining potential, depending only on the zeta variables.
    kappa : float >= 0
        Coupling strength multiplying Lambda.
    M : float
        Convexity constant: <AI,I> >= |I|^2/M is the hypothesis to certify.
    C_Lambda : float
        Quadratic-bound constant for Lambda.
    C0 : float
        Growth constant for f.
    """

    n: int
    N: int
    alpha: np.ndarray
    A: np.ndarray
    I0: np.ndarray
    f: Polynomial
    Lambda: Polynomial
    kappa: float
    M: float = 1.0
    C_Lambda: float = 1.0
    C0: float = 1.0
    _total: Optional[Polynomial] = field(default=None, init=False, repr=False,
                                         compare=False)

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float).reshape(self.n)
        self.A = np.asarray(self.A, dtype=float).reshape(self.n, self.n)
        self.I0 = np.asarray(self.I0, dtype=float).reshape(self.n)
        if np.max(np.abs(self.A - self.A.T), initial=0.0) > 1e-12:
            raise ValueError("A must be symmetric to 1e-12")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        for name, p in (("f", self.f), ("Lambda", self.Lambda)):
            if p.n != self.n or p.N != self.N:
                raise AmbientMismatchError(
                    f"{name} has ambient (n={p.n}, N={p.N}), expected "
                    f"(n={self.n}, N={self.N})"
                )
        if not self.Lambda.depends_only_on_zeta():
            raise ValueError("Lambda must depend only on the zeta variables")

    @property
    def nvars(self) -> int:
        return 2 * self.n + 2 * self.N

    def omega_ref(self) -> np.ndarray:
        """Frequency vector alpha + A I0 at the reference actions."""
        return self.alpha + self.A @ self.I0

    def norm_A(self) -> float:
        return matrix_l1_operator_norm(self.A)

    def C_A(self) -> float:
        """Bound on the inverse of the frequency map I -> alpha + A I
        (infinity-norm operator norm of A^{-1})."""
        return float(np.linalg.norm(np.linalg.inv(self.A), ord=np.inf))


def total_polynomial(spec: SystemSpec) -> Polynomial:
    """The full Hamiltonian <alpha,I> + <AI,I>/2 + f + kappa*Lambda as one
    polynomial (cached on the spec)."""
    if spec._total is None:
        n, N = spec.n, spec.N
        I_polys = [action_polynomial(n, N, j) for j in range(n)]
        H = Polynomial.zero(n, N)
        for j in range(n):
            H = H + I_polys[j].scale(float(spec.alpha[j]))
        for j in range(n):
            for k in range(n):
                a = float(spec.A[j, k])
                if a != 0.0:
                    H = H + (I_polys[j] * I_polys[k]).scale(0.5 * a)
        H = H + spec.f + spec.Lambda.scale(spec.kappa)
        spec._total = H
    return spec._total


def hamiltonian_value(spec: SystemSpec, pt: PhasePoint) -> float:
    """H(z, zeta) assembled from its four summands."""
    I = actions(pt)
    core = float(spec.alpha @ I + 0.5 * I @ (spec.A @ I))
    return core + spec.f.evaluate(pt) + spec.kappa * spec.Lambda.evaluate(pt)


def vector_field(spec: SystemSpec, pt: PhasePoint) -> np.ndarray:
    """Hamiltonian vector field at pt:
    dx_j/dt = dH/dy_j, dy_j/dt = -dH/dx_j, and likewise for (xi, eta)."""
    n, N = spec.n, spec.N
    vec = pt.as_array()
    grad = np.array([g.evaluate(vec) for g in total_polynomial(spec).gradient()])
    out = np.empty_like(grad)
    out[:n] = grad[n: 2 * n]
    out[n: 2 * n] = -grad[:n]
    out[2 * n: 2 * n + N] = grad[2 * n + N:]
    out[2 * n + N:] = -grad[2 * n: 2 * n + N]
    return out


def lambda_quadratic_matrix(Lambda: Polynomial, N: int) -> Optional[np.ndarray]:
    """If Lambda = 1/2 zeta^T Q zeta exactly, return the symmetric Q (2N x 2N);
    otherwise None."""
    n = Lambda.n
    Q = np.zeros((2 * N, 2 * N))
    for key, c in Lambda.terms.items():
        if sum(key[: 2 * n]) != 0 or sum(key) != 2:
            return None
        idx = []
        for i in range(2 * n, len(key)):
            idx.extend([i - 2 * n] * key[i])
        if len(idx) != 2:
            return None
        a, b = idx
        if a == b:
            Q[a, a] += 2.0 * c
        else:
            Q[a, b] += c
            Q[b, a] += c
    return Q


@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    detail: str
    witness: Optional[np.ndarray] = None


@dataclass
class HypothesisReport:
    checks: List[HypothesisCheck]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def violations(self) -> List[HypothesisCheck]:
        return [c for c in self.checks if not c.passed]

    def __str__(self):
        lines = []
        for c in self.checks:
            status = "ok " if c.passed else "FAIL"
            lines.append(f"[{status}] {c.name}: {c.detail}")
        return "\n".join(lines)


def check_structural_hypotheses(
    spec: SystemSpec,
    z_radius: float = 1.0,
    zeta_radius: float = 1.0,
    samples: int = 10_000,
    seed: int = 0,
) -> HypothesisReport:
    """Verify the structural hypotheses of the system.

    Convexity is certified through the sufficient eigenvalue criterion
    lambda_min(A) >= n/M (so that <AI,I> >= lambda_min |I|_2^2 >= |I|_1^2/M).
    The Lambda bounds are checked exactly on the quadratic coefficients when
    Lambda is quadratic, and on ``samples`` random zeta in the configured
    ball otherwise; the f growth bound is checked by sampling.  Violations
    carry a witness point.
    """
    rng = np.random.default_rng(seed)
    n, N = spec.n, spec.N
    checks: List[HypothesisCheck] = []

    lam_min = float(np.min(np.linalg.eigvalsh(spec.A))) if n else 0.0
    ok = lam_min >= n / spec.M - 1e-12
    checks.append(
        HypothesisCheck(
            "convexity <AI,I> >= |I|^2/M",
            ok,
            f"lambda_min(A)={lam_min:.6g} vs n/M={n / spec.M:.6g} "
            "(sufficient eigenvalue certificate)",
        )
    )

    Q = lambda_quadratic_matrix(spec.Lambda, N) if N else np.zeros((0, 0))
    if N == 0:
        checks.append(HypothesisCheck("Lambda lower bound", True, "N=0, vacuous"))
        checks.append(HypothesisCheck("Lambda upper bound", True, "N=0, vacuous"))
        checks.append(HypothesisCheck("|DLambda| bound", True, "N=0, vacuous"))
    elif Q is not None:
        ev = np.linalg.eigvalsh(Q)
        lo, hi = float(ev[0]), float(ev[-1])
        ok_lo = lo >= 1.0 - 1e-12
        checks.append(
            HypothesisCheck(
                "Lambda(zeta) >= |zeta|^2/2",
                ok_lo,
                f"quadratic Lambda, lambda_min(Q)={lo:.6g} (need >= 1)",
                witness=None if ok_lo else _eigvec_witness(Q, 0, n, N),
            )
        )
        ok_hi = hi <= spec.C_Lambda + 1e-12
        checks.append(
            HypothesisCheck(
                "Lambda(zeta) <= C_Lambda |zeta|^2/2",
                ok_hi,
                f"quadratic Lambda, lambda_max(Q)={hi:.6g} (need <= C_Lambda={spec.C_Lambda:.6g})",
                witness=None if ok_hi else _eigvec_witness(Q, -1, n, N),
            )
        )
        checks.append(
            HypothesisCheck(
                "|DLambda(zeta)| <= C_Lambda |zeta|",
                ok_hi,
                f"|Q zeta| <= lambda_max(Q) |zeta|, lambda_max={hi:.6g}",
                witness=None if ok_hi else _eigvec_witness(Q, -1, n, N),
            )
        )
    else:
        checks.extend(_sampled_lambda_checks(spec, zeta_radius, samples, rng))

    checks.append(_sampled_f_check(spec, z_radius, zeta_radius, samples, rng))
    return HypothesisReport(checks)


def _eigvec_witness(Q: np.ndarray, which: int, n: int, N: int) -> np.ndarray:
    _, vecs = np.linalg.eigh(Q)
    zeta = vecs[:, which]
    return np.concatenate([np.zeros(2 * n), zeta])


def _sampled_lambda_checks(spec, zeta_radius, samples, rng):
    n, N = spec.n, spec.N
    dirs = rng.normal(size=(samples, 2 * N))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = zeta_radius * rng.uniform(0, 1, size=(samples, 1)) ** (1.0 / (2 * N))
    zetas = dirs * radii
    grads = spec.Lambda.gradient()[2 * n:]
    worst = {"lower": None, "upper": None, "grad": None}
    ok_lower = ok_upper = ok_grad = True
    for zeta in zetas:
        pt = np.concatenate([np.zeros(2 * n), zeta])
        val = spec.Lambda.evaluate(pt)
        norm2 = float(zeta @ zeta)
        if val < 0.5 * norm2 - 1e-12 and ok_lower:
            ok_lower, worst["lower"] = False, pt
        if val > 0.5 * spec.C_Lambda * norm2 + 1e-12 and ok_upper:
            ok_upper, worst["upper"] = False, pt
        dval = np.array([g.evaluate(pt) for g in grads])
        if np.linalg.norm(dval) > spec.C_Lambda * np.sqrt(norm2) + 1e-12 and ok_grad:
            ok_grad, worst["grad"] = False, pt
    return [
        HypothesisCheck(
            "Lambda(zeta) >= |zeta|^2/2", ok_lower,
            f"sampled {samples} points in |zeta| <= {zeta_radius}", worst["lower"],
        ),
        HypothesisCheck(
            "Lambda(zeta) <= C_Lambda |zeta|^2/2", ok_upper,
            f"sampled {samples} points in |zeta| <= {zeta_radius}", worst["upper"],
        ),
        HypothesisCheck(
            "|DLambda(zeta)| <= C_Lambda |zeta|", ok_grad,
            f"sampled {samples} points in |zeta| <= {zeta_radius}", worst["grad"],
        ),
    ]


def _sampled_f_check(spec, z_radius, zeta_radius, samples, rng):
    n, N = spec.n, spec.N
    ok = True
    witness = None
    worst_ratio = 0.0
    for _ in range(samples):
        z = rng.normal(size=2 * n)
        z *= z_radius * rng.uniform() ** (1.0 / (2 * n)) / np.linalg.norm(z)
        if N:
            zeta = rng.normal(size=2 * N)
            zeta *= zeta_radius * rng.uniform() ** (1.0 / (2 * N)) / np.linalg.norm(zeta)
        else:
            zeta = np.zeros(0)
        pt = np.concatenate([z, zeta])
        nz = np.linalg.norm(z)
        nzeta = np.linalg.norm(zeta) if N else 0.0
        bound = spec.C0 * (nz ** 5 + nzeta ** 2 * nz ** 4 + spec.kappa * nzeta ** 2 * nz)
        val = abs(spec.f.evaluate(pt))
        if val > bound + 1e-12:
            ratio = val / bound if bound > 0 else np.inf
            if ratio > worst_ratio:
                worst_ratio, witness, ok = ratio, pt, False
    detail = f"sampled {samples} points in |z| <= {z_radius}, |zeta| <= {zeta_radius}"
    if not ok:
        detail += f"; worst excess ratio {worst_ratio:.3g}"
    return HypothesisCheck(
        "|f| <= C0 (|z|^5 + |zeta|^2 |z|^4 + kappa |zeta|^2 |z|)", ok, detail, witness
    )
