"""Simultaneous Diophantine approximation and periodic-frequency construction.

``dirichlet_best`` performs the exhaustive search behind the classical
Dirichlet bound: for every q in {1..Q} round q*omega to the nearest integer
vector and keep the best q, which guarantees err <= Q^(-1/n).

``periodic_frequency`` turns a frequency vector with |omega|_inf > 1 into a
nearby fully resonant vector omega0 with T*omega0 in 2*pi*Z^n and

    |omega - omega0|_inf <= 2*pi / (T * Q^(1/(n-1))),
    2*pi*(1 - |omega|_inf^(-1)) <= T <= 2*pi*Q.

``approximate_periodic_orbit`` applies this to the frequency map
I -> alpha + A*I at actions with |I|_1 = theta^2, producing the approximating
periodic orbit data (I0, tau, omega0, T = tau/theta^2) with

    |I - I0|_inf <= C * theta^(2+a) / tau,   C = 2*pi*||A^{-1}||_inf,
    pi <= tau <= 4*pi*theta^(-a(n-1)).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Tuple

import numpy as np

__all__ = [
    "PeriodicApproximation",
    "dirichlet_best",
    "periodic_frequency",
    "approximate_periodic_orbit",
]


@dataclass
class PeriodicApproximation:
    """Approximating periodic orbit data.

    Attributes
    ----------
    I0 : array (n,)
        Reference actions whose frequency vector is fully resonant.
    tau : float
        Rescaled period, pi <= tau <= 4*pi*theta^(-a(n-1)).
    omega0 : array (n,)
        Resonant frequency vector alpha + A I0.
    T : float
        Actual period tau / theta^2: T*omega0 lies in 2*pi*Z^n.
    theta : float
        Smallness parameter, theta^2 = |I_init|_1.
    Q : int
        Dirichlet search depth used, Q = floor(theta^(-a(n-1))) + 1.
    """

    I0: np.ndarray
    tau: float
    omega0: np.ndarray
    T: float
    theta: float
    Q: int


def dirichlet_best(omega, Q: int) -> Tuple[int, np.ndarray, float]:
    """Best simultaneous rational approximation with denominator q <= Q.

    Returns (q, p, err) minimising err = |q*omega - p|_inf over q in {1..Q}
    with p the nearest integer vector (ties round to even).  The minimum
    satisfies err <= Q^(-1/n).
    """
    omega = np.asarray(omega, dtype=float)
    if omega.ndim != 1 or omega.size == 0:
        raise ValueError("omega must be a non-empty vector")
    Q = int(Q)
    if Q < 1:
        raise ValueError("Q must be >= 1")
    best = None
    for q in range(1, Q + 1):
        target = q * omega
        p = np.rint(target)
        err = float(np.max(np.abs(target - p)))
        if best is None or err < best[2]:
            best = (q, p.astype(np.int64), err)
    return best


def periodic_frequency(omega, Q: int) -> Tuple[np.ndarray, float]:
    """Construct a nearby T-periodic frequency vector.

    Requires |omega|_inf > 1.  For n >= 2: reorder so the largest-magnitude
    component sits last, rescale the leading components by [w_n]/w_n, apply
    ``dirichlet_best`` in dimension n-1, and set

        T = 2*pi*q*[w_n]/w_n,
        omega0 = (w_n/[w_n]) * (p_1/q, ..., p_{n-1}/q, [w_n])

    (undoing the reordering before returning).  For n = 1 the single
    frequency is approximated directly by p/q with q <= Q, so the error
    bound reads |omega - omega0| <= 2*pi/(T*Q).
    """
    omega = np.asarray(omega, dtype=float)
    n = omega.size
    Q = int(Q)
    if Q < 1:
        raise ValueError("Q must be >= 1")
    idx_max = int(np.argmax(np.abs(omega)))
    wn = abs(float(omega[idx_max]))
    if wn <= 1.0:
        raise ValueError(f"|omega|_inf = {wn} must exceed 1")

    if n == 1:
        q, p, _ = dirichlet_best(omega, Q)
        T = 2.0 * math.pi * q
        omega0 = np.array([float(p[0]) / q])
        return omega0, T

    order = list(range(n))
    order.remove(idx_max)
    order.append(idx_max)
    w = omega[order]
    sign = 1.0 if w[-1] >= 0 else -1.0
    w_last = float(w[-1]) * sign
    floor_w = float(math.floor(w_last))
    scaled = (floor_w / w_last) * w[:-1]
    q, p, _ = dirichlet_best(scaled, Q)
    T = 2.0 * math.pi * q * floor_w / w_last
    head = (w_last / floor_w) * (p.astype(float) / q)
    # (w_n/[w_n]) * [w_n] is exactly the original component
    w0 = np.concatenate([head, [w_last * sign]])

    omega0 = np.empty(n)
    for pos, orig in enumerate(order):
        omega0[orig] = w0[pos]
    return omega0, T


def approximate_periodic_orbit(alpha, A, I_init, a: float) -> PeriodicApproximation:
    """Approximating periodic orbit for the frequency map I -> alpha + A*I.

    Sets theta^2 = |I_init|_1, Q = floor(theta^(-a(n-1))) + 1, rescales
    omega = alpha + A I_init by theta^(-2), calls ``periodic_frequency`` and
    maps back: omega0 = theta^2 * omega0~, I0 = A^{-1} (omega0 - alpha),
    tau = T~, T = tau / theta^2.

    A warning (not an error) is emitted when theta exceeds the smallness
    threshold under which the construction is guaranteed to stay within the
    invertibility neighbourhood; the concrete threshold uses the margin
    delta = |alpha|_inf / 2.
    """
    alpha = np.asarray(alpha, dtype=float)
    A = np.asarray(A, dtype=float)
    I_init = np.asarray(I_init, dtype=float)
    n = alpha.size
    theta_sq = float(np.sum(np.abs(I_init)))
    if theta_sq <= 0:
        raise ValueError("I_init must have positive l1 norm")
    theta = math.sqrt(theta_sq)
    try:
        A_inv = np.linalg.inv(A)
    except np.linalg.LinAlgError:
        raise ValueError("A must be invertible") from None

    _warn_outside_threshold(alpha, A, I_init, theta, a, n)

    omega = alpha + A @ I_init
    if n >= 2:
        Q = int(math.floor(theta ** (-a * (n - 1)))) + 1
    else:
        Q = int(math.floor(theta ** (-a))) + 1
    omega_scaled = omega / theta_sq
    omega0_scaled, tau = periodic_frequency(omega_scaled, Q)
    omega0 = theta_sq * omega0_scaled
    I0 = A_inv @ (omega0 - alpha)
    T = tau / theta_sq
    return PeriodicApproximation(I0=I0, tau=tau, omega0=omega0, T=T, theta=theta, Q=Q)


def _warn_outside_threshold(alpha, A, I_init, theta, a, n):
    """Smallness inequalities that keep the construction inside the
    invertibility neighbourhood, with margin delta = |alpha|_inf/2."""
    alpha_inf = float(np.max(np.abs(alpha)))
    if alpha_inf == 0:
        warnings.warn("alpha = 0: periodic approximation has no frequency margin")
        return
    delta = alpha_inf / 2.0
    omega_shift = float(np.max(np.abs(A @ I_init)))
    conditions = [
        (omega_shift < delta / 2, "|A I| < |alpha|_inf/4"),
        (theta ** 2 < alpha_inf / 4, "theta^2 < |alpha|_inf/4"),
        (theta ** (a * max(n - 1, 1)) < 1, "theta^(a(n-1)) < 1"),
        (2 * theta ** (2 + a) < delta / 2, "2 theta^(2+a) < |alpha|_inf/4"),
    ]
    failed = [msg for ok, msg in conditions if not ok]
    if failed:
        warnings.warn(
            "theta outside the guaranteed smallness threshold: "
            + "; ".join(failed)
        )
