"""Sparse real-coefficient polynomial algebra on the phase variables.

Polynomials live on the phase space R^{2n} x R^{2N} with the fixed global
variable order

    (x_1, ..., x_n, y_1, ..., y_n, xi_1, ..., xi_N, eta_1, ..., eta_N).

The class supports exact coefficient arithmetic (add/sub/mul/scale),
partial derivatives, the canonical Poisson bracket

    {F, G} = sum_j (dF/dx_j dG/dy_j - dF/dy_j dG/dx_j)
           + sum_k (dF/dxi_k dG/deta_k - dF/deta_k dG/dxi_k),

pointwise evaluation and a coefficient-majorant norm

    sum |c| * r2^(degree in x,y) * r3^(degree in xi,eta)

which upper-bounds the supremum of the polynomial on {|z| <= r2, |zeta| <= r3}.

Polynomials are immutable values; every operation returns a new canonical
instance (no zero coefficients, no duplicate exponent keys).  Results of
binary operations drop coefficients smaller than 1e-14 times the largest
coefficient magnitude appearing in the operands, which keeps cancellation
dust from accumulating while staying far below any test tolerance used
downstream.
"""

from __future__ import annotations

import math
import re
from typing import Dict, Iterator, Sequence, Tuple

import numpy as np

__all__ = [
    "AmbientMismatchError",
    "PolynomialParseError",
    "Monomial",
    "Polynomial",
    "coordinate",
    "constant",
    "action_polynomial",
    "parse_polynomial",
    "format_polynomial",
]

#: relative threshold for dropping cancellation dust in binary operations
DROP_RATIO = 1e-14

ExponentKey = Tuple[int, ...]


class AmbientMismatchError(ValueError):
    """Raised when two polynomials (or a polynomial and a point) disagree
    on the ambient dimensions (n, N)."""


class PolynomialParseError(ValueError):
    """Raised when a textual polynomial cannot be parsed."""


class Monomial:
    """A single term: a coefficient together with its exponent vector."""

    __slots__ = ("exponents", "coefficient")

    def __init__(self, exponents: ExponentKey, coefficient: float):
        self.exponents = tuple(int(e) for e in exponents)
        self.coefficient = float(coefficient)

    def __repr__(self):
        return f"Monomial({self.exponents}, {self.coefficient!r})"


def _check_same_ambient(p: "Polynomial", q: "Polynomial"):
    if p.n != q.n or p.N != q.N:
        raise AmbientMismatchError(
            f"ambient mismatch: (n={p.n}, N={p.N}) vs (n={q.n}, N={q.N})"
        )


class Polynomial:
    """Sparse polynomial in the 2n+2N phase variables.

    Parameters
    ----------
    n, N : int
        Numbers of (x, y) and (xi, eta) conjugate pairs.
    terms : dict, optional
        Mapping from exponent tuples (length 2n+2N) to float coefficients.
        Zero coefficients are removed; the mapping is copied.
    """

    __slots__ = ("n", "N", "terms")

    def __init__(self, n: int, N: int, terms: Dict[ExponentKey, float] | None = None):
        if n < 0 or N < 0:
            raise ValueError("ambient dimensions must be non-negative")
        self.n = int(n)
        self.N = int(N)
        nvars = 2 * self.n + 2 * self.N
        clean: Dict[ExponentKey, float] = {}
        if terms:
            for key, coef in terms.items():
                key = tuple(int(e) for e in key)
                if len(key) != nvars:
                    raise ValueError(
                        f"exponent key {key} has length {len(key)}, expected {nvars}"
                    )
                if any(e < 0 for e in key):
                    raise ValueError(f"negative exponent in key {key}")
                c = float(coef)
                if c != 0.0:
                    clean[key] = c
        self.terms = clean

    # ------------------------------------------------------------------
    # basic structure
    # ------------------------------------------------------------------

    @property
    def nvars(self) -> int:
        return 2 * self.n + 2 * self.N

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def monomials(self) -> Iterator[Monomial]:
        for key in sorted(self.terms):
            yield Monomial(key, self.terms[key])

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def degree(self) -> int:
        """Total degree (-1 for the zero polynomial)."""
        return max((sum(k) for k in self.terms), default=-1)

    def min_degree(self) -> int:
        """Smallest total degree among stored terms (-1 for zero)."""
        return min((sum(k) for k in self.terms), default=-1)

    def z_degree(self, key: ExponentKey) -> int:
        return sum(key[: 2 * self.n])

    def zeta_degree(self, key: ExponentKey) -> int:
        return sum(key[2 * self.n:])

    def depends_only_on_zeta(self) -> bool:
        return all(self.z_degree(k) == 0 for k in self.terms)

    def depends_only_on_z(self) -> bool:
        return all(self.zeta_degree(k) == 0 for k in self.terms)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.n == other.n and self.N == other.N and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, self.N, frozenset(self.terms.items())))

    def __repr__(self):
        return f"Polynomial(n={self.n}, N={self.N}, '{format_polynomial(self)}')"

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------

    @staticmethod
    def zero(n: int, N: int) -> "Polynomial":
        return Polynomial(n, N)

    @staticmethod
    def constant(n: int, N: int, value: float) -> "Polynomial":
        key = (0,) * (2 * n + 2 * N)
        return Polynomial(n, N, {key: value})

    @staticmethod
    def coordinate(n: int, N: int, index: int) -> "Polynomial":
        nvars = 2 * n + 2 * N
        if not 0 <= index < nvars:
            raise ValueError(f"coordinate index {index} out of range for {nvars} variables")
        key = tuple(1 if i == index else 0 for i in range(nvars))
        return Polynomial(n, N, {key: 1.0})

    # ------------------------------------------------------------------
    # arithmetic
    # ------------------------------------------------------------------

    def _with_drop(self, terms: Dict[ExponentKey, float], op_max: float) -> "Polynomial":
        cut = DROP_RATIO * op_max
        out = Polynomial.__new__(Polynomial)
        out.n, out.N = self.n, self.N
        out.terms = {k: c for k, c in terms.items() if abs(c) > cut and c != 0.0}
        return out

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.n, self.N, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        _check_same_ambient(self, other)
        merged = dict(self.terms)
        for key, c in other.terms.items():
            merged[key] = merged.get(key, 0.0) + c
        op_max = max(self.max_abs_coeff(), other.max_abs_coeff())
        return self._with_drop(merged, op_max)

    __radd__ = __add__

    def __neg__(self):
        out = Polynomial.__new__(Polynomial)
        out.n, out.N = self.n, self.N
        out.terms = {k: -c for k, c in self.terms.items()}
        return out

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.n, self.N, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        if not isinstance(other, Polynomial):
            return NotImplemented
        _check_same_ambient(self, other)
        prod: Dict[ExponentKey, float] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(k1, k2))
                prod[key] = prod.get(key, 0.0) + c1 * c2
        op_max = max(self.max_abs_coeff(), other.max_abs_coeff())
        return self._with_drop(prod, op_max)

    __rmul__ = __mul__

    def scale(self, factor: float) -> "Polynomial":
        """Exact scalar multiple (only exact zeros are removed)."""
        out = Polynomial.__new__(Polynomial)
        out.n, out.N = self.n, self.N
        if factor == 0.0:
            out.terms = {}
        else:
            out.terms = {k: factor * c for k, c in self.terms.items()
                         if factor * c != 0.0}
        return out

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = Polynomial.constant(self.n, self.N, 1.0)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def truncate(self, degree_cap: int) -> "Polynomial":
        """Drop all terms of total degree above ``degree_cap``."""
        out = Polynomial.__new__(Polynomial)
        out.n, out.N = self.n, self.N
        out.terms = {k: c for k, c in self.terms.items() if sum(k) <= degree_cap}
        return out

    # ------------------------------------------------------------------
    # calculus
    # ------------------------------------------------------------------

    def partial(self, index: int) -> "Polynomial":
        """Exact partial derivative with respect to variable ``index``."""
        if not 0 <= index < self.nvars:
            raise ValueError(f"variable index {index} out of range")
        terms: Dict[ExponentKey, float] = {}
        for key, c in self.terms.items():
            e = key[index]
            if e == 0:
                continue
            dkey = key[:index] + (e - 1,) + key[index + 1:]
            terms[dkey] = terms.get(dkey, 0.0) + c * e
        out = Polynomial.__new__(Polynomial)
        out.n, out.N = self.n, self.N
        out.terms = {k: c for k, c in terms.items() if c != 0.0}
        return out

    def gradient(self) -> Tuple["Polynomial", ...]:
        """All 2n+2N partial derivatives in the fixed variable order."""
        return tuple(self.partial(i) for i in range(self.nvars))

    def poisson(self, other: "Polynomial") -> "Polynomial":
        """Poisson bracket {self, other} with the x->y, xi->eta convention."""
        if not isinstance(other, Polynomial):
            raise TypeError("poisson bracket requires a Polynomial")
        _check_same_ambient(self, other)
        n, N = self.n, self.N
        acc: Dict[ExponentKey, float] = {}

        def _accumulate(a: "Polynomial", b: "Polynomial", sign: float):
            for k1, c1 in a.terms.items():
                for k2, c2 in b.terms.items():
                    key = tuple(u + v for u, v in zip(k1, k2))
                    acc[key] = acc.get(key, 0.0) + sign * c1 * c2

        for j in range(n):
            _accumulate(self.partial(j), other.partial(n + j), 1.0)
            _accumulate(self.partial(n + j), other.partial(j), -1.0)
        for k in range(N):
            _accumulate(self.partial(2 * n + k), other.partial(2 * n + N + k), 1.0)
            _accumulate(self.partial(2 * n + N + k), other.partial(2 * n + k), -1.0)
        op_max = max(self.max_abs_coeff(), other.max_abs_coeff())
        return self._with_drop(acc, op_max)

    # ------------------------------------------------------------------
    # norms and evaluation
    # ------------------------------------------------------------------

    def majorant(self, r2: float, r3: float = 0.0) -> float:
        """Coefficient-majorant norm sum |c| r2^deg_z r3^deg_zeta.

        Upper-bounds the sup norm on the real (and complex polydisk)
        domain {|z| <= r2, |zeta| <= r3}; subadditive in the polynomial.
        """
        if r2 < 0 or r3 < 0:
            raise ValueError("majorant radii must be non-negative")
        total = 0.0
        for key, c in self.terms.items():
            dz = self.z_degree(key)
            dzeta = self.zeta_degree(key)
            total += abs(c) * r2 ** dz * r3 ** dzeta
        return total

    def evaluate(self, point) -> float:
        """Evaluate at a real point (array of length 2n+2N, or PhasePoint)."""
        vec = np.asarray(getattr(point, "as_array", lambda: point)(), dtype=float)
        if vec.shape != (self.nvars,):
            raise AmbientMismatchError(
                f"point of shape {vec.shape} does not match {self.nvars} variables"
            )
        total = 0.0
        for key, c in self.terms.items():
            term = c
            for i, e in enumerate(key):
                if e:
                    term *= vec[i] ** e
            total += term
        return total

    def __call__(self, point) -> float:
        return self.evaluate(point)


# ----------------------------------------------------------------------
# module-level helpers
# ----------------------------------------------------------------------

def coordinate(n: int, N: int, index: int) -> Polynomial:
    return Polynomial.coordinate(n, N, index)


def constant(n: int, N: int, value: float) -> Polynomial:
    return Polynomial.constant(n, N, value)


def action_polynomial(n: int, N: int, j: int) -> Polynomial:
    """The j-th action I_j = (x_j^2 + y_j^2)/2 as a polynomial (0-based j)."""
    if not 0 <= j < n:
        raise ValueError(f"action index {j} out of range for n={n}")
    nvars = 2 * n + 2 * N
    kx = tuple(2 if i == j else 0 for i in range(nvars))
    ky = tuple(2 if i == n + j else 0 for i in range(nvars))
    return Polynomial(n, N, {kx: 0.5, ky: 0.5})


def variable_names(n: int, N: int) -> Tuple[str, ...]:
    names = [f"x{j + 1}" for j in range(n)]
    names += [f"y{j + 1}" for j in range(n)]
    names += [f"xi{k + 1}" for k in range(N)]
    names += [f"eta{k + 1}" for k in range(N)]
    return tuple(names)


def variable_index(n: int, N: int, name: str) -> int:
    m = re.fullmatch(r"(x|y|xi|eta)(\d+)", name)
    if not m:
        raise PolynomialParseError(f"unknown variable name {name!r}")
    prefix, num = m.group(1), int(m.group(2))
    if num < 1:
        raise PolynomialParseError(f"variable index must start at 1: {name!r}")
    if prefix == "x":
        limit, base = n, 0
    elif prefix == "y":
        limit, base = n, n
    elif prefix == "xi":
        limit, base = N, 2 * n
    else:
        limit, base = N, 2 * n + N
    if num > limit:
        raise PolynomialParseError(
            f"variable {name!r} out of range for ambient (n={n}, N={N})"
        )
    return base + num - 1


def format_polynomial(p: Polynomial) -> str:
    """Canonical textual form; round-trips bit-exactly through parse."""
    if p.is_zero():
        return "0"
    names = variable_names(p.n, p.N)
    pieces = []
    for key in sorted(p.terms, key=lambda k: (sum(k), k)):
        c = p.terms[key]
        factors = []
        for i, e in enumerate(key):
            if e == 1:
                factors.append(names[i])
            elif e > 1:
                factors.append(f"{names[i]}^{e}")
        if factors:
            pieces.append(f"{c!r} * " + " ".join(factors))
        else:
            pieces.append(f"{c!r}")
    return " + ".join(pieces)


def parse_polynomial(text: str, n: int, N: int) -> Polynomial:
    """Parse the textual polynomial format ``coef * x1^a y1^b ...``.

    Terms are separated by ' + '; each term is either a bare float or a
    float, a literal '*', and whitespace-separated variable powers with a
    literal '^' (exponent 1 may be omitted).
    """
    text = text.strip()
    if text in ("", "0"):
        return Polynomial.zero(n, N)
    nvars = 2 * n + 2 * N
    terms: Dict[ExponentKey, float] = {}
    for raw_term in text.split(" + "):
        tokens = raw_term.split()
        if not tokens:
            raise PolynomialParseError("empty term")
        coef = 1.0
        idx = 0
        has_coef = False
        try:
            coef = float(tokens[0])
            has_coef = True
            idx = 1
        except ValueError:
            pass
        if has_coef and idx < len(tokens):
            if tokens[idx] != "*":
                raise PolynomialParseError(
                    f"expected '*' after coefficient in term {raw_term!r}"
                )
            idx += 1
        if has_coef and idx == len(tokens) and len(tokens) > 1:
            raise PolynomialParseError(f"dangling '*' in term {raw_term!r}")
        exps = [0] * nvars
        if idx == len(tokens) and not has_coef:
            raise PolynomialParseError(f"cannot parse term {raw_term!r}")
        for tok in tokens[idx:]:
            if "^" in tok:
                name, _, estr = tok.partition("^")
                try:
                    e = int(estr)
                except ValueError:
                    raise PolynomialParseError(f"bad exponent in {tok!r}") from None
                if e < 0:
                    raise PolynomialParseError(f"negative exponent in {tok!r}")
            else:
                name, e = tok, 1
            exps[variable_index(n, N, name)] += e
        key = tuple(exps)
        terms[key] = terms.get(key, 0.0) + coef
    return Polynomial(n, N, terms)
