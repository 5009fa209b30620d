"""Exact fractional calculus on polynomials.

Polynomials are stored in the shifted basis (t - t0)^k, in which the
Riemann-Liouville and Caputo operators act diagonally:

    D^a (t - t0)^k = Gamma(k + 1) / Gamma(k + 1 - a) (t - t0)^(k - a)
    J^a (t - t0)^k = Gamma(k + 1) / Gamma(k + 1 + a) (t - t0)^(k + a)

Images of polynomials under these operators are finite sums of real powers
of (t - t0), represented by :class:`FracExpansion`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from . import specfn
from .errors import DomainError, PreconditionError, SingularityError

_EXP_TOL = 1e-12


def _check_alpha(alpha: float, upper_open: bool = True) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0 if upper_open else alpha > 0.0):
        raise DomainError(f"order must lie in (0, 1), got {alpha!r}")
    return alpha


def _snap(e: float) -> float:
    r = round(e)
    return float(r) if abs(e - r) < _EXP_TOL else e


@dataclass(frozen=True)
class ShiftedPolynomial:
    """Real polynomial sum_k a_k (t - t0)^k in canonical form.

    Trailing zero coefficients are stripped, so the zero polynomial has
    ``coeffs == ()`` and degree -1.
    """

    t0: float
    coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        c = [float(v) for v in self.coeffs]
        if any(not math.isfinite(v) for v in c):
            raise DomainError("coefficients must be finite")
        while c and c[-1] == 0.0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))
        object.__setattr__(self, "t0", float(self.t0))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return self.degree <= 0

    def __call__(self, t):
        x = np.asarray(t, dtype=float) - self.t0
        out = np.zeros_like(x)
        for a in reversed(self.coeffs):
            out = out * x + a
        return float(out) if out.ndim == 0 else out

    def _same_base(self, other: "ShiftedPolynomial") -> None:
        if self.t0 != other.t0:
            raise PreconditionError(f"expansion points differ: {self.t0} vs {other.t0}")

    def __add__(self, other: "ShiftedPolynomial") -> "ShiftedPolynomial":
        self._same_base(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(n)
        a[: len(self.coeffs)] += self.coeffs
        a[: len(other.coeffs)] += other.coeffs
        return ShiftedPolynomial(self.t0, tuple(a))

    def __neg__(self) -> "ShiftedPolynomial":
        return self.scale(-1.0)

    def __sub__(self, other: "ShiftedPolynomial") -> "ShiftedPolynomial":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, ShiftedPolynomial):
            return multiply(self, other)
        if isinstance(other, FracExpansion):
            return other * self
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c: float) -> "ShiftedPolynomial":
        return ShiftedPolynomial(self.t0, tuple(c * a for a in self.coeffs))

    def derivative(self, order: int = 1) -> "ShiftedPolynomial":
        """Classical derivative of integer order."""
        c = list(self.coeffs)
        for _ in range(order):
            c = [k * c[k] for k in range(1, len(c))]
        return ShiftedPolynomial(self.t0, tuple(c))

    def to_expansion(self) -> "FracExpansion":
        return FracExpansion.from_terms(
            self.t0, ((a, float(k)) for k, a in enumerate(self.coeffs))
        )

    def to_monomial(self) -> tuple[float, ...]:
        """Coefficients b_k of sum b_k t^k."""
        n = len(self.coeffs)
        b = [0.0] * n
        for k, a in enumerate(self.coeffs):
            for i in range(k + 1):
                b[i] += a * math.comb(k, i) * (-self.t0) ** (k - i)
        return tuple(b)


@dataclass(frozen=True)
class FracExpansion:
    """Finite sum sum_m c_m (t - t0)^(e_m) with real exponents e_m > -1.

    Exponents are kept strictly increasing; terms whose exponents agree
    to 1e-12 are merged and exactly-zero coefficients are dropped.
    """

    t0: float
    coefficients: tuple[float, ...] = ()
    exponents: tuple[float, ...] = ()
    _canonical: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.coefficients) != len(self.exponents):
            raise PreconditionError("coefficients and exponents differ in length")
        object.__setattr__(self, "t0", float(self.t0))
        if not self._canonical:
            c, e = _canonical_terms(self.coefficients, self.exponents)
            object.__setattr__(self, "coefficients", c)
            object.__setattr__(self, "exponents", e)
        if self.exponents and self.exponents[0] <= -1.0 + _EXP_TOL:
            raise DomainError("exponents must exceed -1 (integrable singularity)")

    @classmethod
    def from_terms(cls, t0: float, terms: Iterable[tuple[float, float]]) -> "FracExpansion":
        terms = list(terms)
        return cls(t0, tuple(c for c, _ in terms), tuple(e for _, e in terms))

    @classmethod
    def zero(cls, t0: float) -> "FracExpansion":
        return cls(t0)

    @property
    def terms(self) -> tuple[tuple[float, float], ...]:
        return tuple(zip(self.coefficients, self.exponents))

    def __len__(self) -> int:
        return len(self.coefficients)

    def is_zero(self) -> bool:
        return not self.coefficients

    def __call__(self, t):
        return evaluate(self, t)

    def _same_base(self, other) -> None:
        if self.t0 != other.t0:
            raise PreconditionError(f"expansion points differ: {self.t0} vs {other.t0}")

    def __add__(self, other) -> "FracExpansion":
        if isinstance(other, ShiftedPolynomial):
            other = other.to_expansion()
        self._same_base(other)
        return FracExpansion(
            self.t0,
            self.coefficients + other.coefficients,
            self.exponents + other.exponents,
        )

    def __neg__(self) -> "FracExpansion":
        return self.scale(-1.0)

    def __sub__(self, other) -> "FracExpansion":
        return self + (-other)

    def scale(self, c: float) -> "FracExpansion":
        return FracExpansion(
            self.t0, tuple(c * v for v in self.coefficients), self.exponents
        )

    def __mul__(self, other) -> "FracExpansion":
        if isinstance(other, ShiftedPolynomial):
            other = other.to_expansion()
        if isinstance(other, FracExpansion):
            self._same_base(other)
            c = []
            e = []
            for ca, ea in self.terms:
                for cb, eb in other.terms:
                    c.append(ca * cb)
                    e.append(ea + eb)
            return FracExpansion(self.t0, tuple(c), tuple(e))
        return self.scale(other)

    __rmul__ = __mul__

    def value_at_base(self) -> float:
        """Value at t = t0 (the exponent-0 coefficient), when it exists."""
        if self.exponents and self.exponents[0] < 0.0:
            raise SingularityError("expansion is singular at t0")
        if self.exponents and self.exponents[0] == 0.0:
            return self.coefficients[0]
        return 0.0


def _canonical_terms(coefficients, exponents):
    pairs = sorted(
        ((_snap(float(e)), float(c)) for c, e in zip(coefficients, exponents)),
        key=lambda p: p[0],
    )
    out_c: list[float] = []
    out_e: list[float] = []
    for e, c in pairs:
        if not (math.isfinite(c) and math.isfinite(e)):
            raise DomainError("expansion terms must be finite")
        if out_e and abs(e - out_e[-1]) <= _EXP_TOL:
            out_c[-1] += c
        else:
            out_c.append(c)
            out_e.append(e)
    keep = [i for i, c in enumerate(out_c) if c != 0.0]
    return tuple(out_c[i] for i in keep), tuple(out_e[i] for i in keep)


Operand = Union[ShiftedPolynomial, FracExpansion]


def _as_expansion(f: Operand) -> FracExpansion:
    if isinstance(f, ShiftedPolynomial):
        return f.to_expansion()
    return f


def from_monomial(b: Sequence[float], t0: float) -> ShiftedPolynomial:
    """Convert sum b_i t^i to the shifted basis: a_k = sum_i b_i C(i, k) t0^(i-k)."""
    n = len(b)
    a = [0.0] * n
    for i, bi in enumerate(b):
        for k in range(i + 1):
            a[k] += bi * math.comb(i, k) * t0 ** (i - k)
    return ShiftedPolynomial(t0, tuple(a))


def multiply(p: ShiftedPolynomial, q: ShiftedPolynomial) -> ShiftedPolynomial:
    """Product of two polynomials sharing the same expansion point."""
    p._same_base(q)
    if p.is_zero() or q.is_zero():
        return ShiftedPolynomial(p.t0)
    return ShiftedPolynomial(p.t0, tuple(np.convolve(p.coeffs, q.coeffs)))


def rl_deriv(f: Operand, alpha: float) -> FracExpansion:
    """Riemann-Liouville derivative of order alpha in (0, 1), termwise.

    A term with exponent alpha - 1 is annihilated (1/Gamma(0) = 0).  Terms
    whose image would have exponent <= -1 are rejected.
    """
    alpha = _check_alpha(alpha)
    E = _as_expansion(f)
    c = []
    e = []
    for ck, ek in E.terms:
        if abs(ek + 1.0 - alpha) <= _EXP_TOL:
            continue
        if ek - alpha <= -1.0:
            raise DomainError(f"D^{alpha} of (t - t0)^{ek} is not locally integrable")
        c.append(ck * specfn.gamma_ratio(ek + 1.0, ek + 1.0 - alpha))
        e.append(ek - alpha)
    return FracExpansion(E.t0, tuple(c), tuple(e))


def caputo_deriv(f: Operand, alpha: float) -> FracExpansion:
    """Caputo derivative: the RL derivative of f - f(t0).

    For polynomials this drops the constant term before differentiating.
    """
    alpha = _check_alpha(alpha)
    E = _as_expansion(f)
    if E.exponents and E.exponents[0] < 0.0:
        raise DomainError("Caputo derivative needs a finite value at t0")
    if E.exponents and E.exponents[0] == 0.0:
        E = FracExpansion(E.t0, E.coefficients[1:], E.exponents[1:], _canonical=True)
    return rl_deriv(E, alpha)


def rl_integral(f: Operand, alpha: float) -> FracExpansion:
    """Riemann-Liouville integral of order alpha > 0, termwise."""
    alpha = _check_alpha(alpha, upper_open=False)
    E = _as_expansion(f)
    c = [ck * specfn.gamma_ratio(ek + 1.0, ek + 1.0 + alpha) for ck, ek in E.terms]
    e = [ek + alpha for ek in E.exponents]
    return FracExpansion(E.t0, tuple(c), tuple(e))


def evaluate(E: Operand, t):
    """Evaluate a polynomial or expansion at t >= t0 (scalar or array)."""
    if isinstance(E, ShiftedPolynomial):
        return E(t)
    x = np.asarray(t, dtype=float) - E.t0
    if np.any(x < 0.0):
        raise DomainError("fractional expansions are defined only for t >= t0")
    if E.exponents and E.exponents[0] < 0.0 and np.any(x == 0.0):
        raise SingularityError("expansion with negative exponent evaluated at t0")
    out = np.zeros_like(x)
    for c, e in E.terms:
        out = out + c * np.power(x, e)
    return float(out) if out.ndim == 0 else out


def leibniz_series_rl(f: ShiftedPolynomial, g: Operand, alpha: float) -> FracExpansion:
    """Truncated fractional Leibniz series sum_k C(alpha, k) f^(k) D^(alpha-k) g.

    For k >= 1 the operator D^(alpha - k) is the integral J^(k - alpha).  The
    series stops at k = deg f because higher derivatives of f vanish.
    """
    alpha = _check_alpha(alpha)
    out = FracExpansion.zero(f.t0)
    if f.is_zero():
        return out
    for k in range(f.degree + 1):
        dg = rl_deriv(g, alpha) if k == 0 else rl_integral(g, k - alpha)
        out = out + (f.derivative(k) * dg).scale(specfn.frac_binomial(alpha, k))
    return out


def expansion_discrepancy(a: Operand, b: Operand) -> float:
    """Largest termwise relative difference between two expansions.

    Matched coefficients are compared relative to the larger of the pair; a
    term present on one side only is measured against the largest
    coefficient overall.
    """
    A = _as_expansion(a)
    B = _as_expansion(b)
    if A.t0 != B.t0:
        return math.inf
    big = max([abs(c) for c in A.coefficients + B.coefficients] or [0.0])
    worst = 0.0
    ia = ib = 0
    while ia < len(A) or ib < len(B):
        ea = A.exponents[ia] if ia < len(A) else math.inf
        eb = B.exponents[ib] if ib < len(B) else math.inf
        if abs(ea - eb) <= _EXP_TOL:
            ca, cb = A.coefficients[ia], B.coefficients[ib]
            worst = max(worst, abs(ca - cb) / max(abs(ca), abs(cb)))
            ia += 1
            ib += 1
        elif ea < eb:
            worst = max(worst, abs(A.coefficients[ia]) / big)
            ia += 1
        else:
            worst = max(worst, abs(B.coefficients[ib]) / big)
            ib += 1
    return worst


def expansions_close(a: Operand, b: Operand, rtol: float) -> bool:
    """Termwise equality of two expansions up to relative tolerance rtol."""
    return expansion_discrepancy(a, b) <= rtol


def _gap(P: ShiftedPolynomial, alpha: float, t, op) -> np.ndarray | float:
    if P.is_zero():
        x = np.asarray(t, dtype=float)
        return 0.0 if x.ndim == 0 else np.zeros_like(x)
    dp = op(P, alpha)
    dp2 = op(multiply(P, P), alpha)
    return 2.0 * np.asarray(evaluate(dp, t)) * np.asarray(P(t)) - np.asarray(evaluate(dp2, t))


def gap_rl(P: ShiftedPolynomial, alpha: float, t):
    """2 (D^a P)(t) P(t) - D^a[P^2](t); nonnegative for every polynomial, t > t0."""
    x = np.asarray(t, dtype=float)
    if np.any(x <= P.t0):
        raise DomainError("the Riemann-Liouville gap needs t > t0")
    out = _gap(P, alpha, x, rl_deriv)
    return float(out) if np.ndim(out) == 0 else out


def gap_caputo(P: ShiftedPolynomial, alpha: float, t):
    """Caputo analogue of :func:`gap_rl`, defined for t >= t0."""
    x = np.asarray(t, dtype=float)
    if np.any(x < P.t0):
        raise DomainError("the Caputo gap needs t >= t0")
    out = _gap(P, alpha, x, caputo_deriv)
    return float(out) if np.ndim(out) == 0 else out


def gap_scale(P: ShiftedPolynomial, alpha: float, t, kind: str = "rl"):
    """Reference magnitude 1 + |2 (D^a P) P| used to normalise gap tolerances."""
    op = rl_deriv if kind == "rl" else caputo_deriv
    if P.is_zero():
        return 1.0 + 0.0 * np.asarray(t, dtype=float)
    return 1.0 + np.abs(2.0 * np.asarray(evaluate(op(P, alpha), t)) * np.asarray(P(t)))


def random_polynomial(rng: np.random.Generator, degree: int, t0: float = 0.0, bound: float = 5.0) -> ShiftedPolynomial:
    """Polynomial of exact degree with coefficients uniform in [-bound, bound]."""
    c = rng.uniform(-bound, bound, size=degree + 1)
    return ShiftedPolynomial(t0, tuple(c))
