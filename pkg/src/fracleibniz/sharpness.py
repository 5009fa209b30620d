"""Polynomials that reverse the Leibniz inequality when 2 is replaced by lambda.

All constructions use t0 = 0.  For lambda != 2 the gap

    G_lambda(t) = D[P^2](t) - lambda (D P)(t) P(t)

is made strictly positive at an explicit witness point, for both the Caputo
and the Riemann-Liouville derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import polyfrac, specfn
from .errors import DomainError, SearchExhaustedError
from .polyfrac import ShiftedPolynomial


def _check(lam: float, alpha: float) -> tuple[float, float]:
    lam, alpha = float(lam), float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if lam == 2.0:
        raise DomainError("lambda = 2 admits no counterexample")
    if not math.isfinite(lam):
        raise DomainError("lambda must be finite")
    return lam, alpha


@dataclass(frozen=True)
class PhiSequence:
    """phi_k = Gamma(k + 1) / Gamma(k + 1 - alpha) for k = 0..k_max."""

    alpha: float
    k_max: int
    values: np.ndarray

    def __getitem__(self, k: int) -> float:
        return float(self.values[k])

    def doubling_ratios(self) -> np.ndarray:
        """phi_{2k} / phi_k for k = 1..k_max // 2, computed in log space."""
        k = np.arange(1, self.k_max // 2 + 1)
        return np.exp(self._logs[2 * k] - self._logs[k])

    @property
    def _logs(self) -> np.ndarray:
        return np.log(self.values)


def phi_sequence(alpha: float, k_max: int) -> PhiSequence:
    """Tabulate phi_k; raises if the sequence fails to increase strictly."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if k_max < 2:
        raise DomainError("k_max must be at least 2")
    logs = np.array([specfn.log_gamma_ratio(k + 1.0, k + 1.0 - alpha) for k in range(k_max + 1)])
    values = np.exp(logs)
    if np.any(np.diff(values) <= 0.0):
        raise AssertionError("phi_k must be strictly increasing")
    return PhiSequence(alpha, k_max, values)


@dataclass(frozen=True)
class Counterexample:
    """A polynomial whose lambda-gap is strictly positive at ``witness_t``."""

    lam: float
    alpha: float
    kind: str
    poly: ShiftedPolynomial | polyfrac.FracExpansion
    witness_t: float
    valid_interval: tuple[float, float] | None
    case: str
    k: int = 1

    def gap(self, t=None):
        return lambda_gap(self.poly, self.alpha, self.lam, self.witness_t if t is None else t, self.kind)

    def scale(self, t=None) -> float:
        t = self.witness_t if t is None else t
        op = polyfrac.caputo_deriv if self.kind == "caputo" else polyfrac.rl_deriv
        a = abs(polyfrac.evaluate(op(_square(self.poly), self.alpha), t))
        b = abs(self.lam * polyfrac.evaluate(op(self.poly, self.alpha), t) * polyfrac.evaluate(self.poly, t))
        return max(a, b, 1e-300)

    def verify(self, rel: float = 1e-12) -> bool:
        """Re-evaluate the gap from closed forms; must exceed rel * scale."""
        if self.valid_interval is not None:
            lo, hi = self.valid_interval
            if not lo < self.witness_t < hi:
                return False
        return self.gap() > rel * self.scale()


def lambda_gap(P: ShiftedPolynomial, alpha: float, lam: float, t, kind: str = "caputo"):
    """D[P^2](t) - lambda (D P)(t) P(t) from the closed-form derivatives."""
    op = polyfrac.caputo_deriv if kind == "caputo" else polyfrac.rl_deriv
    d2 = polyfrac.evaluate(op(_square(P), alpha), t)
    d1 = polyfrac.evaluate(op(P, alpha), t)
    return d2 - lam * d1 * np.asarray(polyfrac.evaluate(P, t))


def _square(P):
    if isinstance(P, ShiftedPolynomial):
        return polyfrac.multiply(P, P)
    return P * P


def caputo_counterexample(lam: float, alpha: float) -> Counterexample:
    """Degree-one witness for the Caputo derivative.

    With Q = t + 1 the scaled gap is t [2 - lam (2 - alpha)] + (2 - alpha)(2 - lam);
    Q = t - 1 flips the sign of the constant term.
    """
    lam, alpha = _check(lam, alpha)
    slope = lam * (2.0 - alpha) - 2.0
    if lam <= 2.0 / (2.0 - alpha):
        P = ShiftedPolynomial(0.0, (1.0, 1.0))
        return Counterexample(lam, alpha, "caputo", P, 1.0, None, "i")
    if lam < 2.0:
        hi = (2.0 - alpha) * (2.0 - lam) / slope
        P = ShiftedPolynomial(0.0, (1.0, 1.0))
        case = "ii"
    else:
        hi = (2.0 - alpha) * (lam - 2.0) / slope
        P = ShiftedPolynomial(0.0, (-1.0, 1.0))
        case = "iii"
    return Counterexample(lam, alpha, "caputo", P, 0.5 * hi, (0.0, hi), case)


_DENSE_MAX = 4096
_EPS = 2.220446049250313e-16


def _phi(k: int, alpha: float) -> float:
    return math.exp(specfn.log_gamma_ratio(k + 1.0, k + 1.0 - alpha))


def _rl_coefficients(k: int, alpha: float, lam: float) -> tuple[float, float, float]:
    pk, p2k, p0 = _phi(k, alpha), _phi(2 * k, alpha), _phi(0, alpha)
    A = p2k - lam * pk
    B = (2.0 - lam) * pk - lam * p0
    C = (1.0 - lam) * p0
    return A, B, C


def _binomial_poly(k: int, c0: float):
    """t^k + c0, dense for moderate k and sparse (integer exponents) beyond."""
    if k <= _DENSE_MAX:
        coeffs = [0.0] * (k + 1)
        coeffs[0] = c0
        coeffs[k] = 1.0
        return ShiftedPolynomial(0.0, tuple(coeffs))
    return polyfrac.FracExpansion.from_terms(0.0, [(c0, 0.0), (1.0, float(k))])


def _first_k(pred, k_cap: int, start: int = 1) -> int | None:
    """Smallest k in [start, k_cap] with pred(k), assuming pred is eventually true.

    Gallops start, start + 1, start + 3, ... then bisects; the returned k
    always satisfies pred.
    """
    lo, step = start - 1, 1
    hi = start
    while not pred(hi):
        if hi >= k_cap:
            return None
        lo = hi
        hi = min(hi + step, k_cap)
        step *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def rl_counterexample(lam: float, alpha: float, k_cap: int = 2000) -> Counterexample:
    """Witness P = t^k +- 1 for the Riemann-Liouville derivative.

    t^alpha G(t) = A_k t^{2k} +- B_k t^k + C with A_k = phi_{2k} - lam phi_k,
    B_k = (2 - lam) phi_k - lam phi_0, C = (1 - lam) phi_0.  Degrees above
    a few thousand come back as sparse expansions.
    """
    lam, alpha = _check(lam, alpha)
    if k_cap < 2:
        raise DomainError("k_cap must be at least 2")
    if lam < 2.0**alpha:
        k = _first_k(lambda k: _rl_coefficients(k, alpha, lam)[0] > 0.0, k_cap)
        if k is None:
            raise SearchExhaustedError(f"A_k = phi_2k - lambda phi_k stayed <= 0 for k <= {k_cap}")
        A, B, C = _rl_coefficients(k, alpha, lam)
        P = _binomial_poly(k, 1.0)
        t = 1.0
        while t <= 2.0**60:
            if A * t ** (2 * k) + B * t**k + C > 0.0 and lambda_gap(P, alpha, lam, t, "rl") > 0.0:
                return Counterexample(lam, alpha, "rl", P, t, None, "i", k)
            t *= 2.0
        raise SearchExhaustedError(f"no t <= 2^60 with positive gap at k = {k}")
    sign = 1.0 if lam < 2.0 else -1.0
    case = "ii" if lam < 2.0 else "iii"

    def margin(k: int) -> float:
        A, B, C = _rl_coefficients(k, alpha, lam)
        if sign * B <= 0.0 or A >= 0.0:
            return -math.inf
        return (B * B - 4.0 * A * C) / (B * B)

    k = _first_k(lambda k: margin(k) > 0.0, k_cap)
    if k is None:
        raise SearchExhaustedError(
            f"no k <= {k_cap} with {'B_k' if sign > 0 else '-B_k'} > 0 and B_k^2 - 4 A_k C > 0"
        )
    # t^k moves in relative steps of about k * eps as t runs over floats near 1,
    # so the reversal interval (relative half-width sqrt(margin)) must be wider
    def resolvable(k: int) -> bool:
        return margin(k) >= max(1e-9, (16.0 * k * _EPS) ** 2)

    k_ok = _first_k(resolvable, k_cap, start=k)
    if k_ok is None:
        raise SearchExhaustedError(
            f"reversal first appears at k = {k} but stays below floating-point resolution for k <= {k_cap}"
        )
    k = k_ok
    A, B, _ = _rl_coefficients(k, alpha, lam)
    t = (-sign * B / (2.0 * A)) ** (1.0 / k)
    return Counterexample(lam, alpha, "rl", _binomial_poly(k, sign), t, None, case, k)
