"""Fractional operators on uniformly sampled functions.

J^alpha uses the product-trapezoidal rule (piecewise-linear interpolant,
exact kernel moments), the Caputo derivative uses the L1 scheme, and the
Riemann-Liouville derivative adds the initial-value term
f(t0) (t - t0)^(-alpha) / Gamma(1 - alpha) to the L1 value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import specfn
from .errors import DomainError, PreconditionError, SingularityError


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    return alpha


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Samples at t0 + k h, k = 0..N, with h = (t1 - t0) / N.

    ``singular_at_t0`` marks a result whose node-0 value does not exist
    (stored as NaN); every other value is finite.
    """

    t0: float
    t1: float
    values: np.ndarray
    singular_at_t0: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or v.size < 3:
            raise PreconditionError("need at least N = 2 intervals")
        if not self.t1 > self.t0:
            raise PreconditionError("t1 must exceed t0")
        body = v[1:] if self.singular_at_t0 else v
        if not np.all(np.isfinite(body)):
            raise PreconditionError("sampled values must be finite")

    @classmethod
    def from_callable(cls, func: Callable, t0: float, t1: float, N: int) -> "SampledFunction":
        t = np.linspace(t0, t1, N + 1)
        return cls(t0, t1, np.asarray(func(t), dtype=float) * np.ones_like(t))

    @property
    def N(self) -> int:
        return self.values.size - 1

    @property
    def h(self) -> float:
        return (self.t1 - self.t0) / self.N

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.N + 1)

    def at(self, k: int) -> float:
        if k == 0 and self.singular_at_t0:
            raise SingularityError("value at t0 is singular")
        return float(self.values[k])

    def _like(self, values: np.ndarray, singular: bool = False) -> "SampledFunction":
        return SampledFunction(self.t0, self.t1, values, singular)

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        self._check_grid(other)
        return self._like(self.values + other.values, self.singular_at_t0 or other.singular_at_t0)

    def __sub__(self, other: "SampledFunction") -> "SampledFunction":
        self._check_grid(other)
        return self._like(self.values - other.values, self.singular_at_t0 or other.singular_at_t0)

    def __mul__(self, other):
        if isinstance(other, SampledFunction):
            self._check_grid(other)
            return self._like(self.values * other.values, self.singular_at_t0 or other.singular_at_t0)
        return self._like(self.values * float(other), self.singular_at_t0)

    __rmul__ = __mul__

    def _check_grid(self, other: "SampledFunction") -> None:
        if (self.t0, self.t1, self.N) != (other.t0, other.t1, other.N):
            raise PreconditionError("sampled functions live on different grids")


@dataclass(frozen=True, eq=False)
class L1Weights:
    """b_j = (j + 1)^(1 - alpha) - j^(1 - alpha), j = 0..size-1."""

    alpha: float
    size: int
    b: np.ndarray = field(init=False)

    def __post_init__(self):
        alpha = _check_alpha(self.alpha)
        j = np.arange(self.size, dtype=float)
        b = (j + 1.0) ** (1.0 - alpha) - j ** (1.0 - alpha)
        object.__setattr__(self, "b", b)
        if b.size and b[0] != 1.0:
            raise AssertionError("b_0 must equal 1")
        if np.any(b <= 0.0) or np.any(np.diff(b) >= 0.0):
            raise AssertionError("L1 weights must be positive and strictly decreasing")


def _trapezoid_weights(alpha: float, N: int) -> tuple[np.ndarray, np.ndarray]:
    m = np.arange(N + 1, dtype=float)
    p = alpha + 1.0
    c = np.empty(N + 1)
    c[0] = 1.0
    if N >= 1:
        c[1:] = (m[1:] + 1.0) ** p - 2.0 * m[1:] ** p + (m[1:] - 1.0) ** p
    # weight of the first node at step k
    first = np.zeros(N + 1)
    first[1:] = (m[1:] - 1.0) ** p - (m[1:] - alpha - 1.0) * m[1:] ** alpha
    return c, first


def rl_integral_num(f: SampledFunction, alpha: float) -> SampledFunction:
    """Product-trapezoidal approximation of J^alpha f at every node."""
    alpha = _check_alpha(alpha)
    if f.singular_at_t0:
        raise SingularityError("cannot integrate a sample with a singular node 0")
    N = f.N
    c, first = _trapezoid_weights(alpha, N)
    v = f.values
    conv = np.convolve(c, v)[: N + 1]
    out = conv - c * v[0] + first * v[0]
    out[0] = 0.0
    out *= f.h**alpha / specfn.gamma(alpha + 2.0)
    return f._like(out)


def caputo_deriv_num(f: SampledFunction, alpha: float) -> SampledFunction:
    """L1 Caputo derivative; node 0 is 0 by convention."""
    alpha = _check_alpha(alpha)
    if f.singular_at_t0:
        raise SingularityError("cannot differentiate a sample with a singular node 0")
    N = f.N
    b = L1Weights(alpha, N).b
    d = np.diff(f.values)
    out = np.zeros(N + 1)
    out[1:] = np.convolve(b, d)[:N]
    out *= f.h ** (-alpha) / specfn.gamma(2.0 - alpha)
    return f._like(out)


def rl_deriv_num(f: SampledFunction, alpha: float) -> SampledFunction:
    """L1 value plus f(t0) (t - t0)^(-alpha) / Gamma(1 - alpha).

    When f(t0) != 0 node 0 is singular and reading it raises.
    """
    cap = caputo_deriv_num(f, alpha)
    f0 = float(f.values[0])
    if f0 == 0.0:
        return cap
    x = f.nodes - f.t0
    out = cap.values.copy()
    out[1:] += f0 * x[1:] ** (-alpha) / specfn.gamma(1.0 - alpha)
    out[0] = math.nan
    return f._like(out, singular=True)


@dataclass(frozen=True)
class GapReport:
    """Discrete gaps g_k = 2 (D f)_k f_k - (D f^2)_k and their minimum."""

    which: str
    min_gap: float
    index: int
    t: float
    scale: float
    gaps: np.ndarray

    def holds(self, allowance: float) -> bool:
        return self.min_gap >= -allowance


def check_inequality_sampled(f: SampledFunction, alpha: float, which: str = "caputo") -> GapReport:
    """Evaluate the discrete Leibniz gap at every node (k >= 1 for RL)."""
    which = which.lower()
    if which not in ("rl", "caputo"):
        raise DomainError("which must be 'rl' or 'caputo'")
    op = caputo_deriv_num if which == "caputo" else rl_deriv_num
    f2 = f * f
    df = op(f, alpha).values
    df2 = op(f2, alpha).values
    gaps = 2.0 * df * f.values - df2
    start = 1 if which == "rl" else 0
    if which == "rl":
        gaps[0] = math.nan
    body = gaps[start:]
    k = int(np.argmin(body)) + start
    scale = 1.0 + float(np.nanmax(np.abs(2.0 * df[start:] * f.values[start:])))
    return GapReport(which, float(gaps[k]), k, float(f.nodes[k]), scale, gaps)


def calibrate_allowance(
    violation: Callable[[int], float],
    N: int,
    alpha: float,
    levels: int = 3,
    safety: float = 2.0,
    floor: float = 1e-12,
) -> float:
    """Scheme-error allowance eps(N) = C N^(-(1 - alpha)).

    ``violation(M)`` returns the size of the worst discrete violation at
    resolution M (0 when the inequality holds).  C is fitted on the coarser
    levels N/2, N/4, ..., so the allowance at N is a prediction, not a fit.
    """
    alpha = _check_alpha(alpha)
    C = 0.0
    for j in range(1, levels + 1):
        M = N >> j
        if M < 2:
            break
        C = max(C, max(0.0, violation(M)) * M ** (1.0 - alpha))
    return safety * C * N ** (-(1.0 - alpha)) + floor


def observed_orders(Ns, errors) -> np.ndarray:
    """Successive log-log slopes -d log(err) / d log(N)."""
    Ns = np.asarray(Ns, dtype=float)
    e = np.asarray(errors, dtype=float)
    return -np.diff(np.log(e)) / np.diff(np.log(Ns))
