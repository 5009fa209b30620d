"""Gamma-ratio matrices behind the polynomial Leibniz inequality.

With r(k) = Gamma(k + 1) / Gamma(k + 1 - alpha), the symmetric kernel

    psi(i, j) = r(i) + r(j) - r(i + j)

gives the quadratic form of the Riemann-Liouville gap (matrix B, indices
0..n) and of the Caputo gap (matrix A, indices 1..n).

The leading pivots of these matrices shrink extremely fast (relative pivots
near 1e-49 at n = 40), far below what a double-precision factorisation can
resolve.  For rational alpha every entry is a positive multiple of a
rational number, so positive-definiteness of a :class:`PsiMatrix` is decided
exactly by fraction-free (Bareiss) elimination over the integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import gmpy2
import numpy as np

from . import specfn
from .errors import DomainError, PreconditionError
from .polyfrac import ShiftedPolynomial

_STRICT_MARGIN = 1e-14


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    return alpha


def ratio(k: int, alpha: float) -> float:
    """r(k) = Gamma(k + 1) / Gamma(k + 1 - alpha)."""
    return specfn.gamma_ratio(k + 1.0, k + 1.0 - alpha)


def psi(i: int, j: int, alpha: float) -> float:
    """psi(i, j) = r(i) + r(j) - r(i + j)."""
    if i < 0 or j < 0:
        raise DomainError("psi is defined for nonnegative indices")
    return ratio(i, alpha) + ratio(j, alpha) - ratio(i + j, alpha)


def phi(i: int, j: int, alpha: float) -> float:
    """phi(i, j) = Gamma(i+1)/Gamma(i+2-alpha) - Gamma(i+j+1)/Gamma(i+j+2-alpha)."""
    if i < 0 or j < 0:
        raise DomainError("phi is defined for nonnegative indices")
    if j == 0:
        return 0.0
    a = specfn.gamma_ratio(i + 1.0, i + 2.0 - alpha)
    b = specfn.gamma_ratio(i + j + 1.0, i + j + 2.0 - alpha)
    return a - b


def phi1(m: int, alpha: float) -> float:
    """Closed form phi(m, 1) = (1 - alpha) Gamma(m + 1) / Gamma(m + 3 - alpha)."""
    return (1.0 - alpha) * specfn.gamma_ratio(m + 1.0, m + 3.0 - alpha)


@dataclass(frozen=True, eq=False)
class PsiMatrix:
    """Dense symmetric matrix with entry (r, c) = psi(indices[r], indices[c])."""

    alpha: float
    indices: tuple[int, ...]
    entries: np.ndarray
    kind: str

    @property
    def n(self) -> int:
        return len(self.indices)

    @property
    def is_bordered(self) -> bool:
        return bool(self.indices) and self.indices[0] == 0

    def exact(self) -> "ScaledIntegerMatrix":
        return exact_psi_matrix(self.indices, self.alpha)


def _psi_table(indices: Sequence[int], alpha: float) -> np.ndarray:
    top = 2 * max(indices)
    r = [ratio(k, alpha) for k in range(top + 1)]
    idx = list(indices)
    M = np.empty((len(idx), len(idx)))
    for a, i in enumerate(idx):
        for b, j in enumerate(idx[a:], start=a):
            # sum the three ratio terms once
            M[a, b] = M[b, a] = r[i] + r[j] - r[i + j]
    return M


def build_A(n: int, alpha: float) -> PsiMatrix:
    """Caputo matrix (psi(i, j)) for i, j in 1..n."""
    if n < 1:
        raise DomainError("n must be at least 1")
    alpha = _check_alpha(alpha)
    idx = tuple(range(1, n + 1))
    return PsiMatrix(alpha, idx, _psi_table(idx, alpha), "A")


def build_B(n: int, alpha: float) -> PsiMatrix:
    """Bordered Riemann-Liouville matrix (psi(i, j)) for i, j in 0..n."""
    if n < 1:
        raise DomainError("n must be at least 1")
    alpha = _check_alpha(alpha)
    idx = tuple(range(0, n + 1))
    return PsiMatrix(alpha, idx, _psi_table(idx, alpha), "B")


def build_A_tilde(n: int, alpha: float) -> PsiMatrix:
    """Index-reversed A_n: entry (i, j) = psi(n + 1 - i, n + 1 - j)."""
    A = build_A(n, alpha)
    return PsiMatrix(A.alpha, A.indices[::-1], A.entries[::-1, ::-1].copy(), "A_tilde")


# --- exact arithmetic -------------------------------------------------------


def rational_alpha(alpha: float) -> Fraction:
    """The decimal value of alpha as written (0.05 -> 1/20)."""
    return Fraction(repr(float(alpha)))


@dataclass(frozen=True, eq=False)
class ScaledIntegerMatrix:
    """Integer matrix equal to ``scale`` times a real matrix (scale > 0)."""

    rows: tuple[tuple[int, ...], ...]
    scale: float  # positive factor, as a float for reporting only
    log_scale: float


@lru_cache(maxsize=64)
def _scaled_ratios(K: int, alpha: Fraction) -> tuple:
    # R_k = prod_{m<=k} m/(m - alpha); R_k * prod_{m<=K}(m q - p) is an integer
    p, q = alpha.numerator, alpha.denominator
    suffix = [gmpy2.mpz(1)] * (K + 2)
    for m in range(K, 0, -1):
        suffix[m] = suffix[m + 1] * (m * q - p)
    out = []
    prefix = gmpy2.mpz(1)
    for k in range(K + 1):
        if k > 0:
            prefix *= k * q
        out.append(prefix * suffix[k + 1])
    denom = suffix[1]
    return tuple(out), denom


def exact_psi_matrix(indices: Sequence[int], alpha: float) -> ScaledIntegerMatrix:
    """Integer matrix proportional to (psi(i, j)) with a positive factor.

    psi(i, j) * Gamma(1 - alpha) = R_i + R_j - R_{i+j} is rational for
    rational alpha; clearing the common denominator gives integers.
    """
    a = rational_alpha(_check_alpha(alpha))
    K = 2 * max(indices)
    R, denom = _scaled_ratios(K, a)
    rows = tuple(tuple(R[i] + R[j] - R[i + j] for j in indices) for i in indices)
    log_scale = math.log(int(denom)) + specfn.log_gamma(1.0 - float(a))
    return ScaledIntegerMatrix(rows, math.exp(log_scale) if log_scale < 700 else math.inf, log_scale)


def determinant(M: PsiMatrix) -> float:
    """det(M) from exact elimination; avoids the cancellation of a float determinant."""
    a = rational_alpha(M.alpha)
    _, denom = _scaled_ratios(2 * max(M.indices), a)
    S = exact_psi_matrix(M.indices, M.alpha)
    minors, _ = _bareiss(S.rows, stop_nonpositive=False)
    n = M.n
    value = float(Fraction(int(minors[-1]), int(denom) ** n))
    return value * specfn.rgamma(1.0 - float(a)) ** n


def _bareiss(rows, track: int | None = None, steps: int | None = None, stop_nonpositive: bool = True):
    """Fraction-free elimination returning leading principal minors.

    Stops at the first nonpositive minor.  If ``track`` is given, also returns
    the (track, track) entry after every step, i.e. the determinants of the
    leading blocks bordered by row/column ``track``.
    """
    M = [[gmpy2.mpz(v) for v in row] for row in rows]
    n = len(M)
    steps = n if steps is None else steps
    prev = gmpy2.mpz(1)
    minors = []
    bordered = [M[track][track]] if track is not None else []
    for k in range(steps):
        piv = M[k][k]
        minors.append(piv)
        if piv <= 0 and (stop_nonpositive or piv == 0):
            break
        rk = M[k]
        for i in range(k + 1, n):
            ri = M[i]
            mik = ri[k]
            for j in range(k + 1, n):
                ri[j] = (piv * ri[j] - mik * rk[j]) // prev
        prev = piv
        if track is not None:
            bordered.append(M[track][track])
    return minors, bordered


@dataclass
class CholeskyResult:
    """Outcome of a positive-definiteness test.

    ``pivots`` are the successive Schur-complement diagonal entries (the
    squares of the Cholesky diagonal) up to and including the first failure.
    ``failed_index`` is 1-based.
    """

    is_pd: bool
    pivots: tuple[float, ...]
    failed_index: int | None = None
    factor: np.ndarray | None = None
    exact: bool = False
    max_diagonal: float = 1.0

    def __bool__(self) -> bool:
        return self.is_pd

    @property
    def min_relative_pivot(self) -> float:
        if not self.pivots:
            return math.nan
        return min(self.pivots) / self.max_diagonal


def _pivots_from_minors(minors, log_scale: float) -> tuple[float, ...]:
    out = []
    prev = 1
    for d in minors:
        out.append(_ratio_float(int(d), int(prev), log_scale))
        prev = d
    return tuple(out)


def _ratio_float(num: int, den: int, log_scale: float) -> float:
    # num / den / exp(log_scale) without overflowing floats
    if num == 0:
        return 0.0
    sign = 1.0 if (num > 0) == (den > 0) else -1.0
    lg = math.log(abs(num)) - math.log(abs(den)) - log_scale
    return sign * math.exp(lg)


def _exact_result(S: ScaledIntegerMatrix) -> CholeskyResult:
    minors, _ = _bareiss(S.rows)
    pivots = _pivots_from_minors(minors, S.log_scale)
    n = len(S.rows)
    ok = len(minors) == n and all(d > 0 for d in minors)
    failed = None if ok else len(minors)
    maxdiag = max(_ratio_float(int(S.rows[k][k]), 1, S.log_scale) for k in range(n))
    return CholeskyResult(ok, pivots, failed, None, True, maxdiag)


def _to_integer_rows(M) -> ScaledIntegerMatrix:
    fr = [[Fraction(v) for v in row] for row in M]
    den = 1
    for row in fr:
        for v in row:
            den = den * v.denominator // math.gcd(den, v.denominator)
    rows = tuple(tuple(int(v * den) for v in row) for row in fr)
    return ScaledIntegerMatrix(rows, float(den), math.log(den))


def cholesky_pd(M, tol: float = 1e-12) -> CholeskyResult:
    """Decide positive-definiteness by Cholesky factorisation.

    Floating-point input succeeds iff every pivot exceeds
    ``tol * max(diag)``.  A :class:`PsiMatrix`, a
    :class:`ScaledIntegerMatrix`, or an object array of ints/Fractions is
    factored exactly and succeeds iff every pivot is strictly positive.
    """
    if isinstance(M, PsiMatrix):
        return _exact_result(M.exact())
    if isinstance(M, ScaledIntegerMatrix):
        return _exact_result(M)
    arr = np.asarray(M)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise PreconditionError("matrix must be square")
    if arr.dtype == object:
        if any(arr[i, j] != arr[j, i] for i in range(len(arr)) for j in range(i)):
            raise PreconditionError("matrix must be symmetric")
        return _exact_result(_to_integer_rows(arr.tolist()))
    A = arr.astype(float)
    n = A.shape[0]
    big = max(1.0, float(np.max(np.abs(A)))) if n else 1.0
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-12 * big:
        raise PreconditionError("matrix must be symmetric within 1e-12")
    maxdiag = float(np.max(np.diag(A))) if n else 1.0
    threshold = tol * max(maxdiag, 0.0)
    L = np.zeros_like(A)
    pivots = []
    for k in range(n):
        piv = A[k, k] - L[k, :k] @ L[k, :k]
        pivots.append(float(piv))
        if not piv > threshold:
            return CholeskyResult(False, tuple(pivots), k + 1, None, False, maxdiag if maxdiag > 0 else 1.0)
        L[k, k] = math.sqrt(piv)
        L[k + 1 :, k] = (A[k + 1 :, k] - L[k + 1 :, :k] @ L[k, :k]) / L[k, k]
    return CholeskyResult(True, tuple(pivots), None, L, False, maxdiag)


@dataclass
class SchurSplit:
    """B = [[d, e^T], [e, A]] split into corner, border and complement D = A - e e^T / d."""

    d: float
    e: np.ndarray
    D: np.ndarray
    exact_D: ScaledIntegerMatrix | None = None


def schur_split(B) -> SchurSplit:
    """Split a bordered matrix at its (0, 0) corner."""
    arr = B.entries if isinstance(B, PsiMatrix) else np.asarray(B, dtype=float)
    if isinstance(B, PsiMatrix) and not B.is_bordered:
        raise PreconditionError("schur_split needs the bordered index range 0..n")
    if arr.shape[0] < 2:
        raise PreconditionError("bordered matrix must have at least two rows")
    d = float(arr[0, 0])
    if d == 0.0:
        raise DomainError("singular corner: d = 0")
    e = arr[1:, 0].copy()
    D = arr[1:, 1:] - np.outer(e, e) / d
    exact_D = None
    if isinstance(B, PsiMatrix):
        S = B.exact()
        d0 = S.rows[0][0]
        # d * (A - e e^T / d) is an integer matrix and a positive multiple of D
        rows = tuple(
            tuple(d0 * S.rows[i][j] - S.rows[i][0] * S.rows[0][j] for j in range(1, len(S.rows)))
            for i in range(1, len(S.rows))
        )
        exact_D = ScaledIntegerMatrix(rows, math.nan, S.log_scale + math.log(int(d0)))
    return SchurSplit(d, e, D, exact_D)


def schur_iff(B) -> tuple[bool, bool]:
    """Both sides of: B is PD  <=>  d > 0 and D = A - e e^T/d is PD."""
    split = schur_split(B)
    lhs = cholesky_pd(B).is_pd
    D = split.exact_D if split.exact_D is not None else split.D
    rhs = split.d > 0 and cholesky_pd(D).is_pd
    return lhs, rhs


# --- sweeps and lemma checks --------------------------------------------------


@dataclass(frozen=True)
class SweepCell:
    n: int
    alpha: float
    a_pd: bool
    b_pd: bool
    a_min_pivot: float
    b_min_pivot: float

    @property
    def passed(self) -> bool:
        return self.a_pd and self.b_pd


def psd_sweep_alpha(n_max: int, alpha: float) -> list[SweepCell]:
    """Exact PD status of A_n and B_n for n = 1..n_max at one alpha.

    A single fraction-free elimination of A_{n_max} with the border row
    appended last yields every leading minor of A and, through the tracked
    border entry, every leading minor of B.
    """
    alpha = _check_alpha(alpha)
    idx = tuple(range(1, n_max + 1)) + (0,)
    S = exact_psi_matrix(idx, alpha)
    minors_a, minors_b = _bareiss(S.rows, track=n_max, steps=n_max)
    diag = [_ratio_float(int(S.rows[k][k]), 1, S.log_scale) for k in range(n_max + 1)]
    piv_a = _pivots_from_minors(minors_a, S.log_scale)
    piv_b = _pivots_from_minors(minors_b, S.log_scale)
    if len(minors_a) < n_max:
        # elimination stopped early: fall back to direct factorisations
        return [_sweep_cell_direct(n, alpha) for n in range(1, n_max + 1)]
    cells = []
    for n in range(1, n_max + 1):
        a_ok = all(m > 0 for m in minors_a[:n])
        b_ok = all(m > 0 for m in minors_b[: n + 1])
        md_a = max(diag[:n])
        md_b = max(diag[:n] + [diag[n_max]])
        cells.append(
            SweepCell(n, alpha, a_ok, b_ok, min(piv_a[:n]) / md_a, min(piv_b[: n + 1]) / md_b)
        )
    return cells


def _sweep_cell_direct(n: int, alpha: float) -> SweepCell:
    ra = cholesky_pd(build_A(n, alpha))
    rb = cholesky_pd(build_B(n, alpha))
    return SweepCell(n, alpha, ra.is_pd, rb.is_pd, ra.min_relative_pivot, rb.min_relative_pivot)


def determinant_2x2_closed_form(alpha: float) -> float:
    """alpha (1-alpha)^2 (2-alpha)(6-alpha) / (Gamma(4-alpha) Gamma(5-alpha))."""
    return (
        alpha
        * (1 - alpha) ** 2
        * (2 - alpha)
        * (6 - alpha)
        * specfn.rgamma(4 - alpha)
        * specfn.rgamma(5 - alpha)
    )


def psi_monotone_margin(n_max: int, alpha: float) -> float:
    """Smallest scaled margin of psi(i+1, j) > psi(i, j) (and row-0 constancy)."""
    if n_max < 2:
        raise DomainError("n_max must be at least 2")
    alpha = _check_alpha(alpha)
    r = [ratio(k, alpha) for k in range(2 * n_max + 2)]

    def ps(i, j):
        return r[i] + r[j] - r[i + j]

    worst = math.inf
    for i in range(n_max + 1):
        for j in range(1, n_max + 1):
            a, b = ps(i + 1, j), ps(i, j)
            worst = min(worst, (a - b) / max(abs(a), abs(b)))
    c0 = ps(0, 0)
    for i in range(n_max + 1):
        if abs(ps(i, 0) - c0) > 1e-12 * c0:
            return -math.inf
    return worst


def verify_psi_monotone(n_max: int, alpha: float) -> bool:
    """psi(i+1, j) > psi(i, j) for 0 <= i <= n_max, 1 <= j <= n_max, psi(., 0) constant."""
    return psi_monotone_margin(n_max, alpha) > _STRICT_MARGIN


def phi_product_margin(n_max: int, alpha: float) -> tuple[float, tuple[int, int, int, int] | None]:
    """Smallest scaled value of phi(k+l,1) phi(i+j,1) - phi(i+l,1) phi(j+k,1).

    Ranges over 1 <= i, j <= n_max, 0 <= k <= i-1, 0 <= l <= j-1; returns the
    margin divided by the larger product, with the minimising (i, j, k, l).
    """
    if n_max < 2:
        raise DomainError("n_max must be at least 2")
    alpha = _check_alpha(alpha)
    p1 = [phi1(m, alpha) for m in range(2 * n_max + 1)]
    worst = math.inf
    where = None
    for i in range(1, n_max + 1):
        for j in range(1, n_max + 1):
            for k in range(i):
                for l in range(j):
                    x = p1[k + l] * p1[i + j]
                    y = p1[i + l] * p1[j + k]
                    m = (x - y) / max(x, y)
                    if m < worst:
                        worst, where = m, (i, j, k, l)
    return worst, where


def verify_phi_product(n_max: int, alpha: float) -> bool:
    """Strict positivity of the phi cross-product differences up to n_max."""
    return phi_product_margin(n_max, alpha)[0] > _STRICT_MARGIN


def border_inequality_sides(n: int, alpha: float, denominator_scale: float = 1.0) -> tuple[float, float]:
    """(h, A~ h) and ||h||^4 / (c psi(n+1, n+1)) with c = denominator_scale."""
    if n < 2:
        raise DomainError("n must be at least 2")
    At = build_A_tilde(n, alpha)
    h = np.array([psi(n + 1, n + 1 - i, alpha) for i in range(1, n + 1)])
    lhs = float(h @ At.entries @ h)
    rhs = float(h @ h) ** 2 / (denominator_scale * psi(n + 1, n + 1, alpha))
    return lhs, rhs


def verify_border_inequality(n: int, alpha: float, denominator_scale: float = 1.0) -> bool:
    """(h_n, A~_n h_n) >= ||h_n||^4 / psi(n+1, n+1) within relative 1e-12."""
    lhs, rhs = border_inequality_sides(n, alpha, denominator_scale)
    return lhs >= rhs * (1.0 - 1e-12)


def quadratic_form_gap(P: ShiftedPolynomial, alpha: float, t, which: str = "rl"):
    """Leibniz gap of P evaluated as a quadratic form in the psi matrix.

    RL: (t - t0)^(-alpha) (v, B v) with v = (a_0, a_1 x, ..., a_n x^n);
    Caputo: (t - t0)^(-alpha) (u, A u) with u = (a_1 x, ..., a_n x^n),
    where x = t - t0.
    """
    alpha = _check_alpha(alpha)
    which = which.lower()
    if which not in ("rl", "caputo"):
        raise DomainError("which must be 'rl' or 'caputo'")
    x = np.asarray(t, dtype=float) - P.t0
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if which == "rl" and np.any(x <= 0.0):
        raise DomainError("the Riemann-Liouville form needs t > t0")
    if which == "caputo" and np.any(x < 0.0):
        raise DomainError("the Caputo form needs t >= t0")
    a = np.asarray(P.coeffs)
    lo = 0 if which == "rl" else 1
    if a.size <= lo:
        out = np.zeros_like(x)
        return float(out[0]) if scalar else out
    n = a.size - 1
    idx = tuple(range(lo, n + 1))
    M = _psi_table(idx, alpha)
    powers = x[:, None] ** np.arange(lo, n + 1)[None, :]
    V = powers * a[lo:][None, :]
    quad = np.einsum("ti,ij,tj->t", V, M, V)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x > 0.0, quad * x ** (-alpha), 0.0)
    return float(out[0]) if scalar else out
