"""Spectral Faedo-Galerkin solver for cD^alpha u - rho Laplace u = f, u(0) = u0.

On an orthonormal eigenbasis of the (Stokes or Dirichlet) operator the
Galerkin system decouples into scalar equations

    cD^alpha g_i + mu_i g_i = f_i,   mu_i = rho lambda_i,   g_i(0) = u0_i,

solved in closed form with Mittag-Leffler functions or by implicit L1
stepping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import specfn
from .errors import DomainError, PreconditionError
from .numfrac import L1Weights, SampledFunction, calibrate_allowance, caputo_deriv_num

BASES = ("dirichlet_laplace_1d", "stokes_fourier_2d")


@dataclass(frozen=True, eq=False)
class SpectralProblem:
    """Eigenvalues, forcing and initial coefficients of a decoupled Galerkin system."""

    alpha: float
    rho: float
    T: float
    lambdas: np.ndarray
    f: np.ndarray
    u0: np.ndarray
    basis_tag: str = "dirichlet_laplace_1d"
    mode_info: tuple = field(default=())

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        f = np.asarray(self.f, dtype=float)
        u0 = np.asarray(self.u0, dtype=float)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "u0", u0)
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError("alpha must lie in (0, 1]")
        if not self.rho > 0.0 or not self.T > 0.0:
            raise DomainError("rho and T must be positive")
        if lam.ndim != 1 or lam.size < 1:
            raise DomainError("need at least one mode")
        if f.shape != lam.shape or u0.shape != lam.shape:
            raise PreconditionError("forcing and initial data must have one entry per mode")
        if np.any(lam <= 0.0) or np.any(np.diff(lam) < 0.0):
            raise PreconditionError("eigenvalues must be positive and nondecreasing")
        if self.basis_tag not in BASES:
            raise DomainError(f"unknown basis {self.basis_tag!r}")

    @property
    def n(self) -> int:
        return self.lambdas.size

    @property
    def modes(self) -> list[tuple[float, float, float]]:
        return list(zip(self.lambdas.tolist(), self.f.tolist(), self.u0.tolist()))

    @property
    def mu(self) -> np.ndarray:
        return self.rho * self.lambdas

    def truncate(self, n: int) -> "SpectralProblem":
        return SpectralProblem(
            self.alpha, self.rho, self.T, self.lambdas[:n], self.f[:n], self.u0[:n],
            self.basis_tag, self.mode_info[:n],
        )

    def dual_norm2(self) -> float:
        """||f||^2 in V' = sum f_i^2 / lambda_i."""
        return float(np.sum(self.f**2 / self.lambdas))


@dataclass(frozen=True, eq=False)
class ModeTrajectory:
    """Mode coefficients g_i(t_k), shape (n_modes, N + 1), on a uniform grid."""

    grid: np.ndarray
    coeffs: np.ndarray

    @property
    def N(self) -> int:
        return self.grid.size - 1

    def h_norm2(self) -> np.ndarray:
        return np.sum(self.coeffs**2, axis=0)

    def v_norm2(self, lambdas: np.ndarray) -> np.ndarray:
        return np.sum(np.asarray(lambdas)[:, None] * self.coeffs**2, axis=0)


# --- bases ---------------------------------------------------------------------


def _dirichlet_coefficients(spec, n: int, quad: int) -> np.ndarray:
    if spec is None:
        return np.zeros(n)
    if not callable(spec):
        return _explicit(spec, n)
    x, w = np.polynomial.legendre.leggauss(quad)
    x = 0.5 * math.pi * (x + 1.0)
    w = 0.5 * math.pi * w
    fx = np.asarray(spec(x), dtype=float) * np.ones_like(x)
    i = np.arange(1, n + 1)[:, None]
    modes = math.sqrt(2.0 / math.pi) * np.sin(i * x[None, :])
    return modes @ (w * fx)


def _explicit(spec, n: int) -> np.ndarray:
    c = np.asarray(spec, dtype=float)
    if c.shape != (n,):
        raise PreconditionError(f"expected {n} coefficients, got shape {c.shape}")
    return c


def fourier_modes(n: int) -> list[tuple[int, int, str]]:
    """First n divergence-free modes (k1, k2, phase) ordered by |k|^2.

    One wavevector per +-k pair (k1 > 0, or k1 == 0 and k2 > 0); each gives a
    cosine and a sine mode along k_perp / |k|.
    """
    r = 1
    while True:
        # every k with |k| <= r is present, so the ordering below is complete
        ks = [(a, b) for a in range(0, r + 1) for b in range(-r, r + 1) if a > 0 or b > 0]
        ks = [k for k in ks if k[0] ** 2 + k[1] ** 2 <= r * r]
        if 2 * len(ks) >= n:
            break
        r *= 2
    ks.sort(key=lambda k: (k[0] ** 2 + k[1] ** 2, k))
    return [(a, b, p) for (a, b) in ks for p in ("cos", "sin")][:n]


def fourier_mode_field(mode: tuple[int, int, str], x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Velocity field of an orthonormal mode on [0, 2 pi]^2."""
    a, b, phase = mode
    norm = math.hypot(a, b)
    arg = a * x + b * y
    s = (np.cos(arg) if phase == "cos" else np.sin(arg)) / (math.pi * math.sqrt(2.0))
    return (-b / norm) * s, (a / norm) * s


def _fourier_coefficients(spec, modes, quad: int) -> np.ndarray:
    n = len(modes)
    if spec is None:
        return np.zeros(n)
    if not callable(spec):
        return _explicit(spec, n)
    kmax = max(max(abs(a), abs(b)) for a, b, _ in modes)
    M = max(quad, 4 * kmax + 8)
    g = 2.0 * math.pi * np.arange(M) / M
    X, Y = np.meshgrid(g, g, indexing="ij")
    fx, fy = spec(X, Y)
    fx = np.asarray(fx, dtype=float) * np.ones_like(X)
    fy = np.asarray(fy, dtype=float) * np.ones_like(X)
    cell = (2.0 * math.pi / M) ** 2
    out = np.empty(n)
    for i, m in enumerate(modes):
        wx, wy = fourier_mode_field(m, X, Y)
        # projecting onto divergence-free modes discards the gradient part
        out[i] = cell * float(np.sum(fx * wx + fy * wy))
    return out


def build_problem(
    basis_tag: str,
    n: int,
    rho: float,
    alpha: float,
    T: float,
    forcing=None,
    initial=None,
    quad: int = 256,
) -> SpectralProblem:
    """Assemble a decoupled Galerkin system on a concrete eigenbasis.

    ``forcing`` and ``initial`` are callables (f(x) in 1D, (fx, fy) = f(x, y)
    in 2D), explicit coefficient arrays, or None for zero data.
    """
    if n <= 0:
        raise DomainError("mode count must be positive")
    if basis_tag == "dirichlet_laplace_1d":
        lam = np.arange(1, n + 1, dtype=float) ** 2
        quad = max(quad, 4 * n)
        f = _dirichlet_coefficients(forcing, n, quad)
        u0 = _dirichlet_coefficients(initial, n, quad)
        info = tuple(range(1, n + 1))
    elif basis_tag == "stokes_fourier_2d":
        modes = fourier_modes(n)
        lam = np.array([a * a + b * b for a, b, _ in modes], dtype=float)
        f = _fourier_coefficients(forcing, modes, quad)
        u0 = _fourier_coefficients(initial, modes, quad)
        info = tuple(modes)
    else:
        raise DomainError(f"unknown basis {basis_tag!r}")
    return SpectralProblem(float(alpha), float(rho), float(T), lam, f, u0, basis_tag, info)


# --- scalar mode equations -------------------------------------------------------


def solve_mode_closed(mu: float, g0: float, c: float, alpha: float, t):
    """g0 E_{a,1}(-mu t^a) + c t^a E_{a,a+1}(-mu t^a)."""
    if mu < 0.0:
        raise DomainError("mu must be nonnegative")
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0.0):
        raise DomainError("t must be nonnegative")
    ta = tt**alpha
    z = -mu * ta
    out = g0 * specfn.mittag_leffler(alpha, 1.0, z)
    if c != 0.0:
        out = out + c * ta * specfn.mittag_leffler(alpha, alpha + 1.0, z)
    return float(out) if np.ndim(out) == 0 else np.asarray(out)


def solve_mode_l1(mu, g0, c, alpha: float, grid) -> np.ndarray:
    """Implicit L1 time stepping of cD^a g + mu g = c on a uniform grid.

    ``mu``, ``g0`` and ``c`` may be arrays (one entry per mode); the result
    has shape (N + 1,) for scalars and (n_modes, N + 1) otherwise.
    """
    grid = np.asarray(grid, dtype=float)
    N = grid.size - 1
    if N < 2:
        raise PreconditionError("need at least two time steps")
    h = grid[1] - grid[0]
    if not np.allclose(np.diff(grid), h, rtol=1e-9, atol=0.0):
        raise PreconditionError("grid must be uniform")
    scalar = np.ndim(mu) == 0 and np.ndim(g0) == 0 and np.ndim(c) == 0
    mu, g0, c = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (mu, g0, c))
    mu, g0, c = np.broadcast_arrays(mu, g0, c)
    if np.any(mu < 0.0):
        raise DomainError("mu must be nonnegative")
    b = L1Weights(alpha, N).b
    a = h ** (-alpha) / specfn.gamma(2.0 - alpha)
    m = mu.size
    g = np.empty((N + 1, m))
    g[0] = g0
    d = np.empty((N, m))  # d[j] = g[j + 1] - g[j]
    denom = a + mu
    for k in range(1, N + 1):
        # history: sum_{j=1}^{k-1} b_j d[k-1-j]
        hist = b[1:k] @ d[k - 2 :: -1] if k > 1 else 0.0
        g[k] = (c + a * g[k - 1] - a * hist) / denom
        d[k - 1] = g[k] - g[k - 1]
    out = g.T
    return out[0] if scalar else out


def solve_galerkin(p: SpectralProblem, N: int) -> ModeTrajectory:
    """Closed-form mode trajectories on the uniform grid with N steps."""
    if N < 2:
        raise PreconditionError("need at least two time steps")
    grid = np.linspace(0.0, p.T, N + 1)
    coeffs = np.empty((p.n, N + 1))
    for i, (mu, g0, c) in enumerate(zip(p.mu, p.u0, p.f)):
        coeffs[i] = solve_mode_closed(float(mu), float(g0), float(c), p.alpha, grid)
    coeffs[:, 0] = p.u0
    return ModeTrajectory(grid, coeffs)


# --- energy and convergence checks ---------------------------------------------------


@dataclass(frozen=True)
class EnergyReport:
    """Worst slacks of the discrete energy inequality and of its Young form."""

    energy_slack: float
    energy_index: int
    young_slack: float
    young_index: int
    allowance: float

    @property
    def passed(self) -> bool:
        return self.energy_slack >= -self.allowance and self.young_slack >= -self.allowance


def energy_derivative(traj: ModeTrajectory, p: SpectralProblem) -> np.ndarray:
    """L1 Caputo derivative of k -> ||u_n(t_k)||_H^2."""
    alpha = min(p.alpha, 1.0 - 1e-12)
    return caputo_deriv_num(SampledFunction(0.0, p.T, traj.h_norm2()), alpha).values


def _slacks(traj: ModeTrajectory, p: SpectralProblem) -> tuple[np.ndarray, np.ndarray]:
    dE = energy_derivative(traj, p)
    V = traj.v_norm2(p.lambdas)
    pair = p.f @ traj.coeffs
    energy = pair - (0.5 * dE + p.rho * V)
    young = p.dual_norm2() / p.rho - (dE + p.rho * V)
    return energy[1:], young[1:]


def energy_violation(p: SpectralProblem, N: int) -> float:
    """Largest violation (>= 0) of either inequality at resolution N, scaled by the data."""
    e, y = _slacks(solve_galerkin(p, N), p)
    return max(0.0, -float(np.min(e)), -float(np.min(y)))


def check_energy(traj: ModeTrajectory, p: SpectralProblem, allowance: float | None = None) -> EnergyReport:
    """Check both energy inequalities at every node k >= 1.

    Without an explicit allowance, eps(N) is calibrated from the violations
    observed at N/2, N/4 and N/8.
    """
    e, y = _slacks(traj, p)
    if allowance is None:
        scale = 1.0 + p.dual_norm2() / p.rho + float(np.max(traj.v_norm2(p.lambdas))) * p.rho
        allowance = calibrate_allowance(
            lambda M: energy_violation(p, M), traj.N, min(p.alpha, 1.0 - 1e-12), floor=1e-12 * scale
        )
    ke = int(np.argmin(e))
    ky = int(np.argmin(y))
    return EnergyReport(float(e[ke]), ke + 1, float(y[ky]), ky + 1, float(allowance))


@dataclass(frozen=True)
class ConvergenceReport:
    """Discrete L2(0, T; V) distance of each truncation to the finest one."""

    ns: tuple[int, ...]
    distances: tuple[float, ...]

    @property
    def nonincreasing(self) -> bool:
        return all(b <= a for a, b in zip(self.distances, self.distances[1:]))

    @property
    def strictly_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.distances, self.distances[1:]))


def check_convergence(problem: SpectralProblem | Callable[[int], SpectralProblem], ns: Sequence[int], N: int) -> ConvergenceReport:
    """Distances ||u_{n_j} - u_{n_m}|| for increasing truncation levels n_j.

    ``problem`` is either the finest problem (coarser ones are truncations)
    or a factory returning the problem with n modes.
    """
    ns = tuple(int(n) for n in ns)
    if len(ns) < 2 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise PreconditionError("need at least two strictly increasing truncation levels")
    make = problem if callable(problem) else problem.truncate
    finest = make(ns[-1])
    ref = solve_galerkin(finest, N)
    w = np.full(N + 1, ref.grid[1] - ref.grid[0])
    w[0] = w[-1] = 0.5 * w[0]
    dists = []
    for n in ns:
        traj = solve_galerkin(make(n), N)
        diff = ref.coeffs.copy()
        diff[:n] -= traj.coeffs
        dists.append(math.sqrt(float(np.sum(w * np.sum(finest.lambdas[:, None] * diff**2, axis=0)))))
    return ConvergenceReport(ns, tuple(dists))
