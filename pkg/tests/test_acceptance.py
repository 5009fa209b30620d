"""Acceptance criteria 1-11, each at its stated tolerance.

Every test records one ``criterion N: PASS|FAIL ...`` line; conftest prints
them in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from fracleibniz import galerkin as gk
from fracleibniz import numfrac as nf
from fracleibniz import polyfrac as pf
from fracleibniz import psimatrix as pm
from fracleibniz import sharpness as sh
from fracleibniz import specfn
from fracleibniz.cli import _chunk_rngs, alzer_invalid_instance, alzer_valid_instance
from fracleibniz.errors import PreconditionError

from conftest import ACCEPTANCE_LINES

GRID = tuple(round(0.05 * k, 2) for k in range(1, 20))
T_GRID = np.round(np.arange(1, 101) * 0.05, 12)


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_determinant():
    t = time.perf_counter()
    worst = max(
        abs(pm.determinant(pm.build_A(2, a)) - pm.determinant_2x2_closed_form(a)) / pm.determinant_2x2_closed_form(a)
        for a in GRID
    )
    dt = time.perf_counter() - t
    report(1, worst <= 1e-12 and dt < 1.0, f"max rel err {worst:.2e} (<= 1e-12), {dt:.2f}s (< 1s)")


def test_criterion_02_psd_sweep():
    t = time.perf_counter()
    failed = []
    min_piv = math.inf
    for a in GRID:
        for cell in pm.psd_sweep_alpha(40, a):
            if not cell.passed:
                failed.append((cell.n, a))
            min_piv = min(min_piv, cell.a_min_pivot, cell.b_min_pivot)
    # the sweep shares one elimination per alpha; factor the largest matrices on their own too
    for a in (0.05, 0.5, 0.95):
        for M in (pm.build_A(40, a), pm.build_B(40, a)):
            if not pm.cholesky_pd(M).is_pd:
                failed.append((40, a, M.kind))
    lemmas = all(pm.verify_phi_product(12, a) for a in GRID) and all(
        pm.verify_border_inequality(n, a) for a in GRID for n in range(2, 13)
    )
    dt = time.perf_counter() - t
    ok = not failed and lemmas and dt < 30.0
    report(2, ok, f"{len(GRID) * 40} cells, failures={failed}, lemmas={lemmas}, min rel pivot {min_piv:.1e}, {dt:.1f}s (< 30s)")


def test_criterion_03_polynomial_fuzz():
    t = time.perf_counter()
    worst_gap, worst_qf, count = math.inf, 0.0, 0
    for lo, hi, ss in _chunk_rngs(20240, 1000, 50):
        rng = np.random.Generator(np.random.PCG64(ss))
        for _ in range(lo, hi):
            P = pf.random_polynomial(rng, int(rng.integers(0, 13)))
            count += 1
            for a in GRID:
                for kind, gf in (("rl", pf.gap_rl), ("caputo", pf.gap_caputo)):
                    g = np.asarray(gf(P, a, T_GRID))
                    s = np.asarray(pf.gap_scale(P, a, T_GRID, kind))
                    worst_gap = min(worst_gap, float(np.min(g / s)))
                    q = np.asarray(pm.quadratic_form_gap(P, a, T_GRID, kind))
                    den = np.maximum(np.maximum(np.abs(g), np.abs(q)), 1e-300)
                    worst_qf = max(worst_qf, float(np.max(np.abs(g - q) / den)))
    dt = time.perf_counter() - t
    ok = count == 1000 and worst_gap >= -1e-10 and worst_qf <= 1e-9 and dt < 60.0
    report(3, ok, f"min gap/scale {worst_gap:.2e} (>= -1e-10), quad-form rel err {worst_qf:.2e} (<= 1e-9), {dt:.1f}s (< 60s)")


def test_criterion_04_leibniz_series():
    rng = np.random.default_rng(404)
    worst = 0.0
    for _ in range(200):
        f = pf.random_polynomial(rng, int(rng.integers(0, 7)))
        g = pf.random_polynomial(rng, int(rng.integers(0, 7)))
        a = float(rng.choice(GRID))
        worst = max(worst, pf.expansion_discrepancy(pf.leibniz_series_rl(f, g, a), pf.rl_deriv(pf.multiply(f, g), a)))
    report(4, worst <= 1e-10, f"200 pairs, max termwise rel discrepancy {worst:.2e} (<= 1e-10)")


def test_criterion_05_sharpness():
    c1 = sh.caputo_counterexample(1.5, 0.5)
    c2 = sh.caputo_counterexample(2.5, 0.5)
    # case formulas evaluated independently
    e1 = (2 - 0.5) * (2 - 1.5) / (1.5 * (2 - 0.5) - 2)
    e2 = (2 - 0.5) * (2.5 - 2) / (2.5 * (2 - 0.5) - 2)
    ends = c1.valid_interval == (0.0, e1) and c2.valid_interval == (0.0, e2)
    ends = ends and math.isclose(e1, 3.0, rel_tol=1e-15) and math.isclose(e2, 3 / 7, rel_tol=1e-15)
    mids = c1.witness_t == 0.5 * e1 and c2.witness_t == 0.5 * e2 and c1.verify() and c2.verify()
    rl = {lam: sh.rl_counterexample(lam, 0.5, k_cap=2000) for lam in (1.0, 1.5, 2.5)}
    rl_ok = all(c.verify() and c.k <= 2000 for c in rl.values())
    ks = {lam: c.k for lam, c in rl.items()}
    report(5, ends and mids and rl_ok, f"endpoints (0,3),(0,3/7) exact={ends}, midpoint reversal={mids}, RL k={ks} verified={rl_ok}")


def test_criterion_06_phi_sequence():
    ok = True
    for a in GRID:
        s = sh.phi_sequence(a, 1000)
        r = s.doubling_ratios()
        ok &= bool(np.all(np.diff(s.values[:501]) > 0) and np.all(np.diff(r) > 0) and np.all(r < 2.0**a))
    report(6, ok, f"k <= 500 over {len(GRID)} alphas: monotone phi_k and doubling ratios below 2^alpha")


def test_criterion_07_l1_order():
    Ns = [2**k for k in range(6, 13)]
    ok, ranges = True, {}
    for a in (0.25, 0.5, 0.75):
        errs = []
        for N in Ns:
            f = nf.SampledFunction.from_callable(lambda t: t**3, 0.0, 1.0, N)
            ref = pf.evaluate(pf.caputo_deriv(pf.from_monomial([0, 0, 0, 1], 0.0), a), f.nodes)
            errs.append(float(np.max(np.abs(nf.caputo_deriv_num(f, a).values - ref))))
        o = nf.observed_orders(Ns, errs)
        ranges[a] = (round(float(o.min()), 3), round(float(o.max()), 3))
        ok &= bool(np.all(o >= 2 - a - 0.2) and np.all(o <= 2 - a + 0.3))
    report(7, ok, f"observed orders {ranges} within [2-a-0.2, 2-a+0.3]")


def test_criterion_08_operator_algebra():
    def errors(N):
        f2 = nf.SampledFunction.from_callable(lambda t: t**2, 0.0, 1.0, N)
        semi = np.max(np.abs(nf.rl_integral_num(nf.rl_integral_num(f2, 0.4), 0.3).values - nf.rl_integral_num(f2, 0.7).values))
        s = nf.SampledFunction.from_callable(np.sin, 0.0, 1.0, N)
        left = np.max(np.abs(nf.rl_deriv_num(nf.rl_integral_num(s, 0.5), 0.5).values - s.values))
        c = nf.SampledFunction.from_callable(np.cos, 0.0, 1.0, N)
        inv = np.max(np.abs(nf.rl_integral_num(nf.caputo_deriv_num(c, 0.5), 0.5).values - (c.values - 1.0)))
        return np.array([semi, left, inv])

    e = [errors(N) for N in (256, 1024, 4096)]
    shrinking = bool(np.all(e[0] > e[1]) and np.all(e[1] > e[2]))
    ok = shrinking and bool(np.all(e[2] < 1e-3))
    report(8, ok, f"N=4096 errors semigroup/left-inverse/caputo-inversion {e[2][0]:.1e}/{e[2][1]:.1e}/{e[2][2]:.1e} (< 1e-3), decreasing={shrinking}")


def test_criterion_09_galerkin_cross_validation():
    grid = np.linspace(0.0, 1.0, 4097)
    worst = 0.0
    for a in (0.25, 0.5, 0.75):
        for mu in (0.0, 1.0, 10.0, 100.0):
            for g0, c in ((1.0, 0.0), (1.0, 1.0)):
                l1 = gk.solve_mode_l1(mu, g0, c, a, grid)[-1]
                worst = max(worst, abs(l1 - gk.solve_mode_closed(mu, g0, c, a, 1.0)))
    t = np.linspace(0.0, 3.0, 61)
    worst1 = 0.0
    for mu, g0, c in ((1.0, 1.0, 0.0), (2.5, -0.3, 1.7), (10.0, 2.0, 5.0)):
        ref = g0 * np.exp(-mu * t) + (c / mu) * (1.0 - np.exp(-mu * t))
        worst1 = max(worst1, float(np.max(np.abs(gk.solve_mode_closed(mu, g0, c, 1.0, t) - ref))))
    ok = worst < 1e-4 and worst1 < 1e-8
    report(9, ok, f"closed vs L1 at T=1 max diff {worst:.2e} (< 1e-4), alpha=1 limit {worst1:.1e} (< 1e-8)")


def test_criterion_10_energy():
    t = time.perf_counter()
    seeds = np.random.SeedSequence(1010).spawn(50)
    N = 1024
    bad, worst_e, worst_y, worst_free = [], math.inf, math.inf, -math.inf
    for idx, ss in enumerate(seeds):
        rng = np.random.Generator(np.random.PCG64(ss))
        n = int(rng.integers(1, 32))  # lambda_n = n^2 stays below 1e3
        alpha = float(rng.choice(GRID))
        rho = float(rng.uniform(0.1, 2.0))
        lam = np.arange(1, n + 1, dtype=float) ** 2
        u0, f = rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)
        p = gk.SpectralProblem(alpha, rho, 1.0, lam, f, u0)
        rep = gk.check_energy(gk.solve_galerkin(p, N), p)
        worst_e = min(worst_e, rep.energy_slack + rep.allowance)
        worst_y = min(worst_y, rep.young_slack + rep.allowance)
        free = gk.SpectralProblem(alpha, rho, 1.0, lam, np.zeros(n), u0)
        dE = gk.energy_derivative(gk.solve_galerkin(free, N), free)
        scale = 1.0 + float(np.sum(u0**2)) * N**alpha
        eps = nf.calibrate_allowance(
            lambda M: max(0.0, float(np.max(gk.energy_derivative(gk.solve_galerkin(free, M), free)))),
            N, alpha, floor=1e-12 * scale,
        )
        worst_free = max(worst_free, float(np.max(dE[1:])) - eps)
        if not rep.passed or np.max(dE[1:]) > eps:
            bad.append(idx)
    dt = time.perf_counter() - t
    ok = not bad and dt < 120.0
    report(
        10, ok,
        f"50 problems, failures={bad}, min slack+eps energy {worst_e:.2e} young {worst_y:.2e}, "
        f"unforced max(dE - eps) {worst_free:.2e}, {dt:.1f}s (< 120s)",
    )


def test_criterion_11_gautschi_alzer():
    s_grid = np.linspace(0.0, 1.0, 11)
    g_bad = sum(not specfn.gautschi_check(n, s) for n in range(1, 10001) for s in s_grid)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(1111)))
    a_bad = sum(not specfn.alzer_check(*alzer_valid_instance(rng)) for _ in range(500))
    missed = 0
    for j in range(100):
        try:
            specfn.alzer_check(*alzer_invalid_instance(rng, j))
            missed += 1
        except PreconditionError:
            pass
    ok = g_bad == 0 and a_bad == 0 and missed == 0
    report(11, ok, f"gautschi failures {g_bad}/110000, alzer valid failures {a_bad}/500, unrejected violations {missed}/100")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
