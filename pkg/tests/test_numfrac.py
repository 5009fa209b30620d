import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracleibniz import numfrac as nf
from fracleibniz import polyfrac as pf
from fracleibniz import specfn
from fracleibniz.errors import DomainError, PreconditionError, SingularityError
from fracleibniz.polyfrac import ShiftedPolynomial

SF = nf.SampledFunction


def sample(f, N, t0=0.0, t1=1.0):
    return SF.from_callable(f, t0, t1, N)


# --- containers -------------------------------------------------------------------------------


def test_sampled_function_basics():
    f = sample(lambda t: t, 4, 1.0, 3.0)
    assert f.N == 4 and f.h == 0.5
    assert np.allclose(f.nodes, [1, 1.5, 2, 2.5, 3])
    assert f.at(2) == 2.0
    g = 2 * f - f
    assert np.array_equal(g.values, f.values)
    assert np.array_equal((f * f).values, f.values**2)


def test_sampled_function_preconditions():
    with pytest.raises(PreconditionError):
        SF(0.0, 1.0, np.array([1.0, 2.0]))
    with pytest.raises(PreconditionError):
        SF(1.0, 1.0, np.zeros(5))
    with pytest.raises(PreconditionError):
        SF(0.0, 1.0, np.array([0.0, np.inf, 1.0]))
    with pytest.raises(PreconditionError):
        sample(np.sin, 4) + sample(np.sin, 8)


def test_l1_weights():
    w = nf.L1Weights(0.4, 50)
    assert w.b[0] == 1.0
    assert np.all(w.b > 0) and np.all(np.diff(w.b) < 0)
    assert np.allclose(w.b, np.diff(np.arange(51.0) ** 0.6))
    with pytest.raises(DomainError):
        nf.L1Weights(1.0, 5)


# --- fractional integral ------------------------------------------------------------------------


def test_integral_of_zero():
    assert np.all(nf.rl_integral_num(sample(np.zeros_like, 64), 0.5).values == 0.0)


def test_integral_of_one():
    f = sample(np.ones_like, 1024)
    I = nf.rl_integral_num(f, 0.5)
    t = f.nodes[1:]
    ref = t**0.5 / specfn.gamma(1.5)
    assert I.values[0] == 0.0
    assert np.max(np.abs(I.values[1:] - ref) / ref) < 1e-3


def test_integral_semigroup_numeric():
    f = sample(lambda t: t**2, 1024)
    lhs = nf.rl_integral_num(nf.rl_integral_num(f, 0.4), 0.3)
    assert np.max(np.abs(lhs.values - nf.rl_integral_num(f, 0.7).values)) < 1e-3


def test_integral_matches_closed_form():
    P = ShiftedPolynomial(0.0, (1.0, -2.0, 3.0))
    f = sample(P, 512)
    for a in (0.2, 0.5, 0.8):
        ref = pf.evaluate(pf.rl_integral(P, a), f.nodes)
        assert np.max(np.abs(nf.rl_integral_num(f, a).values - ref)) < 1e-5


def test_integral_rejects_singular_sample():
    f = nf.rl_deriv_num(sample(np.ones_like, 16), 0.5)
    with pytest.raises(SingularityError):
        nf.rl_integral_num(f, 0.5)


# --- derivatives -----------------------------------------------------------------------------------


def test_caputo_of_constant():
    d = nf.caputo_deriv_num(sample(lambda t: 3.0 + 0 * t, 64), 0.6)
    assert np.all(d.values == 0.0)


def test_caputo_of_identity():
    for N in (64, 1024):
        f = sample(lambda t: t, N)
        d = nf.caputo_deriv_num(f, 0.5)
        ref = f.nodes**0.5 / specfn.gamma(1.5)
        # the L1 scheme is exact for piecewise-linear data
        assert np.max(np.abs(d.values - ref)) < 1e-13


@pytest.mark.parametrize("a", [0.1, 0.25, 0.5, 0.75, 0.9])
def test_caputo_convergence_order(a):
    Ns = [2**k for k in range(6, 13)]
    errs = []
    for N in Ns:
        f = sample(lambda t: t**3, N)
        ref = 6 * f.nodes ** (3 - a) / specfn.gamma(4 - a)
        errs.append(np.max(np.abs(nf.caputo_deriv_num(f, a).values - ref)))
    orders = nf.observed_orders(Ns, errs)
    assert np.all(orders >= 2 - a - 0.2)
    assert np.all(orders <= 2 - a + 0.3)


def test_rl_equals_caputo_when_f0_zero():
    f = sample(np.sin, 128)
    r, c = nf.rl_deriv_num(f, 0.3), nf.caputo_deriv_num(f, 0.3)
    assert not r.singular_at_t0
    assert np.array_equal(r.values, c.values)


def test_rl_of_one():
    f = sample(np.ones_like, 256)
    d = nf.rl_deriv_num(f, 0.5)
    assert d.singular_at_t0 and math.isnan(d.values[0])
    with pytest.raises(SingularityError):
        d.at(0)
    t = f.nodes[1:]
    assert np.allclose(d.values[1:], t**-0.5 / specfn.gamma(0.5), rtol=1e-13, atol=0)


def test_rl_of_affine_matches_closed_form():
    P = ShiftedPolynomial(0.0, (1.0, 1.0))
    f = sample(P, 1024)
    d = nf.rl_deriv_num(f, 0.5)
    ref = pf.evaluate(pf.rl_deriv(P, 0.5), f.nodes[1:])
    assert np.max(np.abs(d.values[1:] - ref)) < 1e-12


@settings(max_examples=50, deadline=None)
@given(
    st.floats(-3, 3), st.floats(-3, 3), st.sampled_from([0.2, 0.5, 0.8]),
    st.sampled_from(["int", "caputo", "rl"]),
)
def test_linearity(lam, mu, a, op):
    f, g = sample(np.sin, 128), sample(np.exp, 128)
    fn = {"int": nf.rl_integral_num, "caputo": nf.caputo_deriv_num, "rl": nf.rl_deriv_num}[op]
    lhs = fn(f * lam + g * mu, a).values[1:]
    rhs = (fn(f, a) * lam + fn(g, a) * mu).values[1:]
    ref = np.abs(fn(f, a).values[1:]) * abs(lam) + np.abs(fn(g, a).values[1:]) * abs(mu) + 1
    assert np.all(np.abs(lhs - rhs) <= 1e-13 * ref)


def test_left_inverse_converges():
    errs = []
    for N in (128, 512, 2048):
        f = sample(np.sin, N, 0.0, 2.0)
        back = nf.rl_deriv_num(nf.rl_integral_num(f, 0.5), 0.5)
        errs.append(np.max(np.abs(back.values - f.values)))
    assert errs[0] > errs[1] > errs[2]
    assert np.all(nf.observed_orders([128, 512, 2048], errs) > 0.4)
    assert errs[2] < 5e-4


def test_caputo_inversion_converges():
    errs = []
    for N in (128, 512, 2048):
        f = sample(np.cos, N, 0.0, 2.0)
        back = nf.rl_integral_num(nf.caputo_deriv_num(f, 0.5), 0.5)
        errs.append(np.max(np.abs(back.values - (f.values - 1.0))))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-5


# --- inequality on samples ---------------------------------------------------------------------------


def test_gap_of_constant_is_zero():
    r = nf.check_inequality_sampled(sample(lambda t: 2.0 + 0 * t, 64), 0.5, "caputo")
    assert np.all(r.gaps == 0.0) and r.min_gap == 0.0


def test_gap_sin_caputo():
    r = nf.check_inequality_sampled(sample(np.sin, 2048, 0.0, 3.0), 0.5, "caputo")
    assert r.min_gap >= -1e-4
    assert r.holds(1e-4)


def test_gap_rl_skips_node_zero():
    r = nf.check_inequality_sampled(sample(np.exp, 256), 0.5, "rl")
    assert math.isnan(r.gaps[0]) and r.index >= 1
    with pytest.raises(DomainError):
        nf.check_inequality_sampled(sample(np.exp, 256), 0.5, "gl")


def test_l1_caputo_gap_nonnegative_on_random_data():
    # 2 f_k D f_k - D(f^2)_k is a weighted sum of squared increments
    rng = np.random.default_rng(3)
    for _ in range(50):
        f = SF(0.0, 1.0, rng.standard_normal(65))
        r = nf.check_inequality_sampled(f, float(rng.uniform(0.05, 0.95)), "caputo")
        assert r.min_gap >= -1e-12 * r.scale


def test_gap_deg8_polynomial_matches_closed_form():
    rng = np.random.default_rng(1)
    P = pf.random_polynomial(rng, 8)
    errs = []
    for N in (256, 1024, 4096):
        f = sample(P, N)
        r = nf.check_inequality_sampled(f, 0.5, "caputo")
        ref = pf.gap_caputo(P, 0.5, f.nodes)
        errs.append(np.max(np.abs(r.gaps - ref)) / np.max(np.abs(ref)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[-1] < 1e-4


def test_calibrated_allowance():
    def viol(M):
        return 0.0

    assert nf.calibrate_allowance(viol, 1024, 0.5) == 1e-12

    def viol2(M):
        return 3.0 * M ** -0.5

    eps = nf.calibrate_allowance(viol2, 1024, 0.5)
    assert eps == pytest.approx(2 * 3.0 * 1024**-0.5 + 1e-12, rel=1e-12)
    assert viol2(1024) <= eps


def test_observed_orders():
    Ns = [10, 20, 40]
    assert np.allclose(nf.observed_orders(Ns, [1.0, 0.25, 0.0625]), [2.0, 2.0])
