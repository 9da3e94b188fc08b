import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import _oracles as oracles
from outpostlab.errors import (
    OutsideDomainD,
    PreconditionViolated,
    TooCloseToDiagonalCircle,
)
from outpostlab.szego import (
    SignConvention,
    SzegoContext,
    heine_mean,
    heine_pmf,
    heine_var,
    mode_odds,
)


@pytest.fixture(scope="module")
def ctx(radial_c1):
    return SzegoContext.from_model(radial_c1)


@pytest.fixture(scope="module")
def ctx_ell(elliptic_model):
    return SzegoContext.from_model(elliptic_model)


# -- scalar constants ----------------------------------------------------------------


def test_theta_q_from_recorded_constants(ctx):
    assert ctx.theta == pytest.approx(math.exp(-1.0) / 1.5, rel=1e-12)
    assert ctx.q == pytest.approx(1.5**-2, rel=1e-12)


def test_weights_are_complementary(ctx):
    for j in (1, 2, 5, 17):
        assert float(ctx.W11(j)) + float(ctx.W22(j)) == pytest.approx(1.0, abs=1e-14)


def test_weight_ratio_identity(ctx):
    # W11_j = e^c rho2^(2j-1) W22_j powers the regrouped expansion
    c, r = 1.0, 1.5
    for j in (1, 3, 8):
        assert float(ctx.W11(j)) == pytest.approx(
            math.exp(c) * r ** (2 * j - 1) * float(ctx.W22(j)), rel=1e-12
        )


@given(st.integers(1, 60))
def test_norm_positive_and_decreasing_to_2pi(radial_model, j):
    c = SzegoContext.from_model(radial_model)
    k = float(c.k_norm(j))
    assert k > 2 * math.pi
    assert float(c.k_norm(j + 1)) < k


# -- counting law --------------------------------------------------------------------


def test_pmf_against_qseries_oracle():
    theta, q = 0.245253, 4.0 / 9.0
    got = heine_pmf(theta, q)
    want = oracles.qseries_pmf(theta, q, kmax=len(got))
    np.testing.assert_allclose(got, want[: len(got)], atol=1e-12)
    assert got[0] == pytest.approx(0.664595, abs=5e-7)


def test_pmf_normalization_and_moments(ctx):
    pm = ctx.pmf()
    assert pm.sum() == pytest.approx(1.0, abs=1e-12)
    ks = np.arange(len(pm))
    assert (ks * pm).sum() == pytest.approx(ctx.mu, abs=1e-10)
    assert heine_mean(ctx.theta, ctx.q) == pytest.approx(ctx.mu, abs=1e-12)
    var = ((ks - ctx.mu) ** 2 * pm).sum()
    assert heine_var(ctx.theta, ctx.q) == pytest.approx(var, abs=1e-10)


def test_mean_matches_independent_series():
    assert heine_mean(0.8, 0.64) == pytest.approx(oracles.qseries_mean(0.8, 0.64), abs=1e-12)


@given(st.floats(0.05, 5.0), st.floats(0.05, 0.9))
def test_pmf_normalized_property(theta, q):
    pm = heine_pmf(theta, q)
    assert abs(pm.sum() - 1.0) < 1e-9
    assert (pm >= 0).all()


def test_mode_odds_geometric(ctx):
    odds = mode_odds(ctx.theta, ctx.q, kmax=6)
    for k in range(6):
        assert odds[k] == pytest.approx(ctx.theta * ctx.q**k, rel=1e-12)


# -- kernel routes ----------------------------------------------------------------------


def test_droplet_kernel_closed_form(radial_model):
    c = SzegoContext.from_model(radial_model)
    assert complex(c.s1(2.0, 2.0)).real == pytest.approx(1.0 / (6 * math.pi), rel=1e-12)


def test_routes_agree_radial(ctx):
    rng = np.random.default_rng(11)
    for _ in range(25):
        az, aw = rng.uniform(1.15, 2.8, 2)
        tz, tw = rng.uniform(0, 2 * math.pi, 2)
        z = az * cmath.exp(1j * tz)
        w = aw * cmath.exp(1j * tw)
        vals = [ctx.s12(z, w, route=r) for r in ("series", "extend", "cross", "mixed")]
        scale = max(abs(v) for v in vals)
        for v in vals[1:]:
            assert abs(v - vals[0]) <= 1e-10 * max(scale, 1e-30)


def test_routes_agree_elliptic(ctx_ell, elliptic_model):
    rng = np.random.default_rng(12)
    for _ in range(12):
        wz = rng.uniform(1.2, 2.2) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        ww = rng.uniform(1.2, 2.2) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        z = complex(elliptic_model.frame.psi(wz))
        w = complex(elliptic_model.frame.psi(ww))
        vals = [ctx_ell.s12(z, w, route=r) for r in ("series", "extend", "cross", "mixed")]
        scale = max(abs(v) for v in vals)
        for v in vals[1:]:
            assert abs(v - vals[0]) <= 1e-10 * max(scale, 1e-30)


def test_extend_route_reaches_inside_series_domain(ctx):
    # points with |x| barely above 1/rho2^2 sit outside series convergence
    z, w = 1.02, 0.98 * cmath.exp(0.4j)
    val = ctx.s12(z, w, route="extend")
    assert np.isfinite(val.real) and np.isfinite(val.imag)


def test_diagonal_closed_form_matches_series(ctx, ctx_ell):
    for c in (ctx, ctx_ell):
        p = complex(c.model.curve_points(2, 3)[1])
        assert complex(c.s12(p, p)).real == pytest.approx(
            c.s12_diag_curve2(p), rel=1e-10
        )


def test_diag_requires_curve2_point(ctx):
    with pytest.raises(PreconditionViolated):
        ctx.s12_diag_curve2(1.1)


def test_domain_guards(ctx):
    with pytest.raises(OutsideDomainD):
        ctx.s12(0.3, 2.0)  # |phi1| below the annulus floor
    with pytest.raises(TooCloseToDiagonalCircle):
        ctx.s1(1.0 + 1e-12, 1.0)


# -- boundary functionals -------------------------------------------------------------


def test_reproducing_identity(ctx, ctx_ell, qd_model):
    ctx_qd = SzegoContext.from_model(qd_model)
    for c in (ctx, ctx_ell, ctx_qd):
        frame = c.model.frame
        # functionals reproduce the closed span of the modes: functions of
        # 1/phi_1 vanishing at infinity
        tests = [
            lambda q: 1.0 / complex(frame.phi1(q)),
            lambda q: 1.0 / complex(frame.phi1(q)) ** 2,
            lambda q: 1.0 / (complex(frame.phi1(q)) - 0.3),
        ]
        z = complex(frame.psi(1.6 * cmath.exp(0.3j)))
        for f in tests:
            b1, b2 = c.berezin_apply(f, z)
            assert abs(b1 + b2 - f(z)) <= 1e-8


def test_reproducing_holds_under_either_sign(radial_c1):
    # internal consistency of the kernel/measure pair, not a sign probe
    for sign in (SignConvention.MINUS_C, SignConvention.PLUS_C):
        c = SzegoContext.from_model(radial_c1, sign=sign)
        f = lambda q: 1.0 / complex(q)
        b1, b2 = c.berezin_apply(f, 2.1)
        assert abs(b1 + b2 - f(2.1)) <= 1e-9


def test_masses_sum_to_one(ctx):
    for a in (1.2, 1.8, 3.0, 10.0):
        m1, m2 = ctx.berezin_masses(a)
        assert m1 + m2 == pytest.approx(1.0, abs=1e-12)
        assert 0 < m2 < 1


def test_measure_masses_match_closed_form(ctx):
    z = 2.7
    m1, m2 = ctx.berezin_masses(z)
    q1m, q2m = ctx.berezin_measure_masses(z)
    assert q1m == pytest.approx(m1, abs=1e-9)
    assert q2m == pytest.approx(m2, abs=1e-9)


def test_far_field_mass_approaches_first_weight(ctx):
    # masses converge at rate a^-2 toward the top-mode weight split
    m1, m2 = ctx.berezin_masses(1e4)
    assert m2 == pytest.approx(float(ctx.W22(1)), abs=1e-7)


def test_functional_needs_exterior_point(ctx):
    with pytest.raises(OutsideDomainD):
        ctx.berezin_masses(0.9)


def test_sign_flip_changes_masses(radial_c1):
    minus = SzegoContext.from_model(radial_c1, sign=SignConvention.MINUS_C)
    plus = SzegoContext.from_model(radial_c1, sign=SignConvention.PLUS_C)
    assert abs(minus.berezin_masses(2.5)[1] - plus.berezin_masses(2.5)[1]) > 0.2
