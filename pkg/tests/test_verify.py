import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import _oracles as oracles
from outpostlab.errors import Inconclusive
from outpostlab.szego import SignConvention
from outpostlab.verify import (
    TheoremReport,
    _fit_exponent,
    check_berezin,
    check_far_field,
    check_ginibre_control,
    check_heine,
    check_mode_approximants,
    check_outpost_density,
    check_sampler,
    check_szego_convergence,
    check_trace,
    density_profile,
    poisson_binomial,
    resolve_sign_convention,
)


# -- report plumbing ---------------------------------------------------------------


def test_report_round_trip():
    rep = TheoremReport(
        theorem="demo", model_kind="radial", ns=[8, 16], deviations=[0.2, 0.1],
        passed=True, exponent_fit=1.0, details={"note": 3},
    )
    d = rep.to_dict()
    assert d["pass"] is True
    assert set(d) == {"theorem", "model_kind", "ns", "deviations", "exponent_fit", "pass", "details"}
    assert json.loads(rep.to_json()) == d
    # deterministic serialization
    assert rep.to_json() == rep.to_json()


def test_fit_exponent_recovers_power_law():
    ns = [16, 32, 64, 128]
    devs = [3.0 * n ** -1.5 for n in ns]
    assert _fit_exponent(ns, devs) == pytest.approx(1.5, abs=1e-12)


@given(st.lists(st.floats(0.01, 0.99), min_size=1, max_size=16))
def test_poisson_binomial_matches_oracle(ps):
    ps = np.array(ps)
    pmf = poisson_binomial(ps)
    np.testing.assert_allclose(pmf, oracles.poisson_binomial_dft(ps), atol=1e-10)
    assert pmf.sum() == pytest.approx(1.0, abs=1e-12)


# -- limit checks on fixtures ----------------------------------------------------------


def test_ginibre_control_passes():
    rep = check_ginibre_control()
    assert rep.passed
    assert max(rep.deviations) < 1e-10


def test_trace_check_passes(radial_model):
    rep = check_trace(radial_model, 48)
    assert rep.passed


def test_szego_convergence_radial(radial_model):
    rep = check_szego_convergence(radial_model)
    assert rep.passed
    assert rep.ns == [32, 64, 128]
    assert rep.deviations[0] > rep.deviations[1] > rep.deviations[2]
    assert rep.exponent_fit > 0.5


def test_density_profile_shape(radial_model):
    s, x, y = density_profile(radial_model, 64)
    assert s.shape == x.shape == y.shape
    # excess potential vanishes on the curve and grows off it
    mid = len(s) // 2
    assert x[mid] == pytest.approx(0.0, abs=1e-12)
    assert x[0] > 0 and x[-1] > 0


def test_outpost_density_gate(radial_model):
    rep = check_outpost_density(radial_model)
    assert rep.passed
    assert abs(rep.details["profile_slopes"][-1] + 1.0) < 0.1


def test_heine_gate(radial_model):
    rep = check_heine(radial_model)
    assert rep.passed
    assert rep.deviations[0] > rep.deviations[1]


def test_berezin_gate(radial_model):
    rep = check_berezin(radial_model)
    assert rep.passed


def test_far_field_gate(radial_model):
    rep = check_far_field(radial_model)
    assert rep.passed
    assert max(rep.deviations) < 1e-8


def test_mode_approximants_gate(radial_model):
    rep = check_mode_approximants(radial_model)
    assert rep.passed
    assert rep.details["c_bulk"] > 0 and rep.details["c_edge"] > 0


def test_sampler_gate(radial_model):
    rep = check_sampler(radial_model)
    assert rep.passed


# -- sign arbitration ----------------------------------------------------------------------


def test_sign_resolves_to_minus(radial_c1):
    sign, rep = resolve_sign_convention(radial_c1)
    assert sign is SignConvention.MINUS_C
    assert rep.passed
    for lo, hi in zip(rep.details["minus_scores"], rep.details["plus_scores"]):
        assert hi > 2.0 * lo


def test_sign_inconclusive_when_constant_vanishes(radial_model):
    # t0 = 1 makes c = 0, where the two conventions coincide
    assert abs(radial_model.c) < 1e-12
    with pytest.raises(Inconclusive):
        resolve_sign_convention(radial_model)
