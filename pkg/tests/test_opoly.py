import cmath
import math

import numpy as np
import pytest

import _oracles as oracles
from outpostlab.opoly import (
    GramSpectralData,
    RadialSpectralData,
    approx_mode_bulk,
    approx_mode_edge,
    build_spectral,
    mode_windows,
    precision_bits,
    predicted_log_norm,
    predicted_mode_odds,
)


@pytest.fixture(scope="module")
def sp64(radial_model):
    return build_spectral(radial_model, 64)


# -- control moments -----------------------------------------------------------------


def test_control_norms_match_gamma(ginibre_model):
    sp = build_spectral(ginibre_model, 50)
    for j in (0, 1, 7, 25, 49):
        assert sp.log_norms[j] == pytest.approx(oracles.gauss_log_norm(j, 50), abs=1e-12)


def test_control_kernel_at_origin(ginibre_model):
    sp = build_spectral(ginibre_model, 50)
    assert complex(sp.kernel_point(0.0, 0.0)).real == pytest.approx(50.0, rel=1e-12)


def test_radial_norms_match_adaptive_quadrature(radial_model):
    sp = build_spectral(radial_model, 16)
    for j in (0, 5, 10, 15):
        want = oracles.radial_log_norm_quad(radial_model, 16, j)
        assert sp.log_norms[j] == pytest.approx(want, abs=1e-11)


def test_trace_equals_mode_count(radial_model, smooth_model):
    for m in (radial_model, smooth_model):
        sp = build_spectral(m, 32)
        assert sp.trace_refined() == pytest.approx(32.0, rel=1e-10)


# -- kernels ---------------------------------------------------------------------------


def test_kernel_hermitian(sp64):
    rng = np.random.default_rng(5)
    for _ in range(10):
        z = rng.uniform(0.2, 1.4) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        w = rng.uniform(0.2, 1.4) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        assert complex(sp64.kernel_point(z, w)) == pytest.approx(
            complex(sp64.kernel_point(w, z)).conjugate(), rel=1e-12
        )


def test_kernel_diag_matches_pointwise(sp64):
    rs = np.array([0.3, 0.9, 1.2, 1.3])
    diag = sp64.kernel_diag(rs)
    for r, d in zip(rs, diag):
        assert complex(sp64.kernel_point(r, r)).real == pytest.approx(float(d), rel=1e-12)


def test_kernel_vanishes_off_support(sp64):
    assert float(sp64.kernel_diag(np.array([1.7]))[0]) == 0.0


def test_occupancies_are_probabilities(sp64):
    occ = sp64.occupancies()
    assert occ.shape == (64,)
    assert ((occ >= 0) & (occ <= 1)).all()
    # outpost mass loads the top modes only, decaying geometrically below
    assert 0.4 < occ[-1] < 0.5
    assert (np.diff(occ[-8:]) > 0).all()
    assert occ[:40].max() < 1e-6


def test_mode_value_consistent_with_kernel(sp64):
    z = 1.27
    total = sum(
        sp64.mode_value(j, z) * np.conj(sp64.mode_value(j, z)) for j in range(64)
    )
    assert complex(total).real == pytest.approx(
        complex(sp64.kernel_point(z, z)).real, rel=1e-10
    )


# -- gram route cross-validation ------------------------------------------------------


def test_gram_route_matches_radial_route(radial_model):
    n = 8
    rad = RadialSpectralData(radial_model, n)
    gram = GramSpectralData(radial_model, n)
    np.testing.assert_allclose(gram.log_norms, rad.log_norms, atol=1e-9)
    assert gram.trace_refined() == pytest.approx(rad.trace_refined(), abs=1e-8)
    for z, w in [(0.5, 0.5), (1.3, 1.27), (0.8j, 1.29)]:
        kg = complex(gram.kernel_point(z, w))
        kr = complex(rad.kernel_point(z, w))
        assert kg == pytest.approx(kr, rel=1e-8)


def test_build_spectral_dispatch(radial_model, elliptic_model):
    assert isinstance(build_spectral(radial_model, 8), RadialSpectralData)
    assert isinstance(build_spectral(elliptic_model, 8), GramSpectralData)


def test_spectral_cache_returns_same_object(radial_model):
    assert build_spectral(radial_model, 64) is build_spectral(radial_model, 64)


# -- precision and windows ---------------------------------------------------------------


def test_precision_grows_with_n(radial_model):
    bits = [precision_bits(radial_model, n) for n in (16, 64, 256)]
    assert bits[0] < bits[1] < bits[2]
    assert bits[1] >= 96


def test_windows_partition(radial_model):
    for n in (64, 128):
        w = mode_windows(n)
        assert w.far_empty
        assert w.bulk.stop == w.edge.start
        assert w.edge.stop == n
        assert w.bulk.start >= 1


# -- approximants -------------------------------------------------------------------------


def test_bulk_approximant_tracks_modes(radial_model, sp64):
    for j in (12, 30, 44):
        rs = np.linspace(0.4, 1.05, 40)
        ex = np.array([abs(sp64.mode_value(j, r)) for r in rs])
        ap = np.array([abs(approx_mode_bulk(radial_model, 64, j, r)) for r in rs])
        assert np.max(np.abs(ex - ap)) / np.max(ex) < 0.05


def test_edge_approximant_tracks_modes(radial_model, sp64):
    for j in (58, 63):
        rs = np.linspace(1.16, 1.45, 40)
        ex = np.array([abs(sp64.mode_value(j, r)) for r in rs])
        ap = np.array([abs(approx_mode_edge(radial_model, 64, j, r)) for r in rs])
        assert np.max(np.abs(ex - ap)) / np.max(ex) < 0.10


def test_predicted_norms_near_exact_at_edge(radial_model, sp64):
    devs = [
        abs(math.exp(predicted_log_norm(radial_model, 64, j) - sp64.log_norms[j]) - 1)
        for j in range(58, 64)
    ]
    assert max(devs) < 0.10


def test_predicted_odds_match_occupancies(radial_model, sp64):
    occ = sp64.occupancies()
    for j in range(59, 64):
        p = predicted_mode_odds(radial_model, 64, j)
        assert p / (1 + p) == pytest.approx(float(occ[j]), rel=0.05)
