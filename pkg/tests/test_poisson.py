import math

import numpy as np
import pytest
from scipy import stats

from minkfield import geometry as g
from minkfield import poisson as ps
from minkfield.report import covariance_se, mean_se, variance_se

SQUARE = g.unit_square()
DISC = g.Ball([0.0, 0.0], 1.0)
HEX = g.centred_hexagon()


# --- quadrature ------------------------------------------------------------------


def test_variance_quadrature_square():
    assert ps.variance_quadrature(SQUARE, 0.25, [1, 0]) == pytest.approx(8.0, abs=1e-8)


def test_variance_quadrature_homogeneous():
    assert ps.variance_quadrature(SQUARE, 0.25, [2, 0]) == pytest.approx(8 * math.sqrt(2), rel=1e-10)


def test_variance_quadrature_segment():
    assert ps.variance_quadrature(ps.segment(), 0.25, [1.0]) == pytest.approx(8 * math.sqrt(2), rel=1e-12)
    assert ps.segment_constant(0.25) == pytest.approx(8 * math.sqrt(2), rel=1e-14)


def test_variance_quadrature_disc_matches_radial_mean():
    H = 0.25
    m, se = g.radial_mean_integral(DISC, -2 * H, [[1.0, 0.0]], 200_000, 1)
    rhs = DISC.volume / H * m[0]
    assert abs(ps.variance_quadrature(DISC, H, [1, 0]) - rhs) < 3 * DISC.volume / H * se[0]


def test_variance_quadrature_rejects_origin_and_bad_H():
    with pytest.raises(ValueError):
        ps.variance_quadrature(SQUARE, 0.25, [0, 0])
    with pytest.raises(ValueError):
        ps.variance_quadrature(SQUARE, 0.5, [1, 0])


@pytest.mark.parametrize("C", [1.0, 10.0, 1000.0])
def test_truncated_variance_square_closed_form(C):
    # for p = 1, z = e1 and C >= 1 the variance is 2C - 1
    assert ps.truncated_variance_quadrature(SQUARE, 1.0, C, [1, 0]) == pytest.approx(2 * C - 1, rel=1e-10)


def test_truncated_variance_vanishes_for_small_C():
    assert ps.truncated_variance_quadrature(SQUARE, 1.0, 1e-3, [1, 0]) < 1e-5


# --- simulation ------------------------------------------------------------------


def test_spec_validation():
    with pytest.raises(ValueError):
        ps.FracPoissonSpec(0.5, SQUARE, [[1, 0]])
    with pytest.raises(ValueError, match="origin"):
        ps.FracPoissonSpec(0.25, SQUARE, [[1, 0], [0, 0]])
    with pytest.raises(ValueError):
        ps.FracPoissonSpec(0.25, SQUARE, [[1, 0, 0]])
    with pytest.raises(ValueError):
        ps.TruncatedSpec(0.5, 1.0, SQUARE, [[1, 0]])
    with pytest.raises(ValueError):
        ps.TruncatedSpec(1.0, 0.0, SQUARE, [[1, 0]])


def test_xi_square_variance():
    batch = ps.simulate_xi(ps.FracPoissonSpec(0.25, SQUARE, [[1.0, 0.0]]), 10_000, 1)
    assert batch.values.dtype == np.int64
    v, se = variance_se(batch.values[:, 0])
    assert abs(v - 8.0) < 3 * se


def test_xi_segment_variance():
    batch = ps.simulate_xi(ps.FracPoissonSpec(0.25, ps.segment(), [[1.0]]), 10_000, 2)
    v, se = variance_se(batch.values[:, 0])
    assert abs(v - 8 * math.sqrt(2)) < 3 * se


def test_xi_single_point_is_skellam():
    V = 8.0
    n = 20_000
    x = ps.simulate_xi(ps.FracPoissonSpec(0.25, SQUARE, [[1.0, 0.0]]), n, 3).values[:, 0]
    assert abs(stats.skew(x)) < 3 * math.sqrt(6 / n)
    assert abs(stats.kurtosis(x) - 1 / V) < 3 * math.sqrt(24 / n)
    t = np.array([0.2, 0.5, 1.0, 2.5])
    phi, se = ps.empirical_char_function(x[:, None], t[:, None])
    exact = ps.single_point_char_function(V, t)
    assert np.all(np.abs(phi - exact) < 3 * se)


def test_contributing_points_match_variance():
    n = 10_000
    batch = ps.simulate_xi(ps.FracPoissonSpec(0.25, ps.segment(), [[1.0]]), n, 4)
    expected = ps.expected_contributing_points(ps.segment(), 0.25, [1.0])
    mean = batch.counters["mean_points_per_replicate"]
    assert abs(mean - expected) < 3 * math.sqrt(expected / n)


def test_increments_match_difference_point():
    z1, z2 = np.array([1.0, 0.5]), np.array([0.2, -0.4])
    batch = ps.simulate_xi(ps.FracPoissonSpec(0.25, SQUARE, [z1, z2, z1 - z2]), 10_000, 5)
    v1, s1 = variance_se(batch.values[:, 0] - batch.values[:, 1])
    v2, s2 = variance_se(batch.values[:, 2])
    assert abs(v1 - v2) < 3 * math.hypot(s1, s2)


def test_covariance_structure():
    z1, z2 = np.array([1.0, 0.0]), np.array([0.3, 0.8])
    batch = ps.simulate_xi(ps.FracPoissonSpec(0.3, HEX, [z1, z2]), 10_000, 6)
    c, se = covariance_se(batch.values[:, 0], batch.values[:, 1])
    assert abs(c - ps.covariance_quadrature(HEX, 0.3, z1, z2)) < 3 * se


def test_mean_is_zero():
    batch = ps.simulate_xi(ps.FracPoissonSpec(0.4, DISC, [[0.6, 0.8], [2.0, 1.0]]), 10_000, 7)
    for j in range(2):
        m, se = mean_se(batch.values[:, j])
        assert abs(m) < 3 * se


@pytest.mark.parametrize("K", [SQUARE, DISC, HEX], ids=["square", "disc", "hexagon"])
@pytest.mark.parametrize("H", [0.1, 0.25, 0.4])
def test_variance_matches_quadrature(K, H):
    pts = np.array([[1.0, 0.0], [0.0, 0.7], [0.8, 0.8]])
    batch = ps.simulate_xi(ps.FracPoissonSpec(H, K, pts), 4_000, int(100 * H) + len(K.to_dict()))
    for j, z in enumerate(pts):
        v, se = variance_se(batch.values[:, j])
        assert abs(v - ps.variance_quadrature(K, H, z)) < 3 * se


def test_xi_three_dimensional_cube():
    cube = g.Box([0, 0, 0], [1, 1, 1])
    batch = ps.simulate_xi(ps.FracPoissonSpec(0.25, cube, [[0.0, 0.0, 1.0]]), 5_000, 8)
    v, se = variance_se(batch.values[:, 0])
    assert abs(v - 8.0) < 3 * se


def test_eta_variance_matches_quadrature():
    spec = ps.TruncatedSpec(1.0, 10.0, SQUARE, [[1.0, 0.0]])
    batch = ps.simulate_eta(spec, 5_000, 9)
    v, se = variance_se(batch.values[:, 0])
    assert abs(v - 19.0) < 3 * se


def test_eta_small_C_is_nearly_zero():
    batch = ps.simulate_eta(ps.TruncatedSpec(1.0, 1e-3, SQUARE, [[1.0, 0.0]]), 2_000, 10)
    assert np.count_nonzero(batch.values) <= 5


def test_zeta_variance():
    sigma = g.SpectralMeasure([[1.0, 0.0], [0.0, 1.0]], [0.5, 0.5])
    batch = ps.simulate_zeta(ps.DirectionalSpec(0.25, sigma, [[1.0, 1.0]]), 10_000, 11)
    v, se = variance_se(batch.values[:, 0])
    target = ps.zeta_variance(0.25, sigma, [1.0, 1.0])
    assert target == pytest.approx(ps.segment_constant(0.25))
    assert abs(v - target) < 3 * se


def test_zeta_single_atom_reduces_to_segment():
    sigma = g.SpectralMeasure([[1.0]], [1.0])
    zeta = ps.simulate_zeta(ps.DirectionalSpec(0.25, sigma, [[1.5]]), 10_000, 12).values[:, 0]
    xi = ps.simulate_xi(ps.FracPoissonSpec(0.25, ps.segment(), [[1.5]]), 10_000, 13).values[:, 0]
    v1, s1 = variance_se(zeta)
    v2, s2 = variance_se(xi)
    assert abs(v1 - v2) < 3 * math.hypot(s1, s2)


def test_zeta_orthogonal_point_is_zero():
    sigma = g.SpectralMeasure([[1.0, 0.0]], [1.0])
    batch = ps.simulate_zeta(ps.DirectionalSpec(0.25, sigma, [[0.0, 2.0]]), 500, 14)
    assert np.all(batch.values == 0)


def test_zeta_variance_adds_over_atoms():
    dirs = np.array([[1.0, 0.0], [0.6, 0.8], [0.0, 1.0]])
    w = np.array([0.3, 0.5, 0.2])
    z = np.array([[0.9, 0.4]])
    total = ps.simulate_zeta(ps.DirectionalSpec(0.3, g.SpectralMeasure(dirs, w), z), 10_000, 15).values[:, 0]
    parts = sum(
        ps.zeta_variance(0.3, g.SpectralMeasure([d], [wi]), z[0]) for d, wi in zip(dirs, w)
    )
    v, se = variance_se(total)
    assert abs(v - parts) < 3 * se


# --- characteristic functions ----------------------------------------------------------


def test_char_function_at_zero_and_conjugate_symmetry():
    x = ps.simulate_xi(ps.FracPoissonSpec(0.25, SQUARE, [[1, 0], [0, 1]]), 1_000, 16).values
    t = np.array([[0.0, 0.0], [0.3, -1.1], [-0.3, 1.1]])
    phi, _ = ps.empirical_char_function(x, t)
    assert phi[0] == 1.0
    assert phi[2] == np.conj(phi[1])


def test_char_exponent_single_point():
    t = np.array([[0.3], [1.0], [2.0]])
    expo = ps.char_exponent_1d([1.0], t, 0.25)
    np.testing.assert_allclose(expo, 8 * math.sqrt(2) * (np.cos(t[:, 0]) - 1), rtol=1e-10)


def test_char_exponent_small_t_quadratic():
    pts = [1.0, -0.4]
    t = np.array([[1e-3, 0.0], [0.0, 1e-3], [1e-3, 1e-3]])
    expo = ps.char_exponent_1d(pts, t, 0.25).real
    V = lambda z: ps.segment_constant(0.25) * abs(z) ** 0.5  # noqa: E731
    cov = 0.5 * (V(1.0) + V(-0.4) - V(1.4))
    quad = np.array([V(1.0), V(-0.4), V(1.0) + V(-0.4) + 2 * cov])
    np.testing.assert_allclose(expo / (-0.5e-6), quad, rtol=1e-4)


def test_char_exponent_matches_simulation():
    pts = np.array([[1.0], [-0.4]])
    x = ps.simulate_xi(ps.FracPoissonSpec(0.25, ps.segment(), pts), 20_000, 17).values
    t = np.array([[0.4, 0.2], [1.0, -0.7]])
    phi, se = ps.empirical_char_function(x, t)
    exact = np.exp(ps.char_exponent_1d(pts[:, 0], t, 0.25))
    assert np.all(np.abs(phi - exact) < 3 * se)


# --- scaling ------------------------------------------------------------------------------


def test_scaling_constant_and_trivial_case():
    rep = ps.scaling_check(SQUARE, 0.25, 1.0, 2_000, 18)
    assert rep["b"].value == 1.0
    assert rep.passed
    rep2 = ps.scaling_check(SQUARE, 0.25, 2.0, 5_000, 19)
    assert rep2["b"].value == pytest.approx(2 ** (1 / 3), rel=1e-14)


def test_scaling_variance_homogeneity_exact():
    a = 3.0
    assert ps.variance_quadrature(SQUARE, 0.25, [a, 0]) == pytest.approx(
        a**0.5 * ps.variance_quadrature(SQUARE, 0.25, [1, 0]), rel=1e-10
    )
    b = a ** (0.5 / 1.5)
    assert ps.variance_quadrature(SQUARE.scaled(b), 0.25, [1, 0]) == pytest.approx(
        ps.variance_quadrature(SQUARE, 0.25, [a, 0]), rel=1e-10
    )


def test_scaling_rejects_nonpositive_a():
    with pytest.raises(ValueError):
        ps.scaling_check(SQUARE, 0.25, 0.0, 10, 0)


# --- determinism ---------------------------------------------------------------------------


def test_thread_count_does_not_change_samples(monkeypatch):
    spec = ps.FracPoissonSpec(0.25, HEX, [[1.0, 0.0], [0.3, 0.9]])
    monkeypatch.setenv("MINKFIELD_THREADS", "1")
    one = ps.simulate_xi(spec, 1_500, 20).values
    monkeypatch.setenv("MINKFIELD_THREADS", "3")
    three = ps.simulate_xi(spec, 1_500, 20).values
    np.testing.assert_array_equal(one, three)


def test_different_seeds_differ():
    spec = ps.FracPoissonSpec(0.25, SQUARE, [[1.0, 0.0]])
    assert not np.array_equal(ps.simulate_xi(spec, 200, 1).values, ps.simulate_xi(spec, 200, 2).values)


def test_joint_char_function_has_imaginary_part():
    # intervals on a line can cover 1 without 2 or 0, but never 0 and 2 without 1
    pts = np.array([[1.0], [2.0]])
    t = np.array([[0.65, -0.35]])
    exact = np.exp(ps.char_exponent_1d(pts[:, 0], t, 0.25))[0]
    assert exact.imag < -0.02
    x = ps.simulate_xi(ps.FracPoissonSpec(0.25, ps.segment(), pts), 40_000, 21).values
    phi, se = ps.empirical_char_function(x, t)
    assert abs(phi[0] - exact) < 3 * se[0]
    assert phi[0].imag < -3 * se[0]
