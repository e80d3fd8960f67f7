import math

import numpy as np
import pytest

from minkfield import geometry as g


@pytest.fixture
def square():
    return g.unit_square()


@pytest.fixture
def disc():
    return g.Ball([0.0, 0.0], 1.0)


# --- star bodies -------------------------------------------------------------


def test_euclidean_gauge():
    assert g.gauge(g.EllipsoidStar(np.eye(2)), [3, 4]) == pytest.approx(5.0, abs=1e-14)


def test_l1_gauge():
    assert g.gauge(g.LpBall(1.0, [1, 1]), [1, 1]) == pytest.approx(2.0, abs=1e-14)


def test_single_atom_spectral_gauge_is_projection():
    F = g.SpectralBody(0.5, g.SpectralMeasure([[1.0, 0.0]], [1.0]))
    assert F.gauge([-2.5, 7.0]) == pytest.approx(2.5, rel=1e-14)


def test_spectral_measure_validation():
    with pytest.raises(ValueError):
        g.SpectralMeasure([[1.0, 0.1]], [1.0])
    with pytest.raises(ValueError):
        g.SpectralMeasure([[1.0, 0.0]], [-1.0])
    m = g.SpectralMeasure([[1.0, 0.0], [0.0, 1.0]], [0.3, 0.7])
    assert m.total_mass == pytest.approx(1.0)


def test_gauge_dimension_mismatch():
    with pytest.raises(ValueError):
        g.gauge(g.LpBall(2.0, [1, 1]), [1, 2, 3])
    with pytest.raises(ValueError):
        g.gauge(g.LpBall(2.0, [1, 1]), [np.nan, 1])


def test_scaled_body_shrinks_gauge():
    F = g.ScaledBody(4.0, g.EllipsoidStar(np.eye(2)))
    assert F.gauge([3, 4]) == pytest.approx(1.25)


def test_psum_of_equal_balls():
    e = g.EllipsoidStar(np.eye(3))
    assert g.p_sum(e, e, 2.0).gauge([1, 2, 2]) == pytest.approx(math.sqrt(2) * 3)


def test_psum_of_spectral_bodies_adds_measures():
    s1 = g.SpectralMeasure([[1.0, 0.0], [0.6, 0.8]], [0.4, 1.1])
    s2 = g.SpectralMeasure([[0.0, 1.0]], [0.5])
    p = 0.7
    combined = g.p_sum(g.SpectralBody(p, s1), g.SpectralBody(p, s2), p)
    direct = g.SpectralBody(p, s1 + s2)
    z = np.random.default_rng(0).normal(size=(50, 2))
    np.testing.assert_allclose(combined.gauge(z), direct.gauge(z), rtol=1e-13)


def test_psum_with_empty_measure_is_identity():
    F = g.SpectralBody(1.2, g.SpectralMeasure([[0.6, 0.8]], [2.0]))
    empty = g.SpectralBody(1.2, g.SpectralMeasure(np.zeros((0, 2)), [], dim=2))
    z = np.array([[1.0, -2.0], [0.3, 0.4]])
    np.testing.assert_allclose(g.p_sum(F, empty, 1.2).gauge(z), F.gauge(z), rtol=1e-14)


def test_psum_dimension_mismatch():
    with pytest.raises(ValueError):
        g.p_sum(g.LpBall(2, [1, 1]), g.LpBall(2, [1, 1, 1]), 2.0)


# --- direction grids -----------------------------------------------------------


@pytest.mark.parametrize("d,total", [(2, 2 * math.pi), (3, 4 * math.pi)])
def test_direction_grid_weights(d, total):
    grid = g.direction_grid(d)
    assert grid.total_weight == pytest.approx(total, abs=1e-10)
    np.testing.assert_allclose(np.linalg.norm(grid.directions, axis=1), 1.0, atol=1e-12)


# --- convex bodies --------------------------------------------------------------


def test_support_width_examples(square, disc):
    assert g.support_width(square, [1, 0]) == pytest.approx(1.0)
    assert g.support_width(square, np.array([1, 1]) / math.sqrt(2)) == pytest.approx(math.sqrt(2))
    assert g.support_width(g.Ball([0.3, -1.0], 0.7), [0.6, 0.8]) == pytest.approx(1.4)
    assert g.support_width(disc, [0, 1]) == pytest.approx(2.0)


def test_support_width_rejects_zero(square):
    with pytest.raises(ValueError):
        g.support_width(square, [0, 0])


def test_chord_length_examples(square, disc):
    assert g.chord_length(square, [1, 0], [0, 0.5]) == pytest.approx(1.0)
    assert g.chord_length(square, [1, 0], [0, 2]) == 0.0
    assert g.chord_length(disc, [1, 0], [0, 0.6]) == pytest.approx(1.6)


def test_chord_length_requires_orthogonal_base(square):
    with pytest.raises(ValueError):
        g.chord_length(square, [1, 0], [0.5, 0.5])


def test_rho_examples(square, disc):
    assert g.rho_from(square, [0.25, 0.5], [1, 0]) == pytest.approx(0.75)
    assert g.rho_from(square, [0.25, 0.5], [0, 1]) == pytest.approx(0.5)
    assert g.rho_from(disc, [0, 0], [0.6, -0.8]) == pytest.approx(1.0)


def test_rho_rejects_outside_points(square):
    with pytest.raises(ValueError):
        g.rho_from(square, [1.5, 0.5], [1, 0])


def test_chord_equals_sum_of_radial_functions():
    rng = np.random.default_rng(4)
    for K in (g.unit_square(), g.centred_hexagon(), g.Ball([0.2, 0.1], 1.3), g.random_polygon(9, 3)):
        x = g.uniform_sample_in(K, 200, rng)
        for u in rng.normal(size=(5, 2)):
            u = u / np.linalg.norm(u)
            base = x - np.outer(x @ u, u)
            chords = np.array([g.chord_length(K, u, b) for b in base])
            rho = K._rho(x, u) + K._rho(x, -u)
            np.testing.assert_allclose(chords, rho, atol=1e-10)


def test_polytope_rejects_unbounded_and_empty():
    with pytest.raises(ValueError):
        g.Polytope([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0])
    with pytest.raises(ValueError):
        g.Polytope([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]], [0.0, 0.0, 1.0, 1.0])


def test_polytope_from_vertices_matches_box():
    P = g.Polytope.from_vertices([[0, 0], [2, 0], [2, 1], [0, 1], [1, 0.5]])
    assert P.volume == pytest.approx(2.0)
    assert sorted(map(tuple, np.round(P.vertices, 12))) == [(0, 0), (0, 1), (2, 0), (2, 1)]


def test_centred_hexagon_is_symmetric():
    K = g.centred_hexagon()
    assert K.volume == pytest.approx(4.5 * math.sqrt(3), rel=1e-10)
    for u in np.random.default_rng(1).normal(size=(10, 2)):
        assert K.support(u) == pytest.approx(K.support(-u), abs=1e-12)


def test_ball_volume_3d():
    assert g.Ball([0, 0, 0], 2.0).volume == pytest.approx(32 * math.pi / 3)


# --- sampling --------------------------------------------------------------------


def test_uniform_sample_in_box_stays_inside():
    B = g.Box([-1, 2], [0, 5])
    x = g.uniform_sample_in(B, 1000, 0)
    assert x.shape == (1000, 2)
    assert np.all(B.contains(x))


def test_uniform_sample_in_disc_is_centred(disc):
    x = g.uniform_sample_in(disc, 20_000, 5)
    se = x.std(axis=0, ddof=1) / math.sqrt(len(x))
    assert np.all(np.abs(x.mean(axis=0)) < 3 * se)


def test_uniform_sample_in_is_deterministic(disc):
    np.testing.assert_array_equal(g.uniform_sample_in(disc, 100, 9), g.uniform_sample_in(disc, 100, 9))


def test_uniform_sample_rejects_thin_bodies():
    thin = g.Polytope.from_vertices([[0, 0], [1, 1], [1 + 1e-7, 1]])
    with pytest.raises(RuntimeError):
        g.uniform_sample_in(thin, 10, 0)


# --- projections and chord integrals ---------------------------------------------


def test_projection_volume_examples(square, disc):
    assert g.projection_volume(square, [1, 0]) == pytest.approx(1.0)
    assert g.projection_volume(square, np.array([1, 1]) / math.sqrt(2)) == pytest.approx(math.sqrt(2))
    assert g.projection_volume(disc, [0.6, 0.8]) == pytest.approx(2.0)


def test_projection_volume_3d():
    cube = g.Box([0, 0, 0], [1, 1, 1])
    assert g.projection_volume(cube, [0, 0, 1]) == pytest.approx(1.0)
    assert g.projection_volume(cube, np.ones(3) / math.sqrt(3)) == pytest.approx(math.sqrt(3))
    assert g.projection_volume(g.Ball([0, 0, 0], 1.0), [0.6, 0, 0.8]) == pytest.approx(math.pi)


def test_chord_integral_recovers_volume():
    for K in (g.unit_square(), g.centred_hexagon(), g.Ball([0, 0], 1.0)):
        u = np.array([0.6, 0.8])
        val, _ = g.chord_integral(K, u, lambda ell: ell)
        assert val == pytest.approx(K.volume, rel=1e-9)
    val, _ = g.chord_integral(g.Ball([0, 0, 0], 1.0), [0, 0, 1], lambda ell: ell)
    assert val == pytest.approx(4 * math.pi / 3, rel=1e-7)


def test_polar_projection_body_examples(square, disc):
    P = g.polar_projection_body(square)
    assert P.gauge([1, 0]) == pytest.approx(1.0, rel=1e-12)
    assert P.gauge(np.array([1, 1]) / math.sqrt(2)) == pytest.approx(math.sqrt(2), rel=1e-12)
    D = g.polar_projection_body(disc)
    np.testing.assert_allclose(D.gauge(g.direction_grid(2, 37).directions), 2.0, rtol=1e-12)
    assert P.interp_error < 1e-4


def test_exact_polar_projection_gauge_is_homogeneous(square):
    P = g.PolarProjectionGauge(square)
    assert P.gauge([3.0, 0.0]) == pytest.approx(3.0)
    assert P.gauge([-1.0, -1.0]) == pytest.approx(2.0)


# --- radial mean bodies ----------------------------------------------------------


@pytest.mark.parametrize("u", [[1.0, 0.0], [0.0, 1.0]])
def test_radial_mean_gauge_of_square(square, u):
    gauge, se = g.radial_mean_gauge(square, -0.5, [u], 200_000, 2)
    assert abs(gauge[0] - 4.0) < 3 * se[0]
    assert se[0] < 0.02


def test_radial_mean_plain_estimator_agrees(square):
    gauge, se = g.radial_mean_gauge(square, -0.3, [[1.0, 0.0]], 100_000, 3, method="plain")
    exact = (1 / 0.7) ** (1 / 0.3)
    assert abs(gauge[0] - exact) < 3 * se[0]


def test_radial_mean_body_of_disc_is_round(disc):
    body = g.radial_pth_mean_body(disc, -0.5, 50_000, 1, grid=g.direction_grid(2, 12))
    vals = body.values
    assert np.ptp(vals) < 4 * np.max(body.stderr)


def test_radial_mean_rejects_bad_inputs(square):
    with pytest.raises(ValueError):
        g.radial_pth_mean_body(square, 0.5, 20_000, 0)
    with pytest.raises(ValueError):
        g.radial_mean_gauge(square, -0.5, [[1, 0]], 1000, 0)


def test_gardner_zhang_exact_for_square(square):
    # int_K (1 - x1)^p dx = 1 / (p + 1) = (1 / (p + 1)) int l^(p+1) dy with l = 1
    for p in (-0.2, -0.5, -0.8):
        m, se = g.radial_mean_integral(square, p, [[1.0, 0.0]], 100_000, 7)
        assert abs(m[0] - 1 / (p + 1)) < 3 * se[0]


def test_associated_body_of_square():
    F = g.associated_body_of_poisson(g.unit_square(), 0.25, 200_000, 4, grid=g.direction_grid(2, 8))
    # scale (1/4)^2 on a radial gauge of 4 gives gauge 64, and 64^(1/2) = 8 is the variance
    assert F.gauge([1, 0]) == pytest.approx(64.0, rel=0.01)


# --- serialisation ---------------------------------------------------------------


@pytest.mark.parametrize(
    "body",
    [
        g.unit_square(),
        g.Ball([0.5, -0.5], 2.0),
        g.Ellipsoid([0, 0], [[2.0, 0.3], [0.3, 1.0]]),
        g.centred_hexagon(),
        g.EllipsoidStar([[1.0, 0.2], [0.2, 3.0]]),
        g.LpBall(1.3, [1.0, 2.0]),
        g.SpectralBody(0.8, g.SpectralMeasure([[1, 0], [0, 1]], [0.2, 0.9])),
        g.ScaledBody(2.0, g.LpBall(2.0, [1, 1])),
        g.PSumBody(1.5, [g.LpBall(1.0, [1, 1]), g.EllipsoidStar(np.eye(2))]),
        g.PolarProjectionGauge(g.unit_square()),
    ],
)
def test_body_round_trip(body):
    again = g.body_from_dict(body.to_dict())
    assert again.to_dict() == body.to_dict()
    z = np.array([[0.3, 0.4], [1.0, -2.0]])
    if isinstance(body, g.StarBody):
        np.testing.assert_allclose(again.gauge(z), body.gauge(z), rtol=1e-14)
    else:
        np.testing.assert_array_equal(again.contains(z), body.contains(z))


def test_tabulated_round_trip():
    T = g.polar_projection_body(g.unit_square(), g.direction_grid(2, 30))
    again = g.body_from_dict(T.to_dict())
    z = np.random.default_rng(0).normal(size=(20, 2))
    np.testing.assert_allclose(again.gauge(z), T.gauge(z), rtol=1e-14)


@pytest.mark.parametrize(
    "data,field",
    [
        ({"type": "box", "lower": [0, 0]}, "upper"),
        ({"type": "ball", "center": [0, 0], "radius": 1, "colour": "red"}, "colour"),
        ({"type": "blob"}, "type"),
    ],
)
def test_body_from_dict_names_field(data, field):
    with pytest.raises(ValueError, match=f"body.{field}"):
        g.body_from_dict(data)
