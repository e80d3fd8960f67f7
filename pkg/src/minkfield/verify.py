"""Numerical checks of the identities and limit theorems linking the fields.

Every function returns a :class:`~minkfield.report.Report` whose pass flag is
computed only from the quantities it contains.  Monte Carlo comparisons use
three combined standard errors, deterministic limits a relative tolerance and
algebraic identities an absolute tolerance of ``1e-12``.
"""

import math

import numpy as np
from scipy import stats

from . import _streams
from .gaussian import (
    MfBfSpec,
    a_hd,
    a_hd_quoted,
    c_h,
    c_h_quadrature,
    cholesky_simulate,
    cov_f,
    covariance_matrix,
    find_psd_violation,
    gaussian_paths,
    is_psd,
    normalisation_residual,
    plane_wave_simulate,
    subfractional_closed_form,
)
from .geometry import (
    Ball,
    LpBall,
    PolarProjectionGauge,
    ScaledBody,
    SpectralBody,
    SpectralMeasure,
    chord_integral,
    direction_grid,
    p_sum,
    radial_mean_integral,
    random_polygon,
    unit_square,
)
from .poisson import (
    FracPoissonSpec,
    TruncatedSpec,
    _simulate,
    scaling_check,
    simulate_eta,
    simulate_xi,
    truncated_variance_quadrature,
    variance_quadrature,
)
from .report import Quantity, Report, Timer, agree, covariance_se, mean_se, variance_se

IDENTITY_TOL = 1e-12
LIMIT_RTOL = 0.02
KS_THRESHOLD = 0.05


def _unit(z):
    z = np.asarray(z, dtype=float)
    t = float(np.linalg.norm(z))
    return z / t, t


def _monotone_decreasing(xs):
    return bool(all(b < a for a, b in zip(xs[:-1], xs[1:])))


# ---------------------------------------------------------------------------
# constants and existence


def constants_report(n_pairs=20, seed=0, tol=1e-10, quad_tol=1e-8):
    """Normalisation ``a^2 c_H (2 pi)^(-d/2) = 1/2`` and quadrature of ``c_H`` on random ``(H, d)``."""
    rng = _streams.stream(seed, "constants")
    with Timer() as clock:
        H = rng.uniform(0.05, 0.95, n_pairs)
        d = rng.integers(1, 6, n_pairs)
        resid = np.array([abs(normalisation_residual(h, int(k))) for h, k in zip(H, d)])
        quad = np.array([abs(c_h_quadrature(h) - c_h(h)) for h in H])
        ratio = a_hd_quoted(0.25, 2) / a_hd(0.25, 2)
    quantities = [
        Quantity("max_normalisation_residual", float(resid.max()), target=0.0),
        Quantity("max_c_h_quadrature_error", float(quad.max()), target=0.0),
        Quantity("quoted_over_normalised_a", ratio, target=(2 * math.pi) ** 0.25),
    ]
    ok = resid.max() < tol and quad.max() < quad_tol
    return Report(
        "constants",
        {"n_pairs": n_pairs, "H": H, "d": d},
        quantities,
        f"residual < {tol}, quadrature < {quad_tol}",
        bool(ok),
        seed,
        clock.elapsed,
    )


def existence_report(seed=0, H_ok=0.5, H_bad=0.9, n_sets=20, n_points=50, n_configs=10_000, search_points=10):
    """Gram matrices for the l1 ball: PSD at ``H = p/2``, a violation beyond it."""
    F = LpBall(1.0, [1.0, 1.0])
    rng = _streams.stream(seed, "existence")
    with Timer() as clock:
        ok_spec = MfBfSpec(H_ok, F)
        worst = math.inf
        all_psd = True
        for _ in range(n_sets):
            pts = rng.uniform(-1, 1, size=(n_points, 2))
            g = covariance_matrix(ok_spec, pts)
            worst = min(worst, float(np.linalg.eigvalsh(g)[0] / np.trace(g)))
            all_psd &= is_psd(ok_spec, pts)
        pts, lam, tried = find_psd_violation(MfBfSpec(H_bad, F), n_configs, search_points, seed)
    quantities = [
        Quantity("min_relative_eigenvalue_admissible", worst, target=0.0),
        Quantity("violation_eigenvalue", lam),
        Quantity("configurations_tried", tried),
    ]
    return Report(
        "existence",
        {"H_ok": H_ok, "H_bad": H_bad, "n_sets": n_sets, "n_points": n_points, "n_configs": n_configs},
        quantities,
        "min eig >= -1e-10 trace when admissible; violation found otherwise",
        bool(all_psd and pts is not None),
        seed,
        clock.elapsed,
    )


# ---------------------------------------------------------------------------
# Poisson / Gaussian equivalence


def equivalence_report(K, H, directions, seed, n_paths=10_000, n_samples=200_000):
    """Simulated variance, chord quadrature and the radial mean body formula per direction.

    The third value is ``(Vol K / H) E rho_K(x, u)^(-2H) |z|^2H`` with ``x``
    uniform in ``K``; all pairs must agree within three combined errors.
    """
    points = np.atleast_2d(np.asarray(directions, dtype=float))
    with Timer() as clock:
        batch = simulate_xi(FracPoissonSpec(H, K, points), n_paths, seed)
        quantities = []
        ok = True
        for j, z in enumerate(points):
            u, t = _unit(z)
            v_sim, se_sim = variance_se(batch.values[:, j])
            v_quad = variance_quadrature(K, H, z)
            m, se_m = radial_mean_integral(K, -2 * H, [u], n_samples, _streams.stream(seed, "equivalence", j))
            factor = K.volume / H * t ** (2 * H)
            v_rad, se_rad = factor * m[0], factor * se_m[0]
            ok &= agree(v_sim, v_quad, se_sim)
            ok &= agree(v_rad, v_quad, se_rad)
            ok &= agree(v_sim, v_rad, math.hypot(se_sim, se_rad))
            quantities += [
                Quantity(f"simulated[{j}]", v_sim, se_sim),
                Quantity(f"quadrature[{j}]", v_quad, 0.0),
                Quantity(f"radial_mean[{j}]", v_rad, se_rad),
            ]
    return Report(
        "equivalence",
        {"K": K.to_dict(), "H": H, "points": points, "n_paths": n_paths, "n_samples": n_samples},
        quantities,
        "3 combined standard errors",
        bool(ok),
        seed,
        clock.elapsed,
    )


def gardner_zhang_report(bodies, p_values, seed, direction=None, n_samples=200_000):
    """``int_K rho^p dx`` by Monte Carlo against ``(p+1)^-1 int l^(p+1) dy`` by quadrature."""
    quantities = []
    ok = True
    with Timer() as clock:
        for i, K in enumerate(bodies):
            u = np.eye(K.dim)[0] if direction is None else _unit(direction)[0]
            for p in p_values:
                m, se = radial_mean_integral(K, p, [u], n_samples, _streams.stream(seed, "gz", i, repr(p)))
                lhs, lhs_se = K.volume * m[0], K.volume * se[0]
                rhs = chord_integral(K, u, lambda ell: ell ** (p + 1))[0] / (p + 1)
                ok &= agree(lhs, rhs, lhs_se)
                quantities.append(Quantity(f"body{i}_p={p}", lhs, lhs_se, rhs))
    return Report(
        "gardner_zhang",
        {"bodies": [K.to_dict() for K in bodies], "p": list(p_values), "n_samples": n_samples},
        quantities,
        "3 standard errors",
        bool(ok),
        seed,
        clock.elapsed,
    )


def default_bodies(seed=0):
    return [unit_square(), Ball([0.0, 0.0], 1.0), random_polygon(8, _streams.stream(seed, "polygon"))]


# ---------------------------------------------------------------------------
# Gaussian simulators


def _cov_comparisons(label, sample, target, quantities):
    ok = True
    m = sample.shape[1]
    for i in range(m):
        for j in range(i, m):
            c, se = covariance_se(sample[:, i], sample[:, j])
            ok &= agree(c, target[i, j], se)
            quantities.append(Quantity(f"{label}[{i},{j}]", c, se, float(target[i, j])))
    return ok


def planewave_report(seed, H=0.25, sigma=None, points=None, n_paths=10_000):
    """Plane-wave and Cholesky simulators against the spectral kernel and each other."""
    if sigma is None:
        ang = np.pi * np.arange(4) / 4
        sigma = SpectralMeasure(np.column_stack([np.cos(ang), np.sin(ang)]), np.full(4, 0.25))
    if points is None:
        points = np.array([[1.0, 0.0], [0.0, 1.0], [0.6, 0.8], [-0.5, 0.3], [1.2, -0.7]])
    points = np.atleast_2d(np.asarray(points, dtype=float))
    spec = MfBfSpec(H, SpectralBody(2 * H, sigma))
    with Timer() as clock:
        target = covariance_matrix(spec, points)
        pw = plane_wave_simulate(H, sigma, points, n_paths, seed).paths
        ch = cholesky_simulate(spec, points, n_paths, seed).paths
        quantities = []
        ok = _cov_comparisons("planewave", pw, target, quantities)
        ok &= _cov_comparisons("cholesky", ch, target, quantities)
        for i in range(len(points)):
            for j in range(i, len(points)):
                c1, s1 = covariance_se(pw[:, i], pw[:, j])
                c2, s2 = covariance_se(ch[:, i], ch[:, j])
                ok &= agree(c1, c2, math.hypot(s1, s2))
                quantities.append(Quantity(f"difference[{i},{j}]", c1 - c2, math.hypot(s1, s2), 0.0))
    return Report(
        "planewave",
        {"H": H, "sigma": sigma.to_dict(), "points": points, "n_paths": n_paths},
        quantities,
        "3 combined standard errors per covariance entry",
        bool(ok),
        seed,
        clock.elapsed,
    )


def identities_report(seed=0, n_inputs=100, tol=IDENTITY_TOL):
    """Sub-fractional and p-sum kernel identities on random inputs."""
    rng = _streams.stream(seed, "identities")
    with Timer() as clock:
        F = LpBall(1.5, [1.0, 2.0])
        H = 0.6
        z1 = rng.normal(size=(n_inputs, 2))
        z2 = rng.normal(size=(n_inputs, 2))
        sub = cov_f(MfBfSpec(H, F, "subfractional"), z1, z2)
        sub_err = float(np.max(np.abs(sub - subfractional_closed_form(H, F, z1, z2))))

        Hs = 0.35
        F1 = LpBall(2 * Hs, [1.0, 1.5])
        F2 = SpectralBody(2 * Hs, SpectralMeasure([[1.0, 0.0], [0.6, 0.8]], [0.7, 0.4]))
        Fs = p_sum(F1, F2, 2 * Hs)
        lhs = cov_f(MfBfSpec(Hs, F1), z1, z2) + cov_f(MfBfSpec(Hs, F2), z1, z2)
        rhs = cov_f(MfBfSpec(Hs, Fs), z1, z2)
        psum_err = float(np.max(np.abs(lhs - rhs)))
    quantities = [
        Quantity("subfractional_max_abs_error", sub_err, target=0.0),
        Quantity("psum_max_abs_error", psum_err, target=0.0),
    ]
    return Report(
        "identities",
        {"n_inputs": n_inputs},
        quantities,
        f"max abs error < {tol}",
        bool(sub_err < tol and psum_err < tol),
        seed,
        clock.elapsed,
    )


def psum_report(F1, F2, H, points, seed, n_paths=10_000, n_gram_sets=20, gram_points=12):
    """Sum of independent fields against the p-sum kernel, plus Gram ordering."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    Fs = p_sum(F1, F2, 2 * H)
    s1, s2, ss = MfBfSpec(H, F1), MfBfSpec(H, F2), MfBfSpec(H, Fs)
    rng = _streams.stream(seed, "psum-pairs")
    with Timer() as clock:
        a = rng.normal(size=(100, F1.dim))
        b = rng.normal(size=(100, F1.dim))
        ident = float(np.max(np.abs(cov_f(s1, a, b) + cov_f(s2, a, b) - cov_f(ss, a, b))))
        x1, _ = gaussian_paths(covariance_matrix(s1, points), n_paths, seed, "psum", 1)
        x2, _ = gaussian_paths(covariance_matrix(s2, points), n_paths, seed, "psum", 2)
        quantities = [Quantity("kernel_identity_max_abs_error", ident, target=0.0)]
        ok = ident < IDENTITY_TOL
        ok &= _cov_comparisons("sum", x1 + x2, covariance_matrix(ss, points), quantities)
        worst = math.inf
        for _ in range(n_gram_sets):
            pts = rng.uniform(-1, 1, size=(gram_points, F1.dim))
            diff = covariance_matrix(ss, pts) - covariance_matrix(s2, pts)
            g = covariance_matrix(ss, pts)
            worst = min(worst, float(np.linalg.eigvalsh(diff)[0] / np.trace(g)))
        ok &= worst >= -1e-10
        quantities.append(Quantity("gram_difference_min_relative_eigenvalue", worst, target=0.0))
    return Report(
        "psum",
        {"F1": F1.to_dict(), "F2": F2.to_dict(), "H": H, "points": points, "n_paths": n_paths},
        quantities,
        "identity < 1e-12; covariances 3 standard errors; Gram difference PSD",
        bool(ok),
        seed,
        clock.elapsed,
    )


def slepian_report(F1, F2, H, D_points, seed, n_paths=10_000, n_dirs=720):
    """``E max_D |X_F1| >= E max_D |X_F2|`` when ``F1`` is contained in ``F2``."""
    D = np.atleast_2d(np.asarray(D_points, dtype=float))
    grid = direction_grid(F1.dim, n_dirs if F1.dim == 2 else None).directions
    contained = bool(np.all(F1.gauge(grid) >= F2.gauge(grid) * (1 - 1e-12)))
    with Timer() as clock:
        if not contained:
            return Report(
                "slepian",
                {"H": H, "n_paths": n_paths},
                [Quantity("contained", 0.0)],
                "not applicable: F1 is not contained in F2",
                False,
                seed,
                0.0,
                ["not applicable"],
            )
        x1, _ = gaussian_paths(covariance_matrix(MfBfSpec(H, F1), D), n_paths, seed, "slepian", 1)
        x2, _ = gaussian_paths(covariance_matrix(MfBfSpec(H, F2), D), n_paths, seed, "slepian", 2)
        m1, e1 = mean_se(np.abs(x1).max(axis=1))
        m2, e2 = mean_se(np.abs(x2).max(axis=1))
        ok = m1 >= m2 - 2 * math.hypot(e1, e2)
    quantities = [
        Quantity("contained", 1.0),
        Quantity("expected_sup_F1", m1, e1),
        Quantity("expected_sup_F2", m2, e2),
    ]
    return Report(
        "slepian",
        {"F1": F1.to_dict(), "F2": F2.to_dict(), "H": H, "points": D, "n_paths": n_paths},
        quantities,
        "ordering within 2 combined standard errors",
        bool(ok),
        seed,
        clock.elapsed,
    )


# ---------------------------------------------------------------------------
# limit theorems


def conv_half_report(K, H_values, z_list, seed=None, rtol=LIMIT_RTOL):
    """``(1 - 2H) E xi(z)^2`` as ``H`` increases to 1/2.

    The limit is the gauge of ``(1/2) Pi* K``, i.e. ``2 |z| b_K(u)`` with
    ``b_K`` the projection volume orthogonal to ``u = z/|z|``.
    """
    H_values = list(H_values)
    quantities = []
    ok = True
    with Timer() as clock:
        for i, z in enumerate(np.atleast_2d(np.asarray(z_list, dtype=float))):
            u, t = _unit(z)
            target = ScaledBody(0.5, PolarProjectionGauge(K)).gauge(z)
            gaps = []
            for H in H_values:
                val = (1 - 2 * H) * variance_quadrature(K, H, z)
                gaps.append(abs(val - target) / target)
                quantities.append(Quantity(f"z{i}_H={H}", val, target=target))
            ok &= _monotone_decreasing(gaps) and gaps[-1] < rtol
            quantities.append(Quantity(f"z{i}_final_relative_gap", gaps[-1], target=0.0))
    return Report(
        "conv_half",
        {"K": K.to_dict(), "H": H_values, "z": z_list},
        quantities,
        f"decreasing gaps, final relative gap < {rtol}",
        bool(ok),
        seed,
        clock.elapsed,
    )


def truncated_conv_report(K, p, C_values, z_list, seed=None, rtol=LIMIT_RTOL, mc_paths=0):
    """``C^(1-2p) E eta_{C,p}(z)^2`` as ``C`` grows; limit ``|z| b_K(u) / (p - 1/2)``.

    With ``mc_paths > 0`` the largest ``C`` is also simulated and compared at
    three standard errors.
    """
    C_values = list(C_values)
    quantities = []
    ok = True
    with Timer() as clock:
        for i, z in enumerate(np.atleast_2d(np.asarray(z_list, dtype=float))):
            target = ScaledBody(p - 0.5, PolarProjectionGauge(K)).gauge(z)
            gaps = []
            for C in C_values:
                val = C ** (1 - 2 * p) * truncated_variance_quadrature(K, p, C, z)
                gaps.append(abs(val - target) / target)
                quantities.append(Quantity(f"z{i}_C={C}", val, target=target))
            ok &= _monotone_decreasing(gaps) and gaps[-1] < rtol
            quantities.append(Quantity(f"z{i}_final_relative_gap", gaps[-1], target=0.0))
            if mc_paths:
                C = C_values[-1]
                batch = simulate_eta(TruncatedSpec(p, C, K, [z]), mc_paths, _streams.check_seed(seed or 0))
                v, se = variance_se(batch.values[:, 0])
                quad = truncated_variance_quadrature(K, p, C, z)
                ok &= agree(v, quad, se)
                quantities.append(Quantity(f"z{i}_simulated_variance_C={C}", v, se, quad))
    return Report(
        "truncated_conv",
        {"K": K.to_dict(), "p": p, "C": C_values, "z": z_list, "mc_paths": mc_paths},
        quantities,
        f"decreasing gaps, final relative gap < {rtol}",
        bool(ok),
        seed,
        clock.elapsed,
    )


def ks_distance_normal(x, variance):
    """Sup distance between the empirical CDF of ``x`` and ``N(0, variance)``."""
    x = np.sort(np.asarray(x, dtype=float))
    n = len(x)
    vals, first = np.unique(x, return_index=True)
    last = np.r_[first[1:], n]
    cdf = stats.norm.cdf(vals, scale=math.sqrt(variance))
    return float(max(np.max(np.abs(last / n - cdf)), np.max(np.abs(first / n - cdf))))


def _associated_covariance(K, H, points, n_samples, seed):
    """Covariance of the associated Gaussian field, with radial means only at the needed directions."""
    n = len(points)
    lags = [points[i] for i in range(n)] + [points[i] - points[j] for i in range(n) for j in range(i + 1, n)]
    lags = np.array(lags)
    norms = np.linalg.norm(lags, axis=1)
    m, se = radial_mean_integral(K, -2 * H, lags / norms[:, None], n_samples, seed)
    factor = K.volume / H * norms ** (2 * H)
    v = factor * m
    var, rest = v[:n], iter(v[n:])
    cov = np.diag(var)
    for i in range(n):
        for j in range(i + 1, n):
            cov[i, j] = cov[j, i] = 0.5 * (var[i] + var[j] - next(rest))
    return cov, (factor * se)[:n]


def clt_rescale_report(
    K, H, a_values, points, seed, n_paths=40_000, ks_threshold=KS_THRESHOLD, gaussian_reference=True
):
    """Normality of ``a^-H xi(a z)`` as ``a`` grows.

    At a single point ``xi(z)`` is the difference of two independent Poisson
    counts with mean ``V/2``, ``V = E xi(z)^2``, so its skewness is zero and
    its excess kurtosis is ``1 / V`` exactly.  The report tracks the empirical
    variance, skewness, excess kurtosis and the sup distance to ``N(0, V)``.
    It passes when the sup distance decreases strictly in ``a``, falls below
    ``ks_threshold`` at the largest ``a``, and the three moments there agree
    with their exact values within three standard errors.
    """
    a_values = list(a_values)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    V = np.array([variance_quadrature(K, H, z) for z in points])
    quantities = []
    ks_max = []
    with Timer() as clock:
        moments_ok = True
        for k, a in enumerate(a_values):
            raw = _simulate(K, H, a * points, n_paths, seed, ("clt", k))[0]
            y = a ** (-H) * raw
            ks_here = []
            for j in range(len(points)):
                v, se_v = variance_se(y[:, j])
                sk = float(stats.skew(y[:, j]))
                ku = float(stats.kurtosis(y[:, j]))
                se_sk, se_ku = math.sqrt(6 / n_paths), math.sqrt(24 / n_paths)
                ku_exact = 1 / (a ** (2 * H) * V[j])
                ks = ks_distance_normal(y[:, j], V[j])
                ks_here.append(ks)
                quantities += [
                    Quantity(f"a={a}_z{j}_variance", v, se_v, float(V[j])),
                    Quantity(f"a={a}_z{j}_skewness", sk, se_sk, 0.0),
                    Quantity(f"a={a}_z{j}_excess_kurtosis", ku, se_ku, ku_exact),
                    Quantity(f"a={a}_z{j}_ks_distance", ks),
                ]
                if k == len(a_values) - 1:
                    moments_ok &= agree(v, V[j], se_v) and agree(sk, 0.0, se_sk) and agree(ku, ku_exact, se_ku)
            ks_max.append(max(ks_here))
        if gaussian_reference:
            cov, cov_se = _associated_covariance(K, H, points, 100_000, _streams.stream(seed, "clt-body"))
            ref, _ = gaussian_paths(cov, n_paths, seed, "clt-reference")
            for j in range(len(points)):
                v, se = variance_se(ref[:, j])
                moments_ok &= agree(v, V[j], math.hypot(se, cov_se[j]))
                quantities.append(Quantity(f"gaussian_reference_z{j}_variance", v, se, float(V[j])))
    ok = _monotone_decreasing(ks_max) and ks_max[-1] < ks_threshold and moments_ok
    quantities.append(Quantity("final_ks_distance", ks_max[-1], target=0.0))
    return Report(
        "clt_rescale",
        {"K": K.to_dict(), "H": H, "a": a_values, "points": points, "n_paths": n_paths, "ks_threshold": ks_threshold},
        quantities,
        f"sup distance strictly decreasing and < {ks_threshold}; moments 3 standard errors",
        bool(ok),
        seed,
        clock.elapsed,
    )


# ---------------------------------------------------------------------------
# suite


def scaling_report(seed, K=None, H=0.25, a=2.0, n_paths=20_000):
    return scaling_check(K or unit_square(), H, a, n_paths, seed)


def _slepian_default(seed, K, H, quick):
    grid = np.linspace(-1, 1, 5)
    D = np.array([(x, y) for x in grid for y in grid[:4]])
    l1, euclid = LpBall(1.0, [1.0, 1.0]), LpBall(2.0, [1.0, 1.0])
    return slepian_report(l1, euclid, H, D, seed, n_paths=2_000 if quick else 10_000)


def _psum_default(seed, K, H, quick):
    pts = np.array([[1.0, 0.0], [0.0, 1.0], [0.6, 0.8], [-0.5, 0.3], [1.2, -0.7]])
    F1, F2 = LpBall(1.0, [1.0, 1.0]), LpBall(2.0, [1.0, 2.0])
    return psum_report(F1, F2, H, pts, seed, n_paths=2_000 if quick else 10_000)


def _e1(K):
    return [np.eye(K.dim)[0]]


# name -> builder(seed, K, H, quick); K and H parametrise the Poisson checks
REPORTS = {
    "constants": lambda seed, K, H, quick: constants_report(seed=seed),
    "existence": lambda seed, K, H, quick: existence_report(seed=seed, n_configs=2_000 if quick else 10_000),
    "equivalence": lambda seed, K, H, quick: equivalence_report(
        K, H, _e1(K), seed, n_paths=2_000 if quick else 10_000, n_samples=50_000 if quick else 200_000
    ),
    "gardner_zhang": lambda seed, K, H, quick: gardner_zhang_report(
        default_bodies(seed), (-0.2, -0.5, -0.8), seed, n_samples=50_000 if quick else 200_000
    ),
    "planewave": lambda seed, K, H, quick: planewave_report(seed, n_paths=2_000 if quick else 10_000),
    "scaling": lambda seed, K, H, quick: scaling_report(seed, K, H, n_paths=2_000 if quick else 20_000),
    "conv_half": lambda seed, K, H, quick: conv_half_report(K, (0.40, 0.45, 0.49, 0.499), _e1(K), seed),
    "truncated_conv": lambda seed, K, H, quick: truncated_conv_report(K, 1.0, (10.0, 100.0, 1000.0), _e1(K), seed),
    "clt_rescale": lambda seed, K, H, quick: clt_rescale_report(
        K, H, (1, 4, 16, 64), _e1(K), seed, n_paths=10_000 if quick else 40_000
    ),
    "identities": lambda seed, K, H, quick: identities_report(seed=seed),
    "slepian": _slepian_default,
    "psum": _psum_default,
}


def run_suite(seed=0, K=None, H=0.25, quick=False, names=None):
    """Run the named checks (all by default); ``quick`` trims Monte Carlo budgets."""
    K = K or unit_square()
    names = list(REPORTS) if names is None else list(names)
    unknown = [n for n in names if n not in REPORTS]
    if unknown:
        raise ValueError(f"unknown report {unknown[0]!r}; choose from {sorted(REPORTS)}")
    return [REPORTS[n](seed, K, H, quick) for n in names]


def suite_summary(reports):
    return {
        "passed": bool(all(r.passed for r in reports)),
        "reports": [r.to_dict(include_runtime=False) for r in reports],
    }
