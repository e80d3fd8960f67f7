"""Minkowski fractional Brownian fields: kernels, existence checks, simulation.

The covariance of the field with Hurst index ``H`` and star body ``F`` is

    C_F(z1, z2) = 1/2 (||z1||_F^2H + ||z2||_F^2H - ||z1 - z2||_F^2H),

and the sub-fractional variant is ``C_F(z1, z2) + C_F(z1, -z2)``.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import integrate
from scipy.special import gamma

from . import _streams
from .geometry import SpectralBody, SpectralMeasure, fibonacci_sphere

PSD_EPS = 1e-10
JITTER_LEVELS = (0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8)
MAX_FBM_GRID = 4096
DEDUP_TOL = 1e-12


class NotPositiveDefiniteError(ValueError):
    """Raised when a covariance matrix stays indefinite after the jitter cap."""


@dataclass(frozen=True)
class MfBfSpec:
    H: float
    F: object
    variant: str = "standard"

    def __post_init__(self):
        if not 0 < self.H <= 1:
            raise ValueError(f"H must lie in (0, 1], got {self.H}")
        if self.variant not in ("standard", "subfractional"):
            raise ValueError(f"unknown variant {self.variant!r}")


@dataclass
class GaussSampleBatch:
    points: np.ndarray
    paths: np.ndarray
    seed: int
    method: str
    jitter_used: float = 0.0
    meta: dict = field(default_factory=dict)


def _power_gauge(F, z, H):
    return F.gauge(z) ** (2 * H)


def cov_f(spec, z1, z2):
    """Covariance kernel, vectorised over broadcastable leading axes."""
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    if z1.shape[-1] != z2.shape[-1] or z1.shape[-1] != spec.F.dim:
        raise ValueError("point dimensions do not match the star body")
    H, F = spec.H, spec.F

    def standard(a, b):
        return 0.5 * (_power_gauge(F, a, H) + _power_gauge(F, b, H) - _power_gauge(F, a - b, H))

    if spec.variant == "standard":
        return standard(z1, z2)
    return standard(z1, z2) + standard(z1, -z2)


def subfractional_closed_form(H, F, z1, z2):
    """``||z1||^2H + ||z2||^2H - (||z1 + z2||^2H + ||z1 - z2||^2H) / 2`` written out directly."""
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    g = lambda z: _power_gauge(F, z, H)  # noqa: E731
    return g(z1) + g(z2) - 0.5 * (g(z1 + z2) + g(z1 - z2))


def covariance_matrix(spec, points):
    p = np.atleast_2d(np.asarray(points, dtype=float))
    return cov_f(spec, p[:, None, :], p[None, :, :])


def psd_min_eigenvalue(spec, points):
    """Smallest eigenvalue of the Gram matrix of ``cov_f`` over ``points``."""
    points = np.atleast_2d(points)
    if len(points) < 2:
        raise ValueError("need at least two points")
    return float(np.linalg.eigvalsh(covariance_matrix(spec, points))[0])


def is_psd(spec, points, eps=PSD_EPS):
    g = covariance_matrix(spec, points)
    return bool(np.linalg.eigvalsh(g)[0] >= -eps * np.trace(g))


def find_psd_violation(spec, n_configs, n_points, seed, box=1.0, threshold=1e-6):
    """Random search for a point set whose Gram matrix has eigenvalue < -threshold * trace.

    Returns ``(points, min_eigenvalue, n_tried)``, or ``(None, best, n_configs)``.
    """
    rng = _streams.stream(seed, "psd-search")
    best = math.inf
    for i in range(n_configs):
        pts = rng.uniform(-box, box, size=(n_points, spec.F.dim))
        g = covariance_matrix(spec, pts)
        lam = np.linalg.eigvalsh(g)[0]
        best = min(best, lam)
        if lam < -threshold * np.trace(g):
            return pts, float(lam), i + 1
    return None, float(best), n_configs


class RepresentationConstants(NamedTuple):
    a: float
    b: float
    c: float


def c_h(H):
    """``int_0^inf (1 - cos t) t^(-2H-1) dt`` in closed form."""
    return math.pi / (4 * H * math.gamma(2 * H) * math.sin(H * math.pi))


def a_hd(H, d):
    """Harmonisable constant fixed by the normalisation ``a^2 c_H (2 pi)^(-d/2) = 1/2``."""
    return (2 * math.pi) ** (d / 4) * math.sqrt(2 * H * math.gamma(2 * H) * math.sin(H * math.pi) / math.pi)


def a_hd_quoted(H, d):
    """The literal closed form ``2 (2 pi)^((d-1)/4) (H Gamma(2H) sin(H pi))^(1/2)``.

    It exceeds :func:`a_hd` by the constant factor ``(2 pi)^(1/4)`` and does
    not satisfy the normalisation; kept for comparison only.
    """
    return 2 * (2 * math.pi) ** ((d - 1) / 4) * math.sqrt(H * math.gamma(2 * H) * math.sin(H * math.pi))


def b_hd(H, d):
    if not H < d / 2:
        raise ValueError(f"b_(H,d) needs H < d/2 (Gamma pole), got H={H}, d={d}")
    return 2.0 ** (-H) * gamma(0.5 * (d / 2 - H)) / gamma(0.5 * (H + d / 2))


def representation_constants(H, d):
    if not 0 < H < 1 or d < 1:
        raise ValueError("need H in (0, 1) and d >= 1")
    return RepresentationConstants(a_hd(H, d), b_hd(H, d), c_h(H))


def normalisation_residual(H, d):
    """``a^2 c_H (2 pi)^(-d/2) - 1/2``."""
    if not 0 < H < 1 or d < 1:
        raise ValueError("need H in (0, 1) and d >= 1")
    a, c = a_hd(H, d), c_h(H)
    return a * a * c * (2 * math.pi) ** (-d / 2) - 0.5


def c_h_quadrature(H):
    """Numerical ``int_0^inf (1 - cos t) t^(-2H-1) dt``; independent of :func:`c_h`.

    On (0, 1] the algebraic weight carries ``t^(1-2H)`` against the smooth
    factor ``(1 - cos t) / t^2``; the tail uses the Fourier-weighted rule.
    """

    def smooth(t):
        # 2 sin^2(t/2) avoids the cancellation in 1 - cos t near zero
        return 0.5 if t == 0 else 2 * math.sin(t / 2) ** 2 / (t * t)

    head, _ = integrate.quad(smooth, 0, 1, weight="alg", wvar=(1 - 2 * H, 0), epsabs=1e-14, epsrel=1e-13)
    tail_plain = 1 / (2 * H)
    # one integration by parts: int_1^inf cos(t) t^-a = -sin(1) + a int_1^inf sin(t) t^-(a+1)
    a = 2 * H + 1
    tail_sin, _ = integrate.quad(
        lambda t: t ** (-a - 1), 1, np.inf, weight="sin", wvar=1.0, epsabs=1e-13, limlst=200
    )
    tail_cos = -math.sin(1.0) + a * tail_sin
    return head + tail_plain - tail_cos


# ---------------------------------------------------------------------------
# sampling


def _cholesky_with_jitter(cov):
    """Lower Cholesky factor, escalating diagonal jitter up to 1e-8 * trace / n."""
    n = len(cov)
    scale = np.trace(cov) / n if n else 0.0
    for lam in JITTER_LEVELS:
        jitter = lam * scale
        try:
            return np.linalg.cholesky(cov + jitter * np.eye(n)), jitter
        except np.linalg.LinAlgError:
            continue
    raise NotPositiveDefiniteError(
        "covariance is not positive semi-definite beyond the jitter cap: "
        "not an L_p-ball for p=2H at these points"
    )


def gaussian_paths(cov, n_paths, seed, *key):
    """Centred Gaussian vectors with covariance ``cov`` in blocked seed streams.

    Coordinates with exactly zero variance are returned as exact zeros.
    """
    cov = np.asarray(cov, dtype=float)
    live = np.flatnonzero(np.diag(cov) > 0)
    lower, jitter = _cholesky_with_jitter(cov[np.ix_(live, live)]) if len(live) else (None, 0.0)

    def block(rng, n):
        out = np.zeros((n, len(cov)))
        if len(live):
            out[:, live] = rng.standard_normal((n, len(live))) @ lower.T
        return out

    return np.vstack(_streams.map_blocks(block, n_paths, seed, *key)), jitter


def fbm_covariance(H, s, t):
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return 0.5 * (np.abs(s) ** (2 * H) + np.abs(t) ** (2 * H) - np.abs(s - t) ** (2 * H))


def fbm1d_sample(H, grid, n_paths, seed):
    """Exact fBm samples on ``grid``; returns an (n_paths, len(grid)) matrix."""
    if not 0 < H < 1:
        raise ValueError("H must lie in (0, 1)")
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if len(grid) > MAX_FBM_GRID or not np.all(np.isfinite(grid)):
        raise ValueError(f"grid must be finite with at most {MAX_FBM_GRID} points")
    cov = fbm_covariance(H, grid[:, None], grid[None, :])
    paths, _ = gaussian_paths(cov, n_paths, seed, "fbm1d")
    return paths


def cholesky_simulate(spec, points, n_paths, seed):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    cov = covariance_matrix(spec, points)
    paths, jitter = gaussian_paths(cov, n_paths, seed, "cholesky")
    return GaussSampleBatch(points, paths, seed, "cholesky", jitter)


def _dedup(values, tol=DEDUP_TOL):
    """Sorted representatives merging values closer than ``tol``, and the index map."""
    order = np.argsort(values)
    sv = values[order]
    new = np.r_[True, np.diff(sv) > tol]
    group = np.cumsum(new) - 1
    reps = sv[new]
    index = np.empty(len(values), dtype=int)
    index[order] = group
    return reps, index


def plane_wave_simulate(H, sigma, points, n_paths, seed):
    """Field ``sum_i sqrt(w_i) g_i B_i(<z, v_i>)`` over the atom pairs of ``sigma``.

    Each atom pair carries its own fBm ``B_i`` (sampled only at the needed
    projections) and an independent standard normal ``g_i``.  The covariance
    equals ``cov_f`` for the spectral body of ``sigma`` with ``p = 2H``;
    the finite sum is not itself Gaussian.
    """
    if not 0 < H < 1:
        raise ValueError("H must lie in (0, 1)")
    if len(sigma) == 0:
        raise ValueError("spectral measure has no atoms")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != sigma.dim:
        raise ValueError("point dimension does not match the measure")
    plans = []
    for v, w in zip(sigma.directions, sigma.weights):
        reps, index = _dedup(points @ v)
        live = np.abs(reps) > DEDUP_TOL
        cov = fbm_covariance(H, reps[live, None], reps[None, live])
        lower, _ = _cholesky_with_jitter(cov) if live.any() else (None, 0.0)
        plans.append((math.sqrt(w), reps, index, live, lower))

    def block(rng, n):
        out = np.zeros((n, len(points)))
        for sw, reps, index, live, lower in plans:
            g = rng.standard_normal(n)
            path = np.zeros((n, len(reps)))
            if lower is not None:
                path[:, live] = rng.standard_normal((n, live.sum())) @ lower.T
            out += sw * g[:, None] * path[:, index]
        return out

    paths = np.vstack(_streams.map_blocks(block, n_paths, seed, "planewave"))
    return GaussSampleBatch(points, paths, seed, "planewave", 0.0)


# ---------------------------------------------------------------------------
# Levy fBf spectral measure


def sphere_area(d):
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def levy_mass(d, H):
    """Total mass making the rotation-invariant measure reproduce ``||z||^2H``.

    Obtained by numerically integrating ``|u_1|^2H`` against the marginal of a
    uniform point on the sphere, density proportional to ``(1 - x^2)^((d-3)/2)``.
    """
    alpha = (d - 3) / 2
    # by symmetry, integrate over [0, 1] with weight x^a (1 - x)^alpha
    norm, _ = integrate.quad(lambda x: (1 + x) ** alpha, 0, 1, weight="alg", wvar=(0.0, alpha), epsabs=1e-14)
    moment, _ = integrate.quad(lambda x: (1 + x) ** alpha, 0, 1, weight="alg", wvar=(2 * H, alpha), epsabs=1e-14)
    return norm / moment


def levy_mass_quoted(d, H):
    """Literal ``Gamma(H + d/2) / (2 pi^((d-1)/2) Gamma(H + 1/2))``.

    Equals :func:`levy_mass` divided by the sphere area, i.e. it is the
    density with respect to surface measure rather than the total mass.
    """
    return math.gamma(H + d / 2) / (2 * math.pi ** ((d - 1) / 2) * math.gamma(H + 0.5))


def levy_spectral_measure(d, H, n_atoms=None):
    """Equal-weight atoms spread over the sphere normalised to the Euclidean norm."""
    if d == 2:
        n_atoms = n_atoms or 360
        theta = np.pi * np.arange(n_atoms) / n_atoms
        dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    elif d == 3:
        n_atoms = n_atoms or 2000
        dirs = fibonacci_sphere(n_atoms)
    else:
        raise ValueError("Levy spectral measures are built for d=2,3")
    mass = levy_mass(d, H)
    return SpectralMeasure(dirs, np.full(n_atoms, mass / n_atoms))


def levy_body(d, H, n_atoms=None):
    return SpectralBody(2 * H, levy_spectral_measure(d, H, n_atoms))
