"""Fractional Poisson fields and the quadrature of their second moments.

The field with Hurst index ``H`` and convex shape ``K`` is

    xi(z) = sum over points (x, r) of N_H of  1{z in x + rK} - 1{0 in x + rK},

where ``N_H`` is Poisson on R^d x (0, inf) with intensity ``dx r^(-d-1+2H) dr``.

Simulation is exact.  For each evaluation point ``z_j`` a dominating process
is laid over a set that contains ``A_j(r) = (z_j - rK) sym.diff. (-rK)``:

* for ``r < r*_j`` the union ``(z_j - rK) u (-rK)``, proposing a translate
  with probability 1/2 and then a uniform point in it;
* for ``r >= r*_j`` two slabs of thickness ``|z_j|`` along ``u = z_j/|z_j|``
  starting at the entry and exit points of the chord of ``-rK``.

``r*_j = |z_j| beta_j / Vol K`` balances the two envelope masses, with
``beta_j`` the (d-1)-volume of the bounding box of the projection of ``K``
onto ``u``-perp.  Each proposal is kept with probability
``1{x in U(r)} / sum_j n_j(x, r)``, where ``n_j`` counts how many ways the
j-th dominating process can place a point at ``x``.  The kept points form a
Poisson process with intensity exactly ``nu_H`` on ``U(r) = union_j A_j(r)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from . import _streams
from .geometry import Box, ConvexBody, chord_integral, perp_basis, uniform_sample_in
from .report import Quantity, Report, Timer, agree, variance_se


def segment():
    """The symmetric unit interval ``[-1, 1]``."""
    return Box([-1.0], [1.0])


@dataclass(frozen=True)
class FracPoissonSpec:
    H: float
    K: ConvexBody
    eval_points: np.ndarray

    def __post_init__(self):
        if not 0 < self.H < 0.5:
            raise ValueError(f"H must lie strictly inside (0, 1/2), got {self.H}")
        object.__setattr__(self, "eval_points", _check_points(self.eval_points, self.K.dim))


@dataclass(frozen=True)
class TruncatedSpec:
    p: float
    C: float
    K: ConvexBody
    eval_points: np.ndarray

    def __post_init__(self):
        if not self.p > 0.5:
            raise ValueError(f"p must exceed 1/2, got {self.p}")
        if not self.C > 0:
            raise ValueError("truncation level C must be positive")
        object.__setattr__(self, "eval_points", _check_points(self.eval_points, self.K.dim))


@dataclass(frozen=True)
class DirectionalSpec:
    H: float
    sigma: object
    eval_points: np.ndarray

    def __post_init__(self):
        if not 0 < self.H < 0.5:
            raise ValueError(f"H must lie strictly inside (0, 1/2), got {self.H}")
        if len(self.sigma) == 0:
            raise ValueError("spectral measure has no atoms")
        object.__setattr__(self, "eval_points", _check_points(self.eval_points, self.sigma.dim, allow_origin=True))


@dataclass
class PoissonSampleBatch:
    values: np.ndarray
    seed: int
    counters: dict = field(default_factory=dict)
    points: np.ndarray = None

    @property
    def n_paths(self):
        return len(self.values)


def _check_points(points, d, allow_origin=False):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != d or len(pts) == 0:
        raise ValueError(f"eval_points must be a non-empty (m, {d}) array")
    if not np.all(np.isfinite(pts)):
        raise ValueError("eval_points must be finite")
    if not allow_origin and np.any(np.linalg.norm(pts, axis=1) == 0):
        raise ValueError("eval_points must not contain the origin (the field vanishes there)")
    return pts


# ---------------------------------------------------------------------------
# dominating envelope


def _power_mass(k, lo, hi):
    """``int_lo^hi r^k dr`` (``hi`` may be infinite when k < -1)."""
    if hi <= lo:
        return 0.0
    if k == -1:
        return math.log(hi / lo)
    e = k + 1
    top = 0.0 if math.isinf(hi) else hi**e
    bottom = 0.0 if lo == 0 else lo**e
    return (top - bottom) / e


def _sample_power(rng, n, k, lo, hi):
    """``n`` draws from the density proportional to ``r^k`` on ``[lo, hi]``."""
    u = rng.random(n)
    if k == -1:
        return lo * (hi / lo) ** u
    e = k + 1
    top = 0.0 if math.isinf(hi) else hi**e
    bottom = 0.0 if lo == 0 else lo**e
    return (bottom + u * (top - bottom)) ** (1 / e)


class _Envelope:
    """Per-point dominating process for one evaluation point."""

    def __init__(self, K, z, h, C, scale):
        self.z = z
        self.norm = float(np.linalg.norm(z))
        self.u = z / self.norm
        d = K.dim
        if d == 1:
            self.basis = np.zeros((0, 1))
            self.box_lo = self.box_hi = np.zeros(0)
            beta = 1.0
        else:
            self.basis = perp_basis(self.u)
            self.box_hi = np.array([K.support(e) for e in self.basis])
            self.box_lo = -np.array([K.support(-e) for e in self.basis])
            beta = float(np.prod(self.box_hi - self.box_lo))
        self.beta = beta
        self.r_star = self.norm * beta / K.volume
        # union piece: mass density 2 Vol(K) r^d r^(-d-1+2h); slab piece: 2 |z| beta r^(d-1) r^(-d-1+2h)
        self.k_union = 2 * h - 1
        self.k_slab = 2 * h - 2
        self.union_hi = min(self.r_star, C)
        self.C = C
        self.mass_union = scale * 2 * K.volume * _power_mass(self.k_union, 0.0, self.union_hi)
        self.mass_slab = scale * 2 * self.norm * beta * _power_mass(self.k_slab, self.r_star, C)
        if not (math.isfinite(self.mass_union) and math.isfinite(self.mass_slab)):
            raise ValueError("dominating intensity has infinite mass (Hurst index out of range)")

    def slab_chord(self, K, x, r):
        """Entry/exit parameters ``a, b`` of the chord of ``-rK`` through ``x`` along ``u``."""
        t = x @ self.u
        base = x - t[:, None] * self.u
        lo, hi = K.chord_interval(-base / r[:, None], self.u)
        return t, -r * hi, -r * lo

    def multiplicity(self, K, x, r, in_z, in_0):
        """Number of ways this envelope can propose ``x`` at radius ``r``."""
        n = np.where(r < self.r_star, in_z.astype(int) + in_0.astype(int), 0)
        slab = r >= self.r_star
        if np.any(slab):
            t, a, b = self.slab_chord(K, x[slab], r[slab])
            hit = b >= a
            cnt = ((t >= a) & (t < a + self.norm)).astype(int) + ((t >= b) & (t < b + self.norm)).astype(int)
            n[slab] = np.where(hit, cnt, 0)
        return n

    def propose(self, K, rng, n_union, n_slab):
        """Proposals ``(x, r)`` plus a mask of slab proposals whose line meets ``-rK``."""
        d = K.dim
        r1 = _sample_power(rng, n_union, self.k_union, 0.0, self.union_hi)
        k1 = uniform_sample_in(K, n_union, rng) if n_union else np.zeros((0, d))
        shift = rng.random(n_union) < 0.5
        x1 = -r1[:, None] * k1 + np.where(shift[:, None], self.z, 0.0)

        r2 = _sample_power(rng, n_slab, self.k_slab, self.r_star, self.C)
        coords = self.box_lo + (self.box_hi - self.box_lo) * rng.random((n_slab, d - 1))
        # the projection box of -rK is -r times that of K
        y = -(r2[:, None] * coords) @ self.basis if d > 1 else np.zeros((n_slab, 1))
        upper = rng.random(n_slab) < 0.5
        s = self.norm * rng.random(n_slab)
        _, a, b = self.slab_chord(K, y, r2)
        hit = b >= a
        x2 = y + (np.where(upper, b, a) + s)[:, None] * self.u
        return np.vstack([x1, x2[hit]]), np.r_[r1, r2[hit]], hit


def _simulate(K, h, points, n_paths, seed, key, C=math.inf, scale=1.0):
    """Exact samples of the (possibly truncated) field; returns values and counters."""
    envs = [_Envelope(K, z, h, C, scale) for z in points]
    m = len(points)
    lam_union = np.array([e.mass_union for e in envs])
    lam_slab = np.array([e.mass_slab for e in envs])

    def block(rng, n):
        values = np.zeros((n, m), dtype=np.int64)
        xs, rs, labels = [], [], []
        proposals = 0
        for j, env in enumerate(envs):
            cu = rng.poisson(lam_union[j], n)
            cs = rng.poisson(lam_slab[j], n)
            x, r, hit = env.propose(K, rng, int(cu.sum()), int(cs.sum()))
            xs.append(x)
            rs.append(r)
            labels.append(np.r_[np.repeat(np.arange(n), cu), np.repeat(np.arange(n), cs)[hit]])
            proposals += int(cu.sum() + cs.sum())
        x = np.vstack(xs)
        r = np.concatenate(rs)
        rep = np.concatenate(labels)
        if len(r) == 0:
            return values, proposals, 0
        in_0 = K.contains(-x / r[:, None])
        in_z = np.stack([K.contains((env.z - x) / r[:, None]) for env in envs], axis=1)
        total = sum(env.multiplicity(K, x, r, in_z[:, j], in_0) for j, env in enumerate(envs))
        contributes = np.any(in_z != in_0[:, None], axis=1)
        if np.any(total[contributes] < 1):
            raise RuntimeError("dominating process does not cover its own proposal")
        keep = contributes & (rng.random(len(r)) * total < 1.0)
        delta = in_z[keep].astype(np.int64) - in_0[keep, None].astype(np.int64)
        np.add.at(values, rep[keep], delta)
        return values, proposals, int(keep.sum())

    results = _streams.map_blocks(block, n_paths, seed, *key)
    values = np.vstack([res[0] for res in results])
    proposals = sum(res[1] for res in results)
    kept = sum(res[2] for res in results)
    counters = {
        "proposals": int(proposals),
        "acceptances": int(kept),
        "acceptance_rate": kept / proposals if proposals else 0.0,
        "mean_points_per_replicate": kept / n_paths,
        "expected_proposals_per_replicate": float(lam_union.sum() + lam_slab.sum()),
    }
    return values, counters


# ---------------------------------------------------------------------------
# public simulators


def simulate_xi(spec, n_paths, seed):
    """Exact samples of ``xi_{K,H}`` at ``spec.eval_points``."""
    values, counters = _simulate(spec.K, spec.H, spec.eval_points, n_paths, seed, ("xi",))
    return PoissonSampleBatch(values, seed, counters, spec.eval_points)


def simulate_eta(spec, n_paths, seed):
    """Exact samples of the field truncated to radii ``r <= C`` with exponent ``p``."""
    values, counters = _simulate(spec.K, spec.p, spec.eval_points, n_paths, seed, ("eta",), C=spec.C)
    return PoissonSampleBatch(values, seed, counters, spec.eval_points)


def simulate_zeta(spec, n_paths, seed):
    """Superposition over atoms of one-dimensional fields along each atom direction.

    An atom pair ``{v, -v}`` of total mass ``w`` contributes a field on the
    line with shape ``[-1, 1]`` and intensity ``w dx r^(-2+2H) dr`` evaluated
    at ``<z, v>``; the two halves of the pair merge because the segment is
    symmetric.  Points orthogonal to an atom receive nothing from it.
    """
    points = spec.eval_points
    seg = segment()
    values = np.zeros((n_paths, len(points)), dtype=np.int64)
    counters = {"proposals": 0, "acceptances": 0}
    expected = 0.0
    for i, (v, w) in enumerate(zip(spec.sigma.directions, spec.sigma.weights)):
        proj = points @ v
        live = np.abs(proj) > 0
        if not live.any() or w == 0:
            continue
        vals, cnt = _simulate(seg, spec.H, proj[live, None], n_paths, seed, ("zeta", i), scale=float(w))
        values[:, live] += vals
        counters["proposals"] += cnt["proposals"]
        counters["acceptances"] += cnt["acceptances"]
        expected += cnt["expected_proposals_per_replicate"]
    p = counters["proposals"]
    counters["acceptance_rate"] = counters["acceptances"] / p if p else 0.0
    counters["mean_points_per_replicate"] = counters["acceptances"] / n_paths
    counters["expected_proposals_per_replicate"] = expected
    return PoissonSampleBatch(values, seed, counters, points)


# ---------------------------------------------------------------------------
# second moments by quadrature


def variance_quadrature(K, H, z, epsrel=1e-10):
    """``E xi(z)^2 = |z|^2H / (H (1 - 2H)) int_{u-perp} l(y)^(1-2H) dy``."""
    if not 0 < H < 0.5:
        raise ValueError("H must lie strictly inside (0, 1/2)")
    z = np.asarray(z, dtype=float).reshape(-1)
    t = float(np.linalg.norm(z))
    if t == 0:
        raise ValueError("z must be non-zero")
    val, _ = chord_integral(K, z / t, lambda ell: ell ** (1 - 2 * H), epsrel=epsrel)
    return t ** (2 * H) * val / (H * (1 - 2 * H))


def covariance_quadrature(K, H, z1, z2):
    """``Cov(xi(z1), xi(z2))`` from the variance function (zero at the origin)."""

    def v(z):
        z = np.asarray(z, dtype=float)
        return 0.0 if not np.any(z) else variance_quadrature(K, H, z)

    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    return 0.5 * (v(z1) + v(z2) - v(z1 - z2))


def _truncated_inner(ell, t, p, C):
    """``int_0^C r^(2p-1) min(l, t/r) dr``."""
    r0 = t / ell
    if r0 >= C:
        return ell * C ** (2 * p) / (2 * p)
    return ell * r0 ** (2 * p) / (2 * p) + t * (C ** (2 * p - 1) - r0 ** (2 * p - 1)) / (2 * p - 1)


def truncated_variance_quadrature(K, p, C, z, epsrel=1e-10):
    """``E eta_{C,p}(z)^2 = 2 int_{u-perp} int_0^C r^(2p-1) min(l(y), |z|/r) dr dy``.

    The inner radial integral is in closed form; the outer one runs over the
    shadow of ``K``.
    """
    if not p > 0.5 or not C > 0:
        raise ValueError("need p > 1/2 and C > 0")
    z = np.asarray(z, dtype=float).reshape(-1)
    t = float(np.linalg.norm(z))
    if t == 0:
        raise ValueError("z must be non-zero")
    val, _ = chord_integral(K, z / t, lambda ell: _truncated_inner(ell, t, p, C), epsrel=epsrel)
    return 2 * val


def expected_contributing_points(K, H, z):
    """``int Vol(A_z(r)) r^(-d-1+2H) dr``; equals the variance because contributions are +-1."""
    return variance_quadrature(K, H, z)


def segment_constant(H):
    """``2^(1-2H) / (H (1 - 2H))``, the variance of the segment field at ``z = 1``."""
    if not 0 < H < 0.5:
        raise ValueError("H must lie strictly inside (0, 1/2)")
    return 2 ** (1 - 2 * H) / (H * (1 - 2 * H))


def zeta_variance(H, sigma, z):
    """``segment_constant(H) sum_i w_i |<z, v_i>|^2H``."""
    z = np.asarray(z, dtype=float)
    return segment_constant(H) * float(sigma.power_integral(z, 2 * H))


# ---------------------------------------------------------------------------
# characteristic functions


def empirical_char_function(values, t_vectors):
    """Monte-Carlo ``E exp(i <t, values>)`` and its standard error for each row of ``t_vectors``."""
    values = getattr(values, "values", values)
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[0] == 0:
        raise ValueError("empty sample")
    t = np.atleast_2d(np.asarray(t_vectors, dtype=float))
    if t.shape[1] != values.shape[1]:
        raise ValueError("t vectors must match the number of evaluation points")
    phase = values @ t.T
    c, s = np.cos(phase), np.sin(phase)
    n = len(values)
    phi = c.mean(axis=0) + 1j * s.mean(axis=0)
    if n > 1:
        se = np.sqrt((c.var(axis=0, ddof=1) + s.var(axis=0, ddof=1)) / n)
    else:
        se = np.full(len(t), np.inf)
    return phi, se


def single_point_char_function(variance, t):
    """Law of ``xi(z)`` at one point: difference of two independent Poisson(V/2) counts."""
    t = np.asarray(t, dtype=float)
    return np.exp(variance * (np.cos(t) - 1))


def char_exponent_1d(points, t_vectors, H, K=None):
    """Exact ``log E exp(i sum_j t_j xi(z_j))`` for a segment in one dimension.

    For fixed ``r`` the integrand over ``x`` is piecewise constant between the
    endpoints of the translates, and every piece length is affine in ``r``
    between consecutive crossing radii.  Each radial piece therefore
    integrates in closed form against ``r^(-2+2H)``.
    """
    K = segment() if K is None else K
    if K.dim != 1:
        raise ValueError("one-dimensional segment required")
    lo_k, hi_k = (float(v[0]) for v in K.bounding_box())
    z = np.asarray(points, dtype=float).reshape(-1)
    t = np.atleast_2d(np.asarray(t_vectors, dtype=float))
    centers = np.r_[0.0, z]
    width = hi_k - lo_k
    kinks = np.unique(np.abs(centers[:, None] - centers[None, :]).ravel() / width)
    kinks = kinks[kinks > 0]
    edges = np.r_[0.0, kinks, np.inf]
    k = 2 * H - 2

    def profile(r):
        # x in c - rK  <=>  x in [c - r hi, c - r lo]
        bps = np.unique(np.r_[centers - r * hi_k, centers - r * lo_k])
        mids = 0.5 * (bps[1:] + bps[:-1])
        lengths = np.diff(bps)
        inside = (mids[:, None] >= (centers - r * hi_k)[None, :]) & (mids[:, None] <= (centers - r * lo_k)[None, :])
        jumps = inside[:, 1:].astype(float) - inside[:, :1]
        phase = jumps @ t.T
        return lengths @ (np.exp(1j * phase) - 1)

    total = np.zeros(len(t), dtype=complex)
    for a, b in zip(edges[:-1], edges[1:]):
        if math.isinf(b):
            # beyond the last crossing the profile is constant in r
            f = profile(2 * a + 1.0)
            total += f * a ** (k + 1) / -(k + 1)
            continue
        r1, r2 = a + (b - a) / 3, a + 2 * (b - a) / 3
        f1, f2 = profile(r1), profile(r2)
        slope = (f2 - f1) / (r2 - r1)
        if a == 0:
            # the profile vanishes at r = 0
            total += slope * _power_mass(k + 1, a, b)
            continue
        icpt = f1 - slope * r1
        total += icpt * _power_mass(k, a, b) + slope * _power_mass(k + 1, a, b)
    return total


def _two_sample(v1, se1, v2, se2):
    return abs(v1 - v2), math.sqrt(se1**2 + se2**2)


def scaling_check(K, H, a, n_paths, seed, points=None, t_grid=(0.25, 0.5, 1.0, 2.0)):
    """Compare ``xi_K(a z)`` with ``xi_{bK}(z)``, ``b = a^(2H/(d-2H))``.

    Both fields are simulated on matched points.  Per-point variances and
    joint characteristic functions at ``t * (1, ..., 1)`` are compared at
    three combined standard errors; the quadrature variance ``a^2H V_K(z)``
    is reported as the population value.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    d = K.dim
    b = a ** (2 * H / (d - 2 * H))
    if points is None:
        points = np.eye(d)[:1] if d == 1 else np.vstack([np.eye(d)[0], 0.5 * np.ones(d)])
    points = _check_points(points, d)
    with Timer() as clock:
        left = _simulate(K, H, a * points, n_paths, seed, ("scaling", "left"))[0]
        right = _simulate(K.scaled(b), H, points, n_paths, seed, ("scaling", "right"))[0]
        quantities = [Quantity("b", b)]
        ok = True
        worst = 0.0
        for j, z in enumerate(points):
            target = a ** (2 * H) * variance_quadrature(K, H, z)
            v1, s1 = variance_se(left[:, j])
            v2, s2 = variance_se(right[:, j])
            gap, se = _two_sample(v1, s1, v2, s2)
            ok &= agree(v1, v2, se) and agree(v1, target, s1) and agree(v2, target, s2)
            worst = max(worst, gap / se if se else 0.0)
            quantities += [
                Quantity(f"var_scaled_argument[{j}]", v1, s1, target),
                Quantity(f"var_scaled_body[{j}]", v2, s2, target),
            ]
        tv = np.outer(t_grid, np.ones(len(points)))
        p1, e1 = empirical_char_function(left, tv)
        p2, e2 = empirical_char_function(right, tv)
        for t, c1, c2, s1, s2 in zip(t_grid, p1, p2, e1, e2):
            se = math.hypot(s1, s2)
            gap = abs(c1 - c2)
            ok &= agree(gap, 0.0, se)
            worst = max(worst, gap / se if se else 0.0)
            quantities.append(Quantity(f"char_gap[t={t}]", gap, se, 0.0))
        quantities.append(Quantity("max_discrepancy_in_se", worst))
    return Report(
        "scaling_check",
        {"K": K.to_dict(), "H": H, "a": a, "n_paths": n_paths, "points": points},
        quantities,
        "3 combined standard errors",
        bool(ok),
        seed,
        clock.elapsed,
    )
