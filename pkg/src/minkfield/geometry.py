"""Star bodies, convex bodies and the transforms that connect them.

Two families of sets live here.  Star bodies ``F`` are described by their
gauge (Minkowski functional) ``||z||_F = inf{s >= 0 : z in sF}`` and are the
shape parameters of Gaussian fields.  Convex bodies ``K`` carry membership,
support, chord and sampling operations and are the shape parameters of the
Poisson fields.  The transforms (polar projection body, radial pth mean
body, p-sum) map between them.

Scaling follows set semantics throughout: ``ScaledBody(c, F)`` is the set
``cF`` and therefore has gauge ``||z||_F / c``.
"""

import json
import math
from functools import cached_property

import numpy as np
from scipy import integrate, optimize, spatial

from . import _streams

TOL = 1e-10
UNIT_TOL = 1e-12
INTERIOR_EPS = 1e-9
MIN_ACCEPTANCE = 1e-4
DEFAULT_GRID = {2: 720, 3: 2000}


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return _streams.stream(seed, "geometry")


def _as_points(z, d):
    z = np.asarray(z, dtype=float)
    if z.ndim == 0 or z.shape[-1] != d:
        raise ValueError(f"expected points of dimension {d}, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError("points must be finite")
    return z


def _as_unit(u, d=None):
    u = np.asarray(u, dtype=float)
    if d is not None and u.shape[-1] != d:
        raise ValueError(f"expected a direction of dimension {d}, got shape {u.shape}")
    norm = np.linalg.norm(u, axis=-1)
    if np.any(norm == 0) or not np.all(np.isfinite(norm)):
        raise ValueError("direction must be a finite non-zero vector")
    if np.any(np.abs(norm - 1) > 1e-8):
        raise ValueError("direction must have unit norm")
    return u / norm[..., None]


def _scalar(a):
    a = np.asarray(a)
    return float(a) if a.ndim == 0 else a


def perp_basis(u):
    """Orthonormal basis of the hyperplane orthogonal to ``u`` as rows, shape (d-1, d)."""
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    if u.size == 2:
        return np.array([[-u[1], u[0]]])
    _, _, vt = np.linalg.svd(u[None, :])
    return vt[1:]


# ---------------------------------------------------------------------------
# spectral measures and direction grids


class SpectralMeasure:
    """Finite even measure on the unit sphere stored as weighted atom pairs.

    Each row of ``directions`` stands for the pair ``{u, -u}``; its weight is
    the total mass of the pair, split evenly between the two signs.
    """

    def __init__(self, directions, weights, dim=None):
        directions = np.asarray(directions, dtype=float)
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if directions.size == 0:
            if dim is None:
                raise ValueError("an empty measure needs an explicit dimension")
            directions = np.zeros((0, int(dim)))
        if directions.ndim != 2 or len(directions) != len(weights):
            raise ValueError("directions must be (n, d) with one weight per atom")
        if dim is not None and directions.shape[1] != dim:
            raise ValueError("dimension mismatch between atoms and dim")
        if np.any(np.abs(np.linalg.norm(directions, axis=1) - 1) > UNIT_TOL):
            raise ValueError("atom directions must be unit vectors")
        if np.any(~(weights > 0)) or not np.all(np.isfinite(weights)):
            raise ValueError("atom weights must be finite and strictly positive")
        self.directions = directions
        self.weights = weights
        self.dim = directions.shape[1]

    @classmethod
    def from_vectors(cls, vectors, weights):
        vectors = np.asarray(vectors, dtype=float)
        return cls(vectors / np.linalg.norm(vectors, axis=1, keepdims=True), weights)

    @property
    def total_mass(self):
        return float(self.weights.sum())

    def __len__(self):
        return len(self.weights)

    def __add__(self, other):
        if other.dim != self.dim:
            raise ValueError("cannot add measures of different dimension")
        return SpectralMeasure(
            np.vstack([self.directions, other.directions]),
            np.concatenate([self.weights, other.weights]),
            dim=self.dim,
        )

    def power_integral(self, z, p):
        """``int |<z, u>|^p sigma(du)`` for points ``z`` of shape (..., d)."""
        z = _as_points(z, self.dim)
        if len(self) == 0:
            return np.zeros(z.shape[:-1])
        return np.abs(z @ self.directions.T) ** p @ self.weights

    def to_dict(self):
        return {
            "dim": self.dim,
            "atoms": [[list(map(float, d)), float(w)] for d, w in zip(self.directions, self.weights)],
        }

    @classmethod
    def from_dict(cls, data):
        atoms = data["atoms"]
        if not atoms:
            return cls(np.zeros((0, data["dim"])), [], dim=data["dim"])
        return cls([a[0] for a in atoms], [a[1] for a in atoms], dim=data.get("dim"))


class DirectionGrid:
    """Quadrature nodes on the unit sphere.

    For ``symmetric`` grids every node represents the pair ``{u, -u}`` and the
    weights sum to the area of the whole sphere.
    """

    def __init__(self, directions, weights, symmetric=False):
        self.directions = np.asarray(directions, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.symmetric = symmetric
        self.dim = self.directions.shape[1]
        if np.any(self.weights <= 0):
            raise ValueError("grid weights must be positive")

    def __len__(self):
        return len(self.weights)

    @property
    def total_weight(self):
        return float(self.weights.sum())


def fibonacci_sphere(n):
    """Quasi-uniform points on the unit sphere in R^3."""
    i = np.arange(n, dtype=float) + 0.5
    polar = np.arccos(1.0 - 2.0 * i / n)
    azimuth = 2.0 * np.pi * i / ((1.0 + 5.0**0.5) / 2.0)
    return np.column_stack(
        [np.cos(azimuth) * np.sin(polar), np.sin(azimuth) * np.sin(polar), np.cos(polar)]
    )


def direction_grid(d, n=None):
    """Half-circle grid for d=2 (even extension implied), Fibonacci sphere for d=3."""
    if d == 2:
        n = n or DEFAULT_GRID[2]
        theta = np.pi * np.arange(n) / n
        dirs = np.column_stack([np.cos(theta), np.sin(theta)])
        return DirectionGrid(dirs, np.full(n, 2 * np.pi / n), symmetric=True)
    if d == 3:
        n = n or DEFAULT_GRID[3]
        return DirectionGrid(fibonacci_sphere(n), np.full(n, 4 * np.pi / n))
    raise ValueError(f"direction grids are available for d=2,3 only, got d={d}")


# ---------------------------------------------------------------------------
# star bodies


class StarBody:
    """Centred star body described by its gauge function."""

    dim: int

    def gauge(self, z):
        z = _as_points(z, self.dim)
        return _scalar(self._gauge(z))

    def radial(self, u):
        return 1.0 / self.gauge(u)

    def _gauge(self, z):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


class EllipsoidStar(StarBody):
    """The ellipsoid ``{z : <Az, z> <= 1}``."""

    def __init__(self, matrix):
        a = np.atleast_2d(np.asarray(matrix, dtype=float))
        if a.shape[0] != a.shape[1] or not np.allclose(a, a.T, atol=1e-12):
            raise ValueError("ellipsoid matrix must be square and symmetric")
        np.linalg.cholesky(a)
        self.matrix = a
        self.dim = a.shape[0]

    def _gauge(self, z):
        q = np.einsum("...i,ij,...j->...", z, self.matrix, z)
        return np.sqrt(np.maximum(q, 0.0))

    def to_dict(self):
        return {"type": "ellipsoid", "matrix": self.matrix.tolist()}


class LpBall(StarBody):
    """The (possibly non-convex) ball ``{z : sum |z_i / s_i|^p <= 1}``."""

    def __init__(self, p, scales):
        scales = np.asarray(scales, dtype=float).reshape(-1)
        if not p > 0:
            raise ValueError("p must be positive")
        if np.any(scales <= 0):
            raise ValueError("scales must be positive")
        self.p = float(p)
        self.scales = scales
        self.dim = len(scales)

    def _gauge(self, z):
        return (np.abs(z / self.scales) ** self.p).sum(axis=-1) ** (1 / self.p)

    def to_dict(self):
        return {"type": "ellp", "p": self.p, "scales": self.scales.tolist()}


class SpectralBody(StarBody):
    """L_p-ball with gauge ``(int |<z,u>|^p sigma(du))^(1/p)``."""

    def __init__(self, p, measure):
        if not 0 < p <= 2:
            raise ValueError("spectral bodies need p in (0, 2]")
        self.p = float(p)
        self.measure = measure
        self.dim = measure.dim

    def _gauge(self, z):
        return self.measure.power_integral(z, self.p) ** (1 / self.p)

    def to_dict(self):
        return {"type": "spectral", "p": self.p, **self.measure.to_dict()}


class ScaledBody(StarBody):
    """The set ``c * inner``; its gauge is ``inner.gauge / c``."""

    def __init__(self, c, inner):
        if not c > 0:
            raise ValueError("scale factor must be positive")
        self.c = float(c)
        self.inner = inner
        self.dim = inner.dim

    def _gauge(self, z):
        return self.inner._gauge(z) / self.c

    def to_dict(self):
        return {"type": "scaled", "c": self.c, "inner": self.inner.to_dict()}


class PSumBody(StarBody):
    """p-sum: ``||z||^p = sum_i ||z||_{F_i}^p``."""

    def __init__(self, p, parts):
        parts = list(parts)
        if not parts:
            raise ValueError("p-sum needs at least one body")
        if len({f.dim for f in parts}) != 1:
            raise ValueError("p-sum of bodies with different dimensions")
        if p == 0 or not math.isfinite(p):
            raise ValueError("p must be finite and non-zero")
        self.p = float(p)
        self.parts = parts
        self.dim = parts[0].dim

    def _gauge(self, z):
        total = sum(f._gauge(z) ** self.p for f in self.parts)
        return total ** (1 / self.p)

    def to_dict(self):
        return {"type": "psum", "p": self.p, "parts": [f.to_dict() for f in self.parts]}


class TabulatedGauge(StarBody):
    """Gauge tabulated on unit directions and extended 1-homogeneously.

    d=2 interpolates linearly in angle (period pi, so the body is even).
    d=3 uses inverse-distance weights over the three nearest nodes, averaged
    over ``u`` and ``-u``.
    """

    def __init__(self, directions, values, stderr=None, interp_error=None):
        directions = np.asarray(directions, dtype=float)
        values = np.asarray(values, dtype=float)
        if directions.ndim != 2 or directions.shape[1] not in (2, 3):
            raise ValueError("tabulated gauges support d=2 and d=3")
        if len(values) != len(directions) or np.any(~(values > 0)):
            raise ValueError("need one strictly positive value per direction")
        self.directions = directions / np.linalg.norm(directions, axis=1, keepdims=True)
        self.values = values
        self.stderr = None if stderr is None else np.asarray(stderr, dtype=float)
        self.interp_error = interp_error
        self.dim = directions.shape[1]
        if self.dim == 2:
            angles = np.mod(np.arctan2(self.directions[:, 1], self.directions[:, 0]), np.pi)
            order = np.argsort(angles)
            self._angles = angles[order]
            self._sorted = values[order]
        else:
            self._tree = spatial.cKDTree(self.directions)

    def _unit_values(self, u):
        if self.dim == 2:
            theta = np.mod(np.arctan2(u[..., 1], u[..., 0]), np.pi)
            return np.interp(theta, self._angles, self._sorted, period=np.pi)
        return 0.5 * (self._idw(u) + self._idw(-u))

    def _idw(self, u):
        flat = u.reshape(-1, 3)
        dist, idx = self._tree.query(flat, k=min(3, len(self.values)))
        dist = dist.reshape(len(flat), -1)
        idx = idx.reshape(len(flat), -1)
        w = 1.0 / np.maximum(dist, 1e-15)
        out = (w * self.values[idx]).sum(axis=1) / w.sum(axis=1)
        return out.reshape(u.shape[:-1])

    def _gauge(self, z):
        r = np.linalg.norm(z, axis=-1)
        safe = np.where(r[..., None] > 0, z / np.where(r > 0, r, 1.0)[..., None], 1.0)
        return np.where(r > 0, r * self._unit_values(safe), 0.0)

    def to_dict(self):
        out = {"type": "tabulated", "directions": self.directions.tolist(), "values": self.values.tolist()}
        if self.stderr is not None:
            out["stderr"] = self.stderr.tolist()
        return out


def gauge(F, z):
    """Minkowski functional ``||z||_F``; vectorised over leading axes of ``z``."""
    return F.gauge(z)


def p_sum(F1, F2, p):
    if F1.dim != F2.dim:
        raise ValueError("p-sum of bodies with different dimensions")
    return PSumBody(p, [F1, F2])


# ---------------------------------------------------------------------------
# convex bodies


class ConvexBody:
    """Bounded convex body with non-empty interior."""

    dim: int

    def contains(self, x):
        raise NotImplementedError

    def support(self, u):
        """Support function ``h(K, u) = sup <x, u>``, vectorised over ``u``."""
        raise NotImplementedError

    def chord_interval(self, base, u):
        """Parameter interval ``{t : base + t u in K}`` as arrays ``(lo, hi)``; empty when lo > hi."""
        raise NotImplementedError

    @property
    def volume(self):
        raise NotImplementedError

    def bounding_box(self):
        raise NotImplementedError

    def scaled(self, c):
        raise NotImplementedError

    def project(self, basis):
        """Orthogonal projection onto span of the rows of ``basis`` (in basis coordinates)."""
        raise NotImplementedError

    def _rho(self, x, u):
        return self.chord_interval(x, u)[1]

    def to_json(self):
        return json.dumps(self.to_dict())


class Polytope(ConvexBody):
    """Intersection of half-spaces ``<a_i, x> <= b_i``; vertex-based operations need d <= 3."""

    def __init__(self, normals, offsets):
        a = np.atleast_2d(np.asarray(normals, dtype=float))
        b = np.asarray(offsets, dtype=float).reshape(-1)
        if a.shape[0] != b.shape[0]:
            raise ValueError("one offset per half-space normal required")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("half-spaces must be finite")
        self.normals = a
        self.offsets = b
        self.dim = a.shape[1]
        self._check_body()

    def _check_body(self):
        a, b, d = self.normals, self.offsets, self.dim
        row_norm = np.linalg.norm(a, axis=1)
        # Chebyshev centre: maximise r subject to <a_i, x> + r |a_i| <= b_i
        res = optimize.linprog(
            np.r_[np.zeros(d), -1.0],
            A_ub=np.c_[a, row_norm],
            b_ub=b,
            bounds=[(None, None)] * d + [(0, None)],
        )
        if res.status == 3 or res.status != 0:
            raise ValueError("polytope is unbounded or infeasible")
        if -res.fun < INTERIOR_EPS:
            raise ValueError("polytope has empty interior")
        self.center = res.x[:d]
        self.inradius = float(-res.fun)
        for i in range(d):
            for sign in (1.0, -1.0):
                c = np.zeros(d)
                c[i] = -sign
                r = optimize.linprog(c, A_ub=a, b_ub=b, bounds=[(None, None)] * d)
                if r.status != 0:
                    raise ValueError("polytope is unbounded")

    @classmethod
    def from_vertices(cls, vertices):
        v = np.atleast_2d(np.asarray(vertices, dtype=float))
        if v.shape[1] == 1:
            return Box([v.min()], [v.max()])
        hull = spatial.ConvexHull(v)
        eq = np.unique(np.round(hull.equations, 12), axis=0)
        return cls(eq[:, :-1], -eq[:, -1])

    @classmethod
    def regular(cls, n, radius=1.0, phase=0.0):
        t = phase + 2 * np.pi * np.arange(n) / n
        return cls.from_vertices(radius * np.column_stack([np.cos(t), np.sin(t)]))

    @cached_property
    def vertices(self):
        d = self.dim
        if d == 1:
            lo, hi = self.chord_interval(np.zeros(1), np.ones(1))
            return np.array([[float(lo)], [float(hi)]])
        if d > 3:
            raise NotImplementedError("vertex enumeration is limited to d <= 3")
        hs = spatial.HalfspaceIntersection(np.c_[self.normals, -self.offsets], self.center)
        pts = hs.intersections
        return pts[spatial.ConvexHull(pts).vertices]

    @cached_property
    def volume(self):
        if self.dim == 1:
            return float(np.ptp(self.vertices))
        return float(spatial.ConvexHull(self.vertices).volume)

    def contains(self, x):
        x = _as_points(x, self.dim)
        return np.all(x @ self.normals.T <= self.offsets + TOL, axis=-1)

    def support(self, u):
        u = np.asarray(u, dtype=float)
        return _scalar((u @ self.vertices.T).max(axis=-1))

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def chord_interval(self, base, u):
        base = np.asarray(base, dtype=float)
        u = np.asarray(u, dtype=float)
        au = u @ self.normals.T
        slack = self.offsets - base @ self.normals.T
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = slack / au
        au = np.broadcast_to(au, ratio.shape)
        upper = np.where(au > 0, ratio, np.inf).min(axis=-1)
        lower = np.where(au < 0, ratio, -np.inf).max(axis=-1)
        parallel_out = np.any((au == 0) & (slack < -TOL), axis=-1)
        lower = np.where(parallel_out, np.inf, lower)
        upper = np.where(parallel_out, -np.inf, upper)
        return _scalar(lower), _scalar(upper)

    def scaled(self, c):
        if not c > 0:
            raise ValueError("scale factor must be positive")
        return Polytope(self.normals, self.offsets * c)

    def reflected(self):
        return Polytope(-self.normals, self.offsets)

    def project(self, basis):
        basis = np.atleast_2d(np.asarray(basis, dtype=float))
        pts = self.vertices @ basis.T
        if basis.shape[0] == 1:
            return Box([pts.min()], [pts.max()])
        return Polytope.from_vertices(pts)

    def to_dict(self):
        return {
            "type": "polytope",
            "halfspaces": [[list(map(float, a)), float(b)] for a, b in zip(self.normals, self.offsets)],
        }


class Box(Polytope):
    """Axis-parallel box ``[lower, upper]``."""

    def __init__(self, lower, upper):
        lower = np.asarray(lower, dtype=float).reshape(-1)
        upper = np.asarray(upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape or np.any(upper - lower <= INTERIOR_EPS):
            raise ValueError("box needs lower < upper in every coordinate")
        self.lower, self.upper = lower, upper
        d = len(lower)
        eye = np.eye(d)
        self.normals = np.vstack([eye, -eye])
        self.offsets = np.r_[upper, -lower]
        self.dim = d
        self.center = 0.5 * (lower + upper)
        self.inradius = 0.5 * float((upper - lower).min())

    @cached_property
    def vertices(self):
        grids = np.meshgrid(*zip(self.lower, self.upper), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    @property
    def volume(self):
        return float(np.prod(self.upper - self.lower))

    def support(self, u):
        u = np.asarray(u, dtype=float)
        return _scalar(np.maximum(u * self.lower, u * self.upper).sum(axis=-1))

    def bounding_box(self):
        return self.lower.copy(), self.upper.copy()

    def scaled(self, c):
        if not c > 0:
            raise ValueError("scale factor must be positive")
        return Box(self.lower * c, self.upper * c)

    def to_dict(self):
        return {"type": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}


def unit_ball_volume(d):
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


class Ellipsoid(ConvexBody):
    """The ellipsoid ``{x : (x - c)^T M (x - c) <= 1}``."""

    def __init__(self, center, matrix):
        c = np.asarray(center, dtype=float).reshape(-1)
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        if m.shape != (len(c), len(c)) or not np.allclose(m, m.T, atol=1e-12):
            raise ValueError("ellipsoid matrix must be symmetric with the centre's dimension")
        try:
            np.linalg.cholesky(m)
        except np.linalg.LinAlgError:
            raise ValueError("ellipsoid matrix must be positive definite") from None
        self.center = c
        self.matrix = m
        self.dim = len(c)
        self._cov = np.linalg.inv(m)

    @property
    def volume(self):
        return unit_ball_volume(self.dim) / math.sqrt(np.linalg.det(self.matrix))

    def contains(self, x):
        x = _as_points(x, self.dim) - self.center
        return np.einsum("...i,ij,...j->...", x, self.matrix, x) <= 1 + TOL

    def support(self, u):
        u = np.asarray(u, dtype=float)
        q = np.einsum("...i,ij,...j->...", u, self._cov, u)
        return _scalar(u @ self.center + np.sqrt(q))

    def bounding_box(self):
        half = np.sqrt(np.diag(self._cov))
        return self.center - half, self.center + half

    def chord_interval(self, base, u):
        base = np.asarray(base, dtype=float) - self.center
        u = np.asarray(u, dtype=float)
        mu = u @ self.matrix
        a = np.einsum("...i,...i->...", mu, u)
        beta = np.einsum("...i,...i->...", base, mu)
        gam = np.einsum("...i,ij,...j->...", base, self.matrix, base) - 1.0
        disc = beta * beta - a * gam
        root = np.sqrt(np.maximum(disc, 0.0))
        lo = np.where(disc >= 0, (-beta - root) / a, np.inf)
        hi = np.where(disc >= 0, (-beta + root) / a, -np.inf)
        return _scalar(lo), _scalar(hi)

    def scaled(self, c):
        if not c > 0:
            raise ValueError("scale factor must be positive")
        return Ellipsoid(self.center * c, self.matrix / c**2)

    def project(self, basis):
        basis = np.atleast_2d(np.asarray(basis, dtype=float))
        cov = basis @ self._cov @ basis.T
        center = basis @ self.center
        if basis.shape[0] == 1:
            half = math.sqrt(cov[0, 0])
            return Box(center - half, center + half)
        return Ellipsoid(center, np.linalg.inv(cov))

    def to_dict(self):
        return {"type": "ellipsoid", "center": self.center.tolist(), "matrix": self.matrix.tolist()}


class Ball(Ellipsoid):
    def __init__(self, center, radius):
        if not radius > 0:
            raise ValueError("radius must be positive")
        c = np.asarray(center, dtype=float).reshape(-1)
        super().__init__(c, np.eye(len(c)) / radius**2)
        self.radius = float(radius)

    def scaled(self, c):
        if not c > 0:
            raise ValueError("scale factor must be positive")
        return Ball(self.center * c, self.radius * c)

    def to_dict(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}


def unit_square():
    return Box([0.0, 0.0], [1.0, 1.0])


def minkowski_sum(P, Q):
    """Minkowski sum of two polytopes via the hull of pairwise vertex sums."""
    sums = (P.vertices[:, None, :] + Q.vertices[None, :, :]).reshape(-1, P.dim)
    return Polytope.from_vertices(sums)


def centred_hexagon(size=1.0):
    """Triangle plus its reflection: a centrally symmetric hexagon."""
    tri = Polytope.regular(3, radius=size, phase=np.pi / 2)
    return minkowski_sum(tri, tri.reflected())


def random_polygon(n_points, seed, radius=1.0):
    """Convex hull of ``n_points`` uniform points in a disc (reproducible)."""
    rng = _rng(seed)
    r = radius * np.sqrt(rng.random(n_points))
    t = 2 * np.pi * rng.random(n_points)
    return Polytope.from_vertices(np.column_stack([r * np.cos(t), r * np.sin(t)]))


# ---------------------------------------------------------------------------
# pointwise geometry


def support_width(K, u):
    """``h(K, u) + h(K, -u)``: width of ``K`` in direction ``u``."""
    u = _as_unit(u, K.dim)
    return _scalar(K.support(u) + K.support(-u))


def chord_length(K, u, y):
    """Length of ``K`` intersected with the line ``{y + t u}``; ``y`` must lie in ``u``-perp."""
    u = _as_unit(u, K.dim)
    y = _as_points(y, K.dim)
    if np.any(np.abs(y @ u) > TOL):
        raise ValueError("base point must be orthogonal to the direction")
    lo, hi = K.chord_interval(y, u)
    return _scalar(np.maximum(np.asarray(hi) - np.asarray(lo), 0.0))


def rho_from(K, x, u):
    """``max{t : x + t u in K}`` for ``x`` inside ``K``."""
    u = _as_unit(u, K.dim)
    x = _as_points(x, K.dim)
    if not np.all(K.contains(x)):
        raise ValueError("point lies outside the body")
    return _scalar(np.maximum(K._rho(x, u), 0.0))


def uniform_sample_in(K, n, seed):
    """``n`` i.i.d. uniform points in ``K`` by rejection from its bounding box."""
    rng = _rng(seed)
    lo, hi = K.bounding_box()
    out = []
    have = proposed = 0
    accept = 1.0
    while have < n:
        m = int(min(max(1.3 * (n - have) / accept + 64, 1024), 5_000_000))
        x = lo + (hi - lo) * rng.random((m, K.dim))
        keep = x[K.contains(x)]
        proposed += m
        have += len(keep)
        out.append(keep)
        accept = max(have / proposed, 1e-12)
        if accept < MIN_ACCEPTANCE and proposed >= 100_000:
            raise RuntimeError(f"rejection acceptance {accept:.2e} below {MIN_ACCEPTANCE}")
    return np.concatenate(out)[:n]


def projection_volume(K, u):
    """``b_K(u) = Vol_{d-1}`` of the projection of ``K`` onto ``u``-perp."""
    u = _as_unit(u, K.dim)
    if K.dim == 1:
        return 1.0
    if K.dim == 2:
        return support_width(K, perp_basis(u)[0])
    if K.dim == 3:
        return K.project(perp_basis(u)).volume
    raise ValueError("projection volumes are implemented for d <= 3")


def chord_integral(K, u, func, epsrel=1e-10):
    """``int_{u-perp} func(l_{u,K}(y)) dy`` by adaptive quadrature.

    ``func`` is only called where the chord is positive.  Returns
    ``(value, abserr)``.
    """
    u = _as_unit(u, K.dim)
    d = K.dim

    def f_at(base):
        lo, hi = K.chord_interval(base, u)
        ell = hi - lo
        return func(ell) if ell > 0 else 0.0

    if d == 1:
        return float(f_at(np.zeros(1))), 0.0
    basis = perp_basis(u)
    if d == 2:
        v = basis[0]
        lo, hi = -K.support(-v), K.support(v)
        pts = _breakpoints(K, v, lo, hi)
        val, err = integrate.quad(
            lambda s: f_at(s * v), lo, hi, points=pts, limit=400, epsabs=1e-13, epsrel=epsrel
        )
        return val, err
    if d == 3:
        shadow = K.project(basis)
        e1, e2 = np.eye(2)
        lo1, hi1 = -shadow.support(-e1), shadow.support(e1)
        errs = []

        def inner(s1):
            a, b = shadow.chord_interval(s1 * e1, e2)
            if not b > a:
                return 0.0
            val, err = integrate.quad(
                lambda s2: f_at(s1 * basis[0] + s2 * basis[1]), a, b, limit=200, epsabs=1e-12, epsrel=epsrel
            )
            errs.append(err)
            return val

        pts = _breakpoints(shadow, e1, lo1, hi1)
        val, err = integrate.quad(inner, lo1, hi1, points=pts, limit=200, epsabs=1e-11, epsrel=max(epsrel, 1e-8))
        return val, err + (max(errs) if errs else 0.0) * (hi1 - lo1)
    raise ValueError("chord integrals are implemented for d <= 3")


def _breakpoints(K, v, lo, hi):
    if not isinstance(K, Polytope):
        return None
    p = np.unique(K.vertices @ v)
    p = p[(p > lo + 1e-12) & (p < hi - 1e-12)]
    return p if len(p) else None


# ---------------------------------------------------------------------------
# transforms


def polar_projection_body(K, grid=None):
    """Star body with gauge ``b_K(u)`` tabulated on a direction grid.

    The interpolation error (exact value versus interpolant at the grid
    mid-directions) is stored on the result as ``interp_error``.
    """
    if K.dim not in (2, 3):
        raise ValueError("polar projection bodies are supported for d=2,3")
    grid = grid or direction_grid(K.dim)
    vals = np.array([projection_volume(K, u) for u in grid.directions])
    body = TabulatedGauge(grid.directions, vals)
    if K.dim == 2:
        theta = np.pi * (np.arange(len(grid)) + 0.5) / len(grid)
        probes = np.column_stack([np.cos(theta), np.sin(theta)])[:: max(1, len(grid) // 90)]
    else:
        probes = fibonacci_sphere(97)
    exact = np.array([projection_volume(K, u) for u in probes])
    body.interp_error = float(np.max(np.abs(body._gauge(probes) - exact) / exact))
    return body


class PolarProjectionGauge(StarBody):
    """Exact gauge ``|z| b_K(z / |z|)`` of the polar projection body, evaluated pointwise."""

    def __init__(self, K):
        if K.dim not in (2, 3):
            raise ValueError("polar projection bodies are supported for d=2,3")
        self.K = K
        self.dim = K.dim

    def _gauge(self, z):
        flat = z.reshape(-1, self.dim)
        t = np.linalg.norm(flat, axis=-1)
        vals = np.array([projection_volume(self.K, v / n) if n > 0 else 0.0 for v, n in zip(flat, t)])
        return (t * vals).reshape(z.shape[:-1])

    def to_dict(self):
        return {"type": "polar_projection", "body": self.K.to_dict()}


def _check_p(p):
    if not -1 < p < 0:
        raise ValueError(f"radial mean bodies are implemented for p in (-1, 0), got {p}")


def radial_mean_integral(K, p, directions, n_samples, seed, method="resampled"):
    """Monte Carlo estimate of ``(1/Vol K) int_K rho_K(x, u)^p dx`` per direction.

    ``method="plain"`` averages ``rho^p`` over uniform points; its variance is
    infinite for ``p <= -1/2``.  ``method="resampled"`` moves each uniform point
    along its own chord to a position drawn with density proportional to
    ``s^q``, ``q = (p - 1) / 2`` (``s`` the distance to the exit point), and
    reweights; the estimator has finite variance for every ``p > -1``.
    All directions share the same uniform points.

    Returns ``(means, stderrs)``.
    """
    _check_p(p)
    if method not in ("plain", "resampled"):
        raise ValueError(f"unknown method {method!r}")
    directions = _as_unit(np.atleast_2d(directions), K.dim)
    rng = _rng(seed)
    x = uniform_sample_in(K, n_samples, rng)
    v = rng.random(n_samples)
    q = (p - 1) / 2
    means = np.empty(len(directions))
    errs = np.empty(len(directions))
    for i, u in enumerate(directions):
        fwd = np.maximum(K._rho(x, u), 0.0)
        if method == "plain":
            vals = fwd**p
        else:
            ell = fwd + np.maximum(K._rho(x, -u), 0.0)
            s = ell * v ** (1 / (q + 1))
            moved = x + (fwd - s)[:, None] * u
            s_eval = np.clip(K._rho(moved, u), 0.0, ell)
            vals = s_eval ** (p - q) * ell**q / (q + 1)
        means[i] = vals.mean()
        errs[i] = vals.std(ddof=1) / math.sqrt(n_samples)
    return means, errs


def radial_mean_gauge(K, p, directions, n_samples, seed, method="resampled"):
    """Gauge of ``R_p K`` at unit ``directions`` with delta-method standard errors."""
    if n_samples < 10_000:
        raise ValueError("radial mean bodies need n_samples >= 1e4")
    m, se = radial_mean_integral(K, p, directions, n_samples, seed, method)
    g = m ** (-1 / p)
    return g, np.abs(1 / p) * m ** (-1 / p - 1) * se


def radial_pth_mean_body(K, p, n_samples, seed, grid=None, method="resampled"):
    """Tabulated radial pth mean body ``R_p K`` for ``p`` in (-1, 0)."""
    _check_p(p)
    if K.dim not in (2, 3):
        raise ValueError("tabulated radial mean bodies are supported for d=2,3")
    grid = grid or direction_grid(K.dim)
    g, se = radial_mean_gauge(K, p, grid.directions, n_samples, seed, method)
    return TabulatedGauge(grid.directions, g, stderr=se)


def associated_scale(K, H):
    """Set scale ``(H / Vol K)^(1/2H)`` taking ``R_{-2H} K`` to the Gaussian shape."""
    if not 0 < H < 0.5:
        raise ValueError("H must lie in (0, 1/2)")
    return (H / K.volume) ** (1 / (2 * H))


def associated_body_of_poisson(K, H, n_samples, seed, grid=None, method="resampled"):
    """Star body ``F`` whose MfBf shares the covariance of the Poisson field with shape ``K``."""
    inner = radial_pth_mean_body(K, -2 * H, n_samples, seed, grid=grid, method=method)
    return ScaledBody(associated_scale(K, H), inner)


# ---------------------------------------------------------------------------
# serialisation


def body_to_dict(body):
    return body.to_dict()


def body_from_dict(data):
    """Build a convex or star body from its JSON dictionary."""
    if not isinstance(data, dict) or "type" not in data:
        raise ValueError("body: expected an object with a 'type' field")
    kind = data["type"]
    fields = {
        "polytope": {"halfspaces"},
        "box": {"lower", "upper"},
        "ball": {"center", "radius"},
        "ellipsoid": {"center", "matrix"},
        "ellipsoid_star": {"matrix"},
        "ellp": {"p", "scales"},
        "spectral": {"p", "atoms", "dim"},
        "scaled": {"c", "inner"},
        "psum": {"p", "parts"},
        "tabulated": {"directions", "values", "stderr"},
        "polar_projection": {"body"},
    }
    if kind not in fields:
        raise ValueError(f"body.type: unknown body type {kind!r}")
    # a bare ellipsoid matrix without centre is the star-body variant
    if kind == "ellipsoid" and "center" not in data:
        kind = "ellipsoid_star"
    extra = set(data) - fields[kind] - {"type"}
    if extra:
        raise ValueError(f"body.{sorted(extra)[0]}: unexpected field for type {data['type']!r}")
    optional = {"stderr", "dim"}
    missing = fields[kind] - set(data) - optional
    if missing:
        raise ValueError(f"body.{sorted(missing)[0]}: missing field for type {data['type']!r}")
    if kind == "polytope":
        hs = data["halfspaces"]
        return Polytope([h[0] for h in hs], [h[1] for h in hs])
    if kind == "box":
        return Box(data["lower"], data["upper"])
    if kind == "ball":
        return Ball(data["center"], data["radius"])
    if kind == "ellipsoid":
        return Ellipsoid(data["center"], data["matrix"])
    if kind == "ellipsoid_star":
        return EllipsoidStar(data["matrix"])
    if kind == "ellp":
        return LpBall(data["p"], data["scales"])
    if kind == "spectral":
        return SpectralBody(data["p"], SpectralMeasure.from_dict(data))
    if kind == "scaled":
        return ScaledBody(data["c"], body_from_dict(data["inner"]))
    if kind == "psum":
        return PSumBody(data["p"], [body_from_dict(part) for part in data["parts"]])
    if kind == "polar_projection":
        return PolarProjectionGauge(body_from_dict(data["body"]))
    return TabulatedGauge(data["directions"], data["values"], stderr=data.get("stderr"))
