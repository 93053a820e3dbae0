"""Boundary metrics on model CAT(0) spaces.

Two families: d_A (reciprocal of the time at which the two basepoint rays
reach separation A) and dbar (the exponentially weighted integral of the
ray separation).  Tree values are exact; Euclidean and hyperbolic use
closed forms where available and a bracketed bisection / adaptive Simpson
kernel otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .spaces import (
    EUCLIDEAN,
    HYPERBOLIC,
    TREE,
    BoundaryPoint,
    EuclideanBoundary,
    HyperbolicBoundary,
    Point,
    Ray,
    Space,
    SpaceMismatchError,
    TreeBoundary,
    TreePoint,
    branch_time,
    dist,
    point_on_geodesic,
    project_to_sphere,
    ray_point,
)

DA = "dA"
DBAR = "dbar"


class DivergentGromovProductError(ArithmeticError):
    """The sequence t - f(t)/2 failed to stabilize within the horizon."""


@dataclass(frozen=True)
class MetricSpec:
    """Which boundary metric to evaluate, with basepoint and tolerances."""

    family: str
    A: object = None              # positive length for dA, ignored for dbar
    basepoint: Point = None       # None means the space's own basepoint
    tol: float = 1e-10

    def __post_init__(self):
        if self.family not in (DA, DBAR):
            raise ValueError(f"unknown metric family {self.family!r}")
        if self.family == DA and (self.A is None or self.A <= 0):
            raise ValueError("dA requires A > 0")
        if self.tol <= 0:
            raise ValueError("tol must be positive")

    def base(self, space: Space) -> Point:
        return self.basepoint if self.basepoint is not None else space.basepoint

    @property
    def tail_horizon(self) -> float:
        # 2(T+1)e^-T < tol/2 is comfortably satisfied at this T
        return max(40.0, -math.log(self.tol / 8.0) + 4.0)


def spec_dA(A, basepoint=None, tol=1e-10) -> MetricSpec:
    return MetricSpec(DA, A=A, basepoint=basepoint, tol=tol)


def spec_dbar(basepoint=None, tol=1e-10) -> MetricSpec:
    return MetricSpec(DBAR, basepoint=basepoint, tol=tol)


@dataclass(frozen=True)
class ConeNeighborhood:
    """Basic cone-topology neighborhood U(c, r, eps) of the ray's endpoint."""

    ray: Ray
    r: object
    eps: object

    def __post_init__(self):
        if self.r <= 0 or self.eps <= 0:
            raise ValueError("cone neighborhood needs r > 0 and eps > 0")


# ---------------------------------------------------------------------------
# ray separation f(t) = d(alpha(t), beta(t)) for rays from a common origin


def _wrapped_half_angle_sin(phi1: float, phi2: float) -> float:
    delta = abs(phi1 - phi2) % (2 * math.pi)
    if delta > math.pi:
        delta = 2 * math.pi - delta
    return math.sin(delta / 2)


def _hyp_pole_separation(t: float, s: float) -> float:
    """d(gamma_1(t), gamma_2(t)) for two pole rays, s = sin(dphi/2); stable
    for arbitrarily large t."""
    if s == 0.0:
        return 0.0
    x = math.sinh(t) * s if t < 350 else math.inf
    if math.isfinite(x) and x < 1e15:
        return 2 * math.asinh(x)
    # asymptotic regime: sinh t ~ e^t/2
    return 2 * (t + math.log(s) + math.log1p(-math.exp(-2 * t)) if t < 350 else t + math.log(s))


def _euclid_chord(xi: EuclideanBoundary, eta: EuclideanBoundary) -> float:
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(xi.direction, eta.direction)))


def tree_branch_from(space: Space, origin: TreePoint, xi: TreeBoundary, eta: TreeBoundary) -> Fraction:
    """Exact branch time of the two rays from `origin` toward xi and eta:
    the last time at which they coincide."""
    if xi == eta:
        raise ValueError("rays coincide; branch time infinite")
    if origin.word == ():
        return branch_time(space, xi, eta)
    b_root = branch_time(space, xi, eta)
    t = Fraction(len(origin.word)) + b_root + 2
    rx = Ray(space, origin, xi)
    re = Ray(space, origin, eta)
    f = dist(space, ray_point(rx, t), ray_point(re, t))
    return t - f / 2


def ray_separation(space: Space, origin: Point, xi: BoundaryPoint, eta: BoundaryPoint, t):
    """f(t) = dist between the two rays from `origin` at parameter t."""
    if space.kind == EUCLIDEAN:
        return float(t) * _euclid_chord(xi, eta)
    if space.kind == TREE:
        b = tree_branch_from(space, origin, xi, eta) if xi != eta else None
        if b is None:
            return Fraction(0)
        tf = t if isinstance(t, Fraction) else Fraction(t)
        return 2 * max(Fraction(0), tf - b)
    if origin.r == 0.0:
        return _hyp_pole_separation(float(t), _wrapped_half_angle_sin(xi.angle, eta.angle))
    rx = Ray(space, origin, xi)
    re = Ray(space, origin, eta)
    return dist(space, ray_point(rx, t), ray_point(re, t))


def _separation_fn(space: Space, origin: Point, xi, eta):
    """Per-pair closure for f(t), hoisting pair-level precomputation."""
    if space.kind == EUCLIDEAN:
        chord = _euclid_chord(xi, eta)
        return lambda t: t * chord
    if space.kind == TREE:
        if xi == eta:
            return lambda t: 0.0
        b = float(tree_branch_from(space, origin, xi, eta))
        return lambda t: 2.0 * max(0.0, t - b)
    if origin.r == 0.0:
        s = _wrapped_half_angle_sin(xi.angle, eta.angle)
        return lambda t: _hyp_pole_separation(t, s)
    rx = Ray(space, origin, xi)
    re = Ray(space, origin, eta)
    return lambda t: dist(space, ray_point(rx, t), ray_point(re, t))


# ---------------------------------------------------------------------------
# d_A


def _bisect_dA(f, A: float, tol: float) -> float:
    """Solve f(a) = A for nondecreasing continuous f with f(0) = 0 and
    f unbounded; returns 1/a."""
    hi = 1.0
    while f(hi) < A:
        hi *= 2.0
        if hi > 2.0 ** 200:
            return 0.0  # separation never reaches A: identical classes
    lo = hi / 2.0 if hi > 1.0 else 0.0
    if lo > 0.0 and f(lo) >= A:
        lo = 0.0
    while (hi - lo) > tol * hi:
        mid = 0.5 * (lo + hi)
        if f(mid) < A:
            lo = mid
        else:
            hi = mid
    return 2.0 / (lo + hi)


def eval_dA(space: Space, spec: MetricSpec, xi: BoundaryPoint, eta: BoundaryPoint, method="auto"):
    """d_{A,x0}(xi, eta).  Exact Fraction on trees (method 'auto'/'closed');
    closed forms on Euclidean and pole-based hyperbolic; bracketed bisection
    otherwise or when method='bisect'."""
    if spec.family != DA:
        raise ValueError("spec.family must be dA")
    if xi == eta:
        return Fraction(0) if space.kind == TREE and method != "bisect" else 0.0
    origin = spec.base(space)
    if method == "bisect":
        f = _separation_fn(space, origin, xi, eta)
        return _bisect_dA(f, float(spec.A), spec.tol)
    if space.kind == TREE:
        b = tree_branch_from(space, origin, xi, eta)
        return 1 / (b + Fraction(spec.A) / 2)
    if space.kind == EUCLIDEAN:
        chord = _euclid_chord(xi, eta)
        return chord / float(spec.A)
    if origin.r == 0.0:
        s = _wrapped_half_angle_sin(xi.angle, eta.angle)
        a = math.asinh(math.sinh(float(spec.A) / 2) / s)
        return 1.0 / a
    f = _separation_fn(space, origin, xi, eta)
    return _bisect_dA(f, float(spec.A), spec.tol)


# ---------------------------------------------------------------------------
# adaptive Simpson quadrature


def _simpson(f, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(f, a: float, b: float, tol: float, max_depth: int = 50) -> float:
    """Adaptive Simpson integration of f on [a, b] to absolute tolerance."""
    fa, fb = f(a), f(b)
    m, fm, whole = _simpson(f, fa=fa, a=a, b=b, fb=fb)
    return _adapt(f, a, fa, b, fb, m, fm, whole, tol, max_depth)


def _adapt(f, a, fa, b, fb, m, fm, whole, tol, depth):
    lm, flm, left = _simpson(f, a=a, fa=fa, b=m, fb=fm)
    rm, frm, right = _simpson(f, a=m, fa=fm, b=b, fb=fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    return (_adapt(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + _adapt(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1))


# ---------------------------------------------------------------------------
# dbar


def eval_dbar(space: Space, spec: MetricSpec, xi: BoundaryPoint, eta: BoundaryPoint, method="auto") -> float:
    """dbar_{x0}(xi, eta) = integral of f(r) e^-r.

    method 'auto' uses closed forms (tree: 2 e^-b; Euclidean: the chord);
    'quadrature' forces the adaptive Simpson kernel with the rigorous tail
    estimate (f(r) <= 2r gives tail < 2(T+1)e^-T)."""
    if spec.family != DBAR:
        raise ValueError("spec.family must be dbar")
    if xi == eta:
        return 0.0
    origin = spec.base(space)
    if method != "quadrature":
        if space.kind == TREE:
            b = tree_branch_from(space, origin, xi, eta)
            return 2.0 * math.exp(-float(b))
        if space.kind == EUCLIDEAN:
            return _euclid_chord(xi, eta)  # int r e^-r dr = 1
    f = _separation_fn(space, origin, xi, eta)
    T = spec.tail_horizon
    g = lambda r: f(r) * math.exp(-r)
    return adaptive_simpson(g, 0.0, T, spec.tol / 2.0) + f(T) * math.exp(-T)


def eval_dbar_extended(space: Space, spec: MetricSpec, x, y) -> float:
    """dbar on Xbar = X union boundary: interior points travel their
    basepoint geodesic and then stay frozen at the endpoint."""
    if spec.family != DBAR:
        raise ValueError("spec.family must be dbar")
    origin = spec.base(space)
    bnd = (EuclideanBoundary, TreeBoundary, HyperbolicBoundary)
    if not isinstance(x, bnd) and not isinstance(y, bnd) and x == y:
        return 0.0
    if isinstance(x, bnd) and isinstance(y, bnd):
        return eval_dbar(space, spec, x, y)

    def path(z):
        if isinstance(z, bnd):
            ray = Ray(space, origin, z)
            return lambda r: ray_point(ray, r)
        return lambda r: point_on_geodesic(space, origin, z, r)

    cx, cy = path(x), path(y)
    f = lambda r: float(dist(space, cx(r), cy(r)))
    T = spec.tail_horizon
    g = lambda r: f(r) * math.exp(-r)
    return adaptive_simpson(g, 0.0, T, spec.tol / 2.0) + f(T) * math.exp(-T)


# ---------------------------------------------------------------------------
# Gromov product


def gromov_product(space: Space, x0: Point, xi: BoundaryPoint, eta: BoundaryPoint,
                   tol: float = 1e-10, max_doublings: int = 60):
    """Limit of t - f(t)/2.  Exact branch time on trees; evaluated at t = 2^j
    until Cauchy elsewhere.  Raises DivergentGromovProductError when the
    sequence fails to stabilize (Euclidean non-antipodal directions)."""
    if xi == eta:
        return math.inf
    if space.kind == TREE:
        return tree_branch_from(space, x0, xi, eta)
    if space.kind == HYPERBOLIC and x0.r != 0.0:
        raise SpaceMismatchError("hyperbolic Gromov products are supported at the pole only")
    f = _separation_fn(space, x0, xi, eta)
    prev = None
    for j in range(max_doublings + 1):
        t = float(2 ** j)
        g = t - f(t) / 2.0
        if prev is not None and abs(g - prev) < tol:
            return g
        prev = g
    raise DivergentGromovProductError(
        "t - f(t)/2 did not stabilize within the doubling horizon")


# ---------------------------------------------------------------------------
# cone topology membership


def cone_contains(space: Space, nbhd: ConeNeighborhood, z) -> bool:
    """Membership of a point or boundary point in U(c, r, eps)."""
    c = nbhd.ray
    x0 = c.origin
    bnd = (EuclideanBoundary, TreeBoundary, HyperbolicBoundary)
    if not isinstance(z, bnd):
        if dist(space, z, x0) <= nbhd.r:
            return False
    proj = project_to_sphere(space, x0, z, nbhd.r)
    return dist(space, proj, ray_point(c, nbhd.r)) < nbhd.eps


# ---------------------------------------------------------------------------
# bulk kernels over pools of boundary points (for large test suites)


def tree_branch_matrix(space: Space, points: list) -> list:
    """b[i][j] = branch time (int) for i < j; -1 on the diagonal."""
    n = len(points)
    out = [[-1] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            b = int(branch_time(space, points[i], points[j]))
            out[i][j] = b
            out[j][i] = b
    return out


def pair_distance_matrix(space: Space, spec: MetricSpec, points: list) -> np.ndarray:
    """Dense float matrix of pairwise boundary distances (vectorized for the
    numeric spaces; closed forms on trees converted to float)."""
    n = len(points)
    if space.kind == EUCLIDEAN:
        V = np.array([p.direction for p in points], dtype=float)
        G = V @ V.T
        sq = np.maximum(2.0 - 2.0 * np.clip(G, -1.0, 1.0), 0.0)
        chord = np.sqrt(sq)
        np.fill_diagonal(chord, 0.0)
        if spec.family == DA:
            return chord / float(spec.A)
        return chord
    if space.kind == TREE:
        origin = spec.base(space)
        D = np.zeros((n, n))
        A = float(spec.A) if spec.family == DA else None
        for i in range(n):
            for j in range(i + 1, n):
                b = float(tree_branch_from(space, origin, points[i], points[j]))
                if spec.family == DA:
                    D[i, j] = 1.0 / (b + A / 2.0)
                else:
                    D[i, j] = 2.0 * math.exp(-b)
                D[j, i] = D[i, j]
        return D
    # hyperbolic, pole basepoint
    origin = spec.base(space)
    if origin.r != 0.0:
        D = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                if spec.family == DA:
                    D[i, j] = float(eval_dA(space, spec, points[i], points[j], method="bisect"))
                else:
                    D[i, j] = eval_dbar(space, spec, points[i], points[j], method="quadrature")
                D[j, i] = D[i, j]
        return D
    phis = np.array([p.angle for p in points])
    delta = np.abs(phis[:, None] - phis[None, :]) % (2 * math.pi)
    delta = np.where(delta > math.pi, 2 * math.pi - delta, delta)
    s = np.sin(delta / 2.0)
    if spec.family == DA:
        A = float(spec.A)
        with np.errstate(divide="ignore"):
            a = np.arcsinh(math.sinh(A / 2.0) / np.where(s > 0, s, np.inf))
            D = np.where(a > 0, 1.0 / np.where(a > 0, a, 1.0), 0.0)
        np.fill_diagonal(D, 0.0)
        return D
    return _hyp_dbar_matrix(s)


def _hyp_dbar_matrix(s: np.ndarray, T: float = 40.0, n_intervals: int = 8192,
                     chunk: int = 400) -> np.ndarray:
    """Composite-Simpson dbar for pole rays at half-angle sines s (symmetric
    matrix input), vectorized in chunks."""
    n = s.shape[0]
    iu = np.triu_indices(n, k=1)
    svals = s[iu]
    r = np.linspace(0.0, T, n_intervals + 1)
    w = np.ones(n_intervals + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= (T / n_intervals) / 3.0
    w_exp = w * np.exp(-r)
    sinh_r = np.sinh(r)
    out = np.empty(svals.shape[0])
    for lo in range(0, svals.shape[0], chunk):
        sv = svals[lo:lo + chunk]
        f = 2.0 * np.arcsinh(sinh_r[None, :] * sv[:, None])
        out[lo:lo + chunk] = f @ w_exp
    # frozen-tail correction, ~2(T + log s) e^-T, negligible at T = 40
    fT = 2.0 * np.arcsinh(math.sinh(T) * svals)
    out += fT * math.exp(-T)
    D = np.zeros((n, n))
    D[iu] = out
    D[(iu[1], iu[0])] = out
    return D


def with_basepoint(spec: MetricSpec, basepoint: Point) -> MetricSpec:
    return replace(spec, basepoint=basepoint)
