import math
from fractions import Fraction

import numpy as np
import pytest

from visbound.metrics import (
    ConeNeighborhood,
    DivergentGromovProductError,
    MetricSpec,
    adaptive_simpson,
    cone_contains,
    eval_dA,
    eval_dbar,
    eval_dbar_extended,
    gromov_product,
    pair_distance_matrix,
    spec_dA,
    spec_dbar,
    tree_branch_from,
    with_basepoint,
)
from visbound.spaces import (
    EuclideanBoundary,
    EuclideanPoint,
    HyperbolicBoundary,
    HyperbolicPoint,
    Ray,
    TreeBoundary,
    TreePoint,
    euclidean_space,
    hyperbolic_plane,
    ray_point,
    sample_boundary,
    substream,
    tree_space,
)

T4 = tree_space(4)
E2 = euclidean_space(2)
H2 = hyperbolic_plane()


def branching_pair(n):
    a = TreeBoundary((), (0,))
    b = TreeBoundary((), (1,)) if n == 0 else TreeBoundary(tuple([0] * n) + (1,), (0,))
    return a, b


def circle_pair(theta):
    return (EuclideanBoundary((1.0, 0.0)),
            EuclideanBoundary((math.cos(theta), math.sin(theta))))


class TestSpecValidation:
    def test_dA_needs_positive_A(self):
        with pytest.raises(ValueError):
            MetricSpec("dA", A=0)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            MetricSpec("dC")

    def test_tol_positive(self):
        with pytest.raises(ValueError):
            MetricSpec("dbar", tol=0)


class TestDA:
    def test_tree_closed_form(self):
        for n in range(6):
            a, b = branching_pair(n)
            assert eval_dA(T4, spec_dA(1), a, b) == Fraction(1, 1) / (n + Fraction(1, 2))

    def test_identical_points_give_zero(self):
        a = TreeBoundary((), (0,))
        assert eval_dA(T4, spec_dA(1), a, a) == 0
        e = EuclideanBoundary((1.0, 0.0))
        assert eval_dA(E2, spec_dA(3), e, e) == 0.0

    def test_euclidean_chord_over_A(self):
        for theta in (0.3, 1.0, math.pi / 2, 3.0):
            x, y = circle_pair(theta)
            want = 2 * math.sin(theta / 2) / 2.5
            assert abs(eval_dA(E2, spec_dA(2.5), x, y) - want) < 1e-14

    def test_bisect_agrees_with_closed_forms(self):
        a, b = branching_pair(3)
        assert abs(float(eval_dA(T4, spec_dA(1), a, b))
                   - eval_dA(T4, spec_dA(1), a, b, method="bisect")) < 1e-10
        x, y = circle_pair(1.2)
        assert abs(eval_dA(E2, spec_dA(1), x, y)
                   - eval_dA(E2, spec_dA(1), x, y, method="bisect")) < 1e-9

    def test_hyperbolic_pole_closed_vs_bisect(self):
        u, v = HyperbolicBoundary(0.2), HyperbolicBoundary(2.1)
        closed = eval_dA(H2, spec_dA(1), u, v)
        assert abs(closed - eval_dA(H2, spec_dA(1), u, v, method="bisect")) < 1e-9

    def test_time_to_separation_monotone_in_A(self):
        # a(A) <= a(A') for A <= A', i.e. 1/dA(A) <= 1/dA(A')
        for xi, eta in [branching_pair(2)]:
            a1 = 1 / eval_dA(T4, spec_dA(1), xi, eta)
            a2 = 1 / eval_dA(T4, spec_dA(2), xi, eta)
            assert a1 <= a2
        x, y = circle_pair(0.7)
        assert 1 / eval_dA(E2, spec_dA(1), x, y) <= 1 / eval_dA(E2, spec_dA(2), x, y)


class TestDbar:
    def test_tree_closed_form(self):
        for n in range(5):
            a, b = branching_pair(n)
            assert eval_dbar(T4, spec_dbar(), a, b) == 2.0 * math.exp(-n)

    def test_branch_zero_gives_two(self):
        a, b = branching_pair(0)
        assert eval_dbar(T4, spec_dbar(), a, b) == 2.0

    def test_euclidean_equals_chord(self):
        x, y = circle_pair(0.9)
        chord = 2 * math.sin(0.45)
        assert abs(eval_dbar(E2, spec_dbar(), x, y) - chord) < 1e-15
        assert abs(eval_dbar(E2, spec_dbar(), x, y, method="quadrature") - chord) < 1e-10

    def test_quadrature_agrees_on_tree(self):
        for n in range(5):
            a, b = branching_pair(n)
            q = eval_dbar(T4, spec_dbar(), a, b, method="quadrature")
            assert abs(q - 2.0 * math.exp(-n)) < 1e-10

    def test_adaptive_simpson_known_integral(self):
        v = adaptive_simpson(lambda r: r * math.exp(-r), 0.0, 40.0, 1e-12)
        assert abs(v - (1.0 - 41.0 * math.exp(-40.0))) < 1e-11


class TestDbarExtended:
    def test_interior_identity(self):
        p = TreePoint((0, 1))
        assert eval_dbar_extended(T4, spec_dbar(), p, p) == 0.0

    def test_basepoint_to_boundary(self):
        # frozen path from x0 stays at x0: d(r) = r, integral 1
        xi = TreeBoundary((), (0,))
        v = eval_dbar_extended(T4, spec_dbar(), TreePoint(()), xi)
        assert abs(v - 1.0) < 1e-10

    def test_point_on_ray_at_distance_s(self):
        # d(r) = max(0, r - s): integral e^{-s}
        xi = TreeBoundary((), (0,))
        for s in (1, 3):
            x = TreePoint(tuple([0] * s))
            v = eval_dbar_extended(T4, spec_dbar(), x, xi)
            assert abs(v - math.exp(-s)) < 1e-10

    def test_interior_lower_bound(self):
        # d̄(x, eta) >= e^{-d(x0,x)} for any boundary eta off the ray
        x = TreePoint((0, 0))
        for eta in sample_boundary(T4, 30, 5):
            v = eval_dbar_extended(T4, spec_dbar(), x, eta)
            assert v >= math.exp(-2.0) - 1e-10

    def test_boundary_pair_delegates(self):
        a, b = branching_pair(2)
        assert abs(eval_dbar_extended(T4, spec_dbar(), a, b)
                   - eval_dbar(T4, spec_dbar(), a, b)) < 1e-10


class TestGromovProduct:
    def test_tree_is_branch_time(self):
        a, b = branching_pair(3)
        assert gromov_product(T4, TreePoint(()), a, b) == 3

    def test_identical_is_infinite(self):
        a = TreeBoundary((), (0,))
        assert gromov_product(T4, TreePoint(()), a, a) == math.inf

    def test_hyperbolic_antipodal_is_zero(self):
        v = gromov_product(H2, HyperbolicPoint(0, 0),
                           HyperbolicBoundary(0.0), HyperbolicBoundary(math.pi))
        assert abs(v) < 1e-10

    def test_hyperbolic_matches_log_formula(self):
        # limit t - f(t)/2 -> -ln sin(dphi/2) for pole rays
        for dphi in (0.4, 1.0, 2.5):
            v = gromov_product(H2, HyperbolicPoint(0, 0),
                               HyperbolicBoundary(0.0), HyperbolicBoundary(dphi))
            assert abs(v + math.log(math.sin(dphi / 2))) < 1e-9

    def test_euclidean_divergence_signaled(self):
        x, y = circle_pair(1.0)
        with pytest.raises(DivergentGromovProductError):
            gromov_product(E2, EuclideanPoint((0.0, 0.0)), x, y)


class TestRebasedTree:
    def test_branch_from_other_vertex(self):
        # from vertex "1", rays to 000... and 011... split one step out
        origin = TreePoint((1,))
        xi = TreeBoundary((), (0,))
        eta = TreeBoundary((0, 1), (1,))
        assert tree_branch_from(T4, origin, xi, eta) == 2

    def test_da_with_moved_basepoint(self):
        origin = TreePoint((0,))
        spec = MetricSpec("dA", A=1, basepoint=origin)
        xi = TreeBoundary((), (1,))
        eta = TreeBoundary((), (2,))
        # both rays leave through the root, one step from the new basepoint
        assert eval_dA(T4, spec, xi, eta) == Fraction(1, 1) / (1 + Fraction(1, 2))

    def test_with_basepoint_helper(self):
        spec = with_basepoint(spec_dA(1), TreePoint((2,)))
        assert spec.basepoint == TreePoint((2,))


class TestConeTopology:
    def test_own_endpoint_always_inside(self):
        xi = TreeBoundary((), (0,))
        ray = Ray(T4, TreePoint(()), xi)
        for r, eps in [(1, 0.1), (5, 0.01), (2, 3)]:
            assert cone_contains(T4, ConeNeighborhood(ray, r, eps), xi)

    def test_tree_shared_projection(self):
        ray = Ray(T4, TreePoint(()), TreeBoundary((), (0,)))
        z = TreeBoundary((0, 0, 1), (1,))
        assert cone_contains(T4, ConeNeighborhood(ray, 1, Fraction(1, 100)), z)

    def test_euclidean_outside(self):
        ray = Ray(E2, EuclideanPoint((0.0, 0.0)), EuclideanBoundary((1.0, 0.0)))
        assert not cone_contains(E2, ConeNeighborhood(ray, 1, 0.5),
                                 EuclideanPoint((10.0, 10.0)))

    def test_interior_point_inside_ball_excluded(self):
        ray = Ray(E2, EuclideanPoint((0.0, 0.0)), EuclideanBoundary((1.0, 0.0)))
        assert not cone_contains(E2, ConeNeighborhood(ray, 5, 1.0),
                                 EuclideanPoint((1.0, 0.0)))

    def test_metric_convergence_implies_cone_membership(self):
        # shrinking cylinders around xi converge in both metrics
        xi = TreeBoundary((), (0,))
        ray = Ray(T4, TreePoint(()), xi)
        nbhd = ConeNeighborhood(ray, 4, Fraction(1, 10))
        prev_da, prev_db = math.inf, math.inf
        for n in (1, 3, 5, 8):
            zn = TreeBoundary(tuple([0] * n) + (1,), (0,))
            da = eval_dA(T4, spec_dA(1), xi, zn)
            db = eval_dbar(T4, spec_dbar(), xi, zn)
            assert da < prev_da and db < prev_db
            prev_da, prev_db = da, db
            if n >= 5:
                assert cone_contains(T4, nbhd, zn)


class TestPairMatrix:
    def test_matches_pointwise_euclidean(self):
        pts = sample_boundary(E2, 40, 8)
        D = pair_distance_matrix(E2, spec_dA(1), pts)
        rng = substream(8, "check")
        for _ in range(50):
            i, j = rng.integers(0, 40, size=2)
            want = float(eval_dA(E2, spec_dA(1), pts[int(i)], pts[int(j)]))
            assert abs(D[i, j] - want) < 1e-12

    def test_matches_pointwise_tree_with_basepoint(self):
        pts = sample_boundary(T4, 30, 8)
        spec = MetricSpec("dA", A=1, basepoint=TreePoint((0,)))
        D = pair_distance_matrix(T4, spec, pts)
        for i in range(0, 30, 7):
            for j in range(i + 1, 30, 5):
                assert abs(D[i, j] - float(eval_dA(T4, spec, pts[i], pts[j]))) < 1e-15

    def test_hyperbolic_dbar_batch_vs_adaptive(self):
        pts = sample_boundary(H2, 12, 8)
        D = pair_distance_matrix(H2, spec_dbar(), pts)
        for i in range(0, 12, 3):
            for j in range(i + 1, 12, 2):
                slow = eval_dbar(H2, spec_dbar(), pts[i], pts[j], method="quadrature")
                assert abs(D[i, j] - slow) < 1e-8
