import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from _gen import rand_polytope
from tropskel.geom import (
    Cone,
    Fan,
    GeometryError,
    Polytope,
    convex_hull,
    hyperplane_subdivide,
    is_unimodular,
    normal_fan,
    polar_dual,
    read_off,
    support_function,
    vertex_resolution_expected,
    vertex_resolution_fan,
)
from tropskel.trop import anticanonical_polytope, ray

F = Fraction


def test_unit_square():
    P = convex_hull([(0, 0), (1, 0), (0, 1), (1, 1)])
    assert len(P.vertices) == 4 and len(P.facets) == 4
    assert P.volume() == 1


def test_collinear_points_keep_endpoints():
    P = convex_hull([(0, 0), (1, 0), (2, 0)])
    assert set(P.vertices) == {(0, 0), (2, 0)}
    assert P.dim == 1 and not P.is_full_dimensional


def _brute_lattice_hull(n: int, sign: int):
    """Lattice points m with sign*<m, v_l> <= 1 for every ray, by box enumeration."""
    rs = [ray(n, l) for l in range(n + 2)]
    box = range(-(n + 2), n + 3)
    pts = [m for m in itertools.product(box, repeat=n + 1) if all(sign * sum(a * b for a, b in zip(m, r)) <= 1 for r in rs)]
    return convex_hull(pts)


def test_cp3_anticanonical_polytope_against_enumeration():
    P = anticanonical_polytope(2)
    assert P == _brute_lattice_hull(2, 1)
    assert len(P.vertices) == 4 and len(P.facets) == 4
    assert set(P.vertices) == {(1, 1, 1), (-3, 1, 1), (1, -3, 1), (1, 1, -3)}
    # the opposite sign convention gives the negated vertex set
    Q = _brute_lattice_hull(2, -1)
    assert set(Q.vertices) == {(3, -1, -1), (-1, 3, -1), (-1, -1, 3), (-1, -1, -1)}
    assert Q == P.neg()


def test_hull_methods_agree():
    rng = random.Random(5)
    for dim in (2, 3):
        for _ in range(10):
            pts = [tuple(rng.randint(-4, 4) for _ in range(dim)) for _ in range(12)]
            a, b = convex_hull(pts, method="brute"), convex_hull(pts, method="qhull")
            assert a == b and set(a.facets) == set(b.facets)


def test_vertices_match_qhull_oracle():
    rng = random.Random(6)
    for dim in (2, 3):
        for _ in range(10):
            pts = np.array([[rng.randint(-5, 5) for _ in range(dim)] for _ in range(15)])
            h = ConvexHull(pts)
            want = {tuple(int(t) for t in pts[i]) for i in h.vertices}
            assert set(convex_hull(pts.tolist()).vertices) == want


def test_polar_dual_examples():
    D = polar_dual(anticanonical_polytope(1))
    assert set(D.vertices) == {(1, 0), (0, 1), (-1, -1)}
    sq = convex_hull([(-1, -1), (1, -1), (-1, 1), (1, 1)])
    assert set(polar_dual(sq).vertices) == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    P = anticanonical_polytope(2)
    assert polar_dual(polar_dual(P)) == P
    assert polar_dual(polar_dual(P)).f_vector() == P.f_vector() == (4, 6, 4, 1)


def test_polar_dual_membership_oracle():
    rng = random.Random(8)
    P = convex_hull([(3, 0), (0, 2), (-2, -1), (1, -3)])
    D = polar_dual(P)
    for _ in range(300):
        x = (F(rng.randint(-80, 80), 97), F(rng.randint(-80, 80), 97))
        assert D.contains(x) == all(v[0] * x[0] + v[1] * x[1] <= 1 for v in P.vertices)


def test_polar_requires_interior_origin():
    with pytest.raises(GeometryError):
        polar_dual(convex_hull([(1, 1), (2, 1), (1, 2)]))


def test_normal_fan_examples():
    fan = normal_fan(convex_hull([(0, 0), (1, 0), (0, 1)]))
    assert len(fan.maximal_cones) == 3
    prim = {tuple(int(t) for t in r) for r in fan.rays}
    assert len(prim) == 3 and sum(np.array(sorted(prim))).tolist() == [0, 0]
    sq = normal_fan(convex_hull([(-1, -1), (1, -1), (-1, 1), (1, 1)]))
    assert len(sq.maximal_cones) == 4 and all(c.is_simplicial for c in sq.maximal_cones)


def test_normal_fan_cone_count_random():
    rng = random.Random(9)
    for k in range(10):
        P = rand_polytope(rng, 2 + k % 2)
        fan = normal_fan(P)
        assert len(fan.maximal_cones) == len(P.vertices)


def test_normal_fan_covers_space():
    rng = random.Random(10)
    fan = normal_fan(anticanonical_polytope(2))
    for _ in range(200):
        x = tuple(F(rng.randint(-50, 50), 7) for _ in range(3))
        assert fan.contains(x)


def test_support_function():
    psi = support_function(convex_hull([(-1,), (1,)]))
    for x in (-3, -1, 0, F(1, 2), 5):
        assert psi((x,)) == abs(x)
    P = anticanonical_polytope(1)
    psi = support_function(P)
    for l in range(3):
        assert psi(ray(1, l)) == 1
    assert psi((0, 0)) == 0


def test_hyperplane_subdivide_quadrant():
    fan = Fan([Cone([(1, 0), (0, 1)])], 2)
    out = hyperplane_subdivide(fan, (1, -1))
    keys = {frozenset(c.rays) for c in out.maximal_cones}
    assert keys == {frozenset({(1, 0), (1, 1)}), frozenset({(1, 1), (0, 1)})}
    assert out.is_unimodular()
    assert hyperplane_subdivide(out, (1, -1)) == out


@pytest.mark.parametrize("n", range(2, 7))
def test_vertex_resolution_staircase(n):
    fan = vertex_resolution_fan(n)
    assert {frozenset(c.rays) for c in fan.maximal_cones} == set(vertex_resolution_expected(n))
    assert fan.is_unimodular()
    # the ray through v_n lies in exactly one maximal cone
    v_n = tuple(int(j == n - 1) + int(j == n) for j in range(n + 2))
    assert sum(1 for c in fan.maximal_cones if c.contains(v_n)) == 1


def test_vertex_resolution_cuts_add_no_ray():
    for n in range(2, 7):
        d = n + 2
        fan = vertex_resolution_fan(n)
        start = Fan([Cone([r for c in vertex_resolution_expected(n) for r in c], d)], d, fan.lattice_basis)
        for i in range(n - 1):
            start = hyperplane_subdivide(start, tuple(int(j <= i) for j in range(n)) + (-1, 0))
            assert len(start.rays) == 2 * n
        assert start == fan


def test_literal_cuts_create_a_new_ray_for_n3():
    fan = vertex_resolution_fan(3, hyperplanes="literal")
    assert len(fan.rays) > 6


def test_is_unimodular_examples():
    assert is_unimodular(Cone([(1, 0), (0, 1)]))
    assert not is_unimodular(Cone([(1, 0), (1, 2)]))
    for c in vertex_resolution_fan(4).maximal_cones:
        assert is_unimodular(c, vertex_resolution_fan(4).lattice_basis)


def test_is_unimodular_rejects_nonsimplicial():
    with pytest.raises(GeometryError):
        is_unimodular(Cone([(1, 0, 1), (0, 1, 1), (-1, 0, 1), (0, -1, 1)]))


def test_off_and_json_round_trip():
    P = anticanonical_polytope(2)
    verts, faces = read_off(P.to_off())
    assert sorted(verts) == sorted(tuple(float(t) for t in v) for v in P.vertices)
    assert len(faces) == 4
    assert Polytope.from_json(P.to_json()) == P
    fan = normal_fan(P)
    assert Fan.from_json(fan.to_json()) == fan


def test_volume_of_simplex_and_cube():
    assert convex_hull([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]).volume() == F(1, 6)
    cube = convex_hull(list(itertools.product((0, 2), repeat=3)))
    assert cube.volume() == 8


pts2 = st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), min_size=3, max_size=12)


@settings(max_examples=60, deadline=None)
@given(pts2)
def test_hull_contains_inputs_and_is_order_invariant(pts):
    P = convex_hull(pts)
    assert all(P.contains(p) for p in pts)
    Q = convex_hull(list(reversed(pts)))
    assert P == Q
    if P.is_full_dimensional:
        assert P.volume() == Q.volume()
        area = ConvexHull(np.array(pts, dtype=float)).volume
        assert abs(float(P.volume()) - area) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 5), st.integers(-5, 5)), min_size=2, max_size=6))
def test_polar_involution_property(data):
    # points around the origin in several directions keep 0 in the interior
    pts = [(a, b) for a, b in data] + [(-a, -b - 1) for a, b in data] + [(1, 0), (-1, 0), (0, 1), (0, -1)]
    P = convex_hull(pts)
    assert polar_dual(polar_dual(P)) == P
