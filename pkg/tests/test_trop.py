import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tropskel.trop import (
    ZERO,
    CompactifiedPoint,
    ConditionViolation,
    all_strata,
    anticanonical_polytope,
    anticanonical_vertex,
    build_spec,
    compactified_val_of_monomial_weight,
    from_ray_coords,
    lattice_points,
    permutation_action,
    ray,
    ray_coords,
    skeleton,
    skeleton_from_polar,
    stratum,
    surviving_pieces,
    tropical_membership,
)

F = Fraction


def _L_pieces(n, x):
    """Brute-force tropical polynomial min(0, 1 - <m_k, x>) piece values."""
    vals = {ZERO: F(0)}
    for k in range(n + 2):
        vals[k] = 1 - sum(a * b for a, b in zip(anticanonical_vertex(n, k), x))
    return vals


@pytest.mark.parametrize("n,count", [(1, 4), (2, 5), (3, 6)])
def test_piece_counts(n, count):
    assert len(build_spec(n).pieces) == count


def test_missing_vertex_is_rejected():
    P = anticanonical_polytope(2)
    with pytest.raises(ConditionViolation):
        build_spec(2, list(P.vertices)[1:])


def test_extra_lattice_points_are_allowed():
    P = anticanonical_polytope(1)
    pts = lattice_points(P)
    assert len(pts) == 10
    spec = build_spec(1, pts)
    assert len(spec.pieces) == 1 + 9  # origin folds into the constant piece


def test_membership_examples():
    spec = build_spec(2)
    bary = from_ray_coords([F(0), F(1, 3), F(1, 3), F(1, 3)])
    assert tropical_membership(spec, bary)
    assert not tropical_membership(spec, (0, 0, 0))
    # on a ray beyond P*: the constant piece is not minimal, three vertex pieces tie
    x = tuple(2 * t for t in ray(2, 1))
    vals = _L_pieces(2, x)
    assert {k for k, v in vals.items() if v == min(vals.values())} == {0, 2, 3}
    assert tropical_membership(spec, x)
    assert tropical_membership(spec, from_ray_coords([F(0), F(3, 2), F(1, 2), F(0)]))


def test_membership_brute_force():
    rng = random.Random(1)
    for n in (1, 2, 3):
        spec = build_spec(n)
        for _ in range(300):
            x = tuple(F(rng.randint(-12, 12), rng.choice([1, 2, 3, 4])) for _ in range(n + 1))
            vals = _L_pieces(n, x)
            m = min(vals.values())
            assert tropical_membership(spec, x) == (sum(v == m for v in vals.values()) >= 2)


def test_membership_via_ray_coordinates():
    """Finite points are in the tropicalization iff C = 1 or (C > 1 and two coordinates vanish)."""
    rng = random.Random(2)
    for n in (1, 2, 3):
        spec = build_spec(n)
        for _ in range(300):
            x = tuple(F(rng.randint(-8, 8), rng.choice([1, 2, 3])) for _ in range(n + 1))
            c = ray_coords(x)
            C = sum(c)
            want = C == 1 or (C > 1 and sum(t == 0 for t in c) >= 2)
            assert tropical_membership(spec, x) == want


def test_surviving_pieces_at_infinity():
    spec = build_spec(2)
    surv = surviving_pieces(spec, frozenset({1}))
    # along v_1 the constant piece and m_1 are dominated
    assert {p.label for p in surv} == {0, 2, 3}
    pt = CompactifiedPoint.make(2, (0, 0, 0), [1])
    assert tropical_membership(spec, pt)


def test_strata_examples():
    spec = build_spec(2)
    facet = stratum(spec, {ZERO, 0})
    assert facet.bounded and facet.dim == 2 and facet.face == frozenset({1, 2, 3})
    vertex = stratum(spec, {ZERO, 0, 1, 2})
    assert vertex.dim == 0 and vertex.face == frozenset({3})
    unb = stratum(spec, {0, 1})
    assert not unb.bounded and unb.face == frozenset({2, 3}) and unb.dim == 3


def test_strata_samples_are_consistent():
    rng = random.Random(3)
    for n in (1, 2, 3):
        spec = build_spec(n)
        for s in all_strata(spec):
            for _ in range(5):
                x = s.sample(rng)
                assert s.contains(x)
                vals = _L_pieces(n, x)
                m = min(vals.values())
                assert {k for k, v in vals.items() if v == m} >= set(s.J)
                assert tropical_membership(spec, x)


def test_skeleton_counts_and_euler():
    for n in (1, 2, 3, 4):
        sk = skeleton(n)
        assert sk.f_vector() == tuple(math.comb(n + 2, k + 1) for k in range(n + 1))
        assert sk.euler_characteristic() == 1 + (-1) ** n
        polar = skeleton_from_polar(build_spec(n))
        assert sorted(map(sorted, polar.faces)) == sorted(map(sorted, sk.faces))
    assert skeleton(2).f_vector() == (4, 6, 4)
    assert skeleton(1).f_vector() == (3, 3)


def test_quasi_monomial_points():
    assert compactified_val_of_monomial_weight(2, {1: 1}).finite_part == ray(2, 1)
    bary = compactified_val_of_monomial_weight(2, {1: F(1, 3), 2: F(1, 3), 3: F(1, 3)})
    assert bary.finite_part == from_ray_coords([0, F(1, 3), F(1, 3), F(1, 3)])
    inf = compactified_val_of_monomial_weight(2, {1: float("inf"), 2: F(1, 2)})
    assert inf.infinity == frozenset({1}) and not inf.is_finite
    with pytest.raises(ValueError):
        compactified_val_of_monomial_weight(2, {0: 1, 1: 1, 2: 1, 3: 1})


def test_permutation_symmetry_of_membership():
    rng = random.Random(4)
    n = 2
    spec = build_spec(n)
    perms = list(itertools.permutations(range(n + 2)))
    for _ in range(50):
        x = tuple(F(rng.randint(-6, 6), 2) for _ in range(n + 1))
        m = tropical_membership(spec, x)
        for p in perms:
            assert tropical_membership(spec, permutation_action(n, p, x)) == m


def test_json_round_trip():
    pt = CompactifiedPoint.make(3, (F(1, 2), 0, 2, -1), [2])
    assert CompactifiedPoint.from_json(3, pt.to_json()) == pt
    doc = build_spec(2).to_json()
    assert len(doc["L_pieces"]) == 5


@settings(max_examples=80, deadline=None)
@given(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=9), min_size=3, max_size=3))
def test_ray_coordinates_round_trip(x):
    c = ray_coords(x)
    assert min(c) == 0 and all(t >= 0 for t in c)
    assert from_ray_coords(c) == tuple(x)
