import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import Polygon

from _gen import rand_admissible, rand_polytope
from tropskel import _kernels
from tropskel._kernels import _pykernels
from tropskel.convex import PAConvexFunction
from tropskel.geom import convex_hull
from tropskel.ma import (
    AtomicMeasure,
    InfeasibleProblem,
    SemiDiscreteProblem,
    barycentric_dual_areas,
    fermat_face_problem,
    gradient_cells,
    gradient_image,
    locate_in_cells,
    ma_measure,
    ma_residual,
    na_ma_pushforward,
    newton_step,
    quadratic_interpolant,
    solve_semidiscrete,
    square_problem,
    symmetry_deviation,
    target_measure,
    transform_problem,
    triangular_grid,
)
from tropskel.trop import anticanonical_polytope

F = Fraction


def _support(P):
    return PAConvexFunction([(v, 0) for v in P.vertices])


def test_gradient_image_examples():
    absval = PAConvexFunction([((1,), 0), ((-1,), 0)])
    assert set(gradient_image(absval, (0,)).cell.vertices) == {(1,), (-1,)}
    assert list(gradient_image(absval, (2,)).cell.vertices) == [(1,)]
    P = anticanonical_polytope(1)
    assert gradient_image(_support(P), (0, 0)).cell == P


def test_ma_of_support_function_is_single_atom():
    for n in (1, 2):
        P = anticanonical_polytope(n)
        mu = ma_measure(_support(P), P)
        assert mu.atoms == [(tuple(F(0) for _ in range(n + 1)), P.volume())]
        assert na_ma_pushforward(_support(P)).total_mass == math.factorial(n + 1) * P.volume()


def test_ma_one_dimensional_atoms():
    phi = PAConvexFunction([((0,), 0), ((1,), -1), ((-1,), -1)])
    mu = ma_measure(phi)
    assert mu.as_dict() == {(F(1),): F(1), (F(-1),): F(1)}


def test_ma_locations_brute_force():
    """Every generic gradient lands in exactly one cell, at the vertex where it is attained."""
    rng = random.Random(1)
    P = rand_polytope(rng, 2)
    phi = rand_admissible(rng, P)
    cells = gradient_cells(phi, P)
    for _ in range(200):
        u = (F(rng.randint(-10**6, 10**6), 10**6 + 7) * 3, F(rng.randint(-10**6, 10**6), 10**6 + 3) * 3)
        if not P.contains(u, strict=True):
            continue
        hit = locate_in_cells(cells, u)
        assert len(hit) == 1
        x = cells[hit[0]].base_point
        # u is a subgradient at x: <u, x> - phi(x) beats every other domain vertex
        val = sum(a * b for a, b in zip(u, x)) - phi(x)
        for c in cells:
            y = c.base_point
            assert val >= sum(a * b for a, b in zip(u, y)) - phi(y)


@pytest.mark.parametrize("k,total", [(4, F(9, 4)), (8, F(49, 16)), (16, F(225, 64))])
def test_quadratic_interpolant_masses(k, total):
    phi = quadratic_interpolant(k)
    mu = ma_measure(phi)
    assert mu.total_mass == total
    h = F(2, k)
    inner = [m for x, m in mu.atoms if all(abs(t) < 1 for t in x)]
    assert len(inner) == (k - 1) ** 2 and set(inner) == {h * h}


def test_semidiscrete_single_site():
    Q = convex_hull([(0, 0), (2, 0), (0, 3)])
    prob = SemiDiscreteProblem([[0.3, 0.3]], [3.0], Q)
    sol = solve_semidiscrete(prob)
    assert sol.converged and sol.residual < 1e-12


def test_square_and_fermat_problems():
    sol = solve_semidiscrete(square_problem())
    assert sol.residual <= 1e-12
    assert ma_residual(sol, target_measure(sol.problem)) <= 1e-12
    fer = solve_semidiscrete(fermat_face_problem(grid=6))
    assert fer.converged and fer.residual < 1e-12
    assert symmetry_deviation(fer) < 1e-9
    bal = fer.mass_balance()
    assert abs(bal["total_target"] - 24) < 1e-12 and abs(bal["total_cells"] - 24) < 1e-9


def test_perturbed_weights_recover():
    prob = fermat_face_problem(grid=4)
    sol = solve_semidiscrete(prob)
    h = sol.weights.copy()
    h[3] += 1e-3
    areas, _ = prob.cell_data(h)
    r0 = np.abs(areas - prob.masses).max()
    assert r0 > 0
    _, _, r1, tau = newton_step(prob, h)
    assert tau > 0 and r1 < r0 * 0.1


def test_infeasible_inputs():
    Q = convex_hull([(0, 0), (1, 0), (0, 1)])
    with pytest.raises(InfeasibleProblem):
        SemiDiscreteProblem([[0, 0], [1, 0]], [0.1, 0.1], Q)
    with pytest.raises(InfeasibleProblem):
        SemiDiscreteProblem([[0, 0], [0, 0]], [0.25, 0.25], Q)
    with pytest.raises(ValueError):
        SemiDiscreteProblem(np.zeros((0, 2)), [], Q)
    with pytest.raises(ValueError):
        ma_residual(solve_semidiscrete(square_problem()), AtomicMeasure([]))


def test_cells_match_polygon_areas():
    sol = solve_semidiscrete(fermat_face_problem(grid=4))
    for poly, m in zip(sol.cells(), sol.masses):
        assert abs(Polygon(poly).area - m) < 1e-10


def test_potential_interpolates_weights():
    sol = solve_semidiscrete(square_problem())
    for y, h in zip(sol.problem.sites, sol.weights):
        assert abs(sol.potential(y) - h) < 1e-10


def test_barycentric_dual_areas_sum():
    for g in (1, 2, 5):
        areas = barycentric_dual_areas(g)
        assert sum(areas.values()) == F(1, 2)
        assert set(areas) == set(triangular_grid(g))
    # a corner touches one small triangle of area 1/18 and keeps a third of it
    assert barycentric_dual_areas(3)[(0, 0)] == F(1, 54)


def test_unimodular_transform_preserves_masses():
    prob = square_problem()
    sheared = transform_problem(prob, [[1, 1], [0, 1]])
    a = solve_semidiscrete(prob)
    b = solve_semidiscrete(sheared)
    assert np.allclose(a.weights, b.weights, atol=1e-9)
    with pytest.raises(ValueError):
        transform_problem(prob, [[2, 0], [0, 1]])


def test_backends_agree():
    prob = fermat_face_problem(grid=8)
    h = prob.initial_weights() + np.random.default_rng(0).normal(scale=1e-2, size=len(prob.sites))
    a1, l1 = _kernels.laguerre_2d(prob.Q, prob.sites, h, backend="cython")
    a2, l2 = _pykernels.laguerre_2d(prob.Q, prob.sites, h)
    assert np.allclose(a1, a2, atol=1e-12) and np.allclose(l1, l2, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-5, 5)), min_size=3, max_size=8))
def test_ma_total_mass_is_slope_volume(data):
    slopes = [(a, b) for a, b, _ in data]
    P = convex_hull(slopes)
    if not P.is_full_dimensional:
        return
    phi = PAConvexFunction([((a, b), c) for a, b, c in data])
    assert ma_measure(phi).total_mass == phi.slope_polytope().volume() == P.volume()


def test_quadratic_interpolant_tends_to_uniform():
    """Quadrant histogram of the atoms against Lebesgue measure on [-1, 1]^2 (mass 1 per quadrant);
    atoms on an axis are shared equally between the adjacent quadrants."""

    def split(t):
        return [(1, F(1))] if t > 0 else [(0, F(1))] if t < 0 else [(0, F(1, 2)), (1, F(1, 2))]

    def deviation(k):
        bins = {(i, j): F(0) for i in (0, 1) for j in (0, 1)}
        for (x, y), m in ma_measure(quadratic_interpolant(k)).atoms:
            for i, a in split(x):
                for j, b in split(y):
                    bins[i, j] += m * a * b
        return sum(abs(v - 1) for v in bins.values())

    devs = [deviation(k) for k in (4, 8, 16, 32)]
    for a, b in zip(devs, devs[1:]):
        assert b > 0 and a / b >= F(3, 2)
