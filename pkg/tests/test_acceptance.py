"""Acceptance suite: one test per criterion, each with its runtime limit.

The terminal summary prints a PASS/FAIL line per criterion (see conftest.py).
"""
from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from _gen import point_in, rand_admissible, rand_frac, rand_laurent, rand_point, rand_polytope
from tropskel.contract import (
    ContractionMap,
    atlas_audit,
    barycentric_cuts,
    check_comparison,
    composed_potential,
    overlap_points,
    random_cuts,
    random_skeleton_pa,
    u_fs,
    vertex_chart,
    face_chart,
)
from tropskel.convex import approximation_sequence, biconjugate, is_admissible, log_sum_exp
from tropskel.geom import convex_hull, is_unimodular, polar_dual, vertex_resolution_fan
from tropskel.ma import (
    fermat_face_problem,
    gradient_cells,
    locate_in_cells,
    ma_measure,
    solve_semidiscrete,
    square_problem,
    symmetry_deviation,
    transform_problem,
)
from tropskel.trop import (
    CompactifiedPoint,
    anticanonical_polytope,
    build_spec,
    from_ray_coords,
    permutation_action,
    ray,
    skeleton,
    skeleton_from_polar,
)
from tropskel.valn import LaurentPolynomial, gauss_valuation, haar_scaling, haar_vs_gauss, multiplicativity_check, ultrametric_check


def _detail(record_property, text: str) -> None:
    record_property("detail", text)


# ---------------------------------------------------------------- 1


@pytest.mark.criterion(1, limit=1)
def test_criterion_01_polar_duality_and_skeleton(record_property):
    for n in (1, 2, 3):
        P = anticanonical_polytope(n)
        assert polar_dual(polar_dual(P)) == P
        assert set(polar_dual(P).vertices) == {ray(n, l) for l in range(n + 2)}
        sk = skeleton(n)
        assert sk.f_vector() == tuple(math.comb(n + 2, k + 1) for k in range(n + 1))
        assert sorted(map(sorted, skeleton_from_polar(build_spec(n)).faces)) == sorted(map(sorted, sk.faces))
    assert skeleton(2).f_vector() == (4, 6, 4)
    _detail(record_property, "P** = P for n=1,2,3; f-vectors (3,3), (4,6,4), (5,10,10,5)")


# ---------------------------------------------------------------- 2


@pytest.mark.criterion(2, limit=30)
def test_criterion_02_biconjugation(record_property):
    rng = random.Random(2)
    checked = 0
    for k in range(50):
        dim = 1 + k % 3
        P = rand_polytope(rng, dim)
        phi = rand_admissible(rng, P)
        assert is_admissible(phi, P).ok
        bb = biconjugate(phi)
        for _ in range(1000):
            x = rand_point(rng, dim)
            assert bb.evaluate(x) == phi.evaluate(x)
            checked += 1
    _detail(record_property, f"{checked} exact evaluations agree")


# ---------------------------------------------------------------- 3


def _lse_exact(V, x) -> mpmath.mpf:
    with mpmath.workdps(40):
        return mpmath.log(mpmath.fsum(mpmath.exp(sum(mpmath.mpf(v_i.numerator) / v_i.denominator * xi for v_i, xi in zip(v, x))) for v in V))


@pytest.mark.criterion(3, limit=60)
def test_criterion_03_monotone_approximation(record_property):
    P = convex_hull([(1, 0), (0, 1), (-1, -1)])
    phi = log_sum_exp(P)
    seq = approximation_sequence(phi, P, 8)
    axis = [Fraction(-3) + Fraction(6 * i, 99) for i in range(100)]
    grid = list(itertools.product(axis, repeat=2))
    assert len(grid) == 10**4
    V = list(P.vertices)
    # phi at 40 digits, rounded up to a rational upper bound with a 1e-30 margin
    truth = []
    for x in grid:
        with mpmath.workdps(40):
            val = _lse_exact(V, [mpmath.mpf(t.numerator) / t.denominator for t in x])
            truth.append(Fraction(str(mpmath.nstr(val, 35))) + Fraction(1, 10**30))
    gaps = []
    prev = None
    for j, pj in enumerate(seq):
        vals = [pj.evaluate(x) for x in grid]
        assert all(v >= t for v, t in zip(vals, truth)), f"phi_{j} < phi somewhere"
        if prev is not None:
            assert all(a >= b for a, b in zip(prev, vals)), f"phi_{j - 1} < phi_{j} somewhere"
        gaps.append(max(v - t for v, t in zip(vals, truth)))
        prev = vals
    assert all(a >= b for a, b in zip(gaps, gaps[1:]))
    _detail(record_property, "sup gaps " + ", ".join(f"{float(g):.3g}" for g in gaps))


# ---------------------------------------------------------------- 4


def _skeleton_points(n: int, rng: random.Random, count: int):
    sk = skeleton(n)
    out = []
    for _ in range(count):
        f = rng.choice(sk.faces)
        w = {l: Fraction(rng.randint(1, 60)) for l in f}
        tot = sum(w.values())
        out.append(from_ray_coords([w.get(l, Fraction(0)) / tot for l in range(n + 2)]))
    return out


def _trop_points(n: int, rng: random.Random, count: int, den: int = 60):
    """Points with ray-coordinate sum > 1 and at least two zero coordinates (plus skeleton points)."""
    out = []
    for _ in range(count):
        sub = sorted(rng.sample(range(n + 2), rng.randint(1, n)))
        w = {l: Fraction(rng.randint(1, den)) for l in sub}
        tot = sum(w.values())
        c = [w.get(l, Fraction(0)) / tot for l in range(n + 2)]
        for l in sub:
            c[l] += Fraction(rng.randint(0, 3 * den), den)
        out.append(from_ray_coords(c))
    return out


def _boundary_points(cuts, rng: random.Random, count: int):
    """w on a proper sub-chain of a flag (so w sits on a cell boundary) plus a push along the bottom."""
    n = cuts.n
    out = []
    for _ in range(count):
        S = rng.sample(range(n + 2), rng.randint(2, n))
        chain = [frozenset(S[: k + 1]) for k in range(len(S))]
        b = rng.randrange(len(chain))
        bottom = chain[b]
        keep = [f for f in chain[b:] if rng.random() < 0.5] or [chain[-1]]
        wts = [Fraction(rng.randint(1, 9)) for _ in keep]
        tot = sum(wts)
        c = [sum(w * cuts[f][l] for w, f in zip(wts, keep)) / tot for l in range(n + 2)]
        for l in bottom:
            c[l] += Fraction(rng.randint(0, 12), 4)
        out.append(from_ray_coords(c))
    return out


@pytest.mark.criterion(4, limit=60)
def test_criterion_04_contraction_laws(record_property):
    rng = random.Random(4)
    counts = {"identity": 0, "locality": 0, "overlap_points": 0, "equivariance": 0}
    for n in (2, 3):
        spec = build_spec(n)
        sk = skeleton(n)
        for cuts in (barycentric_cuts(sk), random_cuts(sk, rng)):
            cm = ContractionMap(spec, cuts)
            # identity on the skeleton
            for w in _skeleton_points(n, rng, 200):
                assert cm.contract(w) == w
                counts["identity"] += 1
            # locality along v_i inside the open star of vertex i
            from tropskel.contract import open_star_samples

            for i in range(n + 2):
                for w in open_star_samples(cuts, i, rng, 6):
                    d = cm.contract(w)
                    for a in (0, 1, 2, 10):
                        x = tuple(wi + a * vi for wi, vi in zip(w, ray(n, i)))
                        assert cm.contract(x) == d
                    assert cm.contract(CompactifiedPoint.make(n, w, [i])) == d
                    counts["locality"] += 5
            # overlaps: coarse rational grid points sit on region boundaries
            for x in _boundary_points(cuts, rng, 60) + _trop_points(n, rng, 20, den=4):
                decs = cm.decompositions(x)
                if len({(d.bottom, d.chain) for d in decs}) > 1:
                    assert len({d.w for d in decs}) == 1
                    counts["overlap_points"] += 1
        # S_{n+2} equivariance on the Fermat preset (barycentric cuts are symmetric)
        cm = ContractionMap(spec, barycentric_cuts(sk))
        pts = _trop_points(n, rng, 4 if n == 3 else 10)
        base = {x: cm.contract(x) for x in pts}
        for perm in itertools.permutations(range(n + 2)):
            for x in pts:
                assert cm.contract(permutation_action(n, perm, x)) == permutation_action(n, perm, base[x])
                counts["equivariance"] += 1
        # with generic cuts, permuting the cuts along with the point
        cuts = random_cuts(sk, rng)
        cm = ContractionMap(spec, cuts)
        for perm in list(itertools.permutations(range(n + 2)))[:: 5 if n == 3 else 1]:
            cmp = ContractionMap(spec, cuts.permute(perm))
            for x in pts[:3]:
                assert cmp.contract(permutation_action(n, perm, x)) == permutation_action(n, perm, cm.contract(x))
                counts["equivariance"] += 1
    assert counts["identity"] >= 800 and counts["overlap_points"] >= 50
    _detail(record_property, ", ".join(f"{k}={v}" for k, v in counts.items()))


# ---------------------------------------------------------------- 5


@pytest.mark.criterion(5, limit=30)
def test_criterion_05_integral_affine_atlas(record_property):
    summary = []
    for n in (2, 3):
        sk = skeleton(n)
        cuts = barycentric_cuts(sk)
        rows = atlas_audit(sk, cuts)
        assert len(rows) == (n + 2) * (n + 1)
        bad = [r for r in rows if not (r["report"].integral and abs(r["report"].det) == 1)]
        assert not bad, bad
        # the remaining chart pairs have disjoint domains
        for i, j in itertools.combinations(range(n + 2), 2):
            assert overlap_points(cuts, vertex_chart(sk, i), vertex_chart(sk, j)) == []
        for f, g in itertools.combinations(sk.maximal_faces, 2):
            assert overlap_points(cuts, face_chart(sk, f), face_chart(sk, g)) == []
        summary.append(f"n={n}: {len(rows)} transitions unimodular")
    _detail(record_property, "; ".join(summary))


# ---------------------------------------------------------------- 6


@pytest.mark.criterion(6, limit=5)
def test_criterion_06_vertex_small_resolution(record_property):
    for n in range(2, 7):
        fan = vertex_resolution_fan(n)
        assert len(fan.maximal_cones) == n
        assert all(c.is_simplicial and is_unimodular(c, fan.lattice_basis) for c in fan.maximal_cones)
        original = {tuple(int(j == i) + int(j == n) for j in range(n + 2)) for i in range(n)}
        original |= {tuple(int(j == i) + int(j == n + 1) for j in range(n + 2)) for i in range(n)}
        assert set(fan.rays) == original
    _detail(record_property, "n=2..6: n unimodular cones, rays unchanged")


# ---------------------------------------------------------------- 7


@pytest.mark.criterion(7, limit=60)
def test_criterion_07_ma_mass_conservation(record_property):
    rng = random.Random(7)
    trials = violations = 0
    for k in range(50):
        dim = 1 + k % 3
        P = rand_polytope(rng, dim)
        phi = rand_admissible(rng, P)
        assert ma_measure(phi, P).total_mass == P.volume()
        cells = gradient_cells(phi, P)
        for _ in range(200):
            u = point_in(rng, P)
            if len(locate_in_cells(cells, u)) != 1:
                violations += 1
            trials += 1
    assert trials == 10**4 and violations == 0
    _detail(record_property, f"50 functions exact; {trials} locations, {violations} violations")


# ---------------------------------------------------------------- 8


@pytest.mark.criterion(8, limit=300)
def test_criterion_08_semidiscrete_solver(record_property):
    sq = solve_semidiscrete(square_problem(), tol=1e-10)
    assert sq.residual < 1e-9
    prob = fermat_face_problem(2, grid=8)
    assert len(prob.sites) == 45
    sol = solve_semidiscrete(prob, tol=1e-8)
    assert sol.residual < 1e-8
    sym = symmetry_deviation(sol)
    assert sym < 1e-8
    shear = transform_problem(prob, [[1, 1], [0, 1]], (0, 0))
    sol2 = solve_semidiscrete(shear, tol=1e-10)
    dev = float(np.abs(sol2.weights - sol.weights).max())
    assert sol2.residual < 1e-9 and dev < 1e-9
    _detail(
        record_property,
        f"square {sq.residual:.1e}; fermat {sol.residual:.1e} ({sol.iterations} its), symmetry {sym:.1e}; shear {dev:.1e}",
    )


# ---------------------------------------------------------------- 9


@pytest.mark.criterion(9, limit=30)
def test_criterion_09_comparison_checker(record_property):
    rng = random.Random(9)
    n = 2
    spec = build_spec(n)
    cuts = barycentric_cuts(skeleton(n))
    for _ in range(10):
        u = composed_potential(cuts, random_skeleton_pa(cuts, rng), spec)
        rep = check_comparison(u, cuts, spec, samples=10, seed=rng.randrange(10**6))
        assert rep.ok, (rep.linearity_defect, rep.invariance_defect)
    fs = u_fs(n)
    named = []
    for m0 in ((1, 0, 0), (1, 2, -3), (0, 1, -1)):
        expected = [i for i in range(n + 2) if sum(a * b for a, b in zip(m0, ray(n, i))) != 0]
        for eps in (Fraction(1, 7), Fraction(1, 13)):
            def u(x, m0=m0, eps=eps):
                return fs(x) + eps * sum(a * b for a, b in zip(m0, x))

            rep = check_comparison(u, cuts, spec, samples=10, seed=1)
            assert not rep.ok
            assert rep.failing_vertex_regions == expected
            named.append(f"{m0}:{expected}")
    _detail(record_property, "10 composed potentials pass; perturbations name " + " ".join(sorted(set(named))))


# ---------------------------------------------------------------- 10


HAAR_FAMILIES = {
    "1+z1+z2": (["1+z1+z2"], None),
    "1+z1-2z1z2": (["1+z1-2*z1*z2"], None),
    "laurent": (["z1^2+z2+3+z1^-1*z2^-1"], None),
    "max-pair": (["1+z1", "1+z2"], [0.0, 0.3]),
    "gaussian": (["(1+2i)+z1+z2^2+z1*z2"], None),
}
HAAR_X = [(0.0, 0.0), (0.3, -0.2), (1.0, 0.5), (-0.7, 0.4), (0.25, 0.25)]
HAAR_LAMBDAS = (0.2, 0.1, 0.05, 0.025)


@pytest.mark.criterion(10, limit=180)
def test_criterion_10_haar_vs_gauss(record_property):
    worst = 0.0
    worst_z = 0.0
    for name, (texts, consts) in HAAR_FAMILIES.items():
        polys = [LaurentPolynomial.parse(t, 2) for t in texts]
        for x in HAAR_X:
            a = haar_scaling(polys, consts, x, HAAR_LAMBDAS, samples=2**16, shifts=8, seed=0)
            b = haar_scaling(polys, consts, x, HAAR_LAMBDAS, samples=2**17, shifts=8, seed=0)
            assert math.isfinite(a["max_ratio"]) and math.isfinite(b["max_ratio"])
            se = math.hypot(a["max_ratio_stderr"], b["max_ratio_stderr"])
            z = abs(a["max_ratio"] - b["max_ratio"]) / se if se > 0 else (0.0 if a["max_ratio"] == b["max_ratio"] else math.inf)
            assert z <= 2, f"{name} at x={x}: {a['max_ratio']} vs {b['max_ratio']} (combined stderr {se:.2e})"
            worst = max(worst, a["max_ratio"], b["max_ratio"])
            worst_z = max(worst_z, z)
    mono = [LaurentPolynomial.parse("z1^2*z2^-1", 2)]
    for x in HAAR_X:
        for lam in HAAR_LAMBDAS:
            assert haar_vs_gauss(mono, None, x, lam, samples=2**16).error < 1e-12
    _detail(record_property, f"max error/lambda {worst:.3f}; worst shift z-score {worst_z:.2f}; monomial exact")


# ---------------------------------------------------------------- 11


def _product_oracle(f: LaurentPolynomial, g: LaurentPolynomial) -> LaurentPolynomial:
    """Untruncated product by dictionary convolution."""
    acc: dict = {}
    for m1, a1 in f.terms.items():
        for m2, a2 in g.terms.items():
            m = tuple(p + q for p, q in zip(m1, m2))
            for e1, c1 in a1.terms:
                for e2, c2 in a2.terms:
                    key = (m, e1 + e2)
                    re, im = acc.get(key, (0, 0))
                    acc[key] = (re + c1[0] * c2[0] - c1[1] * c2[1], im + c1[0] * c2[1] + c1[1] * c2[0])
    terms: dict = {}
    for (m, e), c in acc.items():
        if c != (0, 0):
            terms.setdefault(m, []).append((e, c))
    from tropskel.valn import SeriesCoefficient

    return LaurentPolynomial([(m, SeriesCoefficient(t)) for m, t in terms.items()], f.nvars)


def _oracle_valuation(f: LaurentPolynomial, x) -> Fraction:
    return min(a.terms[0][0] + sum(Fraction(xi) * mi for xi, mi in zip(x, m)) for m, a in f.terms.items())


def _series(*terms):
    from tropskel.valn import SeriesCoefficient

    return SeriesCoefficient([(Fraction(e), c) for e, c in terms])


# f = chi^m + t u, g = chi^m' - t u' with the leading cross terms tuned to cancel
ENGINEERED = [
    (LaurentPolynomial.parse("z1+t*z2", 2), LaurentPolynomial.parse("z1-t*z2", 2), (Fraction(1), Fraction(0))),
    (
        LaurentPolynomial([((1, 0), _series((0, 1), (1, 1))), ((0, 1), _series((0, 1), (1, -1)))], 2),
        LaurentPolynomial([((1, 0), _series((0, 1), (1, -1))), ((0, 1), _series((0, -1), (1, -1)))], 2),
        (Fraction(0), Fraction(0)),
    ),
    (
        LaurentPolynomial.parse("z1^2+t^1/2*z1*z2+t*z2^2", 2),
        LaurentPolynomial.parse("z1^2-t^1/2*z1*z2+t*z2^2", 2),
        (Fraction(1, 2), Fraction(0)),
    ),
    (LaurentPolynomial.parse("1+t*z1^-1", 2), LaurentPolynomial.parse("1-t*z1^-1", 2), (Fraction(1), Fraction(0))),
]


@pytest.mark.criterion(11, limit=30)
def test_criterion_11_valuation_axioms(record_property):
    rng = random.Random(11)
    pairs = 0
    for dim in (1, 2, 3):
        for _ in range(100):
            f, g = rand_laurent(rng, dim), rand_laurent(rng, dim)
            x = rand_point(rng, dim, -3, 3, 11)
            res = multiplicativity_check(f, g, x)
            assert res.status == "true", (f, g, x, res)
            assert res.v_fg == _oracle_valuation(_product_oracle(f, g), x)
            assert ultrametric_check(f, g, x)
            # the sum against a tuned negative: shares its leading terms with f
            h = LaurentPolynomial([(m, -a) for m, a in list(f.terms.items())[:1]], dim) + g
            if not (f + h).is_zero():
                assert ultrametric_check(f, h, x)
            pairs += 1
    for f, g, x in ENGINEERED:
        res = multiplicativity_check(f, g, x)
        assert res.status == "true"
        assert res.v_fg == gauss_valuation(f, x) + gauss_valuation(g, x) == _oracle_valuation(_product_oracle(f, g), x)
        assert ultrametric_check(f, g, x)
    _detail(record_property, f"{pairs} random pairs and {len(ENGINEERED)} engineered cases exact")
