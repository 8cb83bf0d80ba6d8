"""Random generators shared by the test modules."""
from __future__ import annotations

import random
from fractions import Fraction

from tropskel.convex import PAConvexFunction
from tropskel.geom import convex_hull
from tropskel.valn import LaurentPolynomial, SeriesCoefficient


def rand_frac(rng: random.Random, lo: int = -5, hi: int = 5, den: int = 7) -> Fraction:
    return Fraction(rng.randint(lo * den, hi * den), rng.randint(1, den))


def rand_polytope(rng: random.Random, dim: int, box: int = 3):
    while True:
        pts = [tuple(rng.randint(-box, box) for _ in range(dim)) for _ in range(dim + 1 + rng.randint(0, 4))]
        P = convex_hull(pts)
        if P.is_full_dimensional:
            return P


def point_in(rng: random.Random, P, den: int = 10**6) -> tuple[Fraction, ...]:
    """Random rational point of P as a convex combination of its vertices (interior with probability 1)."""
    w = [rng.randint(1, den) for _ in P.vertices]
    tot = sum(w)
    return tuple(sum(Fraction(wi, tot) * v[i] for wi, v in zip(w, P.vertices)) for i in range(P.ambient_dim))


def rand_admissible(rng: random.Random, P, extra: int = 4) -> PAConvexFunction:
    """Every vertex of P is a slope and the other slopes lie in P, so the slope polytope is P."""
    pieces = [(v, rand_frac(rng)) for v in P.vertices]
    for _ in range(extra):
        pieces.append((point_in(rng, P, den=6), rand_frac(rng)))
    return PAConvexFunction(pieces)


def rand_point(rng: random.Random, dim: int, lo: int = -6, hi: int = 6, den: int = 97) -> tuple[Fraction, ...]:
    return tuple(rand_frac(rng, lo, hi, den) for _ in range(dim))


def rand_coefficient(rng: random.Random) -> SeriesCoefficient:
    terms = []
    for _ in range(rng.randint(1, 3)):
        e = Fraction(rng.randint(-3, 6), rng.randint(1, 4))
        re = rng.randint(-4, 4)
        im = rng.randint(-4, 4)
        if re == 0 and im == 0:
            re = 1
        terms.append((e, (re, im)))
    c = SeriesCoefficient(terms)
    return c if not c.is_zero() else SeriesCoefficient.constant(1)


def rand_laurent(rng: random.Random, nvars: int, terms: int | None = None) -> LaurentPolynomial:
    k = terms or rng.randint(1, 4)
    while True:
        f = LaurentPolynomial(
            [(tuple(rng.randint(-2, 3) for _ in range(nvars)), rand_coefficient(rng)) for _ in range(k)], nvars
        )
        if not f.is_zero():
            return f
