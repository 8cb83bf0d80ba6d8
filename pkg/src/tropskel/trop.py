"""Tropical hypersurfaces of degree n+2 in P^{n+1}: the min-PL function L, its
compactified tropicalization, the strata and the skeleton (boundary of P*).

Conventions: N = Z^{n+1} with rays v_l = e_l (l = 1..n+1) and v_0 = -(v_1 + ... + v_{n+1}).
The anticanonical polytope is P = {m : <m, v_l> <= 1 for all l}; its vertex m_k is the
unique point with <m_k, v_l> = 1 for l != k (so <m_k, v_k> = -(n+1)), and P* = conv(v_l).
Points of N_R are handled through ray coordinates: x = sum_l c_l v_l with c >= 0, min c = 0.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from ._exact import Vec, dot, frac, vec
from .geom import Cone, Polytope, convex_hull, polar_dual, rat_to_json

ZERO = "0"  # label of the constant piece of L inside index sets J


def ray(n: int, l: int) -> Vec:
    if l == 0:
        return tuple(Fraction(-1) for _ in range(n + 1))
    return tuple(Fraction(int(j == l - 1)) for j in range(n + 1))


def rays(n: int) -> list[Vec]:
    return [ray(n, l) for l in range(n + 2)]


def anticanonical_vertex(n: int, k: int) -> Vec:
    """m_k: pairs to 1 with every ray except v_k."""
    if k == 0:
        return tuple(Fraction(1) for _ in range(n + 1))
    return tuple(Fraction(1 if j != k - 1 else -(n + 1)) for j in range(n + 1))


def anticanonical_polytope(n: int) -> Polytope:
    return convex_hull([anticanonical_vertex(n, k) for k in range(n + 2)])


def ray_coords(x: Sequence) -> Vec:
    """Coefficients c >= 0 with min c = 0 and x = sum c_l v_l."""
    x = vec(x)
    t = max(Fraction(0), -min(x))
    return (t,) + tuple(xi + t for xi in x)


def from_ray_coords(c: Sequence) -> Vec:
    c = vec(c)
    return tuple(ci - c[0] for ci in c[1:])


def lattice_points(P: Polytope) -> list[tuple[int, ...]]:
    """Integer points of a full-dimensional polytope by enumeration of its bounding box."""
    d = P.ambient_dim
    lo = [math.floor(min(v[i] for v in P.vertices)) for i in range(d)]
    hi = [math.ceil(max(v[i] for v in P.vertices)) for i in range(d)]
    out = []
    for p in itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)]):
        if P.contains(p):
            out.append(p)
    return out


# ---------------------------------------------------------------- spec


@dataclass(frozen=True)
class LPiece:
    """Affine piece constant - <m, x> of the min-PL function L; label ZERO or a lattice point."""

    label: object
    m: Vec
    constant: Fraction

    def value(self, x: Sequence) -> Fraction:
        return self.constant - dot(self.m, x)


@dataclass(frozen=True)
class TropicalHypersurfaceSpec:
    n: int
    P: Polytope
    active_monomials: tuple[Vec, ...]
    pieces: tuple[LPiece, ...]

    def L(self, x: Sequence) -> Fraction:
        x = vec(x)
        return min(p.value(x) for p in self.pieces)

    def minimizers(self, x: Sequence) -> list[LPiece]:
        x = vec(x)
        vals = [p.value(x) for p in self.pieces]
        m = min(vals)
        return [p for p, v in zip(self.pieces, vals) if v == m]

    def vertex_index(self, m: Sequence) -> int | None:
        m = vec(m)
        for k in range(self.n + 2):
            if anticanonical_vertex(self.n, k) == m:
                return k
        return None

    def to_json(self) -> dict:
        return {
            "type": "tropical_spec",
            "n": self.n,
            "polytope": self.P.to_json(),
            "active_monomials": [[rat_to_json(t) for t in m] for m in self.active_monomials],
            "L_pieces": [
                {"label": "zero" if p.label == ZERO else str(p.label),
                 "m": [rat_to_json(t) for t in p.m], "constant": rat_to_json(p.constant)}
                for p in self.pieces
            ],
        }


class ConditionViolation(ValueError):
    pass


def build_spec(n: int, active: Iterable[Sequence] | str = "fermat") -> TropicalHypersurfaceSpec:
    """L(x) = min(0, min over active m of 1 - <m, x>); every vertex of P must be active."""
    if n < 1:
        raise ValueError("n must be >= 1")
    P = anticanonical_polytope(n)
    if isinstance(active, str):
        if active != "fermat":
            raise ValueError(f"unknown preset {active!r}")
        act = [anticanonical_vertex(n, k) for k in range(n + 2)]
    else:
        act = sorted(set(vec(m) for m in active))
    for m in act:
        if any(t.denominator != 1 for t in m) or not P.contains(m):
            raise ValueError(f"active monomial {m} is not a lattice point of P")
    missing = [v for v in P.vertices if v not in set(act)]
    if missing:
        raise ConditionViolation(f"Newton polytope condition fails: vertices {missing} are not active")
    zero = tuple(Fraction(0) for _ in range(n + 1))
    pieces = [LPiece(ZERO, zero, Fraction(0))]
    vidx = {anticanonical_vertex(n, k): k for k in range(n + 2)}
    for m in act:
        if m == zero:
            continue  # the monomial at 0 gives the constant piece 1, dominated by 0
        pieces.append(LPiece(vidx.get(m, m), m, Fraction(1)))
    return TropicalHypersurfaceSpec(n, P, tuple(act), tuple(pieces))


# ---------------------------------------------------------------- compactified points


@dataclass(frozen=True)
class CompactifiedPoint:
    """Point of the toric partial compactification N_Sigma.

    ``infinity`` is the set of ray indices spanning the infinity cone sigma (empty for points
    of N_R). ``coords`` are ray coordinates of the finite part, canonically normalized:
    zero on ``infinity`` and with minimum zero over the remaining indices.
    """

    n: int
    infinity: frozenset
    coords: Vec

    @classmethod
    def make(cls, n: int, x: Sequence, infinity: Iterable[int] = ()) -> "CompactifiedPoint":
        inf = frozenset(infinity)
        if len(inf) > n + 1 or any(not 0 <= l <= n + 1 for l in inf):
            raise ValueError("infinity cone must be spanned by a proper subset of the rays")
        c = list(ray_coords(x))
        return cls._normalized(n, inf, c)

    @classmethod
    def from_ray_coords(cls, n: int, c: Sequence, infinity: Iterable[int] = ()) -> "CompactifiedPoint":
        inf = frozenset(infinity)
        c = [frac(t) for t in c]
        if len(c) != n + 2:
            raise ValueError("ray coordinates must have n + 2 entries")
        return cls._normalized(n, inf, c)

    @classmethod
    def _normalized(cls, n: int, inf: frozenset, c: list[Fraction]) -> "CompactifiedPoint":
        if len(inf) > n + 1:
            raise ValueError("infinity cone must be spanned by a proper subset of the rays")
        for l in inf:
            c[l] = Fraction(0)
        rest = [c[l] for l in range(n + 2) if l not in inf]
        m = min(rest)
        c = [Fraction(0) if l in inf else c[l] - m for l in range(n + 2)]
        return cls(n, inf, tuple(c))

    @property
    def is_finite(self) -> bool:
        return not self.infinity

    @property
    def finite_part(self) -> Vec:
        """Canonical representative in N_R of the finite part."""
        return from_ray_coords(self.coords)

    @property
    def infinity_cone(self) -> Cone:
        return Cone([ray(self.n, l) for l in sorted(self.infinity)], self.n + 1)

    def approach(self, s) -> Vec:
        """Finite point finite_part + s * sum_{l in infinity} v_l."""
        s = frac(s)
        c = [t + (s if l in self.infinity else 0) for l, t in enumerate(self.coords)]
        return from_ray_coords(c)

    def permute(self, perm: Sequence[int]) -> "CompactifiedPoint":
        """Relabel rays l -> perm[l]."""
        c = [Fraction(0)] * (self.n + 2)
        for l, t in enumerate(self.coords):
            c[perm[l]] = t
        return CompactifiedPoint._normalized(self.n, frozenset(perm[l] for l in self.infinity), c)

    def to_json(self) -> dict:
        return {
            "infinity": sorted(self.infinity),
            "finite_part": [rat_to_json(t) for t in self.finite_part],
        }

    @classmethod
    def from_json(cls, n: int, data: Mapping) -> "CompactifiedPoint":
        from .geom import rat_from_json

        return cls.make(n, [rat_from_json(t) for t in data["finite_part"]], data.get("infinity", ()))


def as_point(spec_or_n, pt) -> CompactifiedPoint:
    n = spec_or_n if isinstance(spec_or_n, int) else spec_or_n.n
    if isinstance(pt, CompactifiedPoint):
        return pt
    return CompactifiedPoint.make(n, pt)


def surviving_pieces(spec: TropicalHypersurfaceSpec, infinity: frozenset) -> list[LPiece]:
    """Pieces that dominate the minimum when approaching the orbit of the cone on ``infinity``.

    Along x + s * v_sigma (v_sigma = sum of the cone's rays) piece p changes by -s <m_p, v_sigma>,
    so for large s only the pieces maximizing <m_p, v_sigma> can attain the minimum.
    """
    if not infinity:
        return list(spec.pieces)
    vs = [sum((ray(spec.n, l)[i] for l in infinity), Fraction(0)) for i in range(spec.n + 1)]
    score = [dot(p.m, vs) for p in spec.pieces]
    best = max(score)
    return [p for p, s in zip(spec.pieces, score) if s == best]


def tropical_membership(spec: TropicalHypersurfaceSpec, pt) -> bool:
    """True iff at least two pieces of L attain the minimum (among the surviving pieces at infinity)."""
    pt = as_point(spec, pt)
    if pt.n != spec.n:
        raise ValueError("point and spec have different dimensions")
    pieces = surviving_pieces(spec, pt.infinity)
    x = pt.finite_part
    vals = [p.value(x) for p in pieces]
    m = min(vals)
    return sum(1 for v in vals if v == m) >= 2


# ---------------------------------------------------------------- strata and skeleton


@dataclass(frozen=True)
class Stratum:
    """Closure of the locus where exactly the pieces in J tie.

    ``face`` is the set of ray indices of tau_{J'} = conv(v_l : l not in J'); ``bounded`` tells
    whether the carrier is tau itself or tau + cone(tau).
    """

    J: frozenset
    face: frozenset
    bounded: bool
    n: int

    @property
    def dim(self) -> int:
        if not self.face:
            return -1
        return len(self.face) - 1 + (0 if self.bounded else len(self.face))

    @property
    def empty(self) -> bool:
        return not self.face

    def contains(self, x: Sequence) -> bool:
        c = ray_coords(x)
        if any(c[l] != 0 for l in range(self.n + 2) if l not in self.face):
            return False
        C = sum(c)
        return C == 1 if self.bounded else C >= 1

    def sample(self, rng: random.Random, denom: int = 97) -> Vec:
        if self.empty:
            raise ValueError("empty stratum")
        face = sorted(self.face)
        w = [Fraction(rng.randint(1, denom)) for _ in face]
        tot = sum(w)
        scale = Fraction(1) if self.bounded else 1 + Fraction(rng.randint(0, 4 * denom), denom)
        c = [Fraction(0)] * (self.n + 2)
        for l, wi in zip(face, w):
            c[l] = wi / tot * scale
        if not self.bounded:
            # add a point of cone(tau) that is not a multiple of the barycenter
            for l in face:
                c[l] += Fraction(rng.randint(0, denom), denom)
        return from_ray_coords(c)

    def carrier(self) -> Polytope | None:
        if self.empty or not self.bounded:
            return None
        return convex_hull([ray(self.n, l) for l in self.face])


def stratum(spec: TropicalHypersurfaceSpec, J: Iterable) -> Stratum:
    """J is a set of piece labels: ZERO and/or vertex indices k (for m_k)."""
    J = frozenset(J)
    if len(J) < 2:
        raise ValueError("strata need |J| >= 2")
    Jp = set()
    for j in J:
        if j == ZERO:
            continue
        if not isinstance(j, int) or not 0 <= j <= spec.n + 1:
            raise ValueError(f"unknown piece label {j!r}")
        Jp.add(j)
    face = frozenset(l for l in range(spec.n + 2) if l not in Jp)
    if len(face) == spec.n + 2:
        face = frozenset()
    return Stratum(J, face, ZERO in J, spec.n)


def all_strata(spec: TropicalHypersurfaceSpec) -> list[Stratum]:
    labels = [ZERO] + list(range(spec.n + 2))
    out = []
    for r in range(2, len(labels) + 1):
        for J in itertools.combinations(labels, r):
            s = stratum(spec, J)
            if not s.empty:
                out.append(s)
    return out


@dataclass
class SkeletonComplex:
    """Boundary complex of P* = conv(v_0..v_{n+1}); faces are proper nonempty sets of ray indices."""

    n: int
    vertices: list[Vec]
    faces: list[frozenset]
    _emb: dict = field(default_factory=dict, repr=False)

    def faces_of_dim(self, d: int) -> list[frozenset]:
        return [f for f in self.faces if len(f) == d + 1]

    @property
    def maximal_faces(self) -> list[frozenset]:
        return self.faces_of_dim(self.n)

    def f_vector(self) -> tuple[int, ...]:
        return tuple(len(self.faces_of_dim(d)) for d in range(self.n + 1))

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * k for d, k in enumerate(self.f_vector()))

    def embedding(self, face: frozenset) -> Polytope:
        if face not in self._emb:
            self._emb[face] = convex_hull([self.vertices[l] for l in sorted(face)])
        return self._emb[face]

    def support(self, x: Sequence) -> frozenset:
        """Smallest face containing the skeleton point x."""
        c = ray_coords(x)
        if sum(c) != 1:
            raise ValueError("point is not on the skeleton")
        return frozenset(l for l, t in enumerate(c) if t > 0)

    def contains(self, x: Sequence) -> bool:
        return sum(ray_coords(x)) == 1

    def to_json(self) -> dict:
        return {
            "type": "skeleton",
            "n": self.n,
            "vertices": [[rat_to_json(t) for t in v] for v in self.vertices],
            "faces": [sorted(f) for f in self.faces],
            "f_vector": list(self.f_vector()),
        }


def skeleton(spec: TropicalHypersurfaceSpec | int) -> SkeletonComplex:
    n = spec if isinstance(spec, int) else spec.n
    faces = []
    for k in range(1, n + 2):
        faces.extend(frozenset(s) for s in itertools.combinations(range(n + 2), k))
    return SkeletonComplex(n, rays(n), faces)


def skeleton_from_polar(spec: TropicalHypersurfaceSpec) -> SkeletonComplex:
    """Same complex read off the face lattice of polar_dual(P) (independent route)."""
    D = polar_dual(spec.P)
    label = {}
    for i, v in enumerate(D.vertices):
        for l in range(spec.n + 2):
            if ray(spec.n, l) == v:
                label[i] = l
    full = frozenset(range(len(D.vertices)))
    faces = [frozenset(label[i] for i in f) for f in D.faces() if f != full]
    return SkeletonComplex(spec.n, rays(spec.n), sorted(faces, key=lambda f: (len(f), sorted(f))))


def compactified_val_of_monomial_weight(n: int, weights: Mapping[int, object] | object) -> CompactifiedPoint:
    """sum_l w_l v_l for a weight supported on ray indices; infinite weights go to the infinity cone.

    ``weights`` is a mapping ray index -> weight or an object with ``indices`` and ``weights``.
    """
    if not isinstance(weights, Mapping):
        weights = dict(zip(weights.indices, weights.weights))
    inf = set()
    c = [Fraction(0)] * (n + 2)
    for l, w in weights.items():
        if not 0 <= l <= n + 1:
            raise ValueError(f"ray index {l} out of range")
        if isinstance(w, float) and math.isinf(w) or (isinstance(w, str) and w in ("inf", "+inf")):
            if isinstance(w, float) and w < 0:
                raise ValueError("weights must be nonnegative")
            inf.add(l)
            continue
        w = frac(w)
        if w < 0:
            raise ValueError("weights must be nonnegative")
        c[l] = w
    if len(inf) > n + 1 or len(weights) > n + 1:
        raise ValueError("weights must live on a proper set of rays (a stratum of the model)")
    return CompactifiedPoint.from_ray_coords(n, c, inf)


def permutation_action(n: int, perm: Sequence[int], x: Sequence) -> Vec:
    """Linear map v_l -> v_{perm[l]} applied to x."""
    c = ray_coords(x)
    d = [Fraction(0)] * (n + 2)
    for l, t in enumerate(c):
        d[perm[l]] = t
    return from_ray_coords(d)
