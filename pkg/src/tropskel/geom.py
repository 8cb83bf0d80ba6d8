"""Exact rational polytopes, polyhedral cones and fans.

All coordinates are ``fractions.Fraction``. Floating point (qhull) is only used to
propose candidate facets for larger point sets; every candidate is re-derived and
verified in exact arithmetic before it is accepted.
"""
from __future__ import annotations

import functools
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ._exact import (
    Vec,
    affine_basis,
    dot,
    frac,
    int_det,
    integer_kernel_basis,
    nullspace,
    primitive,
    rank,
    solve,
    sub,
    vec,
)

BRUTE_FORCE_LIMIT = 4000


class GeometryError(ValueError):
    pass


# ---------------------------------------------------------------- facets


def _idot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _plane_through(pts: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], int] | None:
    """Primitive normal and offset of the hyperplane through k affinely independent integer points in R^k."""
    p0 = pts[0]
    ns = nullspace([sub(p, p0) for p in pts[1:]])
    if len(ns) != 1:
        return None
    a = primitive(ns[0])
    return a, _idot(a, p0)


def _facets_brute(qs: Sequence[tuple[int, ...]], k: int) -> set[tuple[tuple[int, ...], int]]:
    out = set()
    for sub_idx in itertools.combinations(range(len(qs)), k):
        pl = _plane_through([qs[i] for i in sub_idx])
        if pl is None:
            continue
        a, b = pl
        if (a, b) in out or (tuple(-x for x in a), -b) in out:
            continue
        le = ge = True
        for q in qs:
            v = _idot(a, q)
            if v > b:
                le = False
            elif v < b:
                ge = False
            if not (le or ge):
                break
        if le:
            out.add((a, b))
        elif ge:
            out.add((tuple(-x for x in a), -b))
    return out


def _float_rows(qs) -> np.ndarray:
    # exact int / int division first: cleared denominators can exceed the float range
    m = max((abs(x) for q in qs for x in q), default=0)
    if m == 0:
        return np.zeros((len(qs), len(qs[0]) if qs else 0))
    return np.array([[x / m for x in q] for q in qs])


def _unit(a: Sequence[int]) -> np.ndarray:
    af = _float_rows([a])[0]
    return af / np.linalg.norm(af)


def _facets_qhull(qs: Sequence[tuple[int, ...]], k: int) -> set[tuple[tuple[int, ...], int]]:
    from scipy.spatial import ConvexHull

    arr = _float_rows(qs)
    hull = ConvexHull(arr)
    out: set[tuple[tuple[int, ...], int]] = set()
    for simplex, eq in zip(hull.simplices, hull.equations):
        pl = _plane_through([qs[i] for i in simplex])
        anchor = int(simplex[0])
        if pl is None:
            near = np.nonzero(np.abs(arr @ eq[:-1] + eq[-1]) <= 1e-9)[0]
            pts = [qs[i] for i in near]
            chosen = [pts[0]]
            for p in pts[1:]:
                if rank([sub(c, pts[0]) for c in chosen[1:]] + [sub(p, pts[0])]) == len(chosen):
                    chosen.append(p)
                if len(chosen) == k:
                    break
            pl = _plane_through(chosen) if len(chosen) == k else None
            anchor = int(near[0])
            if pl is None:
                raise GeometryError("qhull returned a degenerate facet")
        a, b = pl
        af = _unit(a)
        if float(af @ eq[:-1]) < 0:
            a, b = tuple(-x for x in a), -b
            af = -af
        if (a, b) in out:
            continue
        vals = (arr - arr[anchor]) @ af
        for i in np.nonzero(vals > -1e-7)[0]:
            if _idot(a, qs[i]) > b:
                raise GeometryError("qhull candidate facet failed exact verification")
        out.add((a, b))
    return out


def _tight_sets(qs, arr: np.ndarray, facets) -> list[frozenset[int]]:
    out = []
    for a, b in facets:
        af = _unit(a)
        # distance (in normalized coordinates) of every point to the plane
        ref = arr[_first_tight(qs, a, b, arr, af)]
        vals = (arr - ref) @ af
        cand = np.nonzero(np.abs(vals) <= 1e-7)[0]
        out.append(frozenset(int(i) for i in cand if _idot(a, qs[i]) == b))
    return out


def _first_tight(qs, a, b, arr, af) -> int:
    vals = arr @ af
    order = np.argsort(-vals)
    for i in order:
        if _idot(a, qs[i]) == b:
            return int(i)
    raise GeometryError("facet without tight points")


def _full_dim_facets(qs: Sequence[tuple[int, ...]], k: int, method: str = "auto"):
    if k == 1:
        lo = min(q[0] for q in qs)
        hi = max(q[0] for q in qs)
        return {((-1,), -lo), ((1,), hi)}
    if method == "brute" or (method == "auto" and math.comb(len(qs), k) <= BRUTE_FORCE_LIMIT):
        return _facets_brute(qs, k)
    try:
        return _facets_qhull(qs, k)
    except GeometryError:
        return _facets_brute(qs, k)


def _cyclic_order(pts2: Sequence[Vec]) -> list[int]:
    """Counter-clockwise order of points in convex position in the plane (exact)."""
    n = len(pts2)
    cx = sum((p[0] for p in pts2), Fraction(0)) / n
    cy = sum((p[1] for p in pts2), Fraction(0)) / n

    def half(p):
        x, y = p[0] - cx, p[1] - cy
        return 0 if (y > 0 or (y == 0 and x > 0)) else 1

    def cmp(i, j):
        hi, hj = half(pts2[i]), half(pts2[j])
        if hi != hj:
            return hi - hj
        xi, yi = pts2[i][0] - cx, pts2[i][1] - cy
        xj, yj = pts2[j][0] - cx, pts2[j][1] - cy
        c = xi * yj - yi * xj
        return -1 if c > 0 else (1 if c < 0 else 0)

    return sorted(range(n), key=functools.cmp_to_key(cmp))


# ---------------------------------------------------------------- polytope


class Polytope:
    """Convex hull of finitely many rational points, with exact H- and V-representations.

    ``facets`` are pairs (normal, offset) meaning <normal, x> <= offset; for polytopes that are
    not full-dimensional ``equations`` carry the affine hull as <normal, x> = offset.
    """

    def __init__(self, vertices, facets, equations, facet_vertices, ambient_dim: int, dim: int):
        self.vertices: tuple[Vec, ...] = tuple(vertices)
        self.facets: tuple[tuple[tuple[Fraction, ...], Fraction], ...] = tuple(facets)
        self.equations = tuple(equations)
        self.facet_vertices: tuple[frozenset[int], ...] = tuple(facet_vertices)
        self.ambient_dim = ambient_dim
        self.dim = dim
        self._lattice = None

    def __repr__(self) -> str:
        return f"Polytope(dim={self.dim}, ambient_dim={self.ambient_dim}, n_vertices={len(self.vertices)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Polytope) and set(self.vertices) == set(other.vertices)

    def __hash__(self) -> int:
        return hash(frozenset(self.vertices))

    @property
    def is_full_dimensional(self) -> bool:
        return self.dim == self.ambient_dim

    def contains(self, x: Sequence, strict: bool = False) -> bool:
        x = vec(x)
        for a, b in self.equations:
            if dot(a, x) != b:
                return False
        if strict:
            return all(dot(a, x) < b for a, b in self.facets)
        return all(dot(a, x) <= b for a, b in self.facets)

    def centroid(self) -> Vec:
        n = len(self.vertices)
        return tuple(sum((v[i] for v in self.vertices), Fraction(0)) / n for i in range(self.ambient_dim))

    def neg(self) -> "Polytope":
        return convex_hull([tuple(-x for x in v) for v in self.vertices])

    def translate(self, t: Sequence) -> "Polytope":
        t = vec(t)
        return convex_hull([tuple(x + y for x, y in zip(v, t)) for v in self.vertices])

    # face lattice ----------------------------------------------------
    @property
    def face_lattice(self) -> dict[frozenset[int], int]:
        """Map from vertex-index sets of nonempty faces to their dimension."""
        if self._lattice is None:
            full = frozenset(range(len(self.vertices)))
            faces: set[frozenset[int]] = set(self.facet_vertices)
            frontier = set(faces)
            while frontier:
                new = set()
                for f in frontier:
                    for g in self.facet_vertices:
                        h = f & g
                        if h and h not in faces:
                            new.add(h)
                faces |= new
                frontier = new
            faces.add(full)
            lat = {}
            for f in faces:
                pts = [self.vertices[i] for i in sorted(f)]
                lat[f] = len(affine_basis(pts)[1])
            self._lattice = lat
        return self._lattice

    def faces(self, d: int | None = None) -> list[frozenset[int]]:
        lat = self.face_lattice
        out = [f for f, k in lat.items() if d is None or k == d]
        return sorted(out, key=lambda f: (lat[f], sorted(f)))

    def f_vector(self) -> tuple[int, ...]:
        lat = self.face_lattice
        return tuple(sum(1 for k in lat.values() if k == d) for d in range(self.dim + 1))

    # measure -------------------------------------------------------------
    def triangulation(self) -> list[tuple[int, ...]]:
        """Pulling triangulation as tuples of vertex indices (full-dimensional simplices)."""
        return _triangulate(list(self.vertices), list(range(len(self.vertices))))

    def volume(self) -> Fraction:
        """Euclidean volume in the ambient space (zero when not full-dimensional)."""
        if not self.is_full_dimensional:
            return Fraction(0)
        d = self.dim
        if d == 0:
            return Fraction(1)
        total = Fraction(0)
        for s in self.triangulation():
            p0 = self.vertices[s[0]]
            total += abs(_fdet([sub(self.vertices[i], p0) for i in s[1:]]))
        return total / math.factorial(d)

    def lattice_volume(self) -> Fraction:
        """Normalized volume d! * vol."""
        return self.volume() * math.factorial(self.dim)

    # io --------------------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "type": "polytope",
            "ambient_dim": self.ambient_dim,
            "dim": self.dim,
            "vertices": [[rat_to_json(x) for x in v] for v in self.vertices],
            "facets": [
                {"normal": [rat_to_json(x) for x in a], "offset": rat_to_json(b)} for a, b in self.facets
            ],
            "equations": [
                {"normal": [rat_to_json(x) for x in a], "offset": rat_to_json(b)} for a, b in self.equations
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Polytope":
        if data.get("type") != "polytope":
            raise ValueError("not a polytope record")
        return convex_hull([[rat_from_json(x) for x in v] for v in data["vertices"]])

    def to_off(self) -> str:
        if self.ambient_dim > 3 or self.dim < 2:
            raise GeometryError("OFF export needs a polytope of dimension 2 or 3 in at most 3 dimensions")
        verts = [tuple(float(x) for x in v) + (0.0,) * (3 - self.ambient_dim) for v in self.vertices]
        if self.dim == 2:
            polys = [self._planar_cycle(list(range(len(self.vertices))))]
        else:
            polys = [self._planar_cycle(sorted(fv)) for fv in self.facet_vertices]
        return write_off(verts, polys)

    def _planar_cycle(self, idx: list[int]) -> list[int]:
        pts = [self.vertices[i] for i in idx]
        _, piv = affine_basis(pts)
        proj = [tuple(p[c] for c in piv) for p in pts]
        order = _cyclic_order(proj)
        return [idx[i] for i in order]


def _fdet(rows) -> Fraction:
    from ._exact import det

    return det(rows)


def _triangulate(points: list[Vec], idx: list[int]) -> list[tuple[int, ...]]:
    """Pulling triangulation of conv(points[idx]) in its own affine hull."""
    pts = [points[i] for i in idx]
    _, piv = affine_basis(pts)
    k = len(piv)
    proj = [tuple(p[c] for c in piv) for p in pts]
    if k == 0:
        return [(idx[0],)]
    if k == 1:
        lo = min(range(len(proj)), key=lambda i: proj[i][0])
        hi = max(range(len(proj)), key=lambda i: proj[i][0])
        return [(idx[lo], idx[hi])]
    hull = convex_hull(proj)
    vmap = {v: i for i, v in enumerate(proj)}
    vids = [idx[vmap[v]] for v in hull.vertices]
    if k == 2:
        order = _cyclic_order(list(hull.vertices))
        cyc = [vids[i] for i in order]
        return [(cyc[0], cyc[i], cyc[i + 1]) for i in range(1, len(cyc) - 1)]
    apex = vids[0]
    out = []
    for fv in hull.facet_vertices:
        if 0 in fv:
            continue
        for s in _triangulate(points, [vids[i] for i in sorted(fv)]):
            out.append((apex,) + s)
    return out


def convex_hull(points: Iterable[Sequence], method: str = "auto") -> Polytope:
    """Exact convex hull of rational points.

    ``method`` is "auto", "brute" (enumerate all hyperplanes through point subsets) or
    "qhull" (floating candidates, each verified exactly).
    """
    pts = sorted(set(vec(p) for p in points))
    if not pts:
        raise GeometryError("convex hull of an empty set")
    d = len(pts[0])
    if any(len(p) != d for p in pts):
        raise GeometryError("points of mixed dimension")
    p0 = pts[0]
    dirs, piv = affine_basis(pts)
    k = len(piv)
    eq_normals = nullspace(dirs, ncols=d) if dirs else nullspace([], ncols=d)
    equations = []
    for nv in eq_normals:
        a = tuple(Fraction(x) for x in primitive(nv))
        equations.append((a, dot(a, p0)))
    if k == 0:
        return Polytope([p0], [], equations, [], d, 0)
    qf = [tuple(p[c] for c in piv) for p in pts]
    L = 1
    for q in qf:
        for x in q:
            L = L * x.denominator // math.gcd(L, x.denominator)
    qs = [tuple(int(x * L) for x in q) for q in qf]
    raw = _full_dim_facets(qs, k, "qhull" if method == "qhull" else method)
    facets_proj = sorted(raw)
    arr = _float_rows(qs)
    tight = _tight_sets(qs, arr, facets_proj) if k > 1 else [
        frozenset(i for i, q in enumerate(qs) if _idot(a, q) == b) for a, b in facets_proj
    ]
    incident: dict[int, list[int]] = {}
    for f, t in enumerate(tight):
        for i in t:
            incident.setdefault(i, []).append(f)
    vert_idx = []
    for i in sorted(incident):
        normals = [facets_proj[f][0] for f in incident[i]]
        if len(normals) >= k and rank(normals) == k:
            vert_idx.append(i)
    remap = {old: new for new, old in enumerate(vert_idx)}
    vertices = [pts[i] for i in vert_idx]
    facets = []
    fverts = []
    for (a, b), t in zip(facets_proj, tight):
        amb = [Fraction(0)] * d
        for j, c in enumerate(piv):
            amb[c] = Fraction(a[j])
        facets.append((tuple(amb), Fraction(b, L)))
        fverts.append(frozenset(remap[i] for i in t if i in remap))
    return Polytope(vertices, facets, equations, fverts, d, k)


def polar_dual(P: Polytope) -> Polytope:
    """Polar {y : <x, y> <= 1 for all x in P}; requires 0 in the interior of P."""
    if not P.is_full_dimensional:
        raise GeometryError("polar dual needs a full-dimensional polytope")
    pts = []
    for a, b in P.facets:
        if b <= 0:
            raise GeometryError("origin is not in the interior")
        pts.append(tuple(x / b for x in a))
    return convex_hull(pts)


def simplex_polytope(n: int) -> Polytope:
    """conv(0, e_1, ..., e_n)."""
    pts = [tuple(Fraction(0) for _ in range(n))]
    for i in range(n):
        pts.append(tuple(Fraction(int(i == j)) for j in range(n)))
    return convex_hull(pts)


# ---------------------------------------------------------------- cones


class Cone:
    """Pointed rational polyhedral cone given by generating rays (stored primitive, extreme only)."""

    def __init__(self, rays: Iterable[Sequence], ambient_dim: int | None = None):
        rs = sorted(set(primitive(r) for r in rays if any(x != 0 for x in r)))
        if ambient_dim is None:
            if not rs:
                raise GeometryError("ambient dimension required for the zero cone")
            ambient_dim = len(rs[0])
        self.ambient_dim = ambient_dim
        self.dim = rank(rs) if rs else 0
        self._compute(rs)

    def _compute(self, rs: list[tuple[int, ...]]) -> None:
        k = self.dim
        d = self.ambient_dim
        if k == 0:
            self.rays = ()
            self.inequalities = ()
            self.equations = tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d))
            return
        red, piv = _rref_span(rs)
        self.equations = tuple(nullspace(red, ncols=d)) if len(piv) < d else ()
        qs = [tuple(Fraction(r[c]) for c in piv) for r in rs]
        ineqs: set[tuple[int, ...]] = set()
        if k == 1:
            s = 1 if qs[0][0] > 0 else -1
            if any((q[0] > 0) != (s > 0) for q in qs):
                raise GeometryError("cone is not pointed")
            ineqs.add((s,))
        else:
            for sub_idx in itertools.combinations(range(len(qs)), k - 1):
                ns = nullspace([qs[i] for i in sub_idx])
                if len(ns) != 1:
                    continue
                a = primitive(ns[0])
                vals = [dot(a, q) for q in qs]
                if all(v >= 0 for v in vals):
                    ineqs.add(a)
                elif all(v <= 0 for v in vals):
                    ineqs.add(tuple(-x for x in a))
            if not ineqs:
                raise GeometryError("cone is not pointed")
        ineq_list = sorted(ineqs)
        extreme = []
        for r, q in zip(rs, qs):
            t = [a for a in ineq_list if dot(a, q) == 0]
            if (k == 1) or (len(t) >= k - 1 and rank(t) == k - 1):
                extreme.append(r)
        if k >= 2 and any(rank([a for a in ineq_list if dot(a, q) == 0] or [[0] * k]) == k for q in qs):
            raise GeometryError("cone is not pointed")
        self._piv = piv
        self.rays = tuple(extreme)
        amb = []
        for a in ineq_list:
            v = [Fraction(0)] * d
            for j, c in enumerate(piv):
                v[c] = Fraction(a[j])
            amb.append(tuple(v))
        self.inequalities = tuple(amb)

    def __repr__(self) -> str:
        return f"Cone(rays={list(self.rays)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Cone) and self.ambient_dim == other.ambient_dim and set(self.rays) == set(other.rays)

    def __hash__(self) -> int:
        return hash(frozenset(self.rays))

    def key(self) -> frozenset:
        return frozenset(self.rays)

    def contains(self, x: Sequence, strict: bool = False) -> bool:
        x = vec(x)
        if any(dot(e, x) != 0 for e in self.equations):
            return False
        if strict:
            return all(dot(a, x) > 0 for a in self.inequalities)
        return all(dot(a, x) >= 0 for a in self.inequalities)

    @property
    def is_simplicial(self) -> bool:
        return len(self.rays) == self.dim

    def adjacent_pairs(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """Pairs of extreme rays spanning a 2-dimensional face."""
        k = self.dim
        if k < 2:
            return []
        if k == 2:
            return [(self.rays[0], self.rays[1])]
        out = []
        for p, q in itertools.combinations(self.rays, 2):
            t = [a for a in self.inequalities if dot(a, p) == 0 and dot(a, q) == 0]
            if t and rank(t) == k - 2:
                out.append((p, q))
        return out

    def faces(self) -> list["Cone"]:
        """All faces, including the zero cone and the cone itself."""
        tight = [frozenset(r for r in self.rays if dot(a, r) == 0) for a in self.inequalities]
        sets: set[frozenset] = {frozenset(self.rays)} | set(tight)
        frontier = set(tight)
        while frontier:
            new = set()
            for f in frontier:
                for g in tight:
                    h = f & g
                    if h not in sets:
                        new.add(h)
            sets |= new
            frontier = new
        sets.add(frozenset())
        return [Cone(s, self.ambient_dim) for s in sorted(sets, key=lambda s: (len(s), sorted(s)))]


def _rref_span(rs):
    from ._exact import rref

    return rref(rs)


def is_unimodular(cone: Cone, lattice_basis: Sequence[Sequence[int]] | None = None) -> bool:
    """Simplicial cone whose rays extend to a basis of the lattice (or of ``lattice_basis``'s span)."""
    if not cone.is_simplicial:
        raise GeometryError("unimodularity is only defined for simplicial cones")
    k = cone.dim
    if k == 0:
        return True
    rays = [list(r) for r in cone.rays]
    if lattice_basis is not None:
        basis = [list(b) for b in lattice_basis]
        cols = []
        for r in rays:
            c = solve([[b[i] for b in basis] for i in range(len(r))], r)
            if c is None or any(x.denominator != 1 for x in c):
                raise GeometryError("ray does not lie in the given lattice")
            cols.append([int(x) for x in c])
        rays = cols
    m = len(rays[0])
    g = 0
    for rows in itertools.combinations(range(m), k):
        g = math.gcd(g, int_det([[r[i] for r in rays] for i in rows]))
        if g == 1:
            return True
    return g == 1


# ---------------------------------------------------------------- fans


@dataclass
class Fan:
    """A fan given by its maximal cones; ``lattice_basis`` optionally names a sublattice N'."""

    maximal_cones: list[Cone]
    ambient_dim: int
    lattice_basis: list[tuple[int, ...]] | None = None
    _all: list[Cone] | None = field(default=None, repr=False)

    def __post_init__(self):
        uniq = {}
        for c in self.maximal_cones:
            uniq.setdefault(c.key(), c)
        keys = list(uniq)
        keep = [k for k in keys if not any(k < o for o in keys)]
        self.maximal_cones = sorted((uniq[k] for k in keep), key=lambda c: sorted(c.rays))

    @property
    def rays(self) -> list[tuple[int, ...]]:
        return sorted({r for c in self.maximal_cones for r in c.rays})

    def cones(self, dim: int | None = None) -> list[Cone]:
        if self._all is None:
            seen = {}
            for c in self.maximal_cones:
                for f in c.faces():
                    seen.setdefault(f.key(), f)
            self._all = sorted(seen.values(), key=lambda c: (c.dim, sorted(c.rays)))
        return [c for c in self._all if dim is None or c.dim == dim]

    def key(self) -> frozenset:
        return frozenset(c.key() for c in self.maximal_cones)

    def __eq__(self, other) -> bool:
        return isinstance(other, Fan) and self.key() == other.key()

    def contains(self, x: Sequence) -> bool:
        return any(c.contains(x) for c in self.maximal_cones)

    def is_unimodular(self) -> bool:
        return all(is_unimodular(c, self.lattice_basis) for c in self.maximal_cones)

    def to_json(self) -> dict:
        return {
            "type": "fan",
            "ambient_dim": self.ambient_dim,
            "rays": [[rat_to_json(x) for x in r] for r in self.rays],
            "maximal_cones": [[self.rays.index(r) for r in c.rays] for c in self.maximal_cones],
            "lattice_basis": None
            if self.lattice_basis is None
            else [[rat_to_json(x) for x in b] for b in self.lattice_basis],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Fan":
        if data.get("type") != "fan":
            raise ValueError("not a fan record")
        rays = [tuple(int(rat_from_json(x)) for x in r) for r in data["rays"]]
        d = data["ambient_dim"]
        lb = data.get("lattice_basis")
        return cls(
            [Cone([rays[i] for i in c], d) for c in data["maximal_cones"]],
            d,
            None if lb is None else [tuple(int(rat_from_json(x)) for x in b) for b in lb],
        )


def normal_fan(P: Polytope) -> Fan:
    """Inner-product fan of outer facet normals: the cone of a face is spanned by the normals
    of the facets containing it."""
    if not P.is_full_dimensional:
        raise GeometryError("normal fan needs a full-dimensional polytope")
    cones = []
    for vid in range(len(P.vertices)):
        normals = [P.facets[f][0] for f, fv in enumerate(P.facet_vertices) if vid in fv]
        cones.append(Cone(normals, P.ambient_dim))
    return Fan(cones, P.ambient_dim)


def face_normal_cone(P: Polytope, face: frozenset[int]) -> Cone:
    normals = [P.facets[f][0] for f, fv in enumerate(P.facet_vertices) if face <= fv]
    return Cone(normals, P.ambient_dim)


def hyperplane_subdivide(F: Fan, normal: Sequence) -> Fan:
    """Split every maximal cone meeting both open sides of {<normal, x> = 0}."""
    nv = vec(normal)
    out: list[Cone] = []
    for c in F.maximal_cones:
        s = {r: dot(nv, r) for r in c.rays}
        pos = [r for r in c.rays if s[r] > 0]
        neg = [r for r in c.rays if s[r] < 0]
        if not pos or not neg:
            out.append(c)
            continue
        zero = [r for r in c.rays if s[r] == 0]
        new = []
        for p, q in c.adjacent_pairs():
            if s[p] < 0:
                p, q = q, p
            if s[p] > 0 and s[q] < 0:
                new.append(primitive(tuple(s[p] * qi - s[q] * pi for pi, qi in zip(p, q))))
        out.append(Cone(pos + zero + new, F.ambient_dim))
        out.append(Cone(neg + zero + new, F.ambient_dim))
    return Fan(out, F.ambient_dim, F.lattice_basis)


def vertex_resolution_fan(n: int, hyperplanes: str = "cumulative") -> Fan:
    """Fan over Delta^{n-1} x Delta^1 refined by n-1 successive hyperplane cuts.

    Coordinates on N = Z^{n+2} are (e_1..e_n, e_t, e_w); the fan lives in the sublattice
    N' = {u_1 + ... + u_n = u_t + u_w}. With ``hyperplanes="cumulative"`` the i-th cut is
    u_1 + ... + u_i = u_t, which yields the staircase cones cone(v_1..v_i, v'_i..v'_n).
    ``"literal"`` cuts along u_i = u_t instead; for n >= 3 that creates the extra ray v_1 + v'_2.
    """
    if hyperplanes not in ("cumulative", "literal"):
        raise ValueError("hyperplanes must be 'cumulative' or 'literal'")
    if n < 1:
        raise ValueError("n must be positive")
    d = n + 2
    t, w = n, n + 1

    def e(i):
        return tuple(int(j == i) for j in range(d))

    v = [tuple(a + b for a, b in zip(e(i), e(t))) for i in range(n)]
    vp = [tuple(a + b for a, b in zip(e(i), e(w))) for i in range(n)]
    basis = integer_kernel_basis([[1] * n + [-1, -1]])
    fan = Fan([Cone(v + vp, d)], d, [tuple(b) for b in basis])
    for i in range(n - 1):
        if hyperplanes == "cumulative":
            normal = tuple(int(j <= i) for j in range(n)) + (-1, 0)
        else:
            normal = tuple(int(j == i) - int(j == t) for j in range(d))
        fan = hyperplane_subdivide(fan, normal)
    return fan


def vertex_resolution_expected(n: int) -> list[frozenset]:
    """The staircase cones cone(v_1..v_i, v'_i..v'_n) as sets of rays."""
    d = n + 2
    t, w = n, n + 1
    v = [tuple(int(j == i) + int(j == t) for j in range(d)) for i in range(n)]
    vp = [tuple(int(j == i) + int(j == w) for j in range(d)) for i in range(n)]
    return [frozenset(v[: i + 1] + vp[i:]) for i in range(n)]


def support_function(P: Polytope):
    from .convex import PAConvexFunction

    return PAConvexFunction([(v, Fraction(0)) for v in P.vertices])


# ---------------------------------------------------------------- io


def rat_to_json(x) -> dict:
    x = frac(x)
    return {"num": str(x.numerator), "den": str(x.denominator)}


def rat_from_json(d) -> Fraction:
    if isinstance(d, dict):
        return Fraction(int(d["num"]), int(d["den"]))
    return frac(d)


def write_off(vertices: Sequence[Sequence[float]], faces: Sequence[Sequence[int]]) -> str:
    lines = ["OFF", f"{len(vertices)} {len(faces)} 0"]
    for v in vertices:
        lines.append(" ".join(repr(float(x)) for x in v))
    for f in faces:
        lines.append(" ".join([str(len(f))] + [str(i) for i in f]))
    return "\n".join(lines) + "\n"


def read_off(text: str) -> tuple[list[tuple[float, ...]], list[tuple[int, ...]]]:
    toks = [ln.split("#")[0].strip() for ln in text.splitlines()]
    toks = [t for t in toks if t]
    if not toks or toks[0] != "OFF":
        raise ValueError("not an OFF file")
    nv, nf, _ = map(int, toks[1].split())
    verts = [tuple(float(x) for x in toks[2 + i].split()) for i in range(nv)]
    faces = []
    for i in range(nf):
        parts = list(map(int, toks[2 + nv + i].split()))
        faces.append(tuple(parts[1 : 1 + parts[0]]))
    return verts, faces


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)
