"""Branch cuts, the subdivided skeleton, the discriminant locus, the tropical contraction
and the integral affine atlas on the skeleton minus the discriminant.

Faces of the skeleton are frozensets of ray indices. A point w of the skeleton lies in the
relative interior of exactly one cell conv(a_{t_0}, ..., a_{t_k}) of the subdivision, with
t_0 < ... < t_k a chain of faces; that chain is its *support chain*. The open star U_t of a
face t is the set of skeleton points whose support chain contains t.

The contraction sends x = w + x' (w a skeleton point whose support chain starts at t',
x' in the closed cone over t') to w.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from ._exact import Vec, det, dot, frac, rank, solve, sub, vec
from .convex import PAConvexFunction
from .trop import (
    CompactifiedPoint,
    SkeletonComplex,
    TropicalHypersurfaceSpec,
    anticanonical_vertex,
    as_point,
    build_spec,
    from_ray_coords,
    ray,
    ray_coords,
    skeleton,
    tropical_membership,
)


class NotInTropicalization(ValueError):
    pass


class CoverError(RuntimeError):
    pass


class ChartError(ValueError):
    pass


# ---------------------------------------------------------------- cuts and subdivision


@dataclass(frozen=True)
class BranchCuts:
    """A rational point a_t in the relative interior of every face t (vertices map to themselves),
    stored as ray coordinates summing to one."""

    n: int
    points: Mapping[frozenset, Vec]

    def __getitem__(self, face: frozenset) -> Vec:
        return self.points[frozenset(face)]

    def point(self, face: frozenset) -> Vec:
        """a_t as a point of N_R."""
        return from_ray_coords(self[face])

    def permute(self, perm: Sequence[int]) -> "BranchCuts":
        pts = {}
        for f, c in self.points.items():
            d = [Fraction(0)] * (self.n + 2)
            for l, t in enumerate(c):
                d[perm[l]] = t
            pts[frozenset(perm[l] for l in f)] = tuple(d)
        return BranchCuts(self.n, pts)


def _validate_cuts(skel: SkeletonComplex, pts: Mapping[frozenset, Sequence]) -> BranchCuts:
    out = {}
    for f in skel.faces:
        if len(f) == 1:
            (l,) = f
            out[f] = tuple(Fraction(int(i == l)) for i in range(skel.n + 2))
            continue
        if f not in pts:
            raise ValueError(f"no cut for face {sorted(f)}")
        c = vec(pts[f])
        if len(c) != skel.n + 2:
            c = ray_coords(c)
        if sum(c) != 1 or any((c[l] > 0) != (l in f) for l in range(skel.n + 2)):
            raise ValueError(f"cut for face {sorted(f)} is not in its relative interior")
        out[f] = c
    return BranchCuts(skel.n, out)


def barycentric_cuts(skel: SkeletonComplex) -> BranchCuts:
    pts = {}
    for f in skel.faces:
        k = len(f)
        pts[f] = tuple(Fraction(1, k) if l in f else Fraction(0) for l in range(skel.n + 2))
    return _validate_cuts(skel, pts)


def random_cuts(skel: SkeletonComplex, rng: random.Random, denom: int = 11) -> BranchCuts:
    pts = {}
    for f in skel.faces:
        w = {l: Fraction(rng.randint(1, denom)) for l in f}
        tot = sum(w.values())
        pts[f] = tuple(w.get(l, Fraction(0)) / tot for l in range(skel.n + 2))
    return _validate_cuts(skel, pts)


def cuts_from_points(skel: SkeletonComplex, pts: Mapping[frozenset, Sequence]) -> BranchCuts:
    """Cuts given as points of N_R (or ray coordinates) per face."""
    return _validate_cuts(skel, {frozenset(k): v for k, v in pts.items()})


def _chains(faces: Iterable[frozenset]) -> list[tuple[frozenset, ...]]:
    faces = sorted(faces, key=lambda f: (len(f), sorted(f)))
    out: list[tuple[frozenset, ...]] = [(f,) for f in faces]
    frontier = list(out)
    while frontier:
        new = []
        for ch in frontier:
            for f in faces:
                if ch[-1] < f:
                    new.append(ch + (f,))
        out.extend(new)
        frontier = new
    return out


@dataclass
class SubdivisionComplex:
    """Cells conv(a_{t_0}, ..., a_{t_k}) indexed by chains t_0 < ... < t_k."""

    skel: SkeletonComplex
    cuts: BranchCuts
    cells: list[tuple[frozenset, ...]]

    def cells_of_dim(self, d: int) -> list[tuple[frozenset, ...]]:
        return [c for c in self.cells if len(c) == d + 1]

    @property
    def maximal_cells(self) -> list[tuple[frozenset, ...]]:
        return self.cells_of_dim(self.skel.n)

    def vertices_of(self, cell: tuple[frozenset, ...]) -> list[Vec]:
        return [self.cuts.point(f) for f in cell]


def build_subdivision(skel: SkeletonComplex, cuts: BranchCuts) -> SubdivisionComplex:
    _validate_cuts(skel, cuts.points)
    return SubdivisionComplex(skel, cuts, _chains(skel.faces))


@dataclass
class DiscriminantLocus:
    cells: list[tuple[frozenset, ...]]
    n: int

    @property
    def dim(self) -> int:
        return max((len(c) - 1 for c in self.cells), default=-1)

    def contains_chain(self, chain: Sequence[frozenset]) -> bool:
        return 2 <= len(chain[0]) and len(chain[-1]) <= self.n


def discriminant(skel: SkeletonComplex, cuts: BranchCuts) -> DiscriminantLocus:
    faces = [f for f in skel.faces if 2 <= len(f) <= skel.n]
    return DiscriminantLocus(_chains(faces), skel.n)


def support_chain(cuts: BranchCuts, x: Sequence) -> tuple[tuple[frozenset, ...], tuple[Fraction, ...]]:
    """Support chain of a skeleton point and its (positive) barycentric weights on the a_t.

    Repeated radial projection: from a_S (S the support of x) push x to the boundary of S.
    """
    c = ray_coords(x)
    if sum(c) != 1:
        raise ValueError("point is not on the skeleton")
    chain: list[frozenset] = []
    weights: list[Fraction] = []
    mass = Fraction(1)
    cur = list(c)
    while True:
        S = frozenset(l for l, t in enumerate(cur) if t > 0)
        a = cuts[S]
        if all(cur[l] == a[l] for l in range(len(cur))):
            chain.append(S)
            weights.append(mass)
            break
        # largest s with a + s (cur - a) still in S: s = min over l with cur_l < a_l of a_l/(a_l-cur_l)
        s = min(a[l] / (a[l] - cur[l]) for l in S if cur[l] < a[l])
        p = [a[l] + s * (cur[l] - a[l]) for l in range(len(cur))]
        # cur = (1 - 1/s) a + (1/s) p
        chain.append(S)
        weights.append(mass * (1 - 1 / s))
        mass = mass / s
        cur = p
    chain.reverse()
    weights.reverse()
    return tuple(chain), tuple(weights)


def in_open_star(cuts: BranchCuts, face: frozenset, x: Sequence) -> bool:
    return frozenset(face) in support_chain(cuts, x)[0]


def on_discriminant(cuts: BranchCuts, x: Sequence) -> bool:
    ch, _ = support_chain(cuts, x)
    return len(ch[0]) >= 2 and len(ch[-1]) <= cuts.n


# ---------------------------------------------------------------- contraction


def _water_fill(c: Sequence, inf: frozenset) -> tuple[Vec, frozenset]:
    """Barycentric-cut contraction in ray coordinates: cap the coordinates at the level M with
    sum_l min(c_l, M) = 1 (infinite coordinates count as M)."""
    fin = sorted(t for l, t in enumerate(c) if l not in inf)
    k = len(inf)
    below = Fraction(0)
    M = None
    for j, t in enumerate(fin + [None]):
        above = len(fin) - j + k
        if above == 0:
            break
        m = (1 - below) / above
        if m >= (fin[j - 1] if j else 0) and (t is None or m <= t):
            M = m
            break
        below += t
    if M is None or (k == 0 and sum(fin) < 1):
        raise NotInTropicalization("point lies strictly inside P*")
    w = tuple(M if l in inf else min(t, M) for l, t in enumerate(c))
    top = frozenset(l for l, t in enumerate(c) if l in inf or t >= M)
    return w, top


@dataclass
class Decomposition:
    """x = w + x' with w on the skeleton (support chain starting at ``bottom``) and
    x' in the closed cone over ``bottom``."""

    w: Vec
    bottom: frozenset
    chain: tuple[frozenset, ...]
    beta: tuple[Fraction, ...]
    gamma: Mapping[int, Fraction]


class ContractionMap:
    def __init__(self, spec: TropicalHypersurfaceSpec, cuts: BranchCuts):
        self.spec = spec
        self.cuts = cuts
        self.n = spec.n
        self.skel = skeleton(spec)
        self.barycentric = cuts == barycentric_cuts(self.skel)

    def decompositions(self, pt) -> list[Decomposition]:
        """All region decompositions of pt, by exact solves over maximal flags t' < ... < S."""
        pt = as_point(self.spec, pt)
        c = pt.coords
        inf = pt.infinity
        S = frozenset(l for l, t in enumerate(c) if t > 0) | inf
        if len(S) > self.n + 1 or not S:
            return []
        out = []
        Sl = sorted(S)
        for r in range(1, len(Sl) + 1):
            for bottom in itertools.combinations(Sl, r):
                bottom = frozenset(bottom)
                if not inf <= bottom:
                    continue
                rest = sorted(S - bottom)
                for order in itertools.permutations(rest):
                    chain = [bottom]
                    for l in order:
                        chain.append(chain[-1] | {l})
                    d = self._solve_flag(c, inf, tuple(chain))
                    if d is not None:
                        out.append(d)
        return out

    def _solve_flag(self, c: Vec, inf: frozenset, chain: tuple[frozenset, ...]) -> Decomposition | None:
        bottom = chain[0]
        gam_idx = sorted(bottom - inf)
        rows_idx = sorted(chain[-1] - inf)
        nb = len(chain)
        A, b = [], []
        for l in rows_idx:
            row = [self.cuts[f][l] for f in chain] + [Fraction(int(l == g)) for g in gam_idx]
            A.append(row)
            b.append(c[l])
        A.append([Fraction(1)] * nb + [Fraction(0)] * len(gam_idx))
        b.append(Fraction(1))
        if rank(A) < nb + len(gam_idx):
            return None
        sol = solve(A, b)
        if sol is None:
            return None
        beta, gamma = sol[:nb], sol[nb:]
        if any(t < 0 for t in beta) or any(t < 0 for t in gamma):
            return None
        w = [Fraction(0)] * (self.n + 2)
        for bj, f in zip(beta, chain):
            for l in range(self.n + 2):
                w[l] += bj * self.cuts[f][l]
        keep = [(f, bj) for f, bj in zip(chain, beta) if bj > 0]
        return Decomposition(
            from_ray_coords(w), bottom, tuple(f for f, _ in keep), tuple(bj for _, bj in keep), dict(zip(gam_idx, gamma))
        )

    def contract(self, pt, check_membership: bool = True) -> Vec:
        pt = as_point(self.spec, pt)
        if check_membership and not tropical_membership(self.spec, pt):
            raise NotInTropicalization("point is not in the compactified tropicalization")
        decs = self.decompositions(pt)
        if not decs:
            raise CoverError("point lies in no region Y_t: cover violated")
        ws = {d.w for d in decs}
        if len(ws) != 1:
            raise CoverError(f"overlapping regions disagree: {sorted(ws)}")
        return decs[0].w

    __call__ = contract

    def contract_barycentric(self, pt) -> Vec:
        """Closed form for barycentric cuts (water filling); independent of the flag solver."""
        if not self.barycentric:
            raise ValueError("closed form only valid for barycentric cuts")
        pt = as_point(self.spec, pt)
        w, _ = _water_fill(pt.coords, pt.infinity)
        return from_ray_coords(w)

    def retract(self, weights) -> Vec:
        from .trop import compactified_val_of_monomial_weight

        return self.contract(compactified_val_of_monomial_weight(self.n, weights))


# ---------------------------------------------------------------- charts


@dataclass(frozen=True)
class AffineChart:
    """y = A x + b on N_R, valid on the chart domain (an open star or an open face)."""

    kind: str
    key: object
    A: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]
    n: int

    def __call__(self, x: Sequence) -> Vec:
        x = vec(x)
        return tuple(dot(r, x) + bi for r, bi in zip(self.A, self.b))

    @property
    def is_integral(self) -> bool:
        return all(t.denominator == 1 for r in self.A for t in r) and all(t.denominator == 1 for t in self.b)


def vertex_chart(skel: SkeletonComplex, i: int) -> AffineChart:
    """Projection N -> N / R v_i; the other rays go to e_1..e_n and -(e_1+...+e_n)."""
    n = skel.n
    others = [l for l in range(n + 2) if l != i]
    img = {}
    for j, l in enumerate(others[:-1]):
        img[l] = tuple(Fraction(int(k == j)) for k in range(n))
    img[others[-1]] = tuple(Fraction(-1) for _ in range(n))
    img[i] = tuple(Fraction(0) for _ in range(n))
    # columns: images of the standard basis e_j = v_{j+1}
    A = tuple(tuple(img[j + 1][r] for j in range(n + 1)) for r in range(n))
    return AffineChart("vertex", i, A, tuple(Fraction(0) for _ in range(n)), n)


def face_chart(skel: SkeletonComplex, face: frozenset, order: Sequence[int] | None = None) -> AffineChart:
    """Integral affine map of the maximal face onto conv(0, e_1, .., e_n): v_{l_0} -> 0, v_{l_j} -> e_j.

    On the face the missing index k has ray coordinate 0 and the chart reads y_j = c_{l_j} - c_k,
    a linear function of x (with the convention x_0 = 0).
    """
    n = skel.n
    face = frozenset(face)
    if len(face) != n + 1:
        raise ChartError("face charts are defined on maximal faces")
    order = sorted(face) if order is None else list(order)
    if set(order) != face:
        raise ChartError("order must enumerate the face's vertices")
    (k,) = set(range(n + 2)) - face

    def coord(l: int) -> tuple[Fraction, ...]:
        # linear functional x -> x_l with x_0 = 0
        return tuple(Fraction(int(l >= 1 and j == l - 1)) for j in range(n + 1))

    A = tuple(tuple(a - b for a, b in zip(coord(l), coord(k))) for l in order[1:])
    return AffineChart("face", (face, tuple(order)), A, tuple(Fraction(0) for _ in range(n)), n)


def _chart_domain_point(cuts: BranchCuts, chart: AffineChart, x: Sequence) -> bool:
    ch, _ = support_chain(cuts, x)
    if chart.kind == "vertex":
        return frozenset([chart.key]) in ch
    return ch[-1] == chart.key[0]


@dataclass
class TransitionReport:
    A: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]
    det: Fraction
    integral: bool
    unimodular: bool
    sample_points: list[Vec]

    @property
    def ok(self) -> bool:
        return self.integral and self.unimodular


def overlap_points(cuts: BranchCuts, c1: AffineChart, c2: AffineChart, count: int | None = None) -> list[Vec]:
    """Points in the interior of a flag cell inside both chart domains (empty if disjoint)."""
    n = cuts.n
    kinds = {c1.kind: c1, c2.kind: c2}
    if c1.kind == "vertex" and c2.kind == "vertex":
        if c1.key == c2.key:
            face = next(f for f in cuts.points if len(f) == n + 1 and c1.key in f)
            chain = _a_flag(c1.key, face)
        else:
            return []
    elif c1.kind == "face" and c2.kind == "face":
        if c1.key[0] != c2.key[0]:
            return []
        face = c1.key[0]
        chain = _a_flag(min(face), face)
    else:
        v, f = kinds["vertex"], kinds["face"]
        face = f.key[0]
        if v.key not in face:
            return []
        chain = _a_flag(v.key, face)
    count = count if count is not None else n + 2
    pts = []
    verts = [cuts[f] for f in chain]
    for j in range(count):
        wts = [Fraction(1 + ((j + 1) * (i + 2)) % 7) for i in range(len(verts))]
        if j < len(verts):
            wts[j] += 5  # push towards different vertices for affine independence
        tot = sum(wts)
        c = [sum(w * vv[l] for w, vv in zip(wts, verts)) / tot for l in range(n + 2)]
        pts.append(from_ray_coords(c))
    return pts


def _a_flag(v: int, face: frozenset) -> list[frozenset]:
    chain = [frozenset([v])]
    for l in sorted(face - {v}):
        chain.append(chain[-1] | {l})
    return chain


def transition(
    cuts: BranchCuts, c1: AffineChart, c2: AffineChart, points: Sequence[Sequence] | None = None
) -> TransitionReport:
    """Affine map c2 o c1^{-1} on the overlap, fitted on overlap points and verified on all of them."""
    if points is None:
        pts = overlap_points(cuts, c1, c2)
        if not pts:
            raise ChartError("chart domains do not overlap")
    else:
        pts = [vec(p) for p in points]
        for p in pts:
            if on_discriminant(cuts, p):
                raise ChartError("affine structure is undefined on the discriminant locus")
            if not (_chart_domain_point(cuts, c1, p) and _chart_domain_point(cuts, c2, p)):
                raise ChartError("point outside the chart overlap")
    n = cuts.n
    ys = [c1(p) for p in pts]
    zs = [c2(p) for p in pts]
    # solve z = A y + b: unknowns per output row (A_r, b_r)
    M = [list(y) + [Fraction(1)] for y in ys]
    if rank(M) < n + 1:
        raise ChartError("overlap sample is affinely degenerate")
    A, b = [], []
    for r in range(n):
        sol = solve(M, [z[r] for z in zs])
        if sol is None:
            raise ChartError("transition is not affine on the sample")
        A.append(tuple(sol[:n]))
        b.append(sol[n])
    d = det(A)
    integral = all(t.denominator == 1 for row in A for t in row)
    return TransitionReport(tuple(A), tuple(b), d, integral, abs(d) == 1, pts)


def atlas(skel: SkeletonComplex) -> list[AffineChart]:
    charts = [vertex_chart(skel, i) for i in range(skel.n + 2)]
    charts += [face_chart(skel, f) for f in skel.maximal_faces]
    return charts


def atlas_audit(skel: SkeletonComplex, cuts: BranchCuts) -> list[dict]:
    """Transition report for every overlapping (vertex chart, face chart) pair."""
    rows = []
    for v in range(skel.n + 2):
        cv = vertex_chart(skel, v)
        for f in skel.maximal_faces:
            if v not in f:
                continue
            cf = face_chart(skel, f)
            rep = transition(cuts, cv, cf)
            rows.append({"vertex": v, "face": sorted(f), "report": rep})
    return rows


# ---------------------------------------------------------------- comparison property


def u_fs(n: int) -> PAConvexFunction:
    return PAConvexFunction([(anticanonical_vertex(n, k), 0) for k in range(n + 2)])


def skeleton_sample(skel: SkeletonComplex, face: frozenset, rng: random.Random, denom: int = 97) -> Vec:
    w = {l: Fraction(rng.randint(1, denom)) for l in face}
    tot = sum(w.values())
    return from_ray_coords([w.get(l, Fraction(0)) / tot for l in range(skel.n + 2)])


def open_star_samples(cuts: BranchCuts, i: int, rng: random.Random, count: int, max_face_dim: int | None = None):
    """Random points of U_i lying on faces of dimension <= max_face_dim (interior of flag cells)."""
    n = cuts.n
    max_face_dim = n - 1 if max_face_dim is None else max_face_dim
    faces = [f for f in cuts.points if i in f and len(f) - 1 <= max_face_dim]
    out = []
    while len(out) < count:
        f = rng.choice(faces)
        chain = [frozenset([i])]
        for l in rng.sample(sorted(f - {i}), len(f) - 1):
            chain.append(chain[-1] | {l})
        wts = [Fraction(rng.randint(1, 50)) for _ in chain]
        tot = sum(wts)
        c = [sum(w * cuts[g][l] for w, g in zip(wts, chain)) / tot for l in range(n + 2)]
        out.append(from_ray_coords(c))
    return out


@dataclass
class ComparisonReport:
    linearity: dict[int, bool]
    linearity_defect: dict[int, Fraction]
    invariance: dict[frozenset, bool]
    invariance_defect: dict[frozenset, Fraction]

    @property
    def ok(self) -> bool:
        return all(self.linearity.values()) and all(self.invariance.values())

    @property
    def failing_vertex_regions(self) -> list[int]:
        return sorted(i for i, ok in self.linearity.items() if not ok)

    @property
    def failing_faces(self) -> list[list[int]]:
        return sorted(sorted(f) for f, ok in self.invariance.items() if not ok)


def check_comparison(
    u: Callable[[Vec], Fraction] | PAConvexFunction,
    cuts: BranchCuts,
    spec: TropicalHypersurfaceSpec | None = None,
    samples: int = 20,
    seed: int = 0,
    alphas: Sequence = (0, Fraction(1, 2), 1, 2, 10),
    require_admissible: bool = True,
) -> ComparisonReport:
    """(a) u(w + a v_i) - u(w) - a = 0 for w in U_i on non-maximal faces;
    (b) u' o delta = u' on sampled points of the tropicalization, u' = u - u_FS."""
    n = cuts.n
    spec = spec or build_spec(n)
    if isinstance(u, PAConvexFunction) and require_admissible:
        from .convex import is_admissible

        if not is_admissible(u, spec.P):
            raise ValueError("u is not admissible for P")
    rng = random.Random(seed)
    cm = ContractionMap(spec, cuts)
    fs = u_fs(n)
    lin, lin_def = {}, {}
    for i in range(n + 2):
        worst = Fraction(0)
        for w in open_star_samples(cuts, i, rng, samples):
            uw = u(w)
            for a in alphas:
                a = frac(a)
                x = tuple(wi + a * vi for wi, vi in zip(w, ray(n, i)))
                worst = max(worst, abs(u(x) - uw - a))
        lin[i] = worst == 0
        lin_def[i] = worst
    inv, inv_def = {}, {}
    skel = cm.skel
    for f in skel.maximal_faces:
        worst = Fraction(0)
        for _ in range(samples):
            # points of the unbounded strata over faces of f and of f itself
            sub = frozenset(rng.sample(sorted(f), rng.randint(1, len(f))))
            w = skeleton_sample(skel, sub, rng)
            c = list(ray_coords(w))
            if len(sub) <= n:
                for l in sub:
                    c[l] += Fraction(rng.randint(0, 40), 7)
            x = from_ray_coords(c)
            d = cm.contract(x)
            defect = abs((u(d) - fs(d)) - (u(x) - fs(x)))
            worst = max(worst, defect)
        inv[f] = worst == 0
        inv_def[f] = worst
    return ComparisonReport(lin, lin_def, inv, inv_def)


def random_skeleton_pa(cuts: BranchCuts, rng: random.Random, denom: int = 13) -> Callable[[Vec], Fraction]:
    """Random function on the skeleton, affine on each subdivision cell (values at the a_t)."""
    vals = {f: Fraction(rng.randint(-3 * denom, 3 * denom), denom) for f in cuts.points}

    def w(x: Sequence) -> Fraction:
        ch, beta = support_chain(cuts, x)
        return sum((b * vals[f] for f, b in zip(ch, beta)), Fraction(0))

    return w


def composed_potential(cuts: BranchCuts, wfun: Callable[[Vec], Fraction], spec: TropicalHypersurfaceSpec | None = None):
    """u = u_FS + w o delta (defined on the tropicalization)."""
    spec = spec or build_spec(cuts.n)
    cm = ContractionMap(spec, cuts)
    fs = u_fs(cuts.n)

    def u(x):
        return fs(x) + wfun(cm.contract(x, check_membership=False))

    return u


# ---------------------------------------------------------------- local potentials


def _lift_to_open_star(cuts: BranchCuts, i: int, y: Sequence) -> Vec:
    """Inverse of the vertex chart on U_i."""
    n = cuts.n
    y = vec(y)
    others = [l for l in range(n + 2) if l != i]
    # chart coordinates: y_j = c_{others[j]} - c_{others[-1]} on N / R v_i
    t = -min(min(y), Fraction(0))
    c = [Fraction(0)] * (n + 2)
    for j, l in enumerate(others[:-1]):
        c[l] = y[j] + t
    c[others[-1]] = t
    c[i] = 1 - sum(c)
    if c[i] < 0:
        raise ChartError("chart point outside the open star")
    x = from_ray_coords(c)
    if not in_open_star(cuts, frozenset([i]), x):
        raise ChartError("chart point outside the open star")
    return x


def _face_chart_inverse(skel: SkeletonComplex, chart: AffineChart, y: Sequence) -> Vec:
    face, order = chart.key
    y = vec(y)
    if any(t < 0 for t in y) or sum(y) > 1:
        raise ChartError("point outside the standard simplex")
    c = [Fraction(0)] * (skel.n + 2)
    c[order[0]] = 1 - sum(y)
    for j, l in enumerate(order[1:]):
        c[l] = y[j]
    return from_ray_coords(c)


def facet_functional(n: int, i: int) -> Vec:
    """m_i in M with <m_i, v_i> = 1 and <m_i, .> = 1 on a facet through v_i (the facet missing
    the smallest index k != i)."""
    k = 0 if i != 0 else 1
    return anticanonical_vertex(n, k)


@dataclass
class LocalPotentials:
    skel: SkeletonComplex
    cuts: BranchCuts
    psi: Callable[[Vec], Fraction]

    def face(self, face: frozenset, order: Sequence[int] | None = None) -> Callable[[Sequence], Fraction]:
        chart = face_chart(self.skel, face, order)

        def f(y):
            return self.psi(_face_chart_inverse(self.skel, chart, y))

        return f

    def vertex(self, i: int) -> Callable[[Sequence], Fraction]:
        m = facet_functional(self.skel.n, i)

        def f(y):
            x = _lift_to_open_star(self.cuts, i, y)
            # psi_FS is identically 1 on the skeleton
            return self.psi(x) + 1 - dot(m, x)

        return f

    def vertex_on_skeleton(self, i: int) -> Callable[[Sequence], Fraction]:
        """psi_i as a function of the skeleton point rather than chart coordinates."""
        m = facet_functional(self.skel.n, i)
        return lambda x: self.psi(vec(x)) + 1 - dot(m, vec(x))


def local_potentials(psi: Callable[[Vec], Fraction], skel: SkeletonComplex, cuts: BranchCuts) -> LocalPotentials:
    for i in range(skel.n + 2):
        m = facet_functional(skel.n, i)
        if dot(m, ray(skel.n, i)) != 1:
            raise RuntimeError("no valid facet functional at a vertex")
    return LocalPotentials(skel, cuts, psi)


def face_dual_polytope(skel: SkeletonComplex, face: frozenset, order: Sequence[int] | None = None):
    """Image of P in the dual coordinates of a face chart (gradients of restrictions of
    admissible functions to the face)."""
    from .geom import convex_hull

    n = skel.n
    order = sorted(face) if order is None else list(order)
    pts = []
    for k in range(n + 2):
        m = anticanonical_vertex(n, k)
        base = dot(m, ray(n, order[0]))
        pts.append(tuple(dot(m, ray(n, l)) - base for l in order[1:]))
    return convex_hull(pts)


# ---------------------------------------------------------------- figure data


def contraction_arrows(n: int = 2, grid: int = 6, cuts: BranchCuts | None = None) -> dict:
    """Arrow data for the contraction near one vertex cone cone(v_1, .., v_{n+1}) (n = 2)."""
    spec = build_spec(n)
    skel = skeleton(spec)
    cuts = cuts or barycentric_cuts(skel)
    cm = ContractionMap(spec, cuts)
    arrows = []
    face = frozenset(range(1, n + 2))
    for e in [f for f in skel.faces_of_dim(1) if f <= face]:
        a, b = sorted(e)
        for i in range(grid + 1):
            for j in range(1, grid + 1):
                c = [Fraction(0)] * (n + 2)
                c[a] = Fraction(i, grid)
                c[b] = 1 - Fraction(i, grid)
                c[a] += Fraction(j, grid)
                c[b] += Fraction(j * (i % 3), 2 * grid)
                x = from_ray_coords(c)
                d = cm.contract(x)
                ch, _ = support_chain(cuts, d)
                region = "edge" if ch[0] == e else "vertex"
                arrows.append({"start": x, "end": d, "edge": sorted(e), "region": region})
    segments = []
    for f in skel.faces_of_dim(1):
        segments.append([cuts.point(frozenset([l])) for l in sorted(f)])
    return {"arrows": arrows, "segments": segments, "cuts": {tuple(sorted(f)): cuts.point(f) for f in cuts.points}}
