"""Piecewise-affine convex functions on N_R and their Legendre transforms on polytopes in M_R."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from ._exact import Vec, dot, frac, vec
from .geom import GeometryError, Polytope, convex_hull, rat_from_json, rat_to_json

Piece = tuple[Vec, Fraction]


class NonConvexSampleError(ValueError):
    pass


def _max_exact(slopes_f: np.ndarray, consts_f: np.ndarray, slopes, consts, x: Vec) -> tuple[Fraction, list[int]]:
    xf = np.array([float(t) for t in x])
    vals = slopes_f @ xf + consts_f
    m = vals.max()
    tol = 1e-9 * (1.0 + float(np.abs(slopes_f).max(initial=0.0)) * float(np.abs(xf).sum()) + float(np.abs(consts_f).max()))
    cand = np.nonzero(vals >= m - tol)[0]
    best = None
    arg: list[int] = []
    for i in cand:
        v = dot(slopes[i], x) + consts[i]
        if best is None or v > best:
            best, arg = v, [int(i)]
        elif v == best:
            arg.append(int(i))
    return best, arg


def _lower_vertices(points: Sequence[Vec]) -> list[int]:
    """Indices of points that are vertices of the lower hull (last coordinate is height)."""
    lifted = list(points) + [p[:-1] + (p[-1] + 1,) for p in points]
    hull = convex_hull(lifted)
    vs = set(hull.vertices)
    return [i for i, p in enumerate(points) if p in vs]


class PAConvexFunction:
    """x -> max_k <s_k, x> + c_k with rational slopes and constants, stored without redundant pieces."""

    def __init__(self, pieces: Iterable[tuple[Sequence, object]], prune: bool = True):
        best: dict[Vec, Fraction] = {}
        for s, c in pieces:
            s, c = vec(s), frac(c)
            if s not in best or c > best[s]:
                best[s] = c
        if not best:
            raise ValueError("a PA function needs at least one piece")
        items = sorted(best.items())
        if prune and len(items) > 1:
            keep = _lower_vertices([s + (-c,) for s, c in items])
            items = [items[i] for i in keep]
        self.pieces: tuple[Piece, ...] = tuple(items)
        self.dim = len(items[0][0])
        self._sf = np.array([[float(t) for t in s] for s, _ in items]).reshape(len(items), self.dim)
        self._cf = np.array([float(c) for _, c in items])

    def __repr__(self) -> str:
        return f"PAConvexFunction(dim={self.dim}, n_pieces={len(self.pieces)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, PAConvexFunction) and set(self.pieces) == set(other.pieces)

    def __hash__(self) -> int:
        return hash(frozenset(self.pieces))

    @property
    def slopes(self) -> list[Vec]:
        return [s for s, _ in self.pieces]

    def __call__(self, x: Sequence) -> Fraction:
        return self.evaluate(x)

    def evaluate(self, x: Sequence) -> Fraction:
        x = vec(x)
        return _max_exact(self._sf, self._cf, self.slopes, [c for _, c in self.pieces], x)[0]

    def evaluate_float(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return (X @ self._sf.T + self._cf).max(axis=1)

    def active_pieces(self, x: Sequence) -> list[int]:
        x = vec(x)
        return _max_exact(self._sf, self._cf, self.slopes, [c for _, c in self.pieces], x)[1]

    def slope_polytope(self) -> Polytope:
        return convex_hull(self.slopes)

    def add_constant(self, c) -> "PAConvexFunction":
        return PAConvexFunction([(s, k + frac(c)) for s, k in self.pieces], prune=False)

    def maximum(self, other: "PAConvexFunction") -> "PAConvexFunction":
        return PAConvexFunction(list(self.pieces) + list(other.pieces))

    def to_json(self) -> dict:
        return {
            "type": "pa_function",
            "pieces": [
                {"slope": [rat_to_json(t) for t in s], "lambda_coeff": rat_to_json(0), "constant": rat_to_json(c)}
                for s, c in self.pieces
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "PAConvexFunction":
        pieces = []
        for p in data["pieces"]:
            if rat_from_json(p.get("lambda_coeff", {"num": "0", "den": "1"})) != 0:
                raise ValueError("piece depends on lambda; use HybridPAFunction")
            pieces.append(([rat_from_json(t) for t in p["slope"]], rat_from_json(p["constant"])))
        return cls(pieces)


@dataclass(frozen=True)
class AdmissibilityCertificate:
    ok: bool
    outside_slopes: tuple[Vec, ...]
    missing_vertices: tuple[Vec, ...]

    def __bool__(self) -> bool:
        return self.ok


def is_admissible(phi: PAConvexFunction, P: Polytope) -> AdmissibilityCertificate:
    """phi - support_P bounded: all slopes in P and every vertex of P is a slope."""
    outside = tuple(s for s in phi.slopes if not P.contains(s))
    have = set(phi.slopes)
    missing = tuple(v for v in P.vertices if v not in have)
    return AdmissibilityCertificate(not outside and not missing, outside, missing)


class PAFunctionOnPolytope:
    """Convex PA function on a full-dimensional polytope P, stored as a regular subdivision.

    ``cells`` are polytopes covering P, ``affines`` the pairs (alpha, beta) with value
    <alpha, u> + beta on the matching cell.
    """

    def __init__(self, P: Polytope, cells: list[Polytope], affines: list[tuple[Vec, Fraction]], vertex_values: dict):
        self.P = P
        self.cells = cells
        self.affines = affines
        self.vertex_values: dict[Vec, Fraction] = vertex_values
        self._af = np.array([[float(t) for t in a] for a, _ in affines]).reshape(len(affines), P.ambient_dim)
        self._bf = np.array([float(b) for _, b in affines])

    def __repr__(self) -> str:
        return f"PAFunctionOnPolytope(n_cells={len(self.cells)})"

    def __call__(self, u: Sequence) -> Fraction:
        return self.evaluate(u)

    def evaluate(self, u: Sequence) -> Fraction:
        u = vec(u)
        if not self.P.contains(u):
            raise ValueError("point outside the polytope")
        return _max_exact(self._af, self._bf, [a for a, _ in self.affines], [b for _, b in self.affines], u)[0]

    @classmethod
    def from_values(cls, P: Polytope, points: Sequence[Sequence], values: Sequence) -> "PAFunctionOnPolytope":
        """Convex envelope on P of the data (points, values); the points must include V(P)."""
        if not P.is_full_dimensional:
            raise GeometryError("P must be full-dimensional")
        pts = [vec(p) for p in points]
        vals = [frac(v) for v in values]
        best: dict[Vec, Fraction] = {}
        for p, v in zip(pts, vals):
            if not P.contains(p):
                raise ValueError("data point outside P")
            if p not in best or v < best[p]:
                best[p] = v
        missing = [v for v in P.vertices if v not in best]
        if missing:
            raise ValueError("data must include all vertices of P")
        return _lower_envelope(P, list(best.items()))


def _lower_envelope(P: Polytope, data: list[tuple[Vec, Fraction]]) -> PAFunctionOnPolytope:
    d = P.ambient_dim
    lifted = [p + (v,) for p, v in data]
    hull = convex_hull(lifted)
    cells, affines = [], []
    if hull.dim == d:
        (a, b), = [e for e in hull.equations if e[0][-1] != 0]
        alpha = tuple(-x / a[-1] for x in a[:-1])
        affines.append((alpha, b / a[-1]))
        cells.append(P)
    else:
        for (a, b), fv in zip(hull.facets, hull.facet_vertices):
            if a[-1] >= 0:
                continue
            alpha = tuple(-x / a[-1] for x in a[:-1])
            affines.append((alpha, b / a[-1]))
            cells.append(convex_hull([hull.vertices[i][:-1] for i in fv]))
    vv = {}
    for p in hull.vertices:
        u, v = p[:-1], p[-1]
        if u in vv:
            vv[u] = min(vv[u], v)
        else:
            vv[u] = v
    # keep only vertices that lie on the lower hull
    low = {}
    for u, v in vv.items():
        if any(dot(al, u) + be == v for al, be in affines):
            low[u] = v
    return PAFunctionOnPolytope(P, cells, affines, low)


def legendre_to_polytope(phi: PAConvexFunction, P: Polytope | None = None) -> PAFunctionOnPolytope:
    """Conjugate phi*(u) = sup_x <u, x> - phi(x), finite exactly on the slope polytope."""
    Q = phi.slope_polytope()
    if P is None:
        P = Q
    if not P.is_full_dimensional:
        raise GeometryError("degenerate (lower-dimensional) polytope")
    if P != Q:
        cert = is_admissible(phi, P)
        if not cert:
            raise ValueError("function is not admissible for P")
    return _lower_envelope(P, [(s, -c) for s, c in phi.pieces])


def legendre_from_polytope(beta: PAFunctionOnPolytope) -> PAConvexFunction:
    """x -> sup_{u in P} <u, x> - beta(u), a max over the subdivision vertices."""
    return PAConvexFunction([(u, -v) for u, v in beta.vertex_values.items()])


def biconjugate(phi: PAConvexFunction) -> PAConvexFunction:
    return legendre_from_polytope(legendre_to_polytope(phi))


# ---------------------------------------------------------------- approximation


def _dyadic_grid(dim: int, j: int) -> list[Vec]:
    """Nested dyadic points: box [-R_j, R_j]^dim with spacing 2^-floor(j/3), R_j = 1 + floor(j/2)."""
    R = 1 + j // 2
    h = Fraction(1, 2 ** (j // 3))
    steps = int(2 * R / h)
    axis = [-R + k * h for k in range(steps + 1)]
    return [tuple(p) for p in itertools.product(axis, repeat=dim)]


def _upper_dyadic(value, j: int) -> Fraction:
    """Dyadic upper bound with denominator 2^j; float inputs get a relative safety margin."""
    v = Fraction(value)
    hi = v if isinstance(value, Fraction) else v + Fraction(1, 10**11) * (1 + abs(v))
    q = 2**j
    return Fraction(math.ceil(hi * q), q)


def _check_midpoint_convex(pts: list[Vec], vals: dict[Vec, float], h: Fraction) -> None:
    dim = len(pts[0])
    for p in pts:
        for i in range(dim):
            a = p[:i] + (p[i] - h,) + p[i + 1 :]
            b = p[:i] + (p[i] + h,) + p[i + 1 :]
            if a in vals and b in vals:
                if vals[p] > 0.5 * (vals[a] + vals[b]) + 1e-9 * (1 + abs(vals[p])):
                    raise NonConvexSampleError(f"midpoint convexity violated at {tuple(map(float, p))}")


def _epigraph_vertices(P: Polytope, ineqs: list[tuple[Vec, Fraction]]) -> list[tuple[Vec, Fraction]]:
    """Vertices (u, g(u)) of {u in P, y >= <u, x_l> - r_l} with g(u) = max_l(...)."""
    d = P.ambient_dim
    cen = P.centroid()
    g_cen = max(dot(cen, x) - r for x, r in ineqs)
    cap = max(max(dot(v, x) - r for x, r in ineqs) for v in P.vertices) + 2
    z0 = cen + (g_cen + 1,)
    rows: list[tuple[Vec, Fraction]] = []
    for a, b in P.facets:
        rows.append((tuple(a) + (Fraction(0),), b))
    for x, r in ineqs:
        # <u, x> - y <= r
        rows.append((tuple(x) + (Fraction(-1),), r))
    rows.append((tuple(Fraction(0) for _ in range(d)) + (Fraction(1),), cap))
    pts = []
    for a, b in rows:
        beta = b - dot(a, z0)
        if beta <= 0:
            raise GeometryError("interior point construction failed")
        pts.append(tuple(t / beta for t in a))
    dual = convex_hull(pts)
    out = []
    for a, b in dual.facets:
        z = tuple(t / b + s for t, s in zip(a, z0))
        if z[-1] == cap:
            continue
        out.append((z[:-1], z[-1]))
    return out


def _conjugate_from_samples(P: Polytope, xs: list[Vec], rs: list[Fraction]) -> PAConvexFunction:
    verts = _epigraph_vertices(P, list(zip(xs, rs)))
    return PAConvexFunction([(u, -g) for u, g in verts])


def approximation_sequence(
    phi: Callable, P: Polytope, j_max: int, check_convexity: bool = True, exact: bool = False
) -> list[PAConvexFunction]:
    """phi_0 >= phi_1 >= ... >= phi_{j_max} >= phi, each admissible for P.

    phi_j is the conjugate of u -> max_l <u, x_l> - r_{l,j} restricted to P, where x_l runs
    over nested dyadic grids and r_{l,j} are dyadic upper bounds of phi(x_l). With ``exact``
    phi takes a tuple of Fractions and returns a Fraction, and no float margin is added.
    """
    if not P.is_full_dimensional:
        raise GeometryError("degenerate (lower-dimensional) polytope")
    dim = P.ambient_dim
    cache: dict[Vec, float] = {}
    out = []
    for j in range(j_max + 1):
        pts = _dyadic_grid(dim, j)
        for p in pts:
            if p not in cache:
                cache[p] = frac(phi(p)) if exact else float(phi(np.array([float(t) for t in p])))
        if check_convexity:
            _check_midpoint_convex(pts, {p: float(cache[p]) for p in pts}, Fraction(1, 2 ** (j // 3)))
        rs = [_upper_dyadic(cache[p], j) for p in pts]
        out.append(_conjugate_from_samples(P, pts, rs))
    return out


def approximate_decreasing(phi: Callable, j: int, P: Polytope, exact: bool = False) -> PAConvexFunction:
    return approximation_sequence(phi, P, j, exact=exact)[-1]


# ---------------------------------------------------------------- hybrid


class HybridPAFunction:
    """(x, lam) -> max_k <s_k, x> + b_k lam + c_k on N_R x [0, 1]."""

    def __init__(self, pieces: Iterable[tuple[Sequence, object, object]], prune: bool = True):
        raw = [(vec(s), frac(b), frac(c)) for s, b, c in pieces]
        if not raw:
            raise ValueError("a hybrid PA function needs at least one piece")
        if prune:
            raw = _strip_prune(raw)
        self.pieces = tuple(sorted(set(raw)))
        self.dim = len(self.pieces[0][0])
        self._f = PAConvexFunction([(s + (b,), c) for s, b, c in self.pieces], prune=False)

    def __repr__(self) -> str:
        return f"HybridPAFunction(dim={self.dim}, n_pieces={len(self.pieces)})"

    def __call__(self, x: Sequence, lam) -> Fraction:
        lam = frac(lam)
        if not 0 <= lam <= 1:
            raise ValueError("lambda must lie in [0, 1]")
        return self._f.evaluate(tuple(vec(x)) + (lam,))

    def fiber(self, lam) -> PAConvexFunction:
        lam = frac(lam)
        return PAConvexFunction([(s, b * lam + c) for s, b, c in self.pieces])

    def to_json(self) -> dict:
        return {
            "type": "pa_function",
            "pieces": [
                {"slope": [rat_to_json(t) for t in s], "lambda_coeff": rat_to_json(b), "constant": rat_to_json(c)}
                for s, b, c in self.pieces
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "HybridPAFunction":
        return cls(
            [
                ([rat_from_json(t) for t in p["slope"]], rat_from_json(p["lambda_coeff"]), rat_from_json(p["constant"]))
                for p in data["pieces"]
            ]
        )


def _strip_prune(pieces: list[tuple[Vec, Fraction, Fraction]]):
    """Drop pieces never strictly maximal on lam in [0,1] among pieces of equal slope, then
    drop pieces that are redundant on all of N_R x R."""
    groups: dict[Vec, list[tuple[Fraction, Fraction]]] = {}
    for s, b, c in pieces:
        groups.setdefault(s, []).append((b, c))
    kept = []
    for s, lines in groups.items():
        for b, c in _envelope_on_interval(lines):
            kept.append((s, b, c))
    f = PAConvexFunction([(s + (b,), c) for s, b, c in kept])
    return [(s[:-1], s[-1], c) for s, c in f.pieces]


def _envelope_on_interval(lines: list[tuple[Fraction, Fraction]]) -> list[tuple[Fraction, Fraction]]:
    """Lines lam -> b lam + c that are strictly maximal somewhere in [0, 1]."""
    best: dict[Fraction, Fraction] = {}
    for b, c in lines:
        if b not in best or c > best[b]:
            best[b] = c
    ls = sorted(best.items())
    out = []
    for i, (b, c) in enumerate(ls):
        lo, hi = Fraction(0), Fraction(1)
        for k, (b2, c2) in enumerate(ls):
            if k == i:
                continue
            # need b lam + c > b2 lam + c2
            db, dc = b - b2, c - c2
            if db == 0:
                if dc <= 0:
                    lo, hi = Fraction(1), Fraction(0)
                continue
            t = -dc / db
            if db > 0:
                lo = max(lo, t)
            else:
                hi = min(hi, t)
        if lo < hi or (lo == hi and len(ls) == 1):
            out.append((b, c))
    return out or ls[:1]


def hybrid_approximate(
    Phi: Callable[[np.ndarray, float], float],
    P: Polytope,
    j: int,
    lam_lipschitz: Fraction | int = 2,
    check_convexity: bool = True,
) -> HybridPAFunction:
    """Decreasing PA approximation of a jointly convex family Phi(x, lam) on N_R x [0, 1].

    Conjugate variables are restricted to P x [-A, A] with A = ``lam_lipschitz``, a declared
    bound on |d Phi / d lam|; lambda nodes always include 0 and 1.
    """
    if not P.is_full_dimensional:
        raise GeometryError("degenerate (lower-dimensional) polytope")
    A = frac(lam_lipschitz)
    dim = P.ambient_dim
    xs = _dyadic_grid(dim, j)
    h = Fraction(1, 2 ** (j // 3))
    lams = [k * h for k in range(int(1 / h) + 1)]
    vals = {}
    for x in xs:
        xf = np.array([float(t) for t in x])
        for lam in lams:
            vals[x + (lam,)] = float(Phi(xf, float(lam)))
    if check_convexity:
        _check_midpoint_convex(list(vals), vals, h)
    box = convex_hull([v + (a,) for v in P.vertices for a in (-A, A)])
    pts = list(vals)
    rs = [_upper_dyadic(vals[p], j) for p in pts]
    verts = _epigraph_vertices(box, list(zip(pts, rs)))
    return HybridPAFunction([(u[:-1], u[-1], -g) for u, g in verts])


class HybridConjugate:
    """Phi*(u, a) = sup_{x, lam in [0,1]} <u,x> + a lam - Phi(x, lam) on P x R."""

    def __init__(self, P: Polytope, band: Fraction, inner: PAFunctionOnPolytope, T: Fraction):
        self.P = P
        self.band = band
        self._inner = inner
        self._T = T

    def __call__(self, u: Sequence, a) -> Fraction:
        u = vec(u)
        a = frac(a)
        T = self._T
        if a > T:
            return self._inner.evaluate(u + (T,)) + (a - T)
        if a < -T:
            return self._inner.evaluate(u + (-T,))
        return self._inner.evaluate(u + (a,))

    def extension_offset(self, u: Sequence, side: int) -> Fraction:
        """Constant value of Phi*(u, a) - max(0, a) for a beyond the band on the given side."""
        a = self.band + 1 if side > 0 else -self.band - 1
        return self(u, a) - max(Fraction(0), frac(a))


def hybrid_legendre(Phi: HybridPAFunction, P: Polytope | None = None) -> HybridConjugate:
    slopes = [s for s, _, _ in Phi.pieces]
    Q = convex_hull(slopes)
    if P is None:
        P = Q
    for lam in (0, 1):
        if not is_admissible(Phi.fiber(lam), P):
            raise ValueError("hybrid function is not fiberwise admissible")
    A = max(abs(b) for _, b, _ in Phi.pieces)
    T = A + 1
    data = []
    for s, b, c in Phi.pieces:
        data.append((s + (-T,), -c))
        data.append((s + (b,), -c))
        data.append((s + (T,), -c + T - b))
    box = convex_hull([v + (t,) for v in P.vertices for t in (-T, T)])
    inner = _lower_envelope(box, _min_dedupe(data))
    return HybridConjugate(P, A, inner, T)


def _min_dedupe(data):
    best = {}
    for p, v in data:
        if p not in best or v < best[p]:
            best[p] = v
    return list(best.items())


def fiber_potential_eval(Phi: HybridPAFunction, lam, logz: Sequence | None = None, x: Sequence | None = None) -> Fraction:
    """lam^-1 Phi(-lam log|z|, lam); at lam = 0 returns the non-archimedean fiber Phi(x, 0)."""
    lam = frac(lam)
    if lam == 0:
        if x is None:
            raise ValueError("lam = 0 needs the tropical point x")
        return Phi(x, 0)
    if not 0 < lam <= 1:
        raise ValueError("lambda must lie in (0, 1]")
    if logz is None:
        raise ValueError("logz required for lam > 0")
    xs = tuple(-lam * frac(t) for t in logz)
    return Phi(xs, lam) / lam


def log_sum_exp(P: Polytope) -> Callable[[np.ndarray], float]:
    V = np.array([[float(t) for t in v] for v in P.vertices])

    def f(x: np.ndarray) -> float:
        z = V @ np.asarray(x, dtype=float)
        m = z.max()
        return float(m + np.log(np.exp(z - m).sum()))

    return f
