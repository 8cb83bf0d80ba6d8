"""Real Monge-Ampere measures of PA convex functions and a semi-discrete solver.

For a PA convex function phi with slopes spanning P, the gradient cells of phi at the vertices
of its domain subdivision tile P; they are the cells of the regular subdivision carrying the
conjugate phi*. ``ma_measure`` reads them off that subdivision.

The solver works on a 2-dimensional chart domain U with sites y_k and a target polygon Q of
gradients. The dual potential psi(u) = max_k <u, y_k> - h_k on Q has Laguerre cells
C_k = {u in Q : k attains the max}, and its conjugate phi(x) = sup_{u in Q} <u, x> - psi(u) has
gradient image C_k at y_k. Solving M(phi) = sum nu_k delta_{y_k} means finding h with
area(C_k) = nu_k; we use a damped Newton iteration with the usual edge-length Jacobian.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from ._exact import Vec, frac, vec
from .convex import PAConvexFunction, is_admissible, legendre_to_polytope
from .geom import GeometryError, Polytope, _cyclic_order, convex_hull


class InfeasibleProblem(ValueError):
    pass


@dataclass(frozen=True)
class GradientCell:
    base_point: Vec
    cell: Polytope

    @property
    def mass(self) -> Fraction:
        return self.cell.volume()


@dataclass
class AtomicMeasure:
    atoms: list[tuple[Vec, object]]
    label: str = "lebesgue-gradient"

    @property
    def total_mass(self):
        return sum((m for _, m in self.atoms), Fraction(0) if all(isinstance(m, Fraction) for _, m in self.atoms) else 0.0)

    def scaled(self, k, label: str | None = None) -> "AtomicMeasure":
        return AtomicMeasure([(x, m * k) for x, m in self.atoms], label or self.label)

    def as_dict(self) -> dict:
        return {x: m for x, m in self.atoms}

    def integrate(self, f: Callable[[Vec], float]) -> float:
        return sum(float(m) * f(x) for x, m in self.atoms)


def gradient_image(phi: PAConvexFunction, x0: Sequence) -> GradientCell:
    """Subdifferential of phi at x0: the hull of the slopes active there."""
    x0 = vec(x0)
    act = phi.active_pieces(x0)
    return GradientCell(x0, convex_hull([phi.pieces[i][0] for i in act]))


def gradient_cells(phi: PAConvexFunction, P: Polytope | None = None) -> list[GradientCell]:
    """Full-dimensional gradient cells, one per vertex of the domain subdivision."""
    if P is not None and not is_admissible(phi, P):
        raise ValueError("function is not admissible for P")
    conj = legendre_to_polytope(phi, P)
    return [GradientCell(alpha, cell) for cell, (alpha, _) in zip(conj.cells, conj.affines) if cell.is_full_dimensional]


def ma_measure(phi: PAConvexFunction, P: Polytope | None = None) -> AtomicMeasure:
    """M(phi): atom at each vertex x_F of the domain subdivision with mass vol(gradient cell).
    Cells of volume zero are dropped."""
    atoms: dict[Vec, Fraction] = {}
    for gc in gradient_cells(phi, P):
        v = gc.mass
        if v > 0:
            atoms[gc.base_point] = atoms.get(gc.base_point, Fraction(0)) + v
    return AtomicMeasure(sorted(atoms.items()))


def locate_in_cells(cells: Sequence[GradientCell], u: Sequence, strict: bool = True) -> list[int]:
    return [i for i, c in enumerate(cells) if c.cell.contains(u, strict=strict)]


def na_ma_pushforward(Phi: PAConvexFunction, n: int | None = None, P: Polytope | None = None) -> AtomicMeasure:
    """n! times M(Phi), atoms relabelled as Gauss points (locations unchanged)."""
    n = Phi.dim if n is None else n
    return ma_measure(Phi, P).scaled(math.factorial(n), label="gauss-point")


def quadratic_interpolant(cells_per_side: int, radius: Fraction | int = 1) -> PAConvexFunction:
    """PA interpolant of |x|^2 / 2 on the square grid of [-radius, radius]^2 (one plane per square)."""
    h = Fraction(2 * radius, cells_per_side)
    pieces = []
    for i in range(cells_per_side):
        a = -frac(radius) + i * h
        for j in range(cells_per_side):
            b = -frac(radius) + j * h
            pieces.append(((a + h / 2, b + h / 2), -a * (a + h) / 2 - b * (b + h) / 2))
    return PAConvexFunction(pieces, prune=False)


# ---------------------------------------------------------------- semi-discrete solver


def _ccw(points: Sequence[Sequence[float]]) -> np.ndarray:
    P = convex_hull([vec(p) for p in points])
    vs = list(P.vertices)
    order = _cyclic_order(vs)
    return np.array([[float(t) for t in vs[i]] for i in order])


@dataclass
class SemiDiscreteProblem:
    sites: np.ndarray
    masses: np.ndarray
    dual_polytope: Polytope
    domain: Polytope | None = None
    mass_tol: float = 1e-9

    def __post_init__(self):
        self.sites = np.asarray(self.sites, dtype=float)
        self.masses = np.asarray(self.masses, dtype=float)
        if self.sites.ndim != 2 or self.sites.shape[1] != 2:
            raise ValueError("the solver handles 2-dimensional chart domains")
        if len(self.sites) == 0 or len(self.sites) != len(self.masses):
            raise ValueError("sites and masses must be nonempty and of equal length")
        if not self.dual_polytope.is_full_dimensional or self.dual_polytope.ambient_dim != 2:
            raise InfeasibleProblem("dual polytope must be a full-dimensional polygon")
        if np.any(self.masses <= 0):
            raise InfeasibleProblem("target masses must be positive")
        if len({tuple(s) for s in self.sites.tolist()}) != len(self.sites):
            raise InfeasibleProblem("sites must be distinct")
        vol = float(self.dual_polytope.volume())
        if abs(self.masses.sum() - vol) > self.mass_tol * max(1.0, vol):
            raise InfeasibleProblem(f"masses sum to {self.masses.sum()!r}, dual polytope has volume {vol!r}")
        self.Q = _ccw(self.dual_polytope.vertices)

    @property
    def volume(self) -> float:
        return float(self.dual_polytope.volume())

    def cell_data(self, h: np.ndarray, backend: str | None = None):
        return _kernels.laguerre_2d(self.Q, self.sites, np.asarray(h, dtype=float), backend=backend)

    def cell_polygons(self, h: np.ndarray):
        out = []
        for poly, _ in _kernels.laguerre_polygons_2d(self.Q, self.sites, np.asarray(h, dtype=float)):
            clean = []
            for p in poly:
                if not clean or max(abs(p[0] - clean[-1][0]), abs(p[1] - clean[-1][1])) > 1e-12:
                    clean.append(p)
            if len(clean) > 1 and max(abs(clean[0][0] - clean[-1][0]), abs(clean[0][1] - clean[-1][1])) <= 1e-12:
                clean.pop()
            out.append(clean)
        return out

    def initial_weights(self) -> np.ndarray:
        """Weights whose Laguerre cells are those of a shrunken copy of the sites placed in Q,
        so that every cell contains its own copy point and is nonempty."""
        Y = self.sites
        cy = Y.mean(axis=0)
        cq = np.array([float(t) for t in self.dual_polytope.centroid()])
        s = math.inf
        for a, b in self.dual_polytope.facets:
            a = np.array([float(t) for t in a])
            slack = float(b) - a @ cq
            for y in Y:
                d = a @ (y - cy)
                if d > 0:
                    s = min(s, slack / d)
        s = 0.9 * (s if math.isfinite(s) else 1.0)
        c = cq - s * cy
        # cell k of <u, y_k> - h_k equals the Voronoi cell of c + s y_k when h_k = <c, y_k> + s |y_k|^2 / 2
        return Y @ c + 0.5 * s * (Y * Y).sum(axis=1)


@dataclass
class SemiDiscreteSolution:
    problem: SemiDiscreteProblem
    weights: np.ndarray
    masses: np.ndarray
    residual: float
    iterations: int
    converged: bool
    residual_history: list[float] = field(default_factory=list)
    step_sizes: list[float] = field(default_factory=list)

    def cells(self) -> list[list[tuple[float, float]]]:
        return self.problem.cell_polygons(self.weights)

    def dual_potential(self, u: Sequence[float]) -> float:
        return float(np.max(self.problem.sites @ np.asarray(u, dtype=float) - self.weights))

    def potential(self, x: Sequence[float]) -> float:
        """phi(x) = max over cell vertices u of <u, x> - psi(u); convex, with phi(y_k) = h_k."""
        x = np.asarray(x, dtype=float)
        best = -math.inf
        for poly in self.cells():
            for u in poly:
                best = max(best, float(np.dot(u, x)) - self.dual_potential(u))
        return best

    def mass_balance(self) -> dict:
        return {
            "total_target": float(self.problem.masses.sum()),
            "total_cells": float(self.masses.sum()),
            "dual_volume": self.problem.volume,
        }

    def to_json(self) -> dict:
        return {
            "sites": self.problem.sites.tolist(),
            "weights": self.weights.tolist(),
            "target_masses": self.problem.masses.tolist(),
            "cell_masses": self.masses.tolist(),
            "cells": [[list(p) for p in poly] for poly in self.cells()],
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "residual_history": self.residual_history,
            "mass_balance": self.mass_balance(),
        }


def _jacobian(sites: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    diff = sites[:, None, :] - sites[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(dist, 1.0)
    J = lengths / dist
    np.fill_diagonal(J, 0.0)
    J -= np.diag(J.sum(axis=1))
    return J


def newton_step(prob: SemiDiscreteProblem, h: np.ndarray, eps0: float | None = None, backend: str | None = None):
    """One damped Newton step; returns (new weights, new masses, new residual, step size)."""
    areas, lengths = prob.cell_data(h, backend)
    F = areas - prob.masses
    res = float(np.abs(F).max())
    if eps0 is None:
        eps0 = 0.5 * min(areas.min(), prob.masses.min())
    N = len(h)
    if N == 1:
        return h.copy(), areas, res, 1.0
    J = _jacobian(prob.sites, lengths)
    d = np.zeros(N)
    d[1:] = np.linalg.solve(J[1:, 1:], -F[1:])
    tau = 1.0
    while tau > 1e-12:
        hn = h + tau * d
        an, _ = prob.cell_data(hn, backend)
        rn = float(np.abs(an - prob.masses).max())
        if an.min() >= eps0 and rn <= (1 - tau / 2) * res:
            return hn, an, rn, tau
        tau /= 2
    return h.copy(), areas, res, 0.0


def solve_semidiscrete(
    prob: SemiDiscreteProblem,
    tol: float = 1e-8,
    max_iter: int = 100,
    h0: np.ndarray | None = None,
    backend: str | None = None,
) -> SemiDiscreteSolution:
    h = prob.initial_weights() if h0 is None else np.asarray(h0, dtype=float).copy()
    areas, _ = prob.cell_data(h, backend)
    if areas.min() <= 0:
        raise InfeasibleProblem("initial weights leave an empty cell")
    eps0 = 0.5 * min(areas.min(), prob.masses.min())
    res = float(np.abs(areas - prob.masses).max())
    hist, taus = [res], []
    it = 0
    # polishing: keep stepping past tol while the residual still drops meaningfully
    floor = 1e-13 * max(1.0, prob.volume)
    while it < max_iter and res > floor:
        hn, an, rn, tau = newton_step(prob, h, eps0, backend)
        if tau == 0.0 or (res <= tol and rn > 0.5 * res):
            break
        it += 1
        h, areas, res = hn, an, rn
        hist.append(res)
        taus.append(tau)
    h = h - h.mean()
    return SemiDiscreteSolution(prob, h, areas, res, it, res <= tol, hist, taus)


def ma_residual(phi, target: AtomicMeasure) -> float:
    """Sup over sites of |mass of phi at the site - target mass|."""
    if not target.atoms:
        raise ValueError("empty target measure")
    if isinstance(phi, SemiDiscreteSolution):
        prob = phi.problem
        locs = [tuple(float(t) for t in x) for x, _ in target.atoms]
        if sorted(locs) != sorted(tuple(s) for s in prob.sites.tolist()):
            raise ValueError("target sites do not match the potential's sites")
        areas, _ = prob.cell_data(phi.weights)
        want = {tuple(float(t) for t in x): float(m) for x, m in target.atoms}
        return max(abs(a - want[tuple(s)]) for a, s in zip(areas, prob.sites.tolist()))
    if isinstance(phi, PAConvexFunction):
        got = ma_measure(phi).as_dict()
        want = {vec(x): m for x, m in target.atoms}
        if not set(got) <= set(want):
            raise ValueError("potential has atoms outside the target sites")
        return float(max(abs(got.get(x, 0) - m) for x, m in want.items()))
    raise TypeError("unsupported potential type")


def target_measure(prob: SemiDiscreteProblem) -> AtomicMeasure:
    return AtomicMeasure([(tuple(s), float(m)) for s, m in zip(prob.sites.tolist(), prob.masses.tolist())], "target")


# ---------------------------------------------------------------- problem builders


def triangular_grid(g: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(g + 1) for j in range(g + 1 - i)]


def barycentric_dual_areas(g: int) -> dict[tuple[int, int], Fraction]:
    """Area of the barycentric dual cell of each grid point in the triangulated standard simplex."""
    tri = Fraction(1, 2 * g * g)
    out = {p: Fraction(0) for p in triangular_grid(g)}
    for i in range(g):
        for j in range(g - i):
            for p in ((i, j), (i + 1, j), (i, j + 1)):
                out[p] += tri / 3
            if i + j <= g - 2:
                for p in ((i + 1, j), (i, j + 1), (i + 1, j + 1)):
                    out[p] += tri / 3
    return out


def fermat_face_problem(n: int = 2, face: Sequence[int] | None = None, grid: int = 8) -> SemiDiscreteProblem:
    """Lebesgue measure on a maximal face (in its face chart) discretized on the triangular grid
    with spacing 1/grid, masses scaled to the volume of the face's gradient polygon."""
    from .contract import face_dual_polytope
    from .trop import skeleton

    if n != 2:
        raise ValueError("the semi-discrete solver handles 2-dimensional faces (n = 2)")
    sk = skeleton(n)
    face = frozenset(range(1, n + 2) if face is None else face)
    if face not in sk.maximal_faces:
        raise ValueError(f"{sorted(face)} is not a maximal face")
    Q = face_dual_polytope(sk, face)
    areas = barycentric_dual_areas(grid)
    pts = triangular_grid(grid)
    scale = Q.volume() / Fraction(1, 2)
    sites = np.array([[i / grid, j / grid] for i, j in pts])
    masses = np.array([float(areas[p] * scale) for p in pts])
    simplex = convex_hull([(0, 0), (1, 0), (0, 1)])
    return SemiDiscreteProblem(sites, masses, Q, simplex)


def square_problem() -> SemiDiscreteProblem:
    Q = convex_hull([(0, 0), (1, 0), (0, 1), (1, 1)])
    sites = np.array([[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]])
    return SemiDiscreteProblem(sites, np.full(4, 0.25), Q, Q)


def transform_problem(prob: SemiDiscreteProblem, A: Sequence[Sequence[int]], b: Sequence = (0, 0)) -> SemiDiscreteProblem:
    """Image under x -> A x + b on the domain (A integral, det +-1); gradients move by A^{-T}."""
    A = [[frac(t) for t in row] for row in A]
    det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    if abs(det) != 1 or any(t.denominator != 1 for row in A for t in row):
        raise ValueError("transformation must be unimodular")
    inv_t = [[A[1][1] / det, -A[1][0] / det], [-A[0][1] / det, A[0][0] / det]]
    Qn = convex_hull([tuple(inv_t[r][0] * v[0] + inv_t[r][1] * v[1] for r in range(2)) for v in prob.dual_polytope.vertices])
    Af = np.array([[float(t) for t in row] for row in A])
    sites = prob.sites @ Af.T + np.array([float(frac(t)) for t in b])
    dom = None
    if prob.domain is not None:
        dom = convex_hull([tuple(A[r][0] * v[0] + A[r][1] * v[1] + frac(b[r]) for r in range(2)) for v in prob.domain.vertices])
    return SemiDiscreteProblem(sites, prob.masses.copy(), Qn, dom, prob.mass_tol)


SIMPLEX_SYMMETRIES = [
    ([[1, 0], [0, 1]], (0, 0)),
    ([[0, 1], [1, 0]], (0, 0)),
    ([[-1, -1], [0, 1]], (1, 0)),
    ([[1, 0], [-1, -1]], (0, 1)),
    ([[0, 1], [-1, -1]], (0, 1)),
    ([[-1, -1], [1, 0]], (1, 0)),
]


def symmetry_deviation(sol: SemiDiscreteSolution, tol: float = 1e-9) -> float:
    """max over the simplex symmetries g and sites k of |h_{g(k)} - h_k| (sites must be g-stable)."""
    Y = sol.problem.sites
    index = {tuple(np.round(y, 12)): k for k, y in enumerate(Y)}
    worst = 0.0
    for A, b in SIMPLEX_SYMMETRIES:
        img = Y @ np.array(A, dtype=float).T + np.array(b, dtype=float)
        for k, y in enumerate(img):
            j = index.get(tuple(np.round(y, 12)))
            if j is None:
                raise ValueError("site set is not invariant under the symmetry")
            worst = max(worst, abs(sol.weights[j] - sol.weights[k]))
    return worst
