"""Gauss points and quasi-monomial valuations, hybrid logarithmic evaluation and the
Haar-versus-Gauss comparison on shrinking tori.

Coefficients live in Q(i)((t)) restricted to finite sums: a SeriesCoefficient is a finite map
from rational t-exponents to Gaussian rationals (re, im).
"""
from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from ._exact import frac

GaussRat = tuple[Fraction, Fraction]
INFINITY = float("inf")


class Inconclusive(Exception):
    """Raised when a truncated computation cannot certify its answer."""


def _gmul(a: GaussRat, b: GaussRat) -> GaussRat:
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _gadd(a: GaussRat, b: GaussRat) -> GaussRat:
    return (a[0] + b[0], a[1] + b[1])


def _gnonzero(a: GaussRat) -> bool:
    return a[0] != 0 or a[1] != 0


def _as_gauss(c) -> GaussRat:
    if isinstance(c, tuple):
        return (frac(c[0]), frac(c[1]))
    if isinstance(c, complex):
        return (frac(c.real), frac(c.imag))
    return (frac(c), Fraction(0))


class SeriesCoefficient:
    """Finite Laurent-Puiseux sum  sum_e c_e t^e  with Gaussian-rational c_e."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | Iterable = ()):
        acc: dict[Fraction, GaussRat] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for e, c in items:
            e = frac(e)
            acc[e] = _gadd(acc.get(e, (Fraction(0), Fraction(0))), _as_gauss(c))
        self.terms: tuple[tuple[Fraction, GaussRat], ...] = tuple(sorted((e, c) for e, c in acc.items() if _gnonzero(c)))

    @classmethod
    def constant(cls, c) -> "SeriesCoefficient":
        return cls([(0, c)])

    @classmethod
    def monomial(cls, e, c=1) -> "SeriesCoefficient":
        return cls([(e, c)])

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def valuation(self):
        return self.terms[0][0] if self.terms else INFINITY

    def __add__(self, other: "SeriesCoefficient") -> "SeriesCoefficient":
        return SeriesCoefficient(list(self.terms) + list(other.terms))

    def __neg__(self) -> "SeriesCoefficient":
        return SeriesCoefficient([(e, (-c[0], -c[1])) for e, c in self.terms])

    def __sub__(self, other: "SeriesCoefficient") -> "SeriesCoefficient":
        return self + (-other)

    def mul(self, other: "SeriesCoefficient", keep=None) -> "SeriesCoefficient":
        """Product; terms t^e with keep(e) False are discarded."""
        out = []
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = e1 + e2
                if keep is None or keep(e):
                    out.append((e, _gmul(c1, c2)))
        return SeriesCoefficient(out)

    __mul__ = mul

    def __eq__(self, other) -> bool:
        return isinstance(other, SeriesCoefficient) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.terms)

    def __repr__(self) -> str:
        return f"SeriesCoefficient({list(self.terms)!r})"

    def leading_complex(self) -> complex:
        """The t^0 coefficient as a complex number (t-free evaluation)."""
        for e, c in self.terms:
            if e == 0:
                return complex(float(c[0]), float(c[1]))
        return 0j


def _split_terms(src: str) -> list[tuple[int, str]]:
    """Split at top-level + and - (not inside parentheses, not right after ^ or /)."""
    out, depth, start, sign = [], 0, 0, 1
    for i, ch in enumerate(src):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and (i == 0 or src[i - 1] not in "^/*("):
            if src[start:i]:
                out.append((sign, src[start:i]))
            elif i > 0:
                raise ValueError(f"empty term in {src!r}")
            sign, start = (1 if ch == "+" else -1), i + 1
    if depth != 0 or not src[start:]:
        raise ValueError(f"malformed polynomial {src!r}")
    out.append((sign, src[start:]))
    return out


class LaurentPolynomial:
    """Finite sum  sum_m a_m chi^m  with integer exponents m and SeriesCoefficient a_m."""

    __slots__ = ("terms", "nvars")

    def __init__(self, terms: Mapping | Iterable, nvars: int | None = None):
        acc: dict[tuple[int, ...], SeriesCoefficient] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for m, a in items:
            m = tuple(int(t) for t in m)
            a = a if isinstance(a, SeriesCoefficient) else SeriesCoefficient.constant(a)
            acc[m] = acc[m] + a if m in acc else a
        self.terms: dict[tuple[int, ...], SeriesCoefficient] = {m: a for m, a in sorted(acc.items()) if not a.is_zero()}
        if nvars is None:
            if not self.terms:
                raise ValueError("cannot infer the number of variables of the zero polynomial")
            nvars = len(next(iter(self.terms)))
        self.nvars = nvars

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def support(self) -> list[tuple[int, ...]]:
        return list(self.terms)

    def __add__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        return LaurentPolynomial(list(self.terms.items()) + list(other.terms.items()), self.nvars)

    def __neg__(self) -> "LaurentPolynomial":
        return LaurentPolynomial([(m, -a) for m, a in self.terms.items()], self.nvars)

    def __sub__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        return self + (-other)

    def mul(self, other: "LaurentPolynomial", x: Sequence | None = None, bound=None) -> "LaurentPolynomial":
        """Product. With ``x`` and ``bound`` given, terms of x-weighted order v_K(a) + <m, x> above
        the bound are dropped (every contribution to a given (m, e) has the same order, so the
        truncation never creates spurious cancellation)."""
        out = []
        for m1, a1 in self.terms.items():
            for m2, a2 in other.terms.items():
                m = tuple(p + q for p, q in zip(m1, m2))
                if bound is None:
                    out.append((m, a1.mul(a2)))
                else:
                    w = sum((frac(xi) * mi for xi, mi in zip(x, m)), Fraction(0))
                    out.append((m, a1.mul(a2, keep=lambda e, w=w: e + w <= bound)))
        return LaurentPolynomial(out, self.nvars)

    __mul__ = mul

    def __eq__(self, other) -> bool:
        return isinstance(other, LaurentPolynomial) and self.terms == other.terms

    def __repr__(self) -> str:
        return f"LaurentPolynomial({self.terms!r})"

    @classmethod
    def monomial(cls, m: Sequence[int], c=1) -> "LaurentPolynomial":
        return cls([(m, c)])

    @classmethod
    def parse(cls, text: str, nvars: int | None = None) -> "LaurentPolynomial":
        """Parse sums like ``1+z1+z2``, ``2*z1^2*z2 - 3``, ``t^1/2*z1``, ``(1+2i)*z2``."""
        terms = []
        maxvar = 0
        for sign, tok in _split_terms(text.replace(" ", "")):
            coef: GaussRat = (Fraction(sign), Fraction(0))
            texp = Fraction(0)
            expo: dict[int, int] = {}
            for f in filter(None, tok.split("*")):
                mt = re.fullmatch(r"z(\d+)(?:\^(-?\d+))?", f)
                if mt:
                    j = int(mt.group(1))
                    maxvar = max(maxvar, j)
                    expo[j] = expo.get(j, 0) + int(mt.group(2) or 1)
                    continue
                mt = re.fullmatch(r"t(?:\^\(?(-?\d+(?:/\d+)?)\)?)?", f)
                if mt:
                    texp += Fraction(mt.group(1) or 1)
                    continue
                mt = re.fullmatch(r"\(?(-?\d+(?:/\d+)?)?(?:([+-]?\d*(?:/\d+)?)i)?\)?", f)
                if mt and (mt.group(1) or mt.group(2) is not None):
                    re_part = Fraction(mt.group(1)) if mt.group(1) else Fraction(0)
                    im_s = mt.group(2)
                    im_part = Fraction(0) if im_s is None else Fraction(im_s if im_s not in ("", "+", "-") else im_s + "1")
                    coef = _gmul(coef, (re_part, im_part))
                    continue
                raise ValueError(f"cannot parse factor {f!r} in {text!r}")
            terms.append((expo, texp, coef))
        nv = nvars if nvars is not None else max(maxvar, 1)
        if maxvar > nv:
            raise ValueError("more variables than declared")
        out = []
        for expo, texp, coef in terms:
            m = tuple(expo.get(j + 1, 0) for j in range(nv))
            out.append((m, SeriesCoefficient([(texp, coef)])))
        return cls(out, nv)


def gauss_valuation(f: LaurentPolynomial, x: Sequence):
    """min_m v_K(a_m) + <m, x>; the zero polynomial has valuation +inf (float)."""
    if f.is_zero():
        return INFINITY
    x = [frac(t) for t in x]
    return min(a.valuation + sum((xi * mi for xi, mi in zip(x, m)), Fraction(0)) for m, a in f.terms.items())


@dataclass(frozen=True)
class QuasiMonomialWeight:
    indices: tuple[int, ...]
    weights: tuple[Fraction, ...]
    multiplicities: tuple[int, ...] | None = None

    def __post_init__(self):
        w = tuple(frac(t) for t in self.weights)
        object.__setattr__(self, "weights", w)
        a = self.multiplicities or tuple(1 for _ in w)
        object.__setattr__(self, "multiplicities", tuple(a))
        if len(self.indices) != len(w) or len(a) != len(w):
            raise ValueError("indices, weights and multiplicities must align")
        if any(t < 0 for t in w):
            raise ValueError("weights must be nonnegative")
        if sum((ai * wi for ai, wi in zip(a, w)), Fraction(0)) != 1:
            raise ValueError("weights must satisfy sum a_j w_j = 1")


def quasi_monomial_valuation(f: LaurentPolynomial, w: QuasiMonomialWeight) -> Fraction:
    """min <w, beta> over the exponents beta in the support of a local expansion f."""
    if f.is_zero():
        raise ValueError("empty support")
    if f.nvars != len(w.weights):
        raise ValueError("expansion variables do not match the stratum")
    best = None
    for beta in f.terms:
        if any(b < 0 for b in beta):
            raise ValueError("local expansions must have nonnegative exponents")
        v = sum((wi * b for wi, b in zip(w.weights, beta)), Fraction(0))
        best = v if best is None else min(best, v)
    return best


@dataclass(frozen=True)
class MultiplicativityResult:
    status: str  # "true" | "false" | "inconclusive"
    v_f: Fraction
    v_g: Fraction
    v_fg: object

    def __bool__(self) -> bool:
        return self.status == "true"


def multiplicativity_check(f: LaurentPolynomial, g: LaurentPolynomial, x: Sequence, slack: int = 16) -> MultiplicativityResult:
    if f.is_zero() or g.is_zero():
        raise ValueError("multiplicativity needs nonzero inputs")
    vf, vg = gauss_valuation(f, x), gauss_valuation(g, x)
    bound = vf + vg + slack
    prod = f.mul(g, x=x, bound=bound)
    if prod.is_zero():
        return MultiplicativityResult("inconclusive", vf, vg, None)
    vfg = gauss_valuation(prod, x)
    if vfg > bound:
        return MultiplicativityResult("inconclusive", vf, vg, vfg)
    return MultiplicativityResult("true" if vfg == vf + vg else "false", vf, vg, vfg)


def ultrametric_check(f: LaurentPolynomial, g: LaurentPolynomial, x: Sequence) -> bool:
    """v(f+g) >= min(v(f), v(g)) with equality when v(f) != v(g)."""
    vf, vg, vs = gauss_valuation(f, x), gauss_valuation(g, x), gauss_valuation(f + g, x)
    if vs < min(vf, vg):
        return False
    return vf == vg or vs == min(vf, vg)


# ---------------------------------------------------------------- hybrid evaluation


def _tfree(f: LaurentPolynomial) -> tuple[np.ndarray, np.ndarray]:
    E, C = [], []
    for m, a in f.terms.items():
        if any(e != 0 for e, _ in a.terms):
            raise ValueError("hybrid evaluation needs t-free coefficients")
        E.append(m)
        C.append(a.leading_complex())
    return np.array(E, dtype=float).reshape(len(E), f.nvars), np.array(C, dtype=complex)


def hybrid_log_eval(f: LaurentPolynomial, x: Sequence[float], lam: float) -> float:
    """lam * log|sum_j a_j exp(-<m_j, x>/lam)|, with the lam = 0 limit -min_j <m_j, x>.
    Exact cancellation gives -inf."""
    E, C = _tfree(f)
    if len(C) == 0:
        return -INFINITY
    s = E @ np.asarray(x, dtype=float)
    mu = s.min()
    if lam == 0:
        return float(-mu)
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    z = np.sum(C * np.exp(-(s - mu) / lam))
    if z == 0:
        return -INFINITY
    return float(-mu + lam * math.log(abs(z)))


def hybrid_log_asymptotic(f: LaurentPolynomial, x: Sequence[float], lam: float) -> float:
    """First-order expansion -min_j <m_j, x> + lam log|sum_{j in argmin} a_j|."""
    E, C = _tfree(f)
    s = E @ np.asarray(x, dtype=float)
    mu = s.min()
    lead = C[np.isclose(s, mu, rtol=0, atol=1e-12)].sum()
    return float(-mu + lam * math.log(abs(lead)))


# ---------------------------------------------------------------- Haar versus Gauss


def _p2(gen: np.ndarray, N: int) -> float:
    k = np.arange(N, dtype=np.int64)[:, None]
    x = (k * gen[None, :] % N) / N
    b2 = x * x - x + 1.0 / 6.0
    return float(np.prod(1.0 + 2.0 * math.pi**2 * b2, axis=1).mean() - 1.0)


@functools.lru_cache(maxsize=32)
def korobov_generator(N: int, dim: int, candidates: int = 48) -> tuple[int, ...]:
    """Rank-1 lattice generator (1, a, a^2, ...) mod N with a picked by the P_2 figure of merit."""
    if dim == 1:
        return (1,)
    golden = (math.sqrt(5) - 1) / 2
    best, best_a = math.inf, 1
    seen = set()
    for i in range(1, candidates + 1):
        a = int(N * ((i * golden) % 1.0)) | 1
        if a in seen or a <= 1:
            continue
        seen.add(a)
        gen = np.array([pow(a, j, N) for j in range(dim)], dtype=np.int64)
        p = _p2(gen, N)
        if p < best:
            best, best_a = p, a
    return tuple(pow(best_a, j, N) for j in range(dim))


def lattice_points(N: int, dim: int, shift: np.ndarray) -> np.ndarray:
    gen = np.array(korobov_generator(N, dim), dtype=np.int64)
    k = np.arange(N, dtype=np.int64)[:, None]
    return ((k * gen[None, :] % N) / N + shift[None, :]) % 1.0


@dataclass(frozen=True)
class HaarResult:
    lam: float
    integral: float
    tropical: float
    error: float
    stderr: float
    samples: int
    shifts: int
    zero_hits: int


def _prepare(polys: Sequence[LaurentPolynomial], x: Sequence[float], lam: float):
    E, C, W, idx, base = [], [], [], [], []
    xv = np.asarray(x, dtype=float)
    for a, f in enumerate(polys):
        Ea, Ca = _tfree(f)
        s = Ea @ xv
        mu = s.min()
        base.append(-mu)
        E.append(Ea)
        C.append(Ca)
        W.append(np.exp(-(s - mu) / lam))
        idx.append(np.full(len(Ca), a))
    return np.vstack(E), np.concatenate(C), np.concatenate(W), np.concatenate(idx), np.array(base)


def haar_vs_gauss(
    polys: Sequence[LaurentPolynomial],
    consts: Sequence[float] | None,
    x: Sequence[float],
    lam: float,
    samples: int = 2**16,
    shifts: int = 8,
    seed: int = 0,
    backend: str | None = None,
) -> HaarResult:
    """Compare the torus average of max_a(lam log|P_a| + c_a) over |z_i| = exp(-x_i/lam) with the
    tropical value max_a(-v_x(P_a) + c_a). Randomly shifted rank-1 lattice; stderr over shifts
    combined with a summation roundoff bound."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if samples < 1 or shifts < 1:
        raise ValueError("samples and shifts must be positive")
    polys = list(polys)
    consts = np.zeros(len(polys)) if consts is None else np.asarray(consts, dtype=float)
    n = polys[0].nvars
    E, C, W, idx, base = _prepare(polys, x, lam)
    trop = float(np.max(base + consts))
    rng = np.random.default_rng(seed)
    shift_vals = rng.random((shifts, n))
    est = np.empty(shifts)
    hits = 0
    absdev = 0.0
    for r in range(shifts):
        theta = 2 * math.pi * lattice_points(samples, n, shift_vals[r])
        la = _kernels.torus_logabs(theta, E, C, W, idx, len(polys), backend=backend)
        bad = ~np.isfinite(la).all(axis=1)
        if bad.any():
            hits += int(bad.sum())
            nudged = theta[bad] + 2 * math.pi / (7.0 * samples)
            la[bad] = _kernels.torus_logabs(nudged, E, C, W, idx, len(polys), backend=backend)
        # accumulate deviations from the tropical value so an exact match stays exact
        dev = np.max(lam * la + (base + consts - trop)[None, :], axis=1)
        est[r] = dev.sum() / samples
        absdev = max(absdev, float(np.abs(dev).mean()))
    mean_dev = float(est.mean())
    se = float(est.std(ddof=1) / math.sqrt(shifts)) if shifts > 1 else float("nan")
    # pairwise summation roundoff bound, so the error bar never claims more than float precision
    roundoff = np.finfo(float).eps * math.log2(max(samples, 2)) * absdev
    return HaarResult(lam, trop + mean_dev, trop, abs(mean_dev), math.hypot(se, roundoff), samples, shifts, hits)


def haar_scaling(polys, consts, x, lams=(0.2, 0.1, 0.05, 0.025), **kw) -> dict:
    """error(lam)/lam over a lambda grid, with the max and its standard error."""
    rows = [haar_vs_gauss(polys, consts, x, lam, **kw) for lam in lams]
    ratios = [r.error / r.lam for r in rows]
    k = int(np.argmax(ratios))
    return {"rows": rows, "ratios": ratios, "max_ratio": ratios[k], "max_ratio_stderr": rows[k].stderr / rows[k].lam}
