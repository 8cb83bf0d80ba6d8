"""Exact rational linear algebra used by the geometry layer."""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

Vec = tuple[Fraction, ...]


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12) if x != int(x) else Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


def vec(xs: Iterable) -> Vec:
    return tuple(frac(x) for x in xs)


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def sub(a: Sequence, b: Sequence) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def add(a: Sequence, b: Sequence) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def scale(c, a: Sequence) -> Vec:
    return tuple(c * x for x in a)


def rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form. Returns (nonzero rows, pivot columns)."""
    m = [[frac(x) for x in r] for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    piv: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        piv.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], piv


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[Vec]:
    """Basis of {x : A x = 0}."""
    if not rows:
        assert ncols is not None
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    ncols = len(rows[0])
    red, piv = rref(rows)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for r, p in zip(red, piv):
            x[p] = -r[f]
        basis.append(tuple(x))
    return basis


def solve(a: Sequence[Sequence], b: Sequence) -> Vec | None:
    """Solve A x = b for square or overdetermined consistent systems; None if inconsistent.

    When the solution is not unique the free variables are set to zero.
    """
    ncols = len(a[0])
    aug = [list(r) + [frac(bi)] for r, bi in zip(a, b)]
    red, piv = rref(aug)
    if ncols in piv:
        return None
    x = [Fraction(0)] * ncols
    for r, p in zip(red, piv):
        x[p] = r[-1]
    return tuple(x)


def det(m: Sequence[Sequence]) -> Fraction:
    n = len(m)
    a = [[frac(x) for x in r] for r in m]
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            d = -d
        d *= a[c][c]
        inv = 1 / a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] * inv
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return d


def int_det(m: Sequence[Sequence[int]]) -> int:
    """Fraction-free (Bareiss) determinant of an integer matrix."""
    n = len(m)
    if n == 0:
        return 1
    a = [list(map(int, r)) for r in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            p = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if p is None:
                return 0
            a[k], a[p] = a[p], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def primitive(v: Sequence) -> tuple[int, ...]:
    """Scale a nonzero rational vector to the primitive integer vector on its ray."""
    fs = [frac(x) for x in v]
    den = 1
    for x in fs:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fs]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return tuple(x // g for x in ints)


def lcm_den(xs: Iterable[Fraction]) -> int:
    den = 1
    for x in xs:
        den = den * x.denominator // gcd(den, x.denominator)
    return den


def integer_kernel_basis(rows: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Z-basis of the lattice {x in Z^m : A x = 0} by unimodular column reduction."""
    a = [list(map(int, r)) for r in rows]
    m = len(a[0])
    u = [[int(i == j) for j in range(m)] for i in range(m)]  # columns are the basis

    def colop(dst: int, src: int, q: int) -> None:
        for r in a:
            r[dst] -= q * r[src]
        for r in u:
            r[dst] -= q * r[src]

    def swap(i: int, j: int) -> None:
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in u:
            r[i], r[j] = r[j], r[i]

    lead = 0
    for row in range(len(a)):
        if lead >= m:
            break
        while True:
            nz = [c for c in range(lead, m) if a[row][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda c: abs(a[row][c]))
            if p != lead:
                swap(p, lead)
            done = True
            for c in range(lead + 1, m):
                if a[row][c] != 0:
                    colop(c, lead, a[row][c] // a[row][lead])
                    if a[row][c] != 0:
                        done = False
            if done:
                break
        if any(a[row][c] != 0 for c in range(lead, m)):
            lead += 1
    return [tuple(u[i][c] for i in range(m)) for c in range(lead, m)]


def affine_basis(points: Sequence[Vec]) -> tuple[list[list[Fraction]], list[int]]:
    """RREF basis of the direction space of the affine hull and its pivot columns."""
    if len(points) <= 1:
        return [], []
    p0 = points[0]
    return rref([sub(p, p0) for p in points[1:]])
