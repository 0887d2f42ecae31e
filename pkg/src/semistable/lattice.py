"""Integer normal forms and lattices presented inside a rational chart.

Conventions
-----------
Column style throughout: a lattice is generated by the *columns* of its basis
matrix, and ``hnf(m)`` returns ``h = m @ u`` with ``u`` unimodular.  The Hermite
form is lower triangular in echelon shape: pivots are positive, entries to the
left of a pivot are reduced into ``[0, pivot)``, zero columns come last.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import NotSublattice, RankMismatch, ZeroVector
from .linalg import (
    as_fraction,
    columns,
    det,
    from_columns,
    identity,
    int_matrix,
    lcm,
    mat_mul,
    nullspace,
    normalize_vector,
    primitive_integer,
    shape,
    solve_columns,
)

__all__ = [
    "hnf",
    "snf",
    "integer_kernel",
    "Lattice",
    "lattice_index",
    "saturate",
    "image_lattice",
    "preimage_lattice",
    "primitive_of",
    "saturated_basis",
    "integer_solutions",
]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with x*a + y*b = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _col_combine(m: list, c: int, j: int, p: int, q: int, r: int, s: int) -> None:
    """Replace columns (c, j) by (p*c + q*j, r*c + s*j)."""
    for row in m:
        a, b = row[c], row[j]
        row[c] = p * a + q * b
        row[j] = r * a + s * b


def hnf(m: Sequence[Sequence[int]]) -> tuple[list, list]:
    """Column Hermite normal form.

    Returns ``(h, u)`` with ``h == m @ u`` and ``u`` unimodular.
    """
    h = int_matrix(m)
    nrows, ncols = shape(h)
    if not h:
        return h, identity(ncols)
    u = identity(ncols)
    c = 0
    for i in range(nrows):
        if c == ncols:
            break
        for j in range(c + 1, ncols):
            b = h[i][j]
            if b == 0:
                continue
            a = h[i][c]
            g, x, y = _xgcd(a, b)
            # [[x, -b/g], [y, a/g]] has determinant 1
            _col_combine(h, c, j, x, y, -b // g, a // g)
            _col_combine(u, c, j, x, y, -b // g, a // g)
        p = h[i][c]
        if p == 0:
            continue
        if p < 0:
            for mat in (h, u):
                for row in mat:
                    row[c] = -row[c]
            p = -p
        for k in range(c):
            q = h[i][k] // p
            if q:
                for mat in (h, u):
                    for row in mat:
                        row[k] -= q * row[c]
        c += 1
    return h, u


def hnf_rank(h: Sequence[Sequence[int]]) -> int:
    """Number of nonzero columns of a matrix already in Hermite form."""
    ncols = len(h[0]) if h else 0
    return sum(1 for col in columns(h, ncols) if any(col))


def snf(m: Sequence[Sequence[int]]) -> tuple[list, list, list]:
    """Smith normal form ``d = u @ m @ v`` with d[0][0] | d[1][1] | ... ."""
    d = int_matrix(m)
    nrows, ncols = shape(d)
    if not d:
        return d, [], identity(ncols)
    u = identity(nrows)
    v = identity(ncols)

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for mat in (d, v):
            for row in mat:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, k):
        d[dst] = [a + k * b for a, b in zip(d[dst], d[src])]
        u[dst] = [a + k * b for a, b in zip(u[dst], u[src])]

    def add_col(dst, src, k):
        for mat in (d, v):
            for row in mat:
                row[dst] += k * row[src]

    for t in range(min(nrows, ncols)):
        while True:
            best = None
            for i in range(t, nrows):
                for j in range(t, ncols):
                    if d[i][j] and (best is None or abs(d[i][j]) < abs(d[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                return d, u, v
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            p = d[t][t]
            dirty = False
            for i in range(t + 1, nrows):
                q = d[i][t] // p
                if q:
                    add_row(i, t, -q)
                if d[i][t]:
                    dirty = True
            for j in range(t + 1, ncols):
                q = d[t][j] // p
                if q:
                    add_col(j, t, -q)
                if d[t][j]:
                    dirty = True
            if dirty:
                continue
            bad = next(
                (i for i in range(t + 1, nrows) for j in range(t + 1, ncols) if d[i][j] % p),
                None,
            )
            if bad is not None:
                add_row(t, bad, 1)
                continue
            if p < 0:
                d[t] = [-x for x in d[t]]
                u[t] = [-x for x in u[t]]
            break
    return d, u, v


def integer_kernel(m: Sequence[Sequence], ncols: int | None = None) -> list[tuple]:
    """Z-basis of {x in Z^n : m x = 0}; ``m`` may be rational."""
    if not m:
        n = ncols or 0
        return [tuple(int(i == j) for i in range(n)) for j in range(n)]
    rows = []
    for row in m:
        den = 1
        for x in row:
            den = lcm(den, as_fraction(x).denominator)
        rows.append([int(as_fraction(x) * den) for x in row])
    h, u = hnf(rows)
    r = hnf_rank(h)
    n = len(rows[0])
    return [tuple(u[i][k] for i in range(n)) for k in range(r, n)]


def _canonical_basis(generators: Sequence[Sequence], dim: int) -> tuple:
    gens = [tuple(as_fraction(x) for x in g) for g in generators]
    gens = [g for g in gens if any(g)]
    if not gens:
        return ()
    den = 1
    for g in gens:
        for x in g:
            den = lcm(den, x.denominator)
    mat = from_columns([[int(x * den) for x in g] for g in gens], dim)
    h, _ = hnf(mat)
    r = hnf_rank(h)
    cols = columns(h, len(gens))[:r]
    return tuple(normalize_vector(Fraction(x, den) for x in col) for col in cols)


@dataclass(frozen=True)
class Lattice:
    """A finitely generated subgroup of Q^dim, stored by its Hermite basis.

    Two lattices are equal exactly when their canonical bases coincide.
    """

    dim: int
    basis: tuple

    def __post_init__(self):
        object.__setattr__(self, "basis", _canonical_basis(self.basis, self.dim))

    @classmethod
    def standard(cls, dim: int) -> "Lattice":
        return cls(dim, tuple(tuple(int(i == j) for i in range(dim)) for j in range(dim)))

    @classmethod
    def from_generators(cls, generators: Sequence[Sequence], dim: int | None = None) -> "Lattice":
        generators = list(generators)
        if dim is None:
            if not generators:
                raise ValueError("dimension required for an empty generator list")
            dim = len(generators[0])
        return cls(dim, tuple(tuple(g) for g in generators))

    @classmethod
    def from_matrix(cls, m: Sequence[Sequence]) -> "Lattice":
        """Lattice generated by the columns of ``m``."""
        nrows, ncols = shape(m)
        return cls(nrows, tuple(columns(m, ncols)))

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def matrix(self) -> list:
        return from_columns(self.basis, self.dim)

    def is_full_rank(self) -> bool:
        return self.rank == self.dim

    def coordinates(self, v: Sequence) -> tuple | None:
        """Rational coordinates of ``v`` in the basis, None if outside the span."""
        if self.rank == 0:
            return () if not any(v) else None
        return solve_columns(self.basis, v)

    def __contains__(self, v) -> bool:
        c = self.coordinates(v)
        return c is not None and all(x.denominator == 1 for x in c)

    def is_integral(self) -> bool:
        return all(isinstance(x, int) for col in self.basis for x in col)


def lattice_index(sub: Lattice, sup: Lattice):
    """[sup : sub]; ``math.inf`` when ``sub`` has smaller rank."""
    if sub.dim != sup.dim:
        raise RankMismatch("lattices live in different charts")
    coords = []
    for b in sub.basis:
        c = sup.coordinates(b)
        if c is None or any(x.denominator != 1 for x in c):
            raise NotSublattice(f"basis vector {b} is not in the superlattice")
        coords.append(c)
    if sub.rank < sup.rank:
        return math.inf
    return abs(int(det(from_columns(coords, sup.rank))))


def saturate(sub: Lattice, ambient: Lattice) -> Lattice:
    """ambient ∩ span(sub)."""
    coords = []
    for b in sub.basis:
        c = ambient.coordinates(b)
        if c is None:
            raise NotSublattice(f"{b} is outside the span of the ambient lattice")
        coords.append(c)
    if not coords:
        return Lattice(ambient.dim, ())
    r = ambient.rank
    left = nullspace([list(c) for c in coords], r)
    # rows of `left` span the annihilator of span(sub) in ambient coordinates
    kernel = integer_kernel([list(v) for v in left], r) if left else [
        tuple(int(i == j) for i in range(r)) for j in range(r)
    ]
    amb = ambient.matrix
    gens = [tuple(sum(amb[i][k] * a[k] for k in range(r)) for i in range(ambient.dim)) for a in kernel]
    return Lattice(ambient.dim, tuple(gens))


def image_lattice(f: Sequence[Sequence], l: Lattice) -> Lattice:
    """Lattice generated by f applied to a basis of ``l``."""
    target_dim = len(f)
    gens = [tuple(sum(row[k] * b[k] for k in range(l.dim)) for row in f) for b in l.basis]
    return Lattice(target_dim, tuple(gens))


def preimage_lattice(f: Sequence[Sequence], source: Lattice, target_sub: Lattice) -> Lattice:
    """source ∩ f^{-1}(target_sub)."""
    s = source.matrix
    fs = mat_mul(f, s, source.rank) if f else []
    t = target_sub.matrix
    r, k = source.rank, target_sub.rank
    n_rows = len(f)
    if n_rows == 0:
        return source
    system = [list(fs[i]) + [-x for x in t[i]] for i in range(n_rows)]
    kernel = integer_kernel(system, r + k)
    gens = []
    for vec in kernel:
        a = vec[:r]
        gens.append(tuple(sum(s[i][j] * a[j] for j in range(r)) for i in range(source.dim)))
    return Lattice(source.dim, tuple(gens))


def primitive_of(v: Sequence, l: Lattice) -> tuple[tuple, Fraction]:
    """Primitive point of ``l`` on the ray through ``v``.

    Returns ``(p, multiple)`` with ``p`` in the coordinates of ``l`` and
    ``v == multiple * (basis @ p)``.
    """
    if not any(v):
        raise ZeroVector("the zero vector spans no ray")
    c = l.coordinates(v)
    if c is None:
        raise NotSublattice(f"{tuple(v)} is outside the span of the lattice")
    p = primitive_integer(c)
    i = next(k for k, x in enumerate(p) if x)
    return p, c[i] / p[i]


def saturated_basis(vectors: Sequence[Sequence], dim: int) -> tuple:
    """Canonical basis of Z^dim ∩ span(vectors), as a tuple of integer columns."""
    return saturate(Lattice(dim, tuple(tuple(v) for v in vectors)), Lattice.standard(dim)).basis


def integer_solutions(m: Sequence[Sequence[int]], h: Sequence[int]) -> tuple[tuple, list[tuple]] | None:
    """All integer x with m x = h, as (particular solution, kernel basis)."""
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    if nrows == 0:
        return tuple(0 for _ in range(ncols)), [tuple(int(i == j) for i in range(ncols)) for j in range(ncols)]
    d, u, v = snf(m)
    uh = [sum(u[i][k] * h[k] for k in range(nrows)) for i in range(nrows)]
    r = sum(1 for i in range(min(nrows, ncols)) if d[i][i])
    y = [0] * ncols
    for i in range(nrows):
        if i < r:
            if uh[i] % d[i][i]:
                return None
            y[i] = uh[i] // d[i][i]
        elif uh[i]:
            return None
    x0 = tuple(sum(v[i][k] * y[k] for k in range(ncols)) for i in range(ncols))
    kernel = [tuple(v[i][k] for i in range(ncols)) for k in range(r, ncols)]
    return x0, kernel
