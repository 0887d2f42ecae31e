"""Exact dense linear algebra over the rationals.

Matrices are lists of rows; vectors are tuples. Every routine accepts ints or
Fractions and never touches floating point.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

Vector = tuple
Matrix = list


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact number: {x!r}")


def frac_vector(v: Iterable) -> tuple:
    return tuple(as_fraction(x) for x in v)


def frac_matrix(m: Iterable[Iterable]) -> list:
    return [list(frac_vector(row)) for row in m]


def int_vector(v: Iterable) -> tuple:
    out = []
    for x in v:
        if isinstance(x, Fraction):
            if x.denominator != 1:
                raise ValueError(f"non-integral entry {x}")
            x = x.numerator
        out.append(int(x))
    return tuple(out)


def int_matrix(m: Iterable[Iterable]) -> list:
    return [list(int_vector(row)) for row in m]


def zeros(rows: int, cols: int) -> list:
    return [[0] * cols for _ in range(rows)]


def identity(n: int) -> list:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def transpose(m: Sequence[Sequence], cols: int | None = None) -> list:
    if not m:
        return [[] for _ in range(cols or 0)]
    return [list(col) for col in zip(*m)]


def shape(m: Sequence[Sequence]) -> tuple[int, int]:
    return len(m), (len(m[0]) if m else 0)


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence], inner: int | None = None) -> list:
    """Product a*b. ``inner`` disambiguates the column count of an empty ``b``."""
    rows = len(a)
    if b:
        cols = len(b[0])
    else:
        cols = inner or 0
    bt = transpose(b, cols)
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def mat_vec(a: Sequence[Sequence], v: Sequence) -> tuple:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def dot(u: Sequence, v: Sequence):
    return sum(x * y for x, y in zip(u, v))


def columns(m: Sequence[Sequence], ncols: int | None = None) -> list[tuple]:
    if not m:
        return [() for _ in range(ncols or 0)]
    return [tuple(col) for col in zip(*m)]


def from_columns(cols: Sequence[Sequence], nrows: int) -> list:
    if not cols:
        return [[] for _ in range(nrows)]
    return [list(row) for row in zip(*cols)]


def _int_row(row: Sequence) -> tuple[list, int]:
    """(row * den, den) for the least positive den making every entry an int."""
    if not all(isinstance(x, int) for x in row):
        row = [as_fraction(x) for x in row]
    den = 1
    for x in row:
        if isinstance(x, Fraction) and x.denominator != 1:
            den = den * x.denominator // gcd(den, x.denominator)
    if den == 1:
        return [int(x) for x in row], 1
    return [int(x * den) for x in row], den


def _eliminate(m: Sequence[Sequence], back: bool) -> tuple[list, list[int]]:
    # fraction-free Gauss(-Jordan) elimination on integer rows
    a = [_int_row(row)[0] for row in m]
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        pr = a[r]
        pv = pr[c]
        for i in range(0 if back else r + 1, nrows):
            if i == r:
                continue
            row = a[i]
            f = row[c]
            if f == 0:
                continue
            new = [pv * x - f * y for x, y in zip(row, pr)]
            g = 0
            for x in new:
                if x:
                    g = gcd(g, x)
                    if g == 1:
                        break
            if g > 1:
                new = [x // g for x in new]
            a[i] = new
        pivots.append(c)
        r += 1
    return a, pivots


def rref(m: Sequence[Sequence]) -> tuple[list, list[int]]:
    """Reduced row echelon form (Fraction entries) and pivot columns."""
    a, pivots = _eliminate(m, back=True)
    out = []
    for i, row in enumerate(a):
        if i < len(pivots):
            pv = row[pivots[i]]
            out.append([Fraction(x, pv) for x in row])
        else:
            out.append([Fraction(0)] * len(row))
    return out, pivots


def rank(m: Sequence[Sequence]) -> int:
    if not m or not m[0]:
        return 0
    return len(_eliminate(m, back=False)[1])


def vectors_rank(vectors: Sequence[Sequence]) -> int:
    return rank(list(vectors)) if vectors else 0


def nullspace(m: Sequence[Sequence], ncols: int | None = None) -> list[tuple]:
    """Basis of {x : m x = 0} over Q."""
    if not m:
        n = ncols or 0
        return [tuple(Fraction(int(i == j)) for i in range(n)) for j in range(n)]
    a, pivots = rref(m)
    n = len(a[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for row, pc in zip(a, pivots):
            x[pc] = -row[f]
        basis.append(tuple(x))
    return basis


def solve(a: Sequence[Sequence], b: Sequence) -> tuple | None:
    """Some solution of a x = b, or None when inconsistent."""
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    if nrows == 0:
        return tuple(Fraction(0) for _ in range(ncols))
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    r, pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for row, pc in zip(r, pivots):
        x[pc] = row[-1]
    return tuple(x)


def solve_columns(basis_cols: Sequence[Sequence], v: Sequence) -> tuple | None:
    """Coordinates of ``v`` in the span of ``basis_cols`` (None if outside)."""
    a = from_columns(basis_cols, len(v))
    x = solve(a, v)
    if x is None:
        return None
    if mat_vec(a, x) != tuple(as_fraction(t) for t in v):
        return None
    return x


def det(m: Sequence[Sequence]):
    n = len(m)
    if n == 0:
        return 1
    den = 1
    a = []
    for row in m:
        r, scale = _int_row(row)
        den *= scale
        a.append(r)
    # Bareiss elimination
    sign = 1
    prev = 1
    for c in range(n - 1):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return 0
        if p != c:
            a[c], a[p] = a[p], a[c]
            sign = -sign
        for i in range(c + 1, n):
            for j in range(c + 1, n):
                a[i][j] = (a[i][j] * a[c][c] - a[i][c] * a[c][j]) // prev
            a[i][c] = 0
        prev = a[c][c]
    result = Fraction(sign * a[n - 1][n - 1], den)
    if result.denominator == 1:
        return result.numerator
    return result


def inverse(m: Sequence[Sequence]) -> list:
    n = len(m)
    aug = [list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(m)]
    r, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in r]


def lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b) if a and b else 0


def primitive_integer(v: Sequence) -> tuple:
    """The primitive integer vector on the ray through a nonzero rational ``v``."""
    fr = frac_vector(v)
    den = 1
    for x in fr:
        den = lcm(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        raise ValueError("zero vector has no primitive")
    return tuple(x // g for x in ints)


def is_zero(v: Sequence) -> bool:
    return all(x == 0 for x in v)


def vec_add(u: Sequence, v: Sequence) -> tuple:
    return tuple(x + y for x, y in zip(u, v))


def vec_sub(u: Sequence, v: Sequence) -> tuple:
    return tuple(x - y for x, y in zip(u, v))


def vec_scale(c, v: Sequence) -> tuple:
    return tuple(c * x for x in v)


def vec_sum(vectors: Iterable[Sequence], dim: int) -> tuple:
    total = [0] * dim
    for v in vectors:
        for i, x in enumerate(v):
            total[i] += x
    return tuple(total)


def normalize(x):
    """Collapse integral Fractions to int so tuples hash and print uniformly."""
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def normalize_vector(v: Iterable) -> tuple:
    return tuple(normalize(x) for x in v)


def normalize_matrix(m: Iterable[Iterable]) -> tuple:
    return tuple(normalize_vector(row) for row in m)
