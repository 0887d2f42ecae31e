"""Brute-force reference computations, written without the library's algorithms."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def leibniz_det(m) -> int:
    n = len(m)
    total = 0
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = -1 if inversions % 2 else 1
        for i in range(n):
            term *= m[i][perm[i]]
        total += term
    return total


def minors_gcd(m, k: int) -> int:
    """gcd of all k x k minors (0 if every minor vanishes)."""
    rows, cols = len(m), len(m[0])
    g = 0
    for ri in itertools.combinations(range(rows), k):
        for ci in itertools.combinations(range(cols), k):
            g = math.gcd(g, leibniz_det([[m[i][j] for j in ci] for i in ri]))
    return g


def determinantal_divisors(m) -> list[int]:
    """Invariant factors from gcds of minors: d_k = D_k / D_(k-1)."""
    out = []
    prev = 1
    for k in range(1, min(len(m), len(m[0])) + 1):
        dk = minors_gcd(m, k)
        if dk == 0:
            break
        out.append(dk // prev)
        prev = dk
    return out


def euclid_hnf(m) -> list[list[int]]:
    """Column Hermite form by repeated division, one row at a time.

    Lower echelon, positive pivots, entries left of a pivot in [0, pivot),
    zero columns last.
    """
    a = [list(row) for row in m]
    rows, cols = len(a), len(a[0])

    def col_sub(dst, src, q):
        for row in a:
            row[dst] -= q * row[src]

    def col_swap(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]

    c = 0
    for i in range(rows):
        if c == cols:
            break
        while True:
            nz = [j for j in range(c, cols) if a[i][j] != 0]
            if not nz:
                break
            j = min(nz, key=lambda t: abs(a[i][t]))
            col_swap(c, j)
            done = True
            for t in range(c + 1, cols):
                if a[i][t]:
                    col_sub(t, c, a[i][t] // a[i][c])
                    if a[i][t]:
                        done = False
            if done:
                break
        if a[i][c] == 0:
            continue
        if a[i][c] < 0:
            for row in a:
                row[c] = -row[c]
        for t in range(c):
            col_sub(t, c, a[i][t] // a[i][c])
        c += 1
    return a


def fundamental_domain_count(basis_cols) -> int:
    """Number of integer points x with x = B t, t in [0, 1)^n (B square, invertible)."""
    n = len(basis_cols)
    b = [[basis_cols[j][i] for j in range(n)] for i in range(n)]
    d = leibniz_det(b)
    sign = 1 if d > 0 else -1
    # adjugate: B^-1 = adj / d, so t in [0,1) iff 0 <= sign * adj x < |d|
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            sub = [[b[r][c] for c in range(n) if c != i] for r in range(n) if r != j]
            adj[i][j] = (-1) ** (i + j) * (leibniz_det(sub) if sub else 1)
    lo = [sum(min(0, b[i][j]) for j in range(n)) for i in range(n)]
    hi = [sum(max(0, b[i][j]) for j in range(n)) for i in range(n)]
    grids = np.meshgrid(*[np.arange(lo[i], hi[i] + 1, dtype=np.int64) for i in range(n)], indexing="ij")
    pts = np.stack([g.ravel() for g in grids])
    t = sign * (np.array(adj, dtype=np.int64) @ pts)
    inside = np.all((t >= 0) & (t < abs(d)), axis=0)
    return int(inside.sum())


def in_cone(facets, pts: np.ndarray) -> np.ndarray:
    if not facets:
        return np.ones(pts.shape[1], dtype=bool)
    return np.all(np.array(facets, dtype=np.int64) @ pts >= 0, axis=0)


def _integer_facets(cone) -> list:
    out = []
    for m in cone.facets:
        den = 1
        for x in m:
            den = den * Fraction(x).denominator // math.gcd(den, Fraction(x).denominator)
        out.append([int(Fraction(x) * den) for x in m])
    return out


def semigroup_image_saturated(cs, ct, m, max_sum: int = 6) -> tuple | None:
    """Every lattice point h of ct with |h|_1 <= max_sum is m x for a lattice point x of cs.

    Returns a missing h or None. The box for x comes from a covector ell > 0 on
    ct: ell(m x) = sum c_i ell(m r_i) >= sum c_i for x = sum c_i r_i, so
    |x|_inf <= ell(h) * max |r|_inf.
    """
    k, n = ct.dim, cs.dim
    t_facets = _integer_facets(ct)
    ell = [sum(f[i] for f in t_facets) for i in range(k)]
    targets = [h for h in itertools.product(range(-max_sum, max_sum + 1), repeat=k) if sum(map(abs, h)) <= max_sum]
    targets = [h for h in targets if all(sum(f[i] * h[i] for i in range(k)) >= 0 for f in t_facets)]
    level = max(sum(e * x for e, x in zip(ell, h)) for h in targets)
    assert all(sum(e * x for e, x in zip(ell, (sum(m[i][j] * r[j] for j in range(n)) for i in range(k)))) >= 1 for r in cs.rays)
    bound = level * max(max(abs(x) for x in r) for r in cs.rays)
    axis = np.arange(-bound, bound + 1, dtype=np.int64)
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids])
    pts = pts[:, in_cone(_integer_facets(cs), pts)]
    images = np.array(m, dtype=np.int64) @ pts
    hit = {tuple(int(v) for v in col) for col in images.T}
    for h in targets:
        if h not in hit:
            return h
    return None
