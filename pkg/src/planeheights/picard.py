"""Exact intersection calculus on the blow-up surface of a degree-d Henon map.

The surface is obtained from the projective plane by 2d-1 blow-ups over each
of the two indeterminacy points, so the divisor class lattice has the basis
[H#, E_1..E_{2d-1}, F_1..F_{2d-1}] of dimension 4d-1.  The intersection
matrix is reconstructed from the configuration's adjacency data (H# meets E_2
and F_2; E_1 meets E_d; the chain E_i - E_{i+1} for 2 <= i <= 2d-2; mirrored
for F) together with the self-intersection list (H#^2 = -3, E_1^2 = F_1^2 =
-d, interior curves -2, the last exceptional curves -1).  At d = 2 the index
ranges degenerate but the formulas remain valid verbatim.

Everything here is exact rational arithmetic; no floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Tuple


def basis_labels(d: int) -> List[str]:
    if d < 2:
        raise ValueError("d must be >= 2")
    return (["H#"]
            + [f"E{i}" for i in range(1, 2 * d)]
            + [f"F{j}" for j in range(1, 2 * d)])


@dataclass(frozen=True)
class DivisorClass:
    """Exact-rational coefficient vector over the basis [H#, E_i, F_j]."""

    d: int
    coeffs: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coeffs) != 4 * self.d - 1:
            raise ValueError("coefficient vector has wrong dimension")

    def __add__(self, other):
        self._check(other)
        return DivisorClass(self.d, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        self._check(other)
        return DivisorClass(self.d, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def scale(self, factor) -> "DivisorClass":
        factor = Fraction(factor)
        return DivisorClass(self.d, tuple(factor * a for a in self.coeffs))

    def dot(self, other) -> Fraction:
        """Intersection number via the lattice Gram matrix."""
        self._check(other)
        m = _intersection_matrix_cached(self.d)
        total = Fraction(0)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            row = m[i]
            for j, b in enumerate(other.coeffs):
                if b != 0 and row[j] != 0:
                    total += a * b * row[j]
        return total

    def is_effective(self) -> bool:
        return all(c >= 0 for c in self.coeffs)

    def _check(self, other):
        if not isinstance(other, DivisorClass) or other.d != self.d:
            raise ValueError("divisor classes live on different surfaces")

    def table(self) -> List[Tuple[str, Fraction]]:
        return list(zip(basis_labels(self.d), self.coeffs))

    def __str__(self):
        parts = []
        for label, c in self.table():
            if c != 0:
                parts.append(f"{c}*{label}")
        return " + ".join(parts) if parts else "0"


def intersection_matrix(d: int) -> List[List[int]]:
    """Symmetric (4d-1) x (4d-1) integer intersection matrix of the basis."""
    return [list(row) for row in _intersection_matrix_cached(d)]


@lru_cache(maxsize=None)
def _intersection_matrix_cached(d: int) -> Tuple[Tuple[int, ...], ...]:
    if d < 2:
        raise ValueError("d must be >= 2")
    n = 4 * d - 1
    h = 0
    e = lambda i: i            # E_i at index i, 1 <= i <= 2d-1
    f = lambda j: 2 * d - 1 + j  # F_j after the E block
    m = [[0] * n for _ in range(n)]

    m[h][h] = -3
    for idx, self_int in ((e(1), -d), (f(1), -d)):
        m[idx][idx] = self_int
    for i in range(2, 2 * d - 1):
        m[e(i)][e(i)] = -2
        m[f(i)][f(i)] = -2
    m[e(2 * d - 1)][e(2 * d - 1)] = -1
    m[f(2 * d - 1)][f(2 * d - 1)] = -1

    def meet(i, j):
        m[i][j] = 1
        m[j][i] = 1

    meet(h, e(2))
    meet(h, f(2))
    meet(e(1), e(d))
    meet(f(1), f(d))
    for i in range(2, 2 * d - 1):
        meet(e(i), e(i + 1))
        meet(f(i), f(i + 1))
    return tuple(tuple(row) for row in m)


def _solve_exact(matrix, rhs_columns: List[List[Fraction]]) -> List[List[Fraction]]:
    """Exact Gauss-Jordan elimination with partial pivoting on numerator
    magnitude, solving all right-hand sides in one sweep."""
    n = len(matrix)
    k = len(rhs_columns)
    a = [[Fraction(v) for v in row] + [col[i] for col in rhs_columns]
         for i, row in enumerate(matrix)]
    width = n + k
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(a[r][col].numerator))
        if a[pivot][col] == 0:
            raise ValueError("singular intersection system (configuration bug)")
        a[col], a[pivot] = a[pivot], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        prow = a[col]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                row = a[r]
                for j in range(col, width):
                    if prow[j]:
                        row[j] -= factor * prow[j]
    return [[a[i][n + j] for i in range(n)] for j in range(k)]


@lru_cache(maxsize=None)
def solve_pullbacks(d: int):
    """(pi*H, phi*H, psi*H) from the defining intersection products.

    phi*H meets nothing in the configuration except E_{2d-1}, which it meets
    once; psi*H is the E<->F mirror; pi*H meets only H#, once.  Each gives a
    nonsingular linear system over the Gram matrix.
    """
    m = _intersection_matrix_cached(d)
    n = 4 * d - 1

    def rhs_for(index: int) -> List[Fraction]:
        rhs = [Fraction(0)] * n
        rhs[index] = Fraction(1)
        return rhs

    solutions = _solve_exact(m, [rhs_for(0), rhs_for(2 * d - 1), rhs_for(4 * d - 2)])
    pi, phi, psi = (DivisorClass(d, tuple(sol)) for sol in solutions)
    return pi, phi, psi


def closed_form_pullbacks(d: int):
    """Direct transcription of the displayed formulas for the three pullbacks."""
    if d < 2:
        raise ValueError("d must be >= 2")

    def build(h_coeff, e_coeff, f_coeff):
        coeffs = [Fraction(h_coeff)]
        coeffs += [Fraction(e_coeff(i)) for i in range(1, 2 * d)]
        coeffs += [Fraction(f_coeff(j)) for j in range(1, 2 * d)]
        return DivisorClass(d, tuple(coeffs))

    pi = build(
        1,
        lambda i: i if i <= d else d,
        lambda j: j if j <= d else d,
    )
    phi = build(
        d,
        lambda i: 1 if i == 1 else (d if i <= d else 2 * d - i),
        lambda j: j * d if j <= d else d * d,
    )
    psi = build(
        d,
        lambda i: i * d if i <= d else d * d,
        lambda j: 1 if j == 1 else (d if j <= d else 2 * d - j),
    )
    return pi, phi, psi


def effective_excess(d: int) -> DivisorClass:
    """D = phi*H + psi*H - (d + 1/d) pi*H, the effective excess divisor."""
    pi, phi, psi = solve_pullbacks(d)
    return phi + psi - pi.scale(Fraction(d * d + 1, d))


def closed_form_excess(d: int) -> DivisorClass:
    """The displayed coefficients of D, for cross-checking effective_excess."""
    if d < 2:
        raise ValueError("d must be >= 2")
    coeffs = [Fraction(d * d - 1, d)]
    for i in range(1, 2 * d):
        if i == 1:
            coeffs.append(Fraction(d - 1, d))
        elif i <= d:
            coeffs.append(Fraction(d * d - i, d))
        else:
            coeffs.append(Fraction(2 * d - i - 1))
    coeffs = coeffs + coeffs[1:]  # the F block mirrors the E block
    return DivisorClass(d, tuple(coeffs))
