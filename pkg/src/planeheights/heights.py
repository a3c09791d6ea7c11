"""Logarithmic naive heights of rational points, and degree-d growth constants.

Over the rationals the place sum for the naive height collapses to
``log max|x_i|`` on a primitive integer lift, so all exactness-critical work
(normalization, iteration) stays in integers; only the final logarithm is a
float.  Logs of big integers go through mantissa/exponent extraction, so the
returned doubles are accurate to a few ulps -- every inequality that touches
them elsewhere is padded by 2**-40.

The number-field backend is deliberately stubbed behind ``naive_height``:
points are rational here, and the seam is the single place a places/embeddings
sum would plug in later.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Tuple

from .errors import PolyParseError
from .ratpoly import parse_rat

AffinePoint = Tuple[Fraction, Fraction]
ProjPoint = Tuple[int, ...]

_LN2 = math.log(2)


def log_int(n: int) -> float:
    """log of a positive integer of any size (mantissa + exponent extraction)."""
    if n <= 0:
        raise ValueError("log_int needs a positive integer")
    if n < (1 << 53):
        return math.log(n)
    shift = n.bit_length() - 53
    return math.log(n >> shift) + shift * _LN2


def log_fraction(q: Fraction) -> float:
    """log of a positive rational of any size."""
    if q <= 0:
        raise ValueError("log_fraction needs a positive rational")
    return log_int(q.numerator) - log_int(q.denominator)


def normalize(raw: Sequence[Fraction]) -> ProjPoint:
    """Primitive integer vector projectively equal to raw.

    gcd of the coordinates is 1 and the first nonzero coordinate is positive.
    """
    coords = [Fraction(c) for c in raw]
    if all(c == 0 for c in coords):
        raise ValueError("projective point cannot be all zero")
    lcm = 1
    for c in coords:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    ints = [int(c * lcm) for c in coords]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    ints = [v // g for v in ints]
    for v in ints:
        if v != 0:
            if v < 0:
                ints = [-w for w in ints]
            break
    return tuple(ints)


def naive_height(point: ProjPoint) -> float:
    """log max|coords| on a canonical (primitive) projective point."""
    return log_int(max(abs(c) for c in point))


def naive_height_affine(pt: AffinePoint) -> float:
    x, y = pt
    return naive_height(normalize((Fraction(x), Fraction(y), Fraction(1))))


def growth_constant(automorphism, direction: str = "fwd") -> float:
    """The explicit constant c2 with h(f(x)) <= d*h(x) + c2 for rational points.

    C is the max, over the three integer forms obtained by clearing the common
    denominator m from the degree-d homogenizations of the two components plus
    m*Z^d, of the sum of absolute values of coefficients; c2 = log C.  The
    bound follows from the triangle inequality on a primitive lift, since gcd
    removal only lowers the height.
    """
    if direction == "fwd":
        components = automorphism.fwd
    elif direction == "inv":
        components = automorphism.inv
    else:
        raise ValueError("direction must be 'fwd' or 'inv'")
    d = max(p.total_degree() for p in components)
    m = 1
    for poly in components:
        for c in poly.terms.values():
            m = m * c.denominator // math.gcd(m, c.denominator)
    sums = [abs(m)]  # the form m * Z^d
    for poly in components:
        sums.append(sum(abs(int(c * m)) for c in poly.terms.values()))
    c_max = max(sums)
    return log_int(c_max) if c_max > 1 else 0.0


def parse_affine_point(text: str) -> AffinePoint:
    """Parse 'X,Y' with rational components."""
    parts = text.split(",")
    if len(parts) != 2:
        raise PolyParseError(f"expected 'x,y', got {text!r}")
    return (parse_rat(parts[0]), parse_rat(parts[1]))


def read_point_file(path) -> list:
    """Point files: one 'x y' pair per line, '#' comments, blank lines skipped."""
    points = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 2:
                raise PolyParseError(f"line {lineno}: expected 'x y', got {body!r}")
            try:
                points.append((parse_rat(parts[0]), parse_rat(parts[1])))
            except PolyParseError as exc:
                raise PolyParseError(f"line {lineno}: {exc}") from None
    return points


def enumerate_points_up_to(bound: int) -> Iterable[AffinePoint]:
    """All affine rational points whose primitive lift (X, Y, Z) has
    max(|X|, |Y|, Z) <= bound; exactly the points with naive height <= log bound."""
    for z in range(1, bound + 1):
        for x in range(-bound, bound + 1):
            for y in range(-bound, bound + 1):
                if math.gcd(math.gcd(abs(x), abs(y)), z) == 1:
                    yield (Fraction(x, z), Fraction(y, z))
