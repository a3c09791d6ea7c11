"""Plane polynomial automorphisms: Henon and triangular generators, composition,
conjugation, degrees, dynamical degree, and regularity at infinity.

Every automorphism carries its exact inverse.  The generator constructors
(`henon`, `triangular`, `pair`) verify the inverse by the full symbolic
compose-check (both compositions must be identically (x, y)).  Composition,
inversion and conjugation of already-verified automorphisms inherit exactness
-- polynomial composition is associative, so g_inv(f_inv(f_fwd(g_fwd)))
collapses to the identity without re-expansion -- and skip the quadratic-cost
re-check; the test suite exercises the identity on composites directly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from .errors import MapValidationError, PolyParseError
from .ratpoly import BivarPoly, parse_rat

_X = BivarPoly.var("x")
_Y = BivarPoly.var("y")


@dataclass(frozen=True)
class PlaneAutomorphism:
    """Forward/inverse polynomial pairs plus a generator word for provenance."""

    fwd: Tuple[BivarPoly, BivarPoly]
    inv: Tuple[BivarPoly, BivarPoly]
    word: Tuple[str, ...]

    def degree(self) -> int:
        return max(p.total_degree() for p in self.fwd)

    def inverse_degree(self) -> int:
        return max(p.total_degree() for p in self.inv)

    def apply(self, point):
        x, y = point
        return (self.fwd[0].evaluate(x, y), self.fwd[1].evaluate(x, y))

    def apply_inverse(self, point):
        x, y = point
        return (self.inv[0].evaluate(x, y), self.inv[1].evaluate(x, y))

    def is_identity(self) -> bool:
        return self.fwd == (_X, _Y)

    def compose_check(self) -> bool:
        """Exact polynomial identity f o f^-1 = f^-1 o f = (x, y)."""
        p, q = self.fwd
        r, s = self.inv
        return (
            p.compose(r, s) == _X
            and q.compose(r, s) == _Y
            and r.compose(p, q) == _X
            and s.compose(p, q) == _Y
        )

    def __str__(self):
        return f"({self.fwd[0]}, {self.fwd[1]})"


def _build(fwd, inv, word, check: bool) -> PlaneAutomorphism:
    for poly in (*fwd, *inv):
        if poly.is_zero():
            raise MapValidationError("automorphism components cannot be zero")
    auto = PlaneAutomorphism(tuple(fwd), tuple(inv), tuple(word))
    if auto.degree() < 1 or auto.inverse_degree() < 1:
        raise MapValidationError("automorphism components must have degree >= 1")
    if check and not auto.compose_check():
        raise MapValidationError("compose-check failed: the given pairs are not mutually inverse")
    return auto


def identity() -> PlaneAutomorphism:
    return _build((_X, _Y), (_X, _Y), (), check=False)


def henon(a, p: BivarPoly) -> PlaneAutomorphism:
    """The Henon map (x, y) |-> (p(x) - a*y, x), a != 0, deg p >= 2.

    Closed-form inverse: (x, y) |-> (y, (p(y) - x)/a).
    """
    a = Fraction(a)
    if a == 0:
        raise MapValidationError("henon: a must be nonzero")
    if not p.is_univariate_in("x"):
        raise MapValidationError("henon: p must be a univariate polynomial in x")
    if p.is_zero() or p.total_degree() < 2:
        raise MapValidationError("henon: deg p must be >= 2")
    fwd = (p - BivarPoly.const(a) * _Y, _X)
    p_of_y = p.compose(_Y, BivarPoly.zero())
    inv = (_Y, (p_of_y - _X) * BivarPoly.const(1 / a))
    word = (f"henon(a={a}, p={p})",)
    return _build(fwd, inv, word, check=True)


def triangular(a, b, c, P: BivarPoly) -> PlaneAutomorphism:
    """The triangular (de Jonquieres) map (x, y) |-> (a*x + P(y), b*y + c), ab != 0."""
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    if a * b == 0:
        raise MapValidationError("triangular: a*b must be nonzero")
    if not P.is_univariate_in("y"):
        raise MapValidationError("triangular: P must be a univariate polynomial in y")
    fwd = (BivarPoly.const(a) * _X + P, BivarPoly.const(b) * _Y + BivarPoly.const(c))
    y_back = (_Y - BivarPoly.const(c)) * BivarPoly.const(1 / b)
    inv = (
        (_X - P.compose(BivarPoly.zero(), y_back)) * BivarPoly.const(1 / a),
        y_back,
    )
    word = (f"triangular(a={a}, b={b}, c={c}, P={P})",)
    return _build(fwd, inv, word, check=True)


def pair(p: BivarPoly, q: BivarPoly, pinv: BivarPoly, qinv: BivarPoly) -> PlaneAutomorphism:
    """User-supplied forward and inverse pairs; only validated, never inverted."""
    return _build((p, q), (pinv, qinv), (f"pair({p}, {q})",), check=True)


def compose_maps(f: PlaneAutomorphism, g: PlaneAutomorphism) -> PlaneAutomorphism:
    """The composite f o g (g applied first)."""
    fwd = (
        f.fwd[0].compose(g.fwd[0], g.fwd[1]),
        f.fwd[1].compose(g.fwd[0], g.fwd[1]),
    )
    inv = (
        g.inv[0].compose(f.inv[0], f.inv[1]),
        g.inv[1].compose(f.inv[0], f.inv[1]),
    )
    return _build(fwd, inv, f.word + g.word, check=False)


def inverse(f: PlaneAutomorphism) -> PlaneAutomorphism:
    word = tuple(f"inv[{w}]" for w in reversed(f.word))
    return _build(f.inv, f.fwd, word, check=False)


def conjugate(f: PlaneAutomorphism, gamma: PlaneAutomorphism) -> PlaneAutomorphism:
    """gamma^-1 o f o gamma."""
    return compose_maps(compose_maps(inverse(gamma), f), gamma)


def degree_sequence(f: PlaneAutomorphism, n_max: int) -> list:
    """[deg f, deg f^2, ..., deg f^n_max] by exact iterated composition."""
    if n_max < 1:
        raise ValueError("degree_sequence needs n_max >= 1")
    degrees = []
    p, q = f.fwd
    cur_p, cur_q = p, q
    degrees.append(max(cur_p.total_degree(), cur_q.total_degree()))
    for _ in range(n_max - 1):
        cur_p, cur_q = cur_p.compose(p, q), cur_q.compose(p, q)
        degrees.append(max(cur_p.total_degree(), cur_q.total_degree()))
    return degrees


def dynamical_degree(f: PlaneAutomorphism) -> int:
    """delta = lim (deg f^n)^(1/n), via the exact ratio tau = deg(f^2)/deg(f).

    Either tau <= 1 (the triangularizable case, delta = 1) or tau is an
    integer >= 2 and equals delta.  A non-integer tau > 1 signals a malformed
    automorphism.
    """
    d1 = f.degree()
    p, q = f.fwd
    d2 = max(p.compose(p, q).total_degree(), q.compose(p, q).total_degree())
    tau = Fraction(d2, d1)
    if tau <= 1:
        return 1
    if tau.denominator != 1:
        raise MapValidationError(f"dynamical degree dichotomy violated: tau = {tau} is not an integer")
    delta = int(tau)
    if not 1 <= delta <= d1:
        raise MapValidationError(f"dynamical degree {delta} outside [1, {d1}]")
    return delta


# -- points at infinity ------------------------------------------------------

@dataclass(frozen=True)
class InfinityPoint:
    """A point of the line at infinity: a coprime pair (X : Y), or the
    'non-rational locus' tag carrying the square-free integer binary form
    whose roots are the points.

    The kernel form is stored as integer coefficients (a_0, ..., a_k) of
    sum a_i x^i y^(k-i), primitive, sign-normalized; two square-free forms cut
    out the same locus exactly when the normalized tuples agree.
    """

    xy: Optional[Tuple[int, int]] = None
    kernel: Optional[Tuple[int, ...]] = None

    @property
    def is_rational(self) -> bool:
        return self.xy is not None

    def __str__(self):
        if self.is_rational:
            return f"({self.xy[0]}:{self.xy[1]})"
        return f"nonrational{list(self.kernel)}"


def _normalize_pair(x: int, y: int) -> Tuple[int, int]:
    g = math.gcd(abs(x), abs(y))
    x, y = x // g, y // g
    if x < 0 or (x == 0 and y < 0):
        x, y = -x, -y
    return (x, y)


def _form_coeffs(form: BivarPoly, degree: int) -> list:
    return [form.coefficient(i, degree - i) for i in range(degree + 1)]


def _upoly_trim(coeffs: list) -> list:
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def _upoly_divmod(a: list, b: list):
    a = list(a)
    deg_b = len(b) - 1
    lead = b[-1]
    quo = [Fraction(0)] * max(0, len(a) - deg_b)
    while len(a) - 1 >= deg_b and _upoly_trim(a):
        shift = len(a) - 1 - deg_b
        factor = a[-1] / lead
        quo[shift] = factor
        for k in range(len(b)):
            a[shift + k] -= factor * b[k]
        a = _upoly_trim(a)
        if not a:
            break
    return quo, a


def _upoly_gcd(a: list, b: list) -> list:
    a = _upoly_trim([Fraction(c) for c in a])
    b = _upoly_trim([Fraction(c) for c in b])
    while b:
        _, r = _upoly_divmod(a, b)
        a, b = b, _upoly_trim(r)
    if a:
        lead = a[-1]
        a = [c / lead for c in a]
    return a


def _upoly_derivative(a: list) -> list:
    return _upoly_trim([a[k] * k for k in range(1, len(a))])


def _squarefree_part(a: list) -> list:
    if len(a) <= 2:
        return list(a)
    g = _upoly_gcd(a, _upoly_derivative(a))
    if len(g) <= 1:
        return list(a)
    quo, rem = _upoly_divmod(list(a), g)
    assert not rem
    return _upoly_trim(quo)


def _primitive_int_coeffs(coeffs: list) -> Tuple[int, ...]:
    lcm = 1
    for c in coeffs:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    ints = [int(c * lcm) for c in coeffs]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    ints = [v // g for v in ints]
    if next((v for v in reversed(ints) if v), 1) < 0:
        ints = [-v for v in ints]
    return tuple(ints)


def indeterminacy_at_infinity(f: PlaneAutomorphism) -> InfinityPoint:
    """The common zero locus on the line at infinity of the degree-d leading
    forms of the two components (an identically-zero leading form imposes no
    condition).  For an automorphism this is the single point supporting the
    gcd of the nonzero leading forms."""
    d = f.degree()
    if d < 2:
        raise MapValidationError("indeterminacy at infinity requires degree >= 2")
    forms = [poly.leading_form(d) for poly in f.fwd]
    forms = [form for form in forms if not form.is_zero()]

    # Work on dehomogenized coefficient lists a_i = coeff of x^i y^(d-i),
    # i.e. the univariate f(t) = F(t, 1); the y-multiplicity of a form is
    # d - deg_t f, and common t-powers (x-factors) stay inside the t-gcd.
    uni = [_upoly_trim(_form_coeffs(form, d)) for form in forms]
    y_mult = min(d - (len(u) - 1) for u in uni)
    if len(uni) == 1:
        g = [c / uni[0][-1] for c in uni[0]]
    else:
        g = _upoly_gcd(uni[0], uni[1])
    if len(g) <= 1 and y_mult == 0:
        raise MapValidationError("empty indeterminacy locus at infinity (not an automorphism)")

    # Square-free kernel S = y^min(1, y_mult) * homog(squarefree(g)).
    sf = _squarefree_part(g) if len(g) > 1 else [Fraction(1)]
    y_extra = 1 if y_mult > 0 else 0
    kernel_deg = (len(sf) - 1) + y_extra
    if kernel_deg == 1:
        if y_extra and len(sf) == 1:
            return InfinityPoint(xy=(1, 0))  # the kernel form is y itself
        alpha, beta = sf[1], sf[0]  # alpha*t + beta with t = x/y: root (-beta : alpha)
        return InfinityPoint(xy=_normalize_pair(-beta.numerator * alpha.denominator,
                                                alpha.numerator * beta.denominator))
    # Multiplying by y raises the form degree without moving x-exponents, so
    # the coefficient of x^i is sf[i] and the top x-coefficient gains a zero.
    coeffs = list(sf) + [Fraction(0)] * y_extra
    return InfinityPoint(kernel=_primitive_int_coeffs(coeffs))


def is_regular(f: PlaneAutomorphism) -> bool:
    """True when the indeterminacy points at infinity of f and f^-1 differ."""
    if f.degree() < 2 or f.inverse_degree() < 2:
        raise MapValidationError("regularity test requires degree >= 2 in both directions")
    return indeterminacy_at_infinity(f) != indeterminacy_at_infinity(inverse(f))


# -- map-description documents ------------------------------------------------

def from_description(doc) -> PlaneAutomorphism:
    """Build an automorphism from a JSON-shaped map description.

    Supported nodes: henon, triangular, compose (right-to-left), conjugate,
    pair.  Rationals are strings 'num/den' or 'int'; polynomials use the text
    grammar of :mod:`planeheights.ratpoly`.
    """
    if not isinstance(doc, dict) or "type" not in doc:
        raise MapValidationError("map description must be an object with a 'type' field")
    kind = doc["type"]
    try:
        if kind == "henon":
            return henon(parse_rat(str(doc["a"])), BivarPoly.parse(doc["p"]))
        if kind == "triangular":
            return triangular(
                parse_rat(str(doc["a"])),
                parse_rat(str(doc["b"])),
                parse_rat(str(doc["c"])),
                BivarPoly.parse(doc["P"]),
            )
        if kind == "compose":
            maps = [from_description(node) for node in doc["maps"]]
            if not maps:
                raise MapValidationError("compose needs at least one map")
            result = maps[-1]
            for node in reversed(maps[:-1]):
                result = compose_maps(node, result)
            return result
        if kind == "conjugate":
            return conjugate(from_description(doc["inner"]), from_description(doc["by"]))
        if kind == "pair":
            return pair(
                BivarPoly.parse(doc["p"]),
                BivarPoly.parse(doc["q"]),
                BivarPoly.parse(doc["pinv"]),
                BivarPoly.parse(doc["qinv"]),
            )
    except KeyError as exc:
        raise MapValidationError(f"map description of type {kind!r} is missing field {exc}") from None
    raise MapValidationError(f"unknown map type {kind!r}")


def load_map_file(path) -> PlaneAutomorphism:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise PolyParseError(f"invalid JSON in map file: {exc}") from None
    return from_description(doc)
