"""Exact rational and bivariate polynomial arithmetic.

Rationals are `fractions.Fraction` (already canonical: reduced, positive
denominator, 0/1 for zero).  Polynomials in x, y are stored sparsely as a
dict mapping exponent pairs (i, j) to nonzero Fraction coefficients; the
zero polynomial has an empty term map.  All values are immutable by
convention and all operations are pure, so sharing across threads is safe.

Text grammar (whitespace insignificant)::

    poly  := term (('+'|'-') term)*
    term  := coeff ('*'? monom)* | monom+
    monom := ('x'|'y') ('^' nat)?
    coeff := int ('/' posint)?

Printing uses graded lexicographic order (higher total degree first, then
higher x-power), which makes parse -> print -> parse idempotent.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DegreeUndefinedError, PolyParseError

Rat = Fraction

_MAX_EXPONENT = 10**6


def parse_rat(text: str) -> Fraction:
    """Parse 'num/den' or 'int' into a Fraction."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise PolyParseError(f"malformed rational {text!r}: {exc}") from None
    return value


def format_rat(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class BivarPoly:
    """Polynomial in x and y over the rationals, in canonical sparse form."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        canonical = {}
        if terms:
            for (i, j), c in terms.items():
                c = Fraction(c)
                if c != 0:
                    canonical[(int(i), int(j))] = c
        self.terms = canonical

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "BivarPoly":
        return cls()

    @classmethod
    def const(cls, c) -> "BivarPoly":
        return cls({(0, 0): Fraction(c)})

    @classmethod
    def var(cls, name: str) -> "BivarPoly":
        if name == "x":
            return cls({(1, 0): Fraction(1)})
        if name == "y":
            return cls({(0, 1): Fraction(1)})
        raise ValueError(f"unknown variable {name!r}")

    @classmethod
    def parse(cls, text: str) -> "BivarPoly":
        return _parse_poly(text)

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            s = out.get(key, Fraction(0)) + c
            if s == 0:
                out.pop(key, None)
            else:
                out[key] = s
        return _raw(out)

    __radd__ = __add__

    def __neg__(self):
        return _raw({key: -c for key, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        # integer coefficients take the raw-int path: no per-op gcd reduction
        if all(c.denominator == 1 for c in self.terms.values()) and all(
            c.denominator == 1 for c in other.terms.values()
        ):
            acc = {}
            a = [(i, j, c.numerator) for (i, j), c in self.terms.items()]
            b = [(i, j, c.numerator) for (i, j), c in other.terms.items()]
            for i1, j1, c1 in a:
                for i2, j2, c2 in b:
                    key = (i1 + i2, j1 + j2)
                    acc[key] = acc.get(key, 0) + c1 * c2
            return _raw({key: Fraction(v) for key, v in acc.items() if v})
        out = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                key = (i1 + i2, j1 + j2)
                s = out.get(key, Fraction(0)) + c1 * c2
                if s == 0:
                    out.pop(key, None)
                else:
                    out[key] = s
        return _raw(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = BivarPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base_needed = n > 1
            n >>= 1
            if base_needed:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, BivarPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        """max(i + j) over stored terms; undefined for the zero polynomial."""
        if not self.terms:
            raise DegreeUndefinedError("total degree of the zero polynomial is undefined")
        return max(i + j for i, j in self.terms)

    def degree_in(self, name: str) -> int:
        idx = {"x": 0, "y": 1}[name]
        if not self.terms:
            return 0
        return max(key[idx] for key in self.terms)

    def is_univariate_in(self, name: str) -> bool:
        other = {"x": 1, "y": 0}[name]
        return all(key[other] == 0 for key in self.terms)

    def leading_form(self, d: int) -> "BivarPoly":
        """Sum of the terms of total degree exactly d (the restriction of the
        degree-d homogenization to the line at infinity).  Requires d to be at
        least the total degree."""
        if self.terms and d < self.total_degree():
            raise ValueError(f"leading form degree {d} below total degree {self.total_degree()}")
        return _raw({key: c for key, c in self.terms.items() if key[0] + key[1] == d})

    def coefficient(self, i: int, j: int) -> Fraction:
        return self.terms.get((i, j), Fraction(0))

    def evaluate(self, x, y) -> Fraction:
        x = Fraction(x)
        y = Fraction(y)
        xp = _powers(x, max((i for i, _ in self.terms), default=0))
        yp = _powers(y, max((j for _, j in self.terms), default=0))
        total = Fraction(0)
        for (i, j), c in self.terms.items():
            total += c * xp[i] * yp[j]
        return total

    def compose(self, sub_x: "BivarPoly", sub_y: "BivarPoly") -> "BivarPoly":
        """Substitute sub_x for x and sub_y for y, expanded and canonicalized."""
        xp = _poly_powers(sub_x, max((i for i, _ in self.terms), default=0))
        yp = _poly_powers(sub_y, max((j for _, j in self.terms), default=0))
        result = BivarPoly.zero()
        for (i, j), c in self.terms.items():
            result = result + xp[i] * yp[j] * BivarPoly.const(c)
        return result

    # -- printing ----------------------------------------------------------

    def __str__(self):
        if not self.terms:
            return "0"
        keys = sorted(self.terms, key=lambda k: (k[0] + k[1], k[0]), reverse=True)
        pieces = []
        for n, key in enumerate(keys):
            c = self.terms[key]
            mono = _format_monomial(*key)
            if not mono:
                body = format_rat(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{format_rat(abs(c))}*{mono}"
            if n == 0:
                pieces.append(body if c > 0 else f"-{body}")
            else:
                pieces.append(f"{'+' if c > 0 else '-'} {body}")
        return " ".join(pieces)

    def __repr__(self):
        return f"BivarPoly({self})"


def _raw(terms: dict) -> BivarPoly:
    poly = BivarPoly.__new__(BivarPoly)
    poly.terms = terms
    return poly


def _coerce(value) -> BivarPoly:
    if isinstance(value, BivarPoly):
        return value
    return BivarPoly.const(value)


def _powers(base: Fraction, n: int):
    out = [Fraction(1)]
    for _ in range(n):
        out.append(out[-1] * base)
    return out


def _poly_powers(base: BivarPoly, n: int):
    out = [BivarPoly.const(1)]
    for _ in range(n):
        out.append(out[-1] * base)
    return out


def _format_monomial(i: int, j: int) -> str:
    parts = []
    if i == 1:
        parts.append("x")
    elif i > 1:
        parts.append(f"x^{i}")
    if j == 1:
        parts.append("y")
    elif j > 1:
        parts.append(f"y^{j}")
    return "*".join(parts)


# -- module-level conveniences used throughout the package ------------------

def parse_poly(text: str) -> BivarPoly:
    return BivarPoly.parse(text)


def compose(outer: BivarPoly, sub_x: BivarPoly, sub_y: BivarPoly) -> BivarPoly:
    return outer.compose(sub_x, sub_y)


def total_degree(p: BivarPoly) -> int:
    return p.total_degree()


def leading_form(p: BivarPoly, d: int) -> BivarPoly:
    return p.leading_form(d)


def evaluate(p: BivarPoly, x, y) -> Fraction:
    return p.evaluate(x, y)


# -- parser ------------------------------------------------------------------

class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        if self.pos >= len(self.text):
            return None
        return self.text[self.pos]

    def read_nat(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise PolyParseError("expected a number", start)
        return int(self.text[start:self.pos])


def _parse_poly(text: str) -> BivarPoly:
    tok = _Tokenizer(text)
    result = BivarPoly.zero()
    sign = 1
    ch = tok.peek()
    if ch in ("+", "-"):
        sign = -1 if ch == "-" else 1
        tok.pos += 1
    while True:
        result = result + _parse_term(tok, sign)
        ch = tok.peek()
        if ch is None:
            return result
        if ch == "+":
            sign = 1
        elif ch == "-":
            sign = -1
        else:
            raise PolyParseError(f"unexpected character {ch!r}", tok.pos)
        tok.pos += 1


def _parse_term(tok: _Tokenizer, sign: int) -> BivarPoly:
    coeff = Fraction(sign)
    exps = [0, 0]
    saw_factor = False
    while True:
        ch = tok.peek()
        if ch is not None and ch.isdigit():
            num = tok.read_nat()
            if tok.peek() == "/":
                tok.pos += 1
                den_pos = tok.pos
                den = tok.read_nat()
                if den == 0:
                    raise PolyParseError("zero denominator", den_pos)
                coeff *= Fraction(num, den)
            else:
                coeff *= num
            saw_factor = True
        elif ch in ("x", "y"):
            tok.pos += 1
            exp = 1
            if tok.peek() == "^":
                tok.pos += 1
                exp_pos = tok.pos
                exp = tok.read_nat()
                if exp > _MAX_EXPONENT:
                    raise PolyParseError(f"exponent {exp} too large", exp_pos)
            exps[0 if ch == "x" else 1] += exp
            if exps[0] > _MAX_EXPONENT or exps[1] > _MAX_EXPONENT:
                raise PolyParseError("exponent overflow", tok.pos)
            saw_factor = True
        else:
            break
        if tok.peek() == "*":
            tok.pos += 1
            continue
    if not saw_factor:
        raise PolyParseError("expected a term", tok.pos)
    return BivarPoly({tuple(exps): coeff})
