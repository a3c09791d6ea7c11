"""Orbit-level canonical heights, exact point counting, and the counting
enclosures.

Counting runs need naive heights of iterates far past the point where exact
coordinates stop being storable (a threshold T = e^21 pulls in iterates whose
coordinates would have ~10^8 digits).  The orbit tracker therefore works in
two phases: exact rational iteration while coordinates stay below a size
threshold, then a certified switch to outward-rounded interval arithmetic on
the coordinates themselves (mpmath intervals carry bignum exponents, so
e^(10^9)-sized values are fine).  The switch is only taken when the map
provably preserves integer points in both directions (all forward and inverse
coefficients integral, integral start), which keeps h = log max(|X|, |Y|, 1)
the exact naive height; otherwise exceeding the cap raises the resource
error.  Interval widths stay certified, so a count is exact unless an
enclosure straddles the threshold, which the scan reports instead of hiding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from mpmath.ctx_iv import MPIntervalContext

from .automorphism import PlaneAutomorphism
from .canonical import HeightEngine, hcanonical, is_periodic
from .errors import (
    OutOfRangeError,
    PeriodicPointError,
    ResourceCapError,
    UndecidedPeriodicityError,
)
from .heights import AffinePoint, naive_height_affine

_BITS_PER_DIGIT = math.log2(10)

NEG_INFINITY = float("-inf")  # distinguished 'finite orbit' value, never used in arithmetic

DEFAULT_PATIENCE = 5
DEFAULT_EXACT_DIGITS = 20_000


def _is_integral(auto: PlaneAutomorphism) -> bool:
    return all(
        c.denominator == 1
        for poly in (*auto.fwd, *auto.inv)
        for c in poly.terms.values()
    )


class OrbitHeightTracker:
    """Lazy h_nv(f^l(x)) for l in Z, exact below the size threshold and by
    certified interval recurrences beyond it."""

    def __init__(
        self,
        auto: PlaneAutomorphism,
        x: AffinePoint,
        exact_digits: int = DEFAULT_EXACT_DIGITS,
        digit_cap: int = 2_000_000,
        precision_bits: int = 192,
    ):
        self._auto = auto
        self._exact_bits = int(exact_digits * _BITS_PER_DIGIT)
        self._cap_bits = int(digit_cap * _BITS_PER_DIGIT)
        self._ctx = MPIntervalContext()
        self._ctx.prec = precision_bits
        start = (Fraction(x[0]), Fraction(x[1]))
        self._certified = _is_integral(auto) and all(c.denominator == 1 for c in start)
        state0 = ("exact", start)
        self._fwd = [state0]
        self._bwd = [state0]
        self._bounds: Dict[int, Tuple[float, float]] = {}

    # -- coordinate states ---------------------------------------------------

    def _step(self, state, forward: bool):
        kind, pt = state
        polys = self._auto.fwd if forward else self._auto.inv
        if kind == "exact":
            nxt = (polys[0].evaluate(*pt), polys[1].evaluate(*pt))
            bits = max(c.numerator.bit_length() for c in nxt)
            bits = max(bits, max(c.denominator.bit_length() for c in nxt))
            if bits <= self._exact_bits:
                return ("exact", nxt)
            if not self._certified:
                if bits > self._cap_bits:
                    raise ResourceCapError(
                        "orbit coordinates exceeded the digit cap and the map is not "
                        "certified integral, so interval tracking cannot take over"
                    )
                return ("exact", nxt)
            return ("iv", (self._ctx.mpf(int(nxt[0])), self._ctx.mpf(int(nxt[1]))))
        return ("iv", self._eval_interval(polys, pt))

    def _eval_interval(self, polys, pt):
        ctx = self._ctx
        x, y = pt
        max_i = max((i for poly in polys for i, _ in poly.terms), default=0)
        max_j = max((j for poly in polys for _, j in poly.terms), default=0)
        xp = [ctx.mpf(1)]
        for _ in range(max_i):
            xp.append(xp[-1] * x)
        yp = [ctx.mpf(1)]
        for _ in range(max_j):
            yp.append(yp[-1] * y)
        out = []
        for poly in polys:
            acc = ctx.mpf(0)
            for (i, j), c in poly.terms.items():
                term = xp[i] * yp[j]
                acc += term * int(c) if c.denominator == 1 else term * ctx.mpf(c.numerator) / c.denominator
            out.append(acc)
        return tuple(out)

    def _state(self, l: int):
        chain = self._fwd if l >= 0 else self._bwd
        idx = abs(l)
        while len(chain) <= idx:
            chain.append(self._step(chain[-1], forward=l >= 0))
        return chain[idx]

    def point(self, l: int) -> AffinePoint:
        """Exact coordinates of f^l(x); available only inside the exact window."""
        kind, pt = self._state(l)
        if kind != "exact":
            raise ResourceCapError(f"iterate {l} is no longer held exactly")
        return pt

    # -- heights ---------------------------------------------------------------

    def h_bounds(self, l: int) -> Tuple[float, float]:
        """Certified [lo, hi] enclosure of h_nv(f^l(x))."""
        cached = self._bounds.get(l)
        if cached is not None:
            return cached
        kind, pt = self._state(l)
        if kind == "exact":
            h = naive_height_affine(pt)
            pad = 2.0**-40 * max(1.0, abs(h))
            bounds = (h - pad, h + pad)
        else:
            # max and log stay in mpf space: the coordinates themselves can be
            # far beyond float range even though their logs are modest.
            enclosure = self._ctx.log(_iv_max(self._ctx, abs(pt[0]), abs(pt[1])))
            h_lo, h_hi = float(enclosure.a), float(enclosure.b)
            pad = 1e-12 * max(1.0, abs(h_hi)) + 1e-12
            bounds = (h_lo - pad, h_hi + pad)
            if bounds[1] - bounds[0] > 1e-6 * max(1.0, abs(bounds[1])):
                raise ResourceCapError(
                    f"interval arithmetic lost precision at iterate {l}"
                )
        self._bounds[l] = bounds
        return bounds

    def h(self, l: int) -> float:
        lo, hi = self.h_bounds(l)
        return 0.5 * (lo + hi)


def _iv_max(ctx, a, b):
    lo = a.a if a.a > b.a else b.a
    hi = a.b if a.b > b.b else b.b
    one = ctx.mpf(1)
    lo = lo if lo > one.a else one.a
    hi = hi if hi > one.b else one.b
    return ctx.mpf([lo, hi])


# -- hhat+/hhat- from the functional identities --------------------------------

def hpm_from_h(engine: HeightEngine, x: AffinePoint) -> Tuple[float, float]:
    """(hhat+, hhat-) recovered from canonical-height values at f(x), f^-1(x).

    When the engine height is the truncated-limit construction these agree
    with hplus/hminus up to the error budgets.
    """
    f = engine.outer
    d, dm = engine.delta, engine.delta_minus
    at_fx = hcanonical(engine, f.apply(x)).value
    at_fix = hcanonical(engine, f.apply_inverse(x)).value
    kappa = (d * dm) / ((d * dm) ** 2 - 1)
    h_plus = kappa * (dm * at_fx - at_fix / dm)
    h_minus = kappa * (d * at_fix - at_fx / d)
    return (h_plus, h_minus)


def _hpm_error_budget(engine: HeightEngine) -> float:
    """Uniform first-order bound on |estimate - truth| for the hpm components."""
    d, dm = engine.delta, engine.delta_minus
    kappa = (d * dm) / ((d * dm) ** 2 - 1)
    return kappa * (dm + 1 / dm + d + 1 / d) * engine.error_budget()


def orbit_height_slack(engine: HeightEngine, x: AffinePoint) -> float:
    """First-order error of orbit_height induced by the component budgets."""
    h_plus, h_minus = hpm_from_h(engine, x)
    if h_plus <= 0 or h_minus <= 0:
        raise UndecidedPeriodicityError(
            "canonical-height components did not resolve above zero at this depth"
        )
    err = _hpm_error_budget(engine)
    return err / (h_plus * math.log(engine.delta)) + err / (h_minus * math.log(engine.delta_minus))


def min_height_epsilons(delta: int, delta_minus: int) -> Tuple[float, float]:
    """(eps1, eps2) of the minimum-height law; at delta = delta_- = 2 these
    are exactly 2 and 4."""
    log_d = math.log(delta)
    log_dm = math.log(delta_minus)
    eps1 = math.log(1 + log_d / log_dm) / log_d + math.log(1 + log_dm / log_d) / log_dm
    eps2 = eps1 + (1 / log_d + 1 / log_dm) * math.log(max(delta, delta_minus))
    return eps1, eps2


def minimum_location(delta: int, delta_minus: int, h_plus: float, h_minus: float) -> float:
    """t0 with g(t) = delta^t hhat+ + delta_-^(-t) hhat- minimal; over the
    integers the minimum sits at floor(t0) or floor(t0) + 1.  Symmetric data
    (hhat+ = hhat-, delta = delta_-) gives t0 = 0 exactly."""
    log_d = math.log(delta)
    log_dm = math.log(delta_minus)
    return (math.log(h_minus * log_dm) - math.log(h_plus * log_d)) / (log_d + log_dm)


def orbit_height(engine: HeightEngine, x: AffinePoint, max_iter: int = 200) -> float:
    """log hhat+ / log delta + log hhat- / log delta_-, constant along the
    orbit; NEG_INFINITY exactly when the orbit is finite (periodic point)."""
    verdict = is_periodic(engine.outer, x, max_iter=max_iter, digit_cap=engine.digit_cap)
    if verdict.kind == "undecided":
        raise UndecidedPeriodicityError(verdict.detail)
    if verdict.kind == "periodic":
        return NEG_INFINITY
    h_plus, h_minus = hpm_from_h(engine, x)
    if h_plus <= 0 or h_minus <= 0:
        raise UndecidedPeriodicityError(
            "canonical-height components did not resolve above zero at this depth"
        )
    return math.log(h_plus) / math.log(engine.delta) + math.log(h_minus) / math.log(engine.delta_minus)


# -- counting -------------------------------------------------------------------

def _require_infinite_orbit(outer, x, max_iter, digit_cap):
    verdict = is_periodic(outer, x, max_iter=max_iter, digit_cap=digit_cap)
    if verdict.kind == "periodic":
        raise PeriodicPointError(f"point is periodic with period {verdict.period}")
    if verdict.kind == "undecided":
        raise UndecidedPeriodicityError(verdict.detail)


def _scan_direction(values, threshold: float, patience: int, slop: float):
    """values(l) yields (lo, hi) enclosures for l = 0, 1, 2, ...; counts the
    samples at or below the threshold, tracking straddling enclosures."""
    count = 0
    straddles = 0
    misses = 0
    l = 0
    while misses < patience:
        lo, hi = values(l)
        if lo - slop <= threshold <= hi + slop:
            straddles += 1
        if 0.5 * (lo + hi) <= threshold:
            count += 1
            misses = 0
        else:
            misses += 1
        l += 1
    return count, straddles


def count_below(
    f,
    x: AffinePoint,
    threshold: float,
    which: str = "naive",
    engine: Optional[HeightEngine] = None,
    patience: int = DEFAULT_PATIENCE,
    exact_digits: int = DEFAULT_EXACT_DIGITS,
    max_iter: int = 200,
    digit_cap: Optional[int] = None,
) -> int:
    """#{ y in O_f(x) : h(y) <= threshold } by orbit enumeration.

    `f` may be a PlaneAutomorphism or a HeightEngine; canonical-height counts
    need the engine.  The point must have an infinite orbit (so l -> f^l(x)
    is injective and the enumeration is a genuine point count); each direction
    stops after `patience` consecutive samples above the threshold.
    """
    count, _ = _count_below_detail(
        f, x, threshold, which, engine, patience, exact_digits, max_iter, digit_cap
    )
    return count


def _count_below_detail(f, x, threshold, which, engine, patience, exact_digits, max_iter,
                        digit_cap=None):
    if isinstance(f, HeightEngine):
        engine = f
    if which not in ("naive", "canonical"):
        raise ValueError("which must be 'naive' or 'canonical'")
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if which == "canonical" and engine is None:
        raise ValueError("canonical-height counts need a HeightEngine")
    outer = engine.outer if engine is not None else f
    if digit_cap is None:
        digit_cap = engine.digit_cap if engine is not None else 2_000_000
    _require_infinite_orbit(outer, x, max_iter, digit_cap)

    if which == "naive":
        tracker = OrbitHeightTracker(outer, x, exact_digits=exact_digits, digit_cap=digit_cap)
        values = tracker.h_bounds
        slop = 0.0
    else:
        z = engine.to_conjugated_frame(x)
        tracker = OrbitHeightTracker(engine.g, z, exact_digits=exact_digits, digit_cap=digit_cap)
        n = engine.depth
        d_pow = float(engine.delta**n)
        dm_pow = float(engine.delta_minus**n)

        def values(l):
            flo, fhi = tracker.h_bounds(l + n)
            blo, bhi = tracker.h_bounds(l - n)
            return (flo / d_pow + blo / dm_pow, fhi / d_pow + bhi / dm_pow)

        slop = engine.error_budget()

    fwd_count, fwd_straddle = _scan_direction(values, threshold, patience, slop)
    bwd_count, bwd_straddle = _scan_direction(
        lambda l: values(-(l + 1)), threshold, patience, slop
    )
    return fwd_count + bwd_count, fwd_straddle + bwd_straddle


@dataclass(frozen=True)
class CountingEnclosure:
    lower: float
    upper: float
    observed: int
    passed: bool
    predicted: float
    halfwidth: float
    slack: float


def counting_enclosure(
    engine: HeightEngine,
    x: AffinePoint,
    threshold: float,
    patience: int = DEFAULT_PATIENCE,
) -> CountingEnclosure:
    """Check the two-sided counting law: the observed canonical-height count
    must lie within half-width log2/log(delta) + log2/log(delta_-) + 1 of
    (1/log delta + 1/log delta_-) log T - hhat(O), widened by the propagated
    height-error slack."""
    log_d = math.log(engine.delta)
    log_dm = math.log(engine.delta_minus)
    coeff = 1 / log_d + 1 / log_dm
    oh = orbit_height(engine, x)
    if oh == NEG_INFINITY:
        raise PeriodicPointError("counting law applies to infinite orbits only")
    if coeff * math.log(threshold) < oh:
        raise OutOfRangeError(
            "threshold below the orbit height: the counting set is empty there"
        )
    observed, straddles = _count_below_detail(
        engine, x, threshold, "canonical", engine, patience, DEFAULT_EXACT_DIGITS, 200
    )
    predicted = coeff * math.log(threshold) - oh
    halfwidth = math.log(2) / log_d + math.log(2) / log_dm + 1

    # hhat(O) error from the component estimates, first order in the budgets,
    # plus one count per enclosure that straddles the threshold.
    slack = orbit_height_slack(engine, x) + straddles
    lower = predicted - halfwidth - slack
    upper = predicted + halfwidth + slack
    return CountingEnclosure(
        lower=lower,
        upper=upper,
        observed=observed,
        passed=lower <= observed <= upper,
        predicted=predicted,
        halfwidth=halfwidth,
        slack=slack,
    )


def count_exponential(a_coef: float, b_coef: float, delta: int, delta_minus: int, threshold: float):
    """#{ l in Z : delta^l A + delta_-^(-l) B <= T } by direct scan of the
    finite window, with the two-sided logarithmic bounds.

    Requires A, B, T > 0 and T at or above the geometric-mean threshold
    A^(log delta_- / (log delta + log delta_-)) * B^(log delta / ...), below
    which the set is empty and the bounds are meaningless.
    """
    a_coef, b_coef, threshold = float(a_coef), float(b_coef), float(threshold)
    if min(a_coef, b_coef, threshold) <= 0:
        raise ValueError("A, B, T must be positive")
    if delta < 2 or delta_minus < 2:
        raise ValueError("delta and delta_minus must be >= 2")
    log_d = math.log(delta)
    log_dm = math.log(delta_minus)
    floor_t = a_coef ** (log_dm / (log_d + log_dm)) * b_coef ** (log_d / (log_d + log_dm))
    if threshold < floor_t * (1 - 1e-12):
        raise ValueError("T below the geometric-mean precondition")
    lo = math.floor(math.log(b_coef / threshold) / log_dm) - 1
    hi = math.ceil(math.log(threshold / a_coef) / log_d) + 1
    count = 0
    for l in range(lo, hi + 1):
        if (delta**l) * a_coef + (delta_minus ** (-l)) * b_coef <= threshold:
            count += 1
    lower = -1 + math.log(threshold / (2 * a_coef)) / log_d + math.log(threshold / (2 * b_coef)) / log_dm
    upper = 1 + math.log(threshold / a_coef) / log_d + math.log(threshold / b_coef) / log_dm
    return count, lower, upper


def min_orbit_height_bounds(engine: HeightEngine, x: AffinePoint, window: int = 3) -> Tuple[bool, bool]:
    """Check the two-sided bound tying hhat(O) to min over the orbit of
    log hhat: hhat(O) + eps1 <= (1/log d + 1/log d_-) min log hhat <= hhat(O) + eps2.

    The minimum of g(t) = delta^t hhat+ + delta_-^(-t) hhat- over integers is
    attained at floor(t0) or floor(t0) + 1, so the sampled window is centred
    there.
    """
    log_d = math.log(engine.delta)
    log_dm = math.log(engine.delta_minus)
    coeff = 1 / log_d + 1 / log_dm
    oh = orbit_height(engine, x)
    if oh == NEG_INFINITY:
        raise PeriodicPointError("finite orbit has no minimum-height law")
    h_plus, h_minus = hpm_from_h(engine, x)
    t0 = minimum_location(engine.delta, engine.delta_minus, h_plus, h_minus)
    base = math.floor(t0)
    candidates = [
        engine.delta**l * h_plus + float(engine.delta_minus) ** (-l) * h_minus
        for l in range(base - window, base + 2 + window)
    ]
    mid = coeff * math.log(min(candidates))
    eps1, eps2 = min_height_epsilons(engine.delta, engine.delta_minus)
    pad = 1e-9
    return (oh + eps1 <= mid + pad, mid <= oh + eps2 + pad)


# -- orbit records and table rows (CSV surfaces) --------------------------------

@dataclass(frozen=True)
class OrbitSample:
    l: int
    point: AffinePoint
    h_nv: float
    h_hat: float


@dataclass(frozen=True)
class OrbitRecord:
    base: AffinePoint
    samples: Tuple[OrbitSample, ...]
    hplus0: float
    hminus0: float
    orbit_height: float


def build_orbit_record(engine: HeightEngine, x: AffinePoint, window: int) -> OrbitRecord:
    """Exact orbit samples over the symmetric window l in [-window, window],
    with naive heights and the scaling-law canonical heights."""
    h_plus, h_minus = hpm_from_h(engine, x)
    oh = orbit_height(engine, x)
    f = engine.outer
    pts = {0: (Fraction(x[0]), Fraction(x[1]))}
    for l in range(1, window + 1):
        pts[l] = f.apply(pts[l - 1])
        pts[-l] = f.apply_inverse(pts[-(l - 1)])
    samples = []
    for l in range(-window, window + 1):
        h_hat = engine.delta**l * h_plus + float(engine.delta_minus) ** (-l) * h_minus
        samples.append(OrbitSample(l, pts[l], naive_height_affine(pts[l]), h_hat))
    return OrbitRecord(
        base=pts[0],
        samples=tuple(samples),
        hplus0=h_plus,
        hminus0=h_minus,
        orbit_height=oh,
    )


ORBIT_CSV_COLUMNS = ("l", "x", "y", "h_nv", "hhat")
COUNTING_CSV_COLUMNS = ("T", "count", "predicted", "lower", "upper")


def orbit_scan_rows(record: OrbitRecord) -> List[Tuple]:
    return [
        (s.l, s.point[0], s.point[1], s.h_nv, s.h_hat)
        for s in record.samples
    ]


def counting_table_rows(engine: HeightEngine, x: AffinePoint, thresholds) -> List[Tuple]:
    rows = []
    for t in thresholds:
        enc = counting_enclosure(engine, x, t)
        rows.append((t, enc.observed, enc.predicted, enc.lower, enc.upper))
    return rows
