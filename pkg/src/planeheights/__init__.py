"""Exact naive and canonical heights of rational points under plane
polynomial automorphisms, with orbit point counting and the blow-up
intersection calculus."""

from .automorphism import (
    InfinityPoint,
    PlaneAutomorphism,
    compose_maps,
    conjugate,
    degree_sequence,
    dynamical_degree,
    from_description,
    henon,
    identity,
    indeterminacy_at_infinity,
    inverse,
    is_regular,
    load_map_file,
    pair,
    triangular,
)
from .canonical import (
    RecursionClassification,
    HeightEngine,
    HeightEstimate,
    PeriodicityVerdict,
    functional_equation_residual,
    classify_quadratic_recursion,
    hcanonical,
    hminus,
    hplus,
    is_periodic,
    make_engine,
)
from .errors import (
    DegreeUndefinedError,
    MapValidationError,
    OutOfRangeError,
    PeriodicPointError,
    PlaneHeightsError,
    PolyParseError,
    ResourceCapError,
    UndecidedPeriodicityError,
)
from .heights import (
    growth_constant,
    naive_height,
    naive_height_affine,
    normalize,
)
from .orbit import (
    NEG_INFINITY,
    CountingEnclosure,
    OrbitHeightTracker,
    OrbitRecord,
    build_orbit_record,
    count_below,
    count_exponential,
    counting_enclosure,
    hpm_from_h,
    min_orbit_height_bounds,
    orbit_height,
)
from .picard import (
    DivisorClass,
    closed_form_pullbacks,
    effective_excess,
    intersection_matrix,
    solve_pullbacks,
)
from .ratpoly import BivarPoly, Rat, parse_poly, parse_rat

__version__ = "0.1.0"
