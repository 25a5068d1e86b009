"""Exact calculus of Moore algebras: series, gauge actions, Hochschild cohomology, deformations."""

from .calculus import (
    Derivation,
    Endomorphism,
    apply_derivation,
    bracket,
    compose_endos,
    conjugate,
    invert_endo,
    is_square_zero,
)
from .deform import (
    AutomorphismJet,
    DeformationJet,
    DeformationOverBase,
    RingMap,
    classify_miniversal,
    extend_automorphism,
    extend_jet,
    integrate_infinitesimal,
    jet_order_check,
    obstruction,
    obstructions_cohomologous_check,
    pointed_conjugate,
    push_out,
    trivialize,
)
from .errors import (
    ContextMismatch,
    HypothesisError,
    MooreError,
    NotInvertible,
    ParseError,
    RingError,
    SeriesError,
    StructureError,
)
from .hochschild import (
    differential,
    hh_module,
    hh_trivial,
    quotient_presentation,
    solve_coboundary,
)
from .moore import (
    GaugePair,
    MooreStructure,
    act,
    normal_form,
    pair_compose,
    pair_invert,
    universal_even,
    universal_odd,
)
from .parsing import parse_derivation, parse_jet, parse_series
from .rings import QQ, ZZ, IntegersMod, make_ring, polynomial, square_zero
from .series import CommSeries, GradingContext, NcSeries, comm_compose, comm_inverse

__version__ = "0.1.0"
