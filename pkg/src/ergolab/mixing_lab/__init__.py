"""Testers for the mixing hierarchy: invariant witnesses, blow-up search,
recurrence and return blocks, proximality and reachability."""
from .invariants import (
    InvariantWitness,
    affine_order_invariant,
    chart_cross_ratio,
    cross_ratio_invariance,
    cross_ratio_invariance_batch,
    cyclic_order_invariant,
    cyclic_order_type,
    odometer_square_batch,
    odometer_square_invariant,
    random_affine_elements,
    random_words,
)
from .proximality import ConcentrationSurvey, ProximalityReport, concentration_survey, proximality_test
from .reachability import (
    CylinderPair,
    OrderTarget,
    ReachabilityReport,
    affine_order_source,
    boundary_reachability,
    de_reachability,
)
from .sat import SAT_ITERATION_CAP, SatResult, random_interval_union, sat_blowup_search
from .walks import (
    BlockReport,
    FiniteChain,
    LatticeChain,
    RecurrenceProfile,
    induced_block_distribution,
    recurrence_profile,
)

__all__ = [
    "BlockReport",
    "ConcentrationSurvey",
    "CylinderPair",
    "FiniteChain",
    "InvariantWitness",
    "LatticeChain",
    "OrderTarget",
    "ProximalityReport",
    "ReachabilityReport",
    "RecurrenceProfile",
    "SAT_ITERATION_CAP",
    "SatResult",
    "affine_order_invariant",
    "affine_order_source",
    "boundary_reachability",
    "chart_cross_ratio",
    "concentration_survey",
    "cross_ratio_invariance",
    "cross_ratio_invariance_batch",
    "cyclic_order_invariant",
    "cyclic_order_type",
    "de_reachability",
    "induced_block_distribution",
    "odometer_square_batch",
    "odometer_square_invariant",
    "proximality_test",
    "random_affine_elements",
    "random_interval_union",
    "random_words",
    "recurrence_profile",
    "sat_blowup_search",
]
