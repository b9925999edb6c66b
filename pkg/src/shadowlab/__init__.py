"""Exact finite-window experiments on shadowing-type properties of symbolic
and toral dynamical systems."""

from .orbits import DynSystem, PseudoOrbit, SemiHorseshoe, ShadowCertificate
from .product import (PrimeLadder, ProductPoint, ProductSystem, build_product,
                      explicit_semi_horseshoe, l_shadow_product, min_period_truncated,
                      product_distance, splice)
from .seqcore import (EventuallyPeriodicSeq, agreement_radius, distance, distance_profile,
                      format_seq, glue, parse_seq)
from .sft import (SftSystem, TransitionGraph, chain_classes, count_periodic, diagonal_bound,
                  is_mixing, shadow_sft, spectral_decompose, two_loop_sft)
from .toral import (AnosovSystem, SpherePoint, SphereSystem, ToralSystem, TorusPoint,
                    lift_pseudo_orbit, local_product_point, make_anosov, shadow_toral)
from .verify import (PropertyReport, asymptotic_ball_probe, check_l_shadowing,
                     check_local_product_char, check_shadowing, entropy_bound,
                     extract_semi_horseshoe, positive_expansivity_probe, stable_inclusion_check)

__version__ = "0.1.0"

__all__ = [
    "AnosovSystem", "DynSystem", "EventuallyPeriodicSeq", "PrimeLadder", "ProductPoint",
    "ProductSystem", "PropertyReport", "PseudoOrbit", "SemiHorseshoe", "ShadowCertificate",
    "SftSystem", "SpherePoint", "SphereSystem", "ToralSystem", "TorusPoint", "TransitionGraph",
    "agreement_radius", "asymptotic_ball_probe", "build_product", "chain_classes",
    "check_l_shadowing", "check_local_product_char", "check_shadowing", "count_periodic",
    "diagonal_bound", "distance", "distance_profile", "entropy_bound", "explicit_semi_horseshoe",
    "extract_semi_horseshoe", "format_seq", "glue", "is_mixing", "l_shadow_product",
    "lift_pseudo_orbit", "local_product_point", "make_anosov", "min_period_truncated",
    "parse_seq", "positive_expansivity_probe", "product_distance", "shadow_sft", "shadow_toral",
    "spectral_decompose", "splice", "stable_inclusion_check", "two_loop_sft",
]
