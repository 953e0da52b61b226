"""Minimal weighted L2 integrals on sublevel sets of planar Green functions.

The package computes G(t), the least weighted L2 norm of a holomorphic
function (or form) with prescribed jet at a base point over the region
{psi < -t}, and tests its concavity, partial linearity and log-convexity on
the unit disc and on annuli.
"""
from ._backend import BACKEND
from .bergman import (BasisSpec, GramSystem, MinimizerResult, assemble_gram,
                      bergman_kernel_value, extremal_trace, minimal_integral,
                      solve_constrained_min)
from .diagnostics import (ConcavityReport, Trace, classify, lemma_concave_predicate,
                          lemma_notconvex_predicate, measure_splitting_check, reparametrize,
                          second_differences)
from .domain import (DomainModel, RegionSpec, green_value, in_sublevel, s_trace,
                     sublevel_area)
from .errors import PshlabError
from .gain import GainFunction, eval_c, h_inverse, h_value, validate_gain
from .quadrature import QuadratureSpec, radial_integral, region_integral
from .weights import (RadialProfile, WeightPair, density, eval_phi, eval_psi, jet_order_of,
                      validate_weight)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BasisSpec", "ConcavityReport", "DomainModel", "GainFunction", "GramSystem",
    "MinimizerResult", "PshlabError", "QuadratureSpec", "RadialProfile", "RegionSpec",
    "Trace", "WeightPair", "assemble_gram", "bergman_kernel_value", "classify", "density",
    "eval_c", "eval_phi", "eval_psi", "extremal_trace", "green_value", "h_inverse",
    "h_value", "in_sublevel", "jet_order_of", "lemma_concave_predicate",
    "lemma_notconvex_predicate", "measure_splitting_check", "minimal_integral",
    "radial_integral", "region_integral", "reparametrize", "s_trace",
    "second_differences", "solve_constrained_min", "sublevel_area", "validate_gain",
    "validate_weight",
]
