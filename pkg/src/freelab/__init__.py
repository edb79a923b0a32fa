"""Numerical free probability: densities, Cauchy transforms on their continuation
sheets, contour winding checks for univalent inverses, and free-cumulant probes."""

from .errors import ConfigError, DivergentMomentError, DomainError, FreelabError, NumericalError
from .measures import (
    Beta,
    BooleanStable,
    DistributionSpec,
    FreePoisson,
    Power,
    ScaleMixture,
    Semicircle,
    SubHCM,
    Symmetrize,
    density_array,
    density_eval,
    moment,
    spec_from_dict,
    spec_to_dict,
    support,
)
from .cauchy import (
    BranchedDensity,
    CauchyEvaluator,
    g_inverse_closed,
    g_inverse_numeric,
    g_lower,
    gtilde,
    voiculescu,
)
from .contour import domain_scan, lemma_pdf0_probe, ui_check, ui_s_check, winding_number
from .cumulants import free_cumulants, hankel_functional, moments_mp_power, scan_sign

__version__ = "0.1.0"
