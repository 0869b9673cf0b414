"""Simulation and exact checks for Poisson limits of associated 0/1 random fields."""

__version__ = "0.1.0"

from .association import (
    JointDistribution,
    enumerate_upsets,
    exact_fkg_check,
    mc_fkg_check,
    window_distribution,
)
from .counts import (
    CountHistogram,
    count_experiment,
    factorial_moments,
    reference_pmf,
    tv_distance,
)
from .field import (
    FieldSample,
    FieldSpec,
    LatticeWindow,
    decay_diagnostic,
    exact_cov,
    marginal_prob,
    sample_field,
    sigma,
    union_size,
)
from .limit import (
    CharfnReport,
    charfn_report,
    exact_charfn,
    limit_charfn,
    mc_charfn,
    newman_bound,
    product_charfn,
)
from .measure import BoxRegion, TestFunction, integral, lattice_support, measure_of_box, quadrature
