"""Connes spectral distances on one-dimensional lattices.

The main entry points are :func:`distance_table` for pairwise distances,
the operator builders in :mod:`lattice_connes.spectral`, and the link field
utilities in :mod:`lattice_connes.algebra`.
"""

__version__ = "0.1.0"

from .algebra import (GaugeError, SingularLinkError, SpinorField, amplitude_only,
                      gauge_transform_link, gauge_transform_spinor, link_from_json, link_to_json,
                      polar_decompose, random_gauge, random_link, unit_link, wilson_loop)
from .distance import (DistanceMatrix, Method, MetricError, PairError, check_metric,
                       closed_form_distance, distance_table, saturating_function,
                       triangle_condition_check)
from .lattice import LatticeError, LatticeSpec, Topology, backward_diff, build_shift, forward_diff
from .optimize import OptimizerConfig, make_solver, numerical_distance
from .spectral import (DiracOperator, Family, build_dirac, build_dirac_dm, build_dirac_naive,
                       build_dirac_wilson, commutator, spectral_norm)

__all__ = [
    "GaugeError", "SingularLinkError", "SpinorField", "amplitude_only", "gauge_transform_link",
    "gauge_transform_spinor", "link_from_json", "link_to_json", "polar_decompose", "random_gauge",
    "random_link", "unit_link", "wilson_loop", "DistanceMatrix", "Method", "MetricError",
    "PairError", "check_metric", "closed_form_distance", "distance_table", "saturating_function",
    "triangle_condition_check", "LatticeError", "LatticeSpec", "Topology", "backward_diff",
    "build_shift", "forward_diff", "OptimizerConfig", "make_solver", "numerical_distance",
    "DiracOperator", "Family", "build_dirac", "build_dirac_dm", "build_dirac_naive",
    "build_dirac_wilson", "commutator", "spectral_norm",
]
