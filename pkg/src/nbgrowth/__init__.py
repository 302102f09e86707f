"""Certified growth rates of graphs immersed in a bouquet of circles."""

from .graph import (
    BasedMultigraph,
    Dart,
    GraphDocument,
    based_core,
    degree,
    disjoint_union_with_path,
    parse_graph,
    serialize_graph,
    two_core,
)
from .kernels import BACKEND
from .spectral import (
    GrowthCertificate,
    NBOperator,
    build_nb_operator,
    growth_rate,
    is_irreducible,
    nb_walk_count,
    spectral_radius,
    truncation_growth_profile,
)

__version__ = "0.1.0"
