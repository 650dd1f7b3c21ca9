"""Exact computation of the approximation number of polynomial maps.

The number is computed twice: by testing quasiopenness of fibred powers,
and from a rank partition of the source.
"""

from __future__ import annotations

from .analysis import (
    INFINITY,
    AppResult,
    Stratum,
    app_direct,
    app_formula,
    critical_values,
    fibre_count_bound,
    generic_fibre_count,
    openness,
    quasiopen,
    rank_partition,
)
from .geometry import MapSpec, dimension, fibred_power, image_closure, jump_locus
from .groebner import Ideal, buchberger, eliminate, intersect, saturate
from .polycore import Poly, Ring, parse_poly

__all__ = [
    "INFINITY",
    "AppResult",
    "Ideal",
    "MapSpec",
    "Poly",
    "Ring",
    "Stratum",
    "app_direct",
    "app_formula",
    "buchberger",
    "critical_values",
    "dimension",
    "eliminate",
    "fibre_count_bound",
    "fibred_power",
    "generic_fibre_count",
    "image_closure",
    "intersect",
    "jump_locus",
    "openness",
    "parse_poly",
    "quasiopen",
    "rank_partition",
    "saturate",
]

__version__ = "0.1.0"
