"""Generating-function construction of beam-like Klein-Gordon solutions."""

__version__ = "0.1.0"

from .coords import (
    LightConeCoords,
    OffSliceTransverse,
    SpacetimePoint,
    from_cylindrical,
    to_lightcone,
)
from .beams import (
    BeamPhysical,
    BesselParams,
    BGParams,
    ComplexField,
    ExpParams,
    HGIndices,
    LGIndices,
    make_field,
)

__all__ = [
    "__version__",
    "SpacetimePoint",
    "LightConeCoords",
    "OffSliceTransverse",
    "to_lightcone",
    "from_cylindrical",
    "BeamPhysical",
    "LGIndices",
    "HGIndices",
    "ExpParams",
    "BesselParams",
    "BGParams",
    "ComplexField",
    "make_field",
]
