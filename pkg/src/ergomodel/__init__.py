"""Exact computations for a substitution subshift with an infinite invariant measure.

The package enumerates the language of a substitution with a fixed point
1^inf, computes its locally finite invariant measure exactly, builds
Kakutani-Rokhlin towers from return words, and runs a staged
construction of generating partitions whose names become uniform along
orbits.
"""

__version__ = "0.1.0"

from .clopen import Clopen, ClopenAlgebra, cylinder, parse_cylinder, parse_union
from .errors import (ErgomodelError, InputError, NotKStandardError, ResourceError,
                     StabilizationError, StructuralError)
from .measures import (INFINITE, CylinderMeasure, birkhoff_certificate, clopen_measure,
                       kolmogorov_defects, measure_for, product_vs_diagonal, pushforward)
from .partitions import WindowPartition, distance, join, letter_partition
from .subshift import CompactSupport, FixedPoint, Generated, SubscriptMap, in_subshift
from .towers import KRTower, kr_tower, return_words
from .words import DEFAULT, LanguageOracle, Substitution, iterate

__all__ = [
    "Clopen", "ClopenAlgebra", "CompactSupport", "CylinderMeasure", "DEFAULT",
    "ErgomodelError", "FixedPoint", "Generated", "INFINITE", "InputError", "KRTower",
    "LanguageOracle", "NotKStandardError", "ResourceError", "StabilizationError",
    "StructuralError", "SubscriptMap", "Substitution", "WindowPartition",
    "birkhoff_certificate", "clopen_measure", "cylinder", "distance", "in_subshift",
    "iterate", "join", "kolmogorov_defects", "kr_tower", "letter_partition", "measure_for",
    "parse_cylinder", "parse_union", "product_vs_diagonal", "pushforward", "return_words",
]
