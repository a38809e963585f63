"""Graded Fock levels over projective models, and everything built on them.

The pieces, in dependency order: :mod:`~gfock.space` (models, levels,
monomial bases), :mod:`~gfock.shifts` (shift blocks and isometry defects),
:mod:`~gfock.symbols` (level symbols, compression and covariant-symbol
calculus), :mod:`~gfock.quotient` (graded quotient modules and transfer
maps), :mod:`~gfock.bundles` / :mod:`~gfock.balance` (equivariant bundle
presets, balance constants, the T-map), :mod:`~gfock.cowen_douglas`
(eigenbundle fibers and Abel limits), :mod:`~gfock.stability` (Guo
containment and reduced-growth order), :mod:`~gfock.szego` (dressed
isometries and first-order asymptotics), :mod:`~gfock.reports`
(deterministic serialization), :mod:`~gfock.cli` (driver).
"""

from . import (
    balance,
    bundles,
    cowen_douglas,
    errors,
    quotient,
    reports,
    shifts,
    space,
    stability,
    symbols,
    szego,
)
from .reports import Report
from .space import SpaceModel, from_preset, projective_space

__version__ = "0.1.0"

__all__ = [
    "Report",
    "SpaceModel",
    "__version__",
    "balance",
    "bundles",
    "cowen_douglas",
    "errors",
    "from_preset",
    "projective_space",
    "quotient",
    "reports",
    "shifts",
    "space",
    "stability",
    "symbols",
    "szego",
]
