"""Timed bounded Petri-net games.

A game is described by a bounded Petri net whose transitions are owned by
players or grouped into weighted chance lotteries, plus a clock (chronon
length and horizon), per-player visibility of places, affine payoffs over
the final marking, and an optional terminal predicate.  The package parses
and validates such descriptions, unfolds them into extensive-form game
trees, solves the trees exactly (rational arithmetic throughout), exports
standard interchange formats, and runs timed lockstep sessions over
websockets.
"""

from .nets import (
    Marking,
    Net,
    NotEnabled,
    Place,
    Transition,
    UnknownPlayer,
    enabled_for,
    fire,
    is_enabled,
)
from .lang import (
    Diagnostic,
    GameDescription,
    ParseError,
    parse,
    serialize,
    validate,
)
from .unfold import (
    BudgetExceeded,
    CompactTree,
    GameTree,
    ObservationKey,
    chronon_step,
    observation,
    tree_stats,
    unfold,
    unfold_compact,
)
from .solve import (
    ImperfectInformation,
    NotConstantSum,
    NotTwoPlayer,
    backward_induction,
    export_efg,
    export_nfg,
    pure_nash,
    to_normal_form,
    zero_sum_value,
)

__version__ = "0.1.0"

__all__ = [
    "Marking",
    "Net",
    "NotEnabled",
    "Place",
    "Transition",
    "UnknownPlayer",
    "enabled_for",
    "fire",
    "is_enabled",
    "Diagnostic",
    "GameDescription",
    "ParseError",
    "parse",
    "serialize",
    "validate",
    "BudgetExceeded",
    "CompactTree",
    "GameTree",
    "ObservationKey",
    "chronon_step",
    "observation",
    "tree_stats",
    "unfold",
    "unfold_compact",
    "ImperfectInformation",
    "NotConstantSum",
    "NotTwoPlayer",
    "backward_induction",
    "export_efg",
    "export_nfg",
    "pure_nash",
    "to_normal_form",
    "zero_sum_value",
    "__version__",
]
