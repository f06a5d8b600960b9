"""Quandle-coloured tangle machines: algebra, rewriting and applications."""
from .canonical import InvariantProfile, canonical_key, invariant_profile
from .colors import EPS_EQ, EPS_HERM, Mat, Perm, PowerProduct, Vec
from .machine import (
    Agent,
    Component,
    Inconsistent,
    Machine,
    MachineError,
    Underdetermined,
    closure,
    color,
    concatenate,
    endpoints,
    processes,
    solve_coloring,
    solve_linear,
    validate,
)
from .moves import MoveSite, StaleSiteError, apply_move, enumerate_moves, inverse_site, replay
from .quandle import (
    AffineMap,
    ConjugationQuandle,
    LinearQuandle,
    LoglinearQuandle,
    OpLabel,
    QuandleError,
    TableQuandle,
    check_axioms,
    dihedral,
    linear,
)
from .search import Budget, DistinguishedByInvariant, Found, NotFoundWithinBudget, search_equivalent

__version__ = "0.1.0"
SCHEMA_VERSION = "tanglekit/1"
