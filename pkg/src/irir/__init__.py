"""Simulation and Lyapunov-drift toolkit for two (or k) competing infections
with mutually exclusive immunity."""

from .dynamics import (
    CountState,
    Event,
    EventKind,
    KCountState,
    KRateParams,
    RateParams,
    StopRule,
    Trajectory,
    VertexAssignment,
    event_rates,
    make_initial,
    run,
    run_k,
    step,
)
from .equilibrium import (
    Equilibrium2,
    EquilibriumK,
    Regime,
    equilibrium2,
    equilibrium_k,
    mean_field_derivatives,
    surviving_set,
    threshold_classify,
)
from .errors import AbsorbedError, CapacityError, DomainError, InvalidInputError
from .graph import ExplicitGraph, JumbledReport, PerfectlyMixed, generate_erdos_renyi, jumbledness_alpha

__version__ = "0.1.0"
