"""Time-optimal synthesis for a Dubins vehicle with bounded turn rate and
variable positive speed, steering onto its minimum-radius circle.

Typical use::

    from dubins_synthesis import build
    syn = build(2.0)
    syn.locate((-3.0, 2.0)).letter   # ControlLetter.M
"""
from .core import (
    TARGET,
    ControlLetter,
    CoverageError,
    DomainError,
    FullState,
    InvalidParameterError,
    NormalizedParams,
    OutOfWindowError,
    PhysicalParams,
    ReducedPoint,
    SchemaError,
    SolverFailure,
    StructuralCheckError,
    SynthesisError,
    UnsupportedParameterError,
    normalize,
    reduce,
    unreduce,
)
from .families import FamilyTree
from .lift import simulate_closed_loop, solve_p, stability_bound, stability_check
from .render import RenderSpec, render_synthesis, render_trajectories
from .serialization import dumps, load, loads, save
from .synthesis import FeedbackResult, Synthesis, Trajectory, build
from .verification import GridSpec, verify

__version__ = "0.1.0"

__all__ = [
    "TARGET", "ControlLetter", "CoverageError", "DomainError", "FullState", "InvalidParameterError",
    "NormalizedParams", "OutOfWindowError", "PhysicalParams", "ReducedPoint", "SchemaError",
    "SolverFailure", "StructuralCheckError", "SynthesisError", "UnsupportedParameterError",
    "normalize", "reduce", "unreduce", "FamilyTree", "simulate_closed_loop", "solve_p",
    "stability_bound", "stability_check", "RenderSpec", "render_synthesis", "render_trajectories",
    "dumps", "load", "loads", "save", "FeedbackResult", "Synthesis", "Trajectory", "build",
    "GridSpec", "verify",
]
