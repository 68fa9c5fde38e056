"""Numerical toolkit for short-range spin-glass order parameters.

Exact enumeration and replica-coupled Monte Carlo for Edwards-Anderson-type
models, random-energy-model closed forms, finite-size order-parameter
estimators, and a verification harness for the associated identities and
inequalities.
"""

__version__ = "0.1.0"

from .lattice import (
    BoundaryConfig,
    DisorderRealization,
    Lattice,
    ReplicaCoupling,
    SpinConfig,
    build_lattice,
    constant,
    energy1,
    energy2,
    energy3,
    gauge_transform,
    gaussian,
    open_boundary,
    overlap,
    plus_boundary,
    pm_j,
    sample_disorder,
    uniform,
)

__all__ = [
    "__version__",
    "BoundaryConfig",
    "DisorderRealization",
    "Lattice",
    "ReplicaCoupling",
    "SpinConfig",
    "build_lattice",
    "constant",
    "energy1",
    "energy2",
    "energy3",
    "gauge_transform",
    "gaussian",
    "open_boundary",
    "overlap",
    "plus_boundary",
    "pm_j",
    "sample_disorder",
    "uniform",
]
