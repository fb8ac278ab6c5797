"""Exact simulation and limit laws for nested mutation spread on the flat torus."""

__version__ = "0.1.0"

from .geometry import Ball, GridIndex, TorusPoint, covered_level, torus_distance, union_volume
from .process import (
    Guards,
    ModelParams,
    MutationEvent,
    PassageRecord,
    ResourceLimitError,
    accept_candidate,
    simulate_replicate,
    volume_snapshot,
)

__all__ = [
    "Ball",
    "GridIndex",
    "TorusPoint",
    "covered_level",
    "torus_distance",
    "union_volume",
    "Guards",
    "ModelParams",
    "MutationEvent",
    "PassageRecord",
    "ResourceLimitError",
    "accept_candidate",
    "simulate_replicate",
    "volume_snapshot",
    "__version__",
]
