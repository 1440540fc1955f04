"""Real-time out-of-sample projection onto a frozen 2-D embedding.

Fit indexes a reference embedding (training inputs paired with their
projections); projection places each novel point at the inverse-distance-
weighted average of its k nearest reference projections.
"""

from aumap._core import (
    Error,
    Projector,
    generate_poisson,
    handle_request,
    normalized_mean_distance,
)

__all__ = [
    "Error",
    "Projector",
    "generate_poisson",
    "handle_request",
    "normalized_mean_distance",
]
