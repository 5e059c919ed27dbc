"""Exact chain-level computations for Segal cooperads, their cobar constructions
and the W-construction, together with the Barratt-Eccles and cubical machinery
they rest on."""

from .ring_linear import (
    F2,
    QQ,
    ZZ,
    Complex,
    FormalSum,
    GradedHom,
    Report,
    Ring,
    homology_ranks,
    square_zero_check,
    tensor,
)

__all__ = [
    "F2", "QQ", "ZZ", "Complex", "FormalSum", "GradedHom", "Report", "Ring",
    "homology_ranks", "square_zero_check", "tensor",
]
