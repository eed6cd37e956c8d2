"""Gromov-Hausdorff distances for finite metric spaces with extra structure.

The package computes the classical Gromov-Hausdorff metric, the
Gromov-Hausdorff-Prokhorov metric, and their common generalization to
spaces carrying a distinguished point, a finite measure, a subset, marked
measures or subsets over a finite mark space, a sampled curve, or tuples
of these - plus the pointed boundedly-compact variant built from
truncated balls, all at exhaustively-verifiable (desk) scale.
"""

from .compact import (
    CoveringNumber,
    DistanceResult,
    cgf_distance,
    covering_number,
    feasible_at,
    gh_distance,
    ghp_distance,
    oracle_cgf,
    per_correspondence_threshold,
    precompact_profile,
)
from .document import parse_space, serialize_space
from .errors import (
    AsymmetricMatrix,
    DanglingLabel,
    GhforgeError,
    GridMismatch,
    HostMismatch,
    KindMismatch,
    MetricError,
    NonzeroDiagonal,
    OutOfBall,
    SchemaError,
    SignatureMismatch,
    StructureTruncationError,
    TooLarge,
    TriangleViolation,
)
from .measures import (
    Coupling,
    FiniteMeasure,
    discrepancy,
    hausdorff_distance,
    min_discrepancy_outside,
    prokhorov_distance,
    prokhorov_via_coupling,
    total_variation,
)
from .pointed import (
    PointedStructuredSpace,
    RadialProfile,
    a_eps,
    integral_distance,
    pcball,
    pointed_distance,
    radial_distance,
    sequence_report,
)
from .spaces import (
    Correspondence,
    FiniteMetricSpace,
    IsometricEmbedding,
    PointedSpace,
    closed_ball,
    count_correspondences,
    distortion,
    enumerate_correspondences,
    find_isomorphism,
    identity_embedding,
    validate_metric,
)
from .structures import (
    Curve,
    MarkedMeasure,
    MarkedSubset,
    MarkSpace,
    Measure,
    Point,
    StructuredSpace,
    Subset,
    TupleStructure,
    ambient_distance,
    find_structured_isomorphism,
    pushforward,
    signature,
    structure_leq,
    truncate,
)

__version__ = "0.1.0"
