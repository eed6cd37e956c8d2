"""Exception hierarchy shared by all ghforge modules."""


class GhforgeError(Exception):
    """Base class for all errors raised by this package."""


class MetricError(GhforgeError):
    """A candidate distance matrix violates the metric axioms."""


class AsymmetricMatrix(MetricError):
    def __init__(self, i, j, dij, dji):
        self.indices = (i, j)
        super().__init__(f"matrix not symmetric: d[{i}][{j}]={dij!r} but d[{j}][{i}]={dji!r}")


class NonzeroDiagonal(MetricError):
    def __init__(self, i, value):
        self.index = i
        super().__init__(f"diagonal entry d[{i}][{i}]={value!r} must be 0 (and off-diagonal > 0)")


class TriangleViolation(MetricError):
    def __init__(self, i, j, k, lhs, rhs):
        self.triple = (i, j, k)
        super().__init__(
            f"triangle inequality violated: d[{i}][{k}]={lhs!r} > d[{i}][{j}]+d[{j}][{k}]={rhs!r}"
        )


class TooLarge(GhforgeError):
    """An enumeration guard was exceeded.  Raise GHFORGE_GUARD to override."""


class HostMismatch(GhforgeError):
    """A structure was used with a space it does not live on."""


class KindMismatch(GhforgeError):
    """Two structures of incompatible kinds (or mark spaces) were compared."""


class GridMismatch(GhforgeError):
    """Two sampled curves with different time grids were compared in-host."""


class SignatureMismatch(GhforgeError):
    """Two structured spaces with different structure signatures were compared."""


class OutOfBall(GhforgeError):
    """A distinguished point left the ball during truncation."""


class StructureTruncationError(GhforgeError):
    """A structure could not be truncated to the requested subspace."""


class SchemaError(GhforgeError):
    """A space document failed validation; ``path`` locates the offending node."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class DanglingLabel(SchemaError):
    """A structure in a document references a label that is not declared."""

    def __init__(self, path, label):
        self.label = label
        super(SchemaError, self).__init__(f"{path}: unknown label {label!r}")
        self.path = path


class OracleDisagreement(GhforgeError):
    """Fast path and brute-force oracle disagree beyond tolerance."""
