"""Exception types. Every error carries a machine-readable ``code`` and the
process exit status the CLI maps it to."""


class OrbitMetricsError(Exception):
    code = "error"
    exit_status = 2

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        out = {"code": self.code, "message": str(self)}
        if self.details:
            out["details"] = self.details
        return out


class ValidationError(OrbitMetricsError):
    code = "validation"


class SchemaError(ValidationError):
    code = "schema"


class EmptyInput(ValidationError):
    code = "empty_input"


class DimensionMismatch(ValidationError):
    code = "dimension_mismatch"


class UnitMismatch(ValidationError):
    code = "unit_mismatch"


class NonPositiveClass(ValidationError):
    code = "non_positive_class"


class SumMismatch(ValidationError):
    code = "sum_mismatch"


class MarginalMismatch(ValidationError):
    code = "marginal_mismatch"


class InvalidPitch(ValidationError):
    code = "invalid_pitch"


class StageOutOfRange(ValidationError):
    code = "stage_out_of_range"


class NotNormal(ValidationError):
    code = "not_normal"


class NotHermitian(ValidationError):
    code = "not_hermitian"


class MissingLabel(ValidationError):
    code = "missing_label"


class ClusterAmbiguity(ValidationError):
    code = "cluster_ambiguity"


class ResolutionTooCoarse(ValidationError):
    code = "resolution_too_coarse"


class Undecided(OrbitMetricsError):
    """Positivity in an inductive limit not resolved by ``stage_cap``."""

    code = "undecided"
    exit_status = 3


class HallViolation(OrbitMetricsError):
    code = "hall_violation"
    exit_status = 4


class TorsionObstruction(OrbitMetricsError):
    """Hall's condition holds but no torsion-consistent refinement was found.

    Happens for ``Z^k + T`` with the strict cone, which lacks Riesz
    decomposition (e.g. ``(1,0)+(1,0) = (1,1)+(1,1)`` in ``Z + Z/2``).
    """

    code = "torsion_obstruction"
    exit_status = 4


class InconsistentInterval(OrbitMetricsError):
    code = "inconsistent_interval"
    exit_status = 4


class InvariantFailure(OrbitMetricsError):
    code = "invariant_failure"
    exit_status = 4
