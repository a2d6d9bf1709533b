"""Exception hierarchy shared across the package."""


class ArmDynError(Exception):
    """Base class for every error raised by armdyn."""


class NonUnitAxis(ArmDynError, ValueError):
    """A rotation axis that should be unit length is not."""


class NonUnitScrew(NonUnitAxis):
    """A screw axis is neither rotational with unit omega nor a unit translation."""


class ModelError(ArmDynError):
    """Base class for model-file problems."""


class ModelSyntaxError(ModelError):
    """The model document is not well-formed JSON."""

    def __init__(self, msg, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            msg = f"{msg} (line {line}, column {column})"
        super().__init__(msg)


class SchemaError(ModelError):
    """A field is missing, unexpected or of the wrong shape/type."""

    def __init__(self, msg, path=""):
        self.path = path
        super().__init__(f"{path}: {msg}" if path else msg)


class ValidationError(ModelError):
    """A physical or geometric invariant does not hold."""

    def __init__(self, msg, path="", index=None):
        self.path = path
        self.index = index
        super().__init__(f"{path}: {msg}" if path else msg)


class MissingHomePose(ArmDynError):
    pass


class MissingInertia(ArmDynError):
    """Dynamics requested on a kinematics-only model."""


class IndexOutOfRange(ArmDynError, IndexError):
    pass


class TrajectoryError(ArmDynError):
    pass


class CsvFormatError(TrajectoryError, ValueError):
    def __init__(self, msg, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{msg} ({', '.join(where)})" if where else msg)


class NonMonotoneTime(CsvFormatError):
    pass


class TimestampMismatch(TrajectoryError):
    pass


class OutOfSpan(TrajectoryError):
    pass
