"""Exception hierarchy for the waiting-time survival toolkit.

Every error raised on purpose derives from `SurvivalError`. The CLI maps the three
families (data, numerical, artifact) onto distinct exit codes.
"""

from typing import Optional


class SurvivalError(Exception):
    """Base class for all toolkit errors."""


class DataError(SurvivalError, ValueError):
    """Invalid input data, optionally located at a row and column."""

    def __init__(
        self,
        message: str,
        *,
        row: Optional[int] = None,
        column: Optional[str] = None,
    ):
        self.row = row
        self.column = column
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class NoEventsError(DataError):
    def __init__(self, message: str = "no observable events"):
        super().__init__(message)


class NoComparablePairsError(DataError):
    def __init__(self, message: str = "no comparable pairs"):
        super().__init__(message)


class DimensionMismatchError(DataError):
    pass


class CensoringTargetError(DataError):
    pass


class NumericalError(SurvivalError, ArithmeticError):
    """A numerical procedure could not produce a trustworthy result."""


class SingularHessianError(NumericalError):
    pass


class NullModelError(NumericalError):
    def __init__(self, message: str = "null model reached"):
        super().__init__(message)


class TrainingDivergedError(NumericalError):
    """Loss became non-finite during network training."""

    def __init__(self, epoch: int, loss: float):
        self.epoch = epoch
        self.loss = loss
        super().__init__(
            f"Training diverged at epoch {epoch} (loss={loss}); "
            "try a lower learning rate."
        )


class NonFiniteActivationError(NumericalError):
    def __init__(self, layer: int):
        self.layer = layer
        super().__init__(f"Non-finite activation in layer {layer}")


class FoldError(SurvivalError):
    """Wraps a pipeline failure with the fold it happened in."""

    def __init__(self, fold_index: int, cause: BaseException):
        self.fold_index = fold_index
        self.cause = cause
        super().__init__(f"Fold {fold_index} failed: {cause}")


class SearchError(SurvivalError):
    pass


class ArtifactError(SurvivalError, OSError):
    """Unreadable, incompatible or missing artifact (bundle, network file, manifest)."""


class ReproducibilityError(ArtifactError):
    pass
