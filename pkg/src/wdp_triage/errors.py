"""Exception hierarchy for wdp-triage.

Every error carries a stable ``code`` so the CLI can report failures as a
single machine-parseable line.
"""


class TriageError(ValueError):
    """Base class for all wdp-triage errors."""

    code = "TRIAGE_ERROR"

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message

    def one_line(self) -> str:
        """Render as ``<CODE>: <message>`` on a single line."""
        text = " ".join(self.message.split())
        return f"{self.code}: {text}"


class InvalidInstanceError(TriageError):
    """A WDP or MWIS instance violates its invariants."""

    code = "INVALID_INSTANCE"


class ConfigError(TriageError):
    """Bad configuration value, section or file."""

    code = "INVALID_CONFIG"


class SolverError(TriageError):
    """A solver was called outside its contract."""

    code = "SOLVER_ERROR"


class ModelError(TriageError):
    """Hardness model training or inference failed."""

    code = "MODEL_ERROR"


class DatasetError(TriageError):
    """A labeled dataset is missing tags, labels or rows."""

    code = "INVALID_DATASET"


class StageError(TriageError):
    """A pipeline stage failed; ``stage`` names it."""

    code = "STAGE_FAILED"

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"stage '{stage}': {message}")
        self.stage = stage
