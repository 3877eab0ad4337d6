"""Exception hierarchy shared by every drifteval module."""


class DriftEvalError(Exception):
    """Base class; carries a short machine-readable ``code``."""

    code = "error"


class SchemaError(DriftEvalError):
    code = "schema_error"


class DataError(DriftEvalError):
    """A specific input row could not be parsed or validated."""

    code = "data_error"

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class EmptyDatasetError(DriftEvalError):
    code = "empty_dataset"


class DomainError(DriftEvalError, ValueError):
    code = "domain_error"


class SplitError(DriftEvalError):
    code = "split_error"


class TrainingError(DriftEvalError):
    code = "training_error"


class UndefinedMetricError(DriftEvalError, ValueError):
    code = "undefined_metric"


class ConfigError(DriftEvalError):
    code = "config_error"


class ScriptError(DriftEvalError):
    code = "script_error"


class UnsupportedScriptError(ScriptError):
    code = "unsupported_script"


class RenderError(DriftEvalError):
    code = "render_error"
