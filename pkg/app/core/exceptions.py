from typing import Optional


class ShellDragError(Exception):
    """Base class for domain errors. `code` is stable and machine-readable."""

    code = "shelldrag"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def with_source(self, source: str) -> "ShellDragError":
        """Prefix the message with the file or input it came from."""
        self.message = f"{source}: {self.message}"
        self.args = (self.message,)
        return self


class GeometryError(ShellDragError):
    code = "geometry"


class ContactStateError(ShellDragError):
    code = "contact_state"


class UndefinedMetricError(ShellDragError):
    code = "undefined_metric"


class EmptyWindowError(ShellDragError):
    code = "empty_window"


class TelemetrySchemaError(ShellDragError):
    code = "telemetry_schema"


class TelemetryRowError(ShellDragError):
    code = "telemetry_row"

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TelemetryOrderError(ShellDragError):
    code = "telemetry_order"

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DegenerateExcitationError(ShellDragError):
    code = "degenerate_excitation"


class ConfigError(ShellDragError):
    code = "config"

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


class EmptyDatasetError(ShellDragError):
    code = "empty_dataset"


class DatasetSchemaError(ShellDragError):
    code = "dataset_schema"


class DatasetRowError(ShellDragError):
    code = "dataset_row"

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
