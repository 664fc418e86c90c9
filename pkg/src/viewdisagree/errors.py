class ConfigError(ValueError):
    """Invalid configuration value; ``field`` names the offending setting."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class DatasetFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InsufficientSamplesError(ValueError):
    pass


class EmptyClassError(ValueError):
    def __init__(self, label: int, message: str | None = None):
        super().__init__(message or f"class {label} has no samples")
        self.label = label
