"""Exception types shared across the workbench."""


class ParameterError(ValueError):
    """An argument violates an operation's precondition."""


class UsageError(RuntimeError):
    """An object was used in a way its life cycle forbids (e.g. measuring a qubit twice)."""


class ScheduleError(RuntimeError):
    """A message was sent out of the order a protocol prescribes."""

    def __init__(self, round_index, message):
        super().__init__(f"round {round_index}: {message}")
        self.round_index = round_index


class ConfigurationError(RuntimeError):
    """A session or batch was configured with incompatible components."""


class TranscriptParseError(ValueError):
    """A transcript file could not be parsed."""

    def __init__(self, line_number, message):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number
