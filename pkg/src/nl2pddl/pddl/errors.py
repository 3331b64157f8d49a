class PDDLError(ValueError):
    """Base class for every error raised while reading PDDL text."""


class PDDLSyntaxError(PDDLError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None,
                 expected: str | None = None):
        self.line = line
        self.col = col
        self.expected = expected
        where = f" at {line}:{col}" if line is not None else ""
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{message}{where}{hint}")


class UnsupportedFeature(PDDLError):
    def __init__(self, feature: str, line: int | None = None):
        self.feature = feature
        self.line = line
        where = f" at line {line}" if line is not None else ""
        super().__init__(f"unsupported PDDL feature {feature!r}{where}")


class EmptyGoal(PDDLError):
    pass


class MalformedSignature(PDDLError):
    def __init__(self, line: str, reason: str):
        self.source_line = line
        self.reason = reason
        super().__init__(f"malformed predicate signature {line!r}: {reason}")
