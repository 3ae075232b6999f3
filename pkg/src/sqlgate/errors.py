"""Exception hierarchy shared across the package."""


class SqlGateError(Exception):
    """Base class for every error raised by this package."""


class UnterminatedString(SqlGateError):
    def __init__(self, offset: int):
        super().__init__(f"unterminated string starting at byte {offset}")
        self.offset = offset


class UnterminatedComment(SqlGateError):
    def __init__(self, offset: int):
        super().__init__(f"unterminated comment starting at byte {offset}")
        self.offset = offset


class ParseError(SqlGateError):
    def __init__(self, offset: int, expected: str):
        super().__init__(f"parse error at byte {offset}: expected {expected}")
        self.offset = offset
        self.expected = expected


class MissingTag(SqlGateError):
    """The query carries no trailing call-stack comment."""


class InvalidFrame(SqlGateError):
    """A call-stack frame violates the frame syntax."""


class PhpParseError(SqlGateError):
    def __init__(self, file: str, line: int, reason: str = ""):
        msg = f"{file}:{line}: cannot parse"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)
        self.file = file
        self.line = line


class MalformedRecord(SqlGateError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"training record line {line}: {reason}")
        self.line = line
        self.reason = reason


class BuildFailed(SqlGateError):
    """No training record could be turned into a profile entry."""


class FormatError(SqlGateError):
    def __init__(self, line: int, reason: str = ""):
        msg = f"bad profile line {line}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.line = line


class UnknownCategory(SqlGateError):
    """Attack category name is not one of the eight known ones."""


class ConfigError(SqlGateError):
    """Gate configuration is missing or inconsistent."""
