"""Exception hierarchy shared by every stage of the pipeline."""


class BlastFragError(Exception):
    """Base class for all errors raised by blastfrag."""


class ParseError(BlastFragError, ValueError):
    """Detection file is not well-formed."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class ValidationError(BlastFragError, ValueError):
    """A record parsed fine but violates a domain invariant."""

    def __init__(self, message, image_index=None, instance_index=None):
        self.image_index = image_index
        self.instance_index = instance_index
        super().__init__(message)


class DomainError(BlastFragError, ValueError):
    """Argument outside the domain of the operation."""


class DegenerateError(BlastFragError, ValueError):
    """Input too small or too regular for the statistic to be defined."""


class UnsupportedOperationError(BlastFragError):
    """Operation needs information the input does not carry (e.g. metric scale)."""
