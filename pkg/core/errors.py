"""
Exception hierarchy shared by every package.

Each error carries a machine-readable ``category`` used by the command line
driver to report failures (``error[<category>]: <message>``) and to pick an
exit code.
"""


class DesignError(ValueError):
    """Base class for every failure raised by this project."""

    category = "design"
    exit_code = 2

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class ParameterError(DesignError):
    """Bad numeric parameters, including failed congruence conditions."""

    category = "parameter"


class DesignFormatError(DesignError):
    """A design, resolution or provenance file could not be parsed."""

    category = "format"

    def __init__(self, message, line=None, **details):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, line=line, **details)
        self.line = line


class VerificationError(DesignError):
    """Exhaustive counting contradicts a declared or required parameter."""

    category = "verification"
    exit_code = 1

    def __init__(self, message, witness=None, **details):
        super().__init__(message, witness=witness, **details)
        self.witness = witness


class ResolutionError(DesignError):
    """A class list is not a partition, or some class is not a 1-design."""

    category = "resolution"
    exit_code = 1

    def __init__(self, message, class_index=None, point=None, count=None, **details):
        super().__init__(message, class_index=class_index, point=point, count=count, **details)
        self.class_index = class_index
        self.point = point
        self.count = count


class SpecViolation(DesignError):
    """A construction spec breaks one or more construction hypotheses."""

    category = "spec"

    def __init__(self, violations):
        self.violations = list(violations)
        lines = [f"pair {v.pair}: [{v.rule}] {v.message}" if v.pair is not None
                 else f"[{v.rule}] {v.message}" for v in self.violations]
        super().__init__("construction spec rejected:\n  " + "\n  ".join(lines))


class ConsistencyError(DesignError):
    """An internal self-check failed; this always indicates a bug."""

    category = "consistency"
    exit_code = 3
