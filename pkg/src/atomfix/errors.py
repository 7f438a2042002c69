"""Exception hierarchy shared across the package."""


class AtomfixError(Exception):
    pass


class ParseError(AtomfixError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class UnboundedLoop(ParseError):
    def __init__(self, location):
        super().__init__(location.line, "loop without @bound(k) annotation")
        self.location = location


class RegionNotLexical(AtomfixError):
    pass


class BudgetExceeded(AtomfixError):
    """Exploration hit the step cap; the program is only correct up to the bound."""

    def __init__(self, steps, partial=None):
        super().__init__(f"exploration budget exceeded after {steps} steps")
        self.steps = steps
        self.partial = partial


class ExecutionError(AtomfixError):
    pass


class EmptySetMember(AtomfixError):
    pass


class UniverseTooLarge(AtomfixError):
    pass


class SequentialBug(AtomfixError):
    """A bug trace that no atomic block can remove."""

    def __init__(self, trace, message="program has a sequential bug"):
        where = f" (assert at {trace.failed})" if trace is not None and trace.failed else ""
        super().__init__(message + where)
        self.trace = trace


class EnumerationTooLarge(AtomfixError):
    def __init__(self, certificate):
        super().__init__("minimality enumeration exceeds the verifier-call limit")
        self.certificate = certificate
