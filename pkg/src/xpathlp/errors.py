"""Exception hierarchy shared across the package."""


class XPathLPError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(XPathLPError):
    """Malformed or unsupported XML input."""

    def __init__(self, reason, position=None):
        self.reason = reason
        self.position = position
        where = f" at {position}" if position is not None else ""
        super().__init__(f"{reason}{where}")


class ReservedAttribute(ParseError):
    """The document uses a name the numbering scheme reserves."""


class TermSyntaxError(XPathLPError):
    def __init__(self, reason, position):
        self.reason = reason
        self.position = position
        super().__init__(f"{reason} at offset {position}")


class OccursViolation(XPathLPError):
    """Binding a variable would create a cyclic term."""


class QueryParseError(XPathLPError):
    def __init__(self, reason, position):
        self.reason = reason
        self.position = position
        super().__init__(f"{reason} at offset {position}")


class UnsupportedFeature(QueryParseError):
    pass


class InconsistentAtoms(XPathLPError):
    """Two atoms disagree on the value stored at one node."""


class EmptySpecialization(XPathLPError):
    """The free-of-equalities query matches no schema path."""


class StoreCorrupt(XPathLPError):
    pass


class EngineInvariantViolation(XPathLPError):
    """Resolution went deeper than type monotonicity allows."""
