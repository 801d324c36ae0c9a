"""Exception hierarchy shared by all netfv modules."""


class NetFVError(Exception):
    """Base class for every error raised by netfv."""


class DomainViolation(NetFVError, ValueError):
    """A state value lies outside the (widened) domain of a flux."""


class NotMonotone(NetFVError, ValueError):
    """A flux is required to be strictly monotone on an interval but is not."""


class NotBracketed(NetFVError, ValueError):
    """A target value is outside the range of a monotone function on a bracket."""


class BadArity(NetFVError, ValueError):
    pass


class SpecMismatch(NetFVError, ValueError):
    """Two grid states live on different grids."""


class CflViolation(NetFVError, ValueError):
    pass


class OutsideValidity(NetFVError, ValueError):
    """An exact solution was queried outside its window of validity."""


class OutsideAdmissibleSet(NetFVError, ValueError):
    """Data ranges cannot be bracketed by discrete stationary solutions."""


class ValidationError(NetFVError, ValueError):
    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class ParseError(NetFVError, ValueError):
    pass
