"""Exception types shared across the simulator."""


class LtaSimError(Exception):
    """Base class for all simulator errors."""


class DomainError(LtaSimError, ValueError):
    """An argument lies outside the domain of the operation."""


class DimensionMismatch(LtaSimError, ValueError):
    pass


class RankDeficient(LtaSimError, ValueError):
    pass


class InsufficientSamples(LtaSimError, ValueError):
    pass


class NonFiniteState(LtaSimError, FloatingPointError):
    """Integration produced NaN or inf; usually a blown-up simulation."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class DegenerateSpectrum(LtaSimError, ValueError):
    pass


class NoSignal(LtaSimError):
    """No photodiode reading cleared the detection threshold."""


class DegenerateVector(LtaSimError):
    """Bearing vector too short to define a direction."""


class DegenerateGeometry(LtaSimError):
    """Position history is collinear or coincident."""


class NoSurplus(LtaSimError, ValueError):
    """Harvested power does not exceed the idle draw."""


class ValidationError(LtaSimError, ValueError):
    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class ParseError(LtaSimError, ValueError):
    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field
