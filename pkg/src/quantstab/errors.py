"""Exception types shared across the package."""


class QuantstabError(Exception):
    """Base class for all package errors."""


class UnstableARError(QuantstabError):
    """AR coefficients place a root on or outside the unit circle."""


class EmptyCoefficientsError(QuantstabError):
    """AR/MA source declared with an empty coefficient list."""


class NonpositiveNoiseError(QuantstabError):
    """Source noise standard deviation is not positive."""


class NonFiniteInputError(QuantstabError):
    """A quantizer or scheme step received NaN or infinity."""


class DomainError(QuantstabError):
    """Argument outside the domain an operation is defined on."""


class EmptyEnsembleError(QuantstabError):
    """A diagnostic was asked to reduce over zero trajectories."""


class BadEdgesError(QuantstabError):
    """Histogram bin edges are not strictly ascending."""


class UnboundedFunctionalError(QuantstabError):
    """Observed |f| exceeded the declared bound of a test functional."""


class ConfigError(QuantstabError):
    """Experiment config is missing or has an invalid field.

    ``field`` carries the dotted path of the offending entry.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
