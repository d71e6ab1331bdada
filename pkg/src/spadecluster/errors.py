"""Exception types raised across the package."""


class ParameterError(ValueError):
    """An argument is out of range or inconsistent with another argument."""


class FormatError(ValueError):
    """An input file does not follow the expected layout."""


class TruncatedError(FormatError):
    """A binary payload is shorter than its header promises."""


class ParseError(FormatError):
    """A text cell could not be converted to a number."""


class ConsistencyError(ValueError):
    """Two inputs that must agree (e.g. images and labels) do not."""


class RankError(ValueError):
    """Fewer nonzero eigenvalues exist than were requested."""

    def __init__(self, message, n_components=None):
        super().__init__(message)
        self.n_components = n_components


class NumericalError(ArithmeticError):
    """A numerical contract was violated (e.g. negative eigenvalue)."""


class ContractError(ValueError):
    """A structural precondition on a graph failed."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class ConfigError(ValueError):
    """Experiment configuration failed validation.

    ``errors`` lists one message per offending field.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
