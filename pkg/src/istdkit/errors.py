"""Exception taxonomy shared across the package.

Exit-code mapping for the CLI: InputError -> 1, everything under
ConfigurationError or WeightsError -> 2.
"""


class ConfigurationError(ValueError):
    """Invalid shapes, sizes, parameters, or config-file contents."""


class InputError(ValueError):
    """Malformed user-supplied data: datasets, masks, prediction dirs."""


class WeightsError(Exception):
    """Base class for weight-store and weight-file problems."""


class MissingWeightError(WeightsError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"missing weight tensor: {name}")


class UnknownWeightError(WeightsError):
    def __init__(self, names):
        self.names = sorted(names)
        super().__init__(f"unknown weight tensors: {', '.join(self.names)}")


class DuplicateNameError(WeightsError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"duplicate weight tensor name: {name}")


class BadMagicError(WeightsError):
    pass


class BadVersionError(WeightsError):
    pass


class TruncatedFileError(WeightsError):
    pass
