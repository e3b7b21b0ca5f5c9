"""Exception hierarchy shared across the toolkit."""


class FirePowerError(Exception):
    """Base class for all toolkit errors."""


class DatasetError(FirePowerError):
    """Base class for dataset loading/validation problems."""


class ParseError(DatasetError):
    """The file could not be parsed as a dataset document."""


class SchemaError(DatasetError):
    """A required field is missing or has the wrong shape."""


class AliasError(DatasetError):
    """A hardware-parameter name is unknown to the registry."""


class ValidationError(DatasetError):
    """The parsed dataset violates an invariant (duplicates, bad labels, ...)."""


class ModelError(FirePowerError):
    """Invalid input to a model training or prediction routine."""


class GateError(FirePowerError):
    """Generalization-quality gate failure (Low verdict with gating enabled)."""
