"""Named errors raised by loclab.

    Description
    ----------
    Every error raised by the library derives from LoclabError. The
    command line tool maps the ConfigError family (and region or
    parameter problems found while reading a config) to exit code 1 and
    InvariantViolation to exit code 2.

"""


class LoclabError(Exception):
    """Base class for all loclab errors."""


class StructureError(LoclabError):
    """An operator or state fails a declared structural class."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DomainError(LoclabError):
    """A spectral function is undefined on an eigenvalue."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class DimensionError(LoclabError):
    """Operands have incompatible dimensions."""


class InvalidParameterError(LoclabError):
    """A physical or numerical parameter is out of range."""


class InvalidRegionError(LoclabError):
    """A region is not valid for the space model it is used with."""


class InfeasibleFamilyError(LoclabError):
    """A requested region family cannot be built on the model."""


class NotSpacelikeError(LoclabError):
    """A translation expected to be spacelike is not."""


class CausalityError(LoclabError):
    """A measurement was requested for a causally connected configuration."""


class PreconditionError(LoclabError):
    """An experiment precondition does not hold."""


class SamplingPlanError(LoclabError):
    """A checker's sampling plan produced no admissible samples."""


class ArchiveError(LoclabError):
    """An archived operator could not be found or read."""


class InvariantViolation(LoclabError):
    """An asserted experiment invariant failed."""


class ConfigError(LoclabError):
    """An experiment configuration is invalid."""


class UnknownSystemError(ConfigError):
    """A system name is not in the catalog."""


class InfeasibleSizeError(ConfigError):
    """A lattice size is outside the supported range."""


class SchemaVersionError(ConfigError):
    """A report carries an unsupported schema tag."""


class UnsupportedFormatError(ConfigError):
    """An export format is not supported."""
