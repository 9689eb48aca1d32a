"""Exception types shared across the package."""


class UsageError(ValueError):
    """Bad arguments: mismatched lengths, out-of-range parameters."""


class CapabilityError(ValueError):
    """The request exceeds a size limit of an exhaustive routine."""


class ConstructionError(ValueError):
    """A code, spec or circuit could not be built as requested."""
