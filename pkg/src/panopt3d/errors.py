"""Exception types shared across the package."""


class Panopt3dError(Exception):
    """Base class for all panopt3d-specific errors."""


class CodecError(Panopt3dError, ValueError):
    """A binary file or buffer is malformed (bad size, bad dtype, truncated)."""


class TaxonomyError(Panopt3dError, ValueError):
    """A class taxonomy is inconsistent or a class id is unknown to it."""


class PlacementError(Panopt3dError, RuntimeError):
    """The synthetic scene generator could not satisfy placement constraints."""
