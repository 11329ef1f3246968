class InfeasibleError(ValueError):
    """Fewer printable pixels than requested cells, or a similar impossible request."""


class EmptyImageError(InfeasibleError):
    """The raster contains no printable pixels."""


class ClearanceError(RuntimeError):
    """Robot start positions violate the pairwise separation bound."""
