"""Exception types shared across the toolkit."""


class FairscanError(Exception):
    """Base class for all toolkit errors."""


class InputError(FairscanError):
    """Invalid input data, file content, or manifest configuration."""


class ParameterError(FairscanError):
    """A measure or pipeline parameter is outside its admissible range."""


class DegenerateMeasureError(FairscanError):
    """A measure is undefined on the given data (e.g. zero within-group variance)."""


class UnbinnableValueError(FairscanError):
    """An attribute value falls outside every bin of its grouping rule."""
