"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A parameter violates a documented precondition."""


class UnsupportedParameterError(ValueError):
    """A parameter is syntactically fine but outside the supported range."""


class InvalidCellError(ValueError):
    """An (a, b) pair does not describe a valid enumeration cell."""


class SignUncertainError(ArithmeticError):
    """A directed operation needs a sign that the inputs cannot certify."""


class DirectionError(ValueError):
    """A directed operand has the wrong rounding direction for its slot."""
