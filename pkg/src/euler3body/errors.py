"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class CollisionError(ArithmeticError):
    """Two bodies are closer than the collision guard allows."""


class UndersamplingError(ValueError):
    """The quadrature grid is too coarse for the loop's harmonic content."""


class RootNotBracketedError(RuntimeError):
    pass


class SchemaError(ValueError):
    """An orbit file does not match the expected schema.

    ``path`` names the offending field, e.g. ``harmonics[1].k``.
    """

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
